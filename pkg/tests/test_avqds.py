import numpy as np
import pytest

from adaptgf.avqds import (
    BranchSet,
    DynConfig,
    Trajectory,
    ZeroBranchError,
    branch_matrix_elements,
    build_dynamics_pool,
    direct_matrix_elements,
    evolve,
    prepare_branch_state,
    unitary_error,
)
from adaptgf.exact import ExactSolver
from adaptgf.lattice import UP, HubbardSpec, QubitLayout, build_hamiltonian, jw_annihilation, jw_creation
from adaptgf.pauli import PauliSum, PauliWord
from adaptgf.resources import cnot_upper_bound
from adaptgf.state import Ansatz, apply_ansatz, basis_state
from adaptgf.workflow import pair_trajectory, prepare_ground_state

W = PauliWord.from_symbols


@pytest.fixture(scope="module")
def gsd2():
    return prepare_ground_state(HubbardSpec(2, 1.0, 4.0), source="exact")


@pytest.fixture(scope="module")
def traj2(gsd2):
    return pair_trajectory(gsd2, 0, 0, DynConfig(total_time=10.0), record_delta=True)


@pytest.fixture(scope="module")
def traj2_unsplit(gsd2):
    cfg = DynConfig(total_time=10.0, split_identity=False)
    return pair_trajectory(gsd2, 0, 0, cfg, record_delta=True)


def test_pool_sizes():
    for n, expected in ((2, 8), (4, 18)):
        layout = QubitLayout(n)
        H = build_hamiltonian(HubbardSpec(n, 1.0, 4.0), layout)
        b = BranchSet.from_operator(jw_creation(0, UP, layout))
        pool = build_dynamics_pool(H, b, b)
        assert len(pool) == expected == len(H) + 1
        assert not any(w.is_identity() for w in pool)
    b1 = BranchSet.from_operator(jw_creation(1, UP, layout))
    assert len(build_dynamics_pool(H, b, b1)) == len(H) + 3


def test_branch_state_norms(gsd2):
    _, c = prepare_branch_state(gsd2.psi0, gsd2.creation(1))
    assert c**2 == pytest.approx(0.5, abs=1e-12)
    layout = QubitLayout(2)
    vac = basis_state(4, [])
    _, c = prepare_branch_state(vac, BranchSet.from_operator(jw_creation(0, UP, layout)))
    assert c == pytest.approx(1.0)
    with pytest.raises(ZeroBranchError):
        prepare_branch_state(vac, BranchSet.from_operator(jw_annihilation(0, UP, layout)))


def test_config_validation():
    with pytest.raises(ValueError):
        DynConfig(l2_cut=0)
    with pytest.raises(ValueError):
        DynConfig(dt=0)
    with pytest.raises(ValueError):
        DynConfig(phase_mode="other")


def test_zero_angle_append_is_bitwise_identity(gsd2):
    a = Ansatz([W("XZXI")], [0.3])
    before = apply_ansatz(a, gsd2.psi0)
    a.append(W("YYII"))
    assert np.array_equal(apply_ansatz(a, gsd2.psi0), before)


def test_single_term_closed_form():
    H = PauliSum([(0.7, W("Z"))])
    psi = np.array([1, 1], dtype=complex) / np.sqrt(2)
    traj = evolve(psi, H, [W("Z")], DynConfig(dt=0.01, total_time=2.0), ExactSolver(H))
    assert traj.generators == [W("Z")]
    angles = np.array([a[0] if len(a) else 0.0 for a in traj.angle_history])
    assert np.allclose(angles, 0.7 * traj.times, atol=1e-5)
    assert traj.delta_history[0] == 0.0
    assert traj.delta_history.max() < 1e-5


def test_first_order_integration_error():
    H = PauliSum([(1.0, W("X")), (0.6, W("Z"))])
    psi = np.array([1, 0], dtype=complex)
    pool = [W("X"), W("Y"), W("Z")]
    errs = []
    for dt in (0.02, 0.01):
        traj = evolve(psi, H, pool, DynConfig(dt=dt, total_time=2.0, l2_cut=1e-8, phase_mode="gauge"),
                      ExactSolver(H))
        errs.append(traj.delta_history[-1])
    assert 1.5 < errs[0] / errs[1] < 2.5


def test_two_site_default_is_single_generator(traj2):
    assert len(traj2.generators) == 1
    assert traj2.delta_history.max() < 1e-4


def test_two_site_unsplit_saturates_at_four_parameters(traj2_unsplit):
    tr = traj2_unsplit
    assert len(tr.generators) == 4
    assert sorted(w.weight for w in tr.generators) == [2, 2, 3, 3]
    assert cnot_upper_bound(tr.ansatz_at(len(tr.times) - 1)).unitary_cnots == 12


def test_interior_site_needs_identity_split():
    gsd = prepare_ground_state(HubbardSpec(4, 1.0, 4.0), source="exact")
    split = pair_trajectory(gsd, 1, 1, DynConfig(total_time=0.0))
    assert split.l2_history[0] <= 1e-3
    unsplit = pair_trajectory(gsd, 1, 1, DynConfig(total_time=0.0, split_identity=False))
    assert unsplit.l2_history[0] > 0.1 and unsplit.meta["exhausted_steps"] == 1


def test_trajectory_invariants(traj2, gsd2):
    np_hist = traj2.n_params_history()
    assert np.all(np.diff(np_hist) >= 0)
    assert len(traj2.times) == len(traj2.angle_history) == len(traj2.l2_history)
    psi, _ = prepare_branch_state(gsd2.psi0, gsd2.creation(0))
    for k in range(0, len(traj2.times), 97):
        assert abs(np.linalg.norm(traj2.state_at(k, psi)) - 1.0) < 1e-12


def test_trajectory_round_trip(tmp_path, traj2):
    traj2.save(tmp_path / "t.json")
    back = Trajectory.load(tmp_path / "t.json")
    assert back.generators == traj2.generators
    assert np.allclose(back.angle_history[-1], traj2.angle_history[-1])
    assert np.allclose(back.delta_history, traj2.delta_history)
    assert back.config == traj2.config


@pytest.mark.parametrize("gauge", [True, False])
def test_branch_resolved_matrix_elements_match_direct(gsd2, gauge):
    a = Ansatz([W("XZXI"), W("ZZII"), W("IYZY")], [0.3, -0.2, 0.5])
    b = gsd2.creation(1)
    Mb, Vb = branch_matrix_elements(a, gsd2.psi0, b, gsd2.hamiltonian, gauge)
    Md, Vd = direct_matrix_elements(a, gsd2.psi0, b, gsd2.hamiltonian, gauge)
    assert np.allclose(Mb, Md, atol=1e-12) and np.allclose(Vb, Vd, atol=1e-12)


def test_unitary_error():
    v = np.array([1, 0], dtype=complex)
    assert unitary_error(v, v) == 0.0
    assert unitary_error(v, -v) == pytest.approx(2.0)
