import numpy as np
import pytest

from adaptgf.avqite import (
    IteConfig,
    build_qubit_adapt_pool,
    ite_step,
    load_ground_state,
    run_avqite,
    save_ground_state,
)
from adaptgf.lattice import HubbardSpec, QubitLayout
from adaptgf.pauli import PauliSum, PauliWord, commutes
from adaptgf.state import Ansatz, apply_ansatz, basis_state, expectation

W = PauliWord.from_symbols


def test_pool_words_have_odd_y_and_only_x_otherwise():
    for w in build_qubit_adapt_pool(QubitLayout(4)):
        s = w.symbols
        assert s.count("Y") % 2 == 1
        assert set(s) <= {"I", "X", "Y"}
        # odd Y count means it flips occupations, so it fails to commute with some Z
        assert any(not commutes(w, PauliWord.from_sparse({q: "Z"}, 8)) for q in range(8))


def test_pool_two_sites():
    pool = build_qubit_adapt_pool(QubitLayout(2))
    labels = {w.symbols for w in pool}
    assert {"XIYI", "YIXI", "IXIY", "IYIX"} <= labels
    assert len(pool) == len(labels) == 12
    singles = build_qubit_adapt_pool(QubitLayout(2), single_index=True)
    assert len(singles) == 16


def test_config_validation():
    with pytest.raises(ValueError):
        IteConfig(distance_threshold=0)
    with pytest.raises(ValueError):
        IteConfig(dtau=-1)


def test_single_qubit_energy_descends():
    H = PauliSum([(-1.0, W("Z"))])
    a = Ansatz([W("Y")], [0.1])
    psi = basis_state(1, [])
    cfg = IteConfig(dtau=0.05)
    energies = []
    for _ in range(40):
        energies.append(expectation(H, apply_ansatz(a, psi)).real)
        ite_step(a, psi, H, cfg)
    assert np.all(np.diff(energies) < 0)
    assert energies[-1] == pytest.approx(-1.0, abs=1e-3)
    assert abs(a.angles[0]) < 0.02


def test_eigenstate_leaves_angles_unchanged():
    H = PauliSum([(-1.0, W("Z"))])
    a = Ansatz([W("Y")], [0.0])
    ite_step(a, basis_state(1, []), H, IteConfig())
    assert a.angles == [0.0]


@pytest.mark.parametrize("U", [4.0, 8.0])
def test_two_sites_converge_with_few_operators(U):
    res = run_avqite(HubbardSpec(2, 1.0, U))
    assert res.converged and res.warning is None
    assert res.infidelity < 1e-4
    assert len(res.ansatz) <= 4
    h = res.history
    assert np.ptp(h["number"]) < 1e-8 and h["number"][0] == pytest.approx(2)
    assert np.ptp(h["sz"]) < 1e-8 and h["sz"][0] == pytest.approx(0)
    assert np.diff(h["energy"]).max() <= 1e-10
    assert np.diff(h["infidelity"]).max() <= 1e-8


def test_segregated_reference_state():
    assert QubitLayout(4).segregated_occupation() == [0, 2, 5, 7]
    assert QubitLayout(4, "blocked").segregated_occupation() == [0, 1, 6, 7]


def test_max_tau_returns_best_so_far_with_warning():
    res = run_avqite(HubbardSpec(2, 1.0, 4.0), IteConfig(max_tau=0.5))
    assert not res.converged
    assert "max_tau" in res.warning
    assert res.tau == pytest.approx(0.5)


def test_ground_state_round_trip(tmp_path):
    spec, layout, cfg = HubbardSpec(2, 1.0, 4.0), QubitLayout(2), IteConfig()
    res = run_avqite(spec, cfg, layout)
    save_ground_state(tmp_path / "gs.json", res, spec, layout, cfg)
    spec2, layout2, ans, state, data = load_ground_state(tmp_path / "gs.json")
    assert spec2 == spec and layout2 == layout
    assert np.allclose(state, res.state)
    assert np.allclose(apply_ansatz(ans, res.psi_ref), res.state)
    assert data["energy"] == pytest.approx(res.energy)
