import numpy as np
import pytest

from adaptgf.exact import (
    ExactSolver,
    SizeGuardError,
    dense_matrix,
    exact_greens_time,
    half_filling_sector,
    reference_greens_omega,
    sector_indices,
)
from adaptgf.lattice import UP, HubbardSpec, QubitLayout, build_hamiltonian, jw_creation, number_operator
from adaptgf.pauli import PauliSum, PauliWord
from adaptgf.spectral import damped_dft
from adaptgf.state import expectation


def test_two_site_ground_energy(hubbard2):
    _, _, _, _, gs = hubbard2
    # E0 of the two-site model at mu = U/2, U = 4, t = 1: U/2 - sqrt(U^2/4 + 4t^2) - 2 mu
    assert gs.energy == pytest.approx(2 - np.sqrt(8) - 4, abs=1e-12)
    assert not gs.degenerate


def test_free_two_site_spectrum():
    H = build_hamiltonian(HubbardSpec(2, 1.0, 0.0, 0.0))
    e = np.sort(ExactSolver(H).energies)
    # single-particle levels +-1 filled in every combination
    assert e[0] == pytest.approx(-2) and e[-1] == pytest.approx(2)


def test_ground_state_sector(hubbard2):
    _, layout, _, _, gs = hubbard2
    assert expectation(number_operator(layout), gs.state).real == pytest.approx(2)
    assert half_filling_sector(layout) == (1, 1)
    assert len(sector_indices(layout, 1, 1)) == 4


def test_size_guard():
    with pytest.raises(SizeGuardError):
        dense_matrix(PauliSum([(1.0, PauliWord.identity(20))]))


def test_propagation_conserves_norm(hubbard2):
    _, _, _, solver, gs = hubbard2
    psi = gs.state + 0.5 * np.roll(gs.state, 3)
    psi /= np.linalg.norm(psi)
    out = solver.propagate_many(psi, np.linspace(0, 10, 7))
    assert np.allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)


def test_time_greens_at_zero(hubbard2):
    _, layout, _, solver, gs = hubbard2
    c0 = jw_creation(0, UP, layout)
    eg = exact_greens_time(solver, gs.state, gs.energy, c0, c0, [0.0])
    # G>(0) - G<(0) = -i <{c, c^dag}> = -i
    assert eg.retarded[0] == pytest.approx(-1j, abs=1e-12)


def test_particle_hole_relation_on_oracle(hubbard2):
    _, layout, _, solver, gs = hubbard2
    times = np.linspace(0, 10, 101)
    for p in range(2):
        for q in range(2):
            eg = exact_greens_time(solver, gs.state, gs.energy, jw_creation(p, UP, layout),
                                   jw_creation(q, UP, layout), times)
            sign = (-1) ** (p + q)
            assert np.abs(eg.lesser - sign * np.conj(eg.greater)).max() < 1e-10
            if p == q:
                assert np.abs(eg.lesser - np.conj(eg.greater)).max() < 1e-10


def test_resolvent_matches_damped_transform(hubbard2):
    _, layout, _, solver, gs = hubbard2
    c0, c1 = jw_creation(0, UP, layout), jw_creation(1, UP, layout)
    dt, zeta = 0.002, 0.5
    times = dt * np.arange(int(60 / dt) + 1)
    omegas = np.linspace(-6, 6, 121)
    eg = exact_greens_time(solver, gs.state, gs.energy, c0, c1, times)
    ref = reference_greens_omega(solver, gs.state, gs.energy, c0, c1, omegas, zeta)
    assert np.abs(damped_dft(eg.retarded, zeta, omegas, dt) - ref).max() < 1e-6


def test_resolvent_rejects_nonpositive_damping(hubbard2):
    _, layout, _, solver, gs = hubbard2
    c0 = jw_creation(0, UP, layout)
    with pytest.raises(ValueError):
        reference_greens_omega(solver, gs.state, gs.energy, c0, c0, [0.0], 0.0)


def test_larger_chain_energy():
    layout = QubitLayout(4)
    solver = ExactSolver(build_hamiltonian(HubbardSpec(4, 1.0, 4.0), layout))
    gs = solver.ground_state(sector_indices(layout, 2, 2))
    assert gs.energy == pytest.approx(solver.ground_state().energy, abs=1e-9)
    assert gs.gap > 0


def test_dense_examples():
    assert np.allclose(dense_matrix(PauliSum([(1.0, PauliWord.from_symbols("Z"))])), np.diag([1, -1]))
    assert np.allclose(dense_matrix(PauliSum([(1.0, PauliWord.identity(2))])), np.eye(4))


def test_free_ground_state_and_residual():
    H = build_hamiltonian(HubbardSpec(2, 1.0, 0.0, 0.0))
    solver = ExactSolver(H)
    gs = solver.ground_state(sector_indices(QubitLayout(2), 1, 1))
    assert gs.energy == pytest.approx(-2.0)
    assert np.linalg.norm(solver.matrix @ gs.state - gs.energy * gs.state) <= 1e-10


def test_propagate_examples(hubbard2):
    _, _, _, solver, gs = hubbard2
    assert np.allclose(solver.propagate(gs.state, 0.0), gs.state)
    out = solver.propagate(gs.state, 1.7)
    assert np.allclose(out, np.exp(-1j * gs.energy * 1.7) * gs.state)
