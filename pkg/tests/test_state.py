import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptgf.exact import dense_matrix
from adaptgf.pauli import DimensionError, PauliSum, PauliWord
from adaptgf.state import (
    Ansatz,
    ansatz_with_derivatives,
    apply_ansatz,
    apply_exp_pauli,
    apply_pauli,
    apply_sum,
    basis_state,
    dump_binary,
    expectation,
    load_binary,
)

from conftest import random_state

W = PauliWord.from_symbols


def test_exp_x_on_zero():
    out = apply_exp_pauli(np.pi / 4, W("X"), basis_state(1, []))
    assert np.allclose(out, [1 / np.sqrt(2), -1j / np.sqrt(2)])


def test_pauli_matches_dense(rng):
    psi = random_state(rng, 3)
    for sym in ("XYZ", "ZIX", "YYI", "III"):
        dense = dense_matrix(PauliSum([(1.0, W(sym))]))
        assert np.allclose(apply_pauli(W(sym), psi), dense @ psi)


def test_little_endian_basis():
    psi = basis_state(3, [0])
    assert psi[1] == 1
    assert np.allclose(apply_pauli(W("XII"), basis_state(3, [])), psi)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_pauli(W("XX"), np.ones(8, complex))


def test_empty_ansatz_is_identity(rng):
    psi = random_state(rng, 2)
    assert np.allclose(apply_ansatz(Ansatz(), psi), psi)


def test_generators_ordering(rng):
    psi = random_state(rng, 2)
    a = Ansatz([W("XI"), W("ZZ")], [0.3, 0.7])
    manual = apply_exp_pauli(0.7, W("ZZ"), apply_exp_pauli(0.3, W("XI"), psi))
    assert np.allclose(apply_ansatz(a, psi), manual)


def test_derivatives_match_finite_difference(rng):
    psi = random_state(rng, 3)
    a = Ansatz([W("XYI"), W("ZIZ"), W("IYX"), W("XXX")], list(rng.uniform(-1, 1, 4)))
    state, derivs = ansatz_with_derivatives(a, psi)
    assert np.allclose(state, apply_ansatz(a, psi))
    h = 1e-6
    for mu in range(len(a)):
        up = list(a.angles)
        dn = list(a.angles)
        up[mu] += h
        dn[mu] -= h
        fd = (apply_ansatz(a.with_angles(up), psi) - apply_ansatz(a.with_angles(dn), psi)) / (2 * h)
        assert np.allclose(derivs[mu], fd, atol=1e-8)


def test_binary_round_trip(rng):
    psi = random_state(rng, 3)
    assert np.array_equal(load_binary(dump_binary(psi)), psi)


def test_hermitian_expectation_is_real(rng):
    op = PauliSum([(0.3, W("XZ")), (-1.1, W("YY")), (0.5, W("ZI"))])
    v = expectation(op, random_state(rng, 2))
    assert abs(v.imag) < 1e-12
    assert np.allclose(apply_sum(op, np.eye(4)[1]), dense_matrix(op)[:, 1])


@given(st.lists(st.tuples(st.sampled_from(["XIZ", "YYI", "ZXY", "IIX", "XXX"]),
                          st.floats(-6, 6)), max_size=10),
       st.integers(0, 2**31 - 1))
@settings(max_examples=100, deadline=None)
def test_norm_conservation(gens, seed):
    psi = random_state(np.random.default_rng(seed), 3)
    a = Ansatz([W(g) for g, _ in gens], [t for _, t in gens])
    assert abs(np.linalg.norm(apply_ansatz(a, psi)) - 1.0) < 1e-12


def test_single_qubit_examples():
    zero, one = basis_state(1, []), basis_state(1, [0])
    assert np.allclose(apply_pauli(W("X"), zero), one)
    assert np.allclose(apply_pauli(W("Z"), one), -one)
    plus = (zero + one) / np.sqrt(2)
    assert np.allclose(apply_pauli(W("Y"), plus), (-1j * zero + 1j * one) / np.sqrt(2))
    assert np.allclose(apply_exp_pauli(np.pi / 2, W("X"), zero), -1j * one)
    assert np.allclose(apply_exp_pauli(np.pi, W("Y"), plus), -plus)
    assert np.allclose(apply_exp_pauli(0.0, W("Y"), plus), plus)
    assert expectation(PauliSum([(1.0, W("Z"))]), zero) == pytest.approx(1)


def test_order_matters_for_noncommuting_generators(rng):
    psi = random_state(rng, 2)
    a = Ansatz([W("XI"), W("ZI")], [0.4, 0.9])
    b = Ansatz([W("ZI"), W("XI")], [0.9, 0.4])
    assert not np.allclose(apply_ansatz(a, psi), apply_ansatz(b, psi))


def test_ground_state_expectation(hubbard2):
    _, _, H, _, gs = hubbard2
    assert expectation(H, gs.state).real == pytest.approx(gs.energy, abs=1e-12)
