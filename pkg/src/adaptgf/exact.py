"""Brute-force reference: dense matrices, eigensystems and exact Green's functions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import DOWN, UP, QubitLayout
from .pauli import PauliSum
from .state import _kernel, apply_sum

MAX_DENSE_QUBITS = 12
DEGENERACY_TOL = 1e-8


class SizeGuardError(ValueError):
    pass


def dense_matrix(op: PauliSum, max_qubits: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """Sum of coefficient times Kronecker product of single-qubit Paulis."""
    n = op.n_qubits
    if n > max_qubits:
        raise SizeGuardError(f"{n} qubits exceeds dense limit of {max_qubits}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    rows = np.arange(dim)
    for c, w in op:
        src, factor = _kernel(n, w.x, w.z)
        mat[rows, src] += c * factor
    return mat


def sector_indices(layout: QubitLayout, n_up: int, n_down: int) -> np.ndarray:
    idx = np.arange(1 << layout.n_qubits, dtype=np.int64)
    nu = np.bitwise_count(idx & layout.spin_mask(UP))
    nd = np.bitwise_count(idx & layout.spin_mask(DOWN))
    return idx[(nu == n_up) & (nd == n_down)]


def half_filling_sector(layout: QubitLayout) -> tuple[int, int]:
    return (layout.n_sites + 1) // 2, layout.n_sites // 2


@dataclass
class GroundState:
    energy: float
    state: np.ndarray
    degenerate: bool
    gap: float


class ExactSolver:
    """Full eigendecomposition of one Hamiltonian, computed once and reused."""

    def __init__(self, hamiltonian: PauliSum):
        self.hamiltonian = hamiltonian
        self.n_qubits = hamiltonian.n_qubits

    @cached_property
    def matrix(self) -> np.ndarray:
        return dense_matrix(self.hamiltonian)

    @cached_property
    def _eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)

    @property
    def energies(self) -> np.ndarray:
        return self._eigh[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigh[1]

    def ground_state(self, sector: np.ndarray | None = None) -> GroundState:
        """Lowest eigenpair, optionally restricted to a set of basis indices."""
        if sector is None:
            evals, evecs = self._eigh
            vec = evecs[:, 0]
        else:
            sub = self.matrix[np.ix_(sector, sector)]
            evals, sub_vecs = np.linalg.eigh(sub)
            vec = np.zeros(1 << self.n_qubits, dtype=complex)
            vec[sector] = sub_vecs[:, 0]
        gap = float(evals[1] - evals[0]) if len(evals) > 1 else np.inf
        # fix the global phase so the largest amplitude is real positive
        k = int(np.argmax(np.abs(vec)))
        vec = vec * (abs(vec[k]) / vec[k])
        return GroundState(float(evals[0]), vec, gap < DEGENERACY_TOL, gap)

    def propagate(self, psi: np.ndarray, t: float) -> np.ndarray:
        """``exp(-i H t) psi``."""
        e, v = self._eigh
        return v @ (np.exp(-1j * e * t) * (v.conj().T @ psi))

    def propagate_many(self, psi: np.ndarray, times: np.ndarray) -> np.ndarray:
        e, v = self._eigh
        amps = v.conj().T @ psi
        return (np.exp(-1j * np.outer(times, e)) * amps) @ v.T

    def lehmann(self, bra: np.ndarray, ket: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(E_n, <bra|n><n|ket>)`` over the full spectrum."""
        e, v = self._eigh
        return e, (v.T @ bra.conj()) * (v.conj().T @ ket)


def _ladder_states(psi0, c_p_dag, c_q_dag):
    return (
        apply_sum(c_p_dag, psi0),
        apply_sum(c_q_dag, psi0),
        apply_sum(c_p_dag.dagger(), psi0),
        apply_sum(c_q_dag.dagger(), psi0),
    )


@dataclass
class ExactGreens:
    times: np.ndarray
    greater: np.ndarray
    lesser: np.ndarray

    @property
    def retarded(self) -> np.ndarray:
        return np.where(self.times >= 0, self.greater - self.lesser, 0.0)


def exact_greens_time(
    solver: ExactSolver,
    psi0: np.ndarray,
    e0: float,
    c_p_dag: PauliSum,
    c_q_dag: PauliSum,
    times,
) -> ExactGreens:
    """Greater and lesser functions sampled on ``times`` from the Lehmann sums.

    ``G>(t) = -i <c_p exp(-i(H-E0)t) c_q^dag>`` and
    ``G<(t) = i <c_q^dag exp(i(H-E0)t) c_p>``.
    """
    times = np.asarray(times, dtype=float)
    cp_dag_psi, cq_dag_psi, cp_psi, cq_psi = _ladder_states(psi0, c_p_dag, c_q_dag)
    e, w_particle = solver.lehmann(cp_dag_psi, cq_dag_psi)
    _, w_hole = solver.lehmann(cq_psi, cp_psi)
    ph = np.exp(-1j * np.outer(times, e - e0))
    greater = -1j * ph @ w_particle
    lesser = 1j * ph.conj() @ w_hole
    return ExactGreens(times, greater, lesser)


def reference_greens_omega(
    solver: ExactSolver,
    psi0: np.ndarray,
    e0: float,
    c_p_dag: PauliSum,
    c_q_dag: PauliSum,
    omegas,
    zeta: float,
) -> np.ndarray:
    """Retarded function at ``omega + i zeta``.

    This is the Fourier integral over ``t >= 0`` of ``exp(i omega t - zeta t)``
    times ``G^R(t)``, written as a resolvent:
    ``<c_p (w - (H - E0) + i z)^-1 c_q^dag> + <c_q^dag (w + (H - E0) + i z)^-1 c_p>``.
    """
    if zeta <= 0:
        raise ValueError("damping zeta must be positive")
    omegas = np.asarray(omegas, dtype=float)
    cp_dag_psi, cq_dag_psi, cp_psi, cq_psi = _ladder_states(psi0, c_p_dag, c_q_dag)
    e, w_particle = solver.lehmann(cp_dag_psi, cq_dag_psi)
    _, w_hole = solver.lehmann(cq_psi, cp_psi)
    keep_p = np.abs(w_particle) > 1e-14
    keep_h = np.abs(w_hole) > 1e-14
    z = omegas[:, None] + 1j * zeta
    g = (w_particle[keep_p] / (z - (e[keep_p] - e0))).sum(axis=1)
    g += (w_hole[keep_h] / (z + (e[keep_h] - e0))).sum(axis=1)
    return g


def spectral_function(g_omega: np.ndarray) -> np.ndarray:
    return -np.imag(g_omega) / np.pi
