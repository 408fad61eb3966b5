"""McLachlan variational principle: metric, force vectors, distance, and solver.

Two real-time formulations are supported.

``gauge`` (global phase projected out, the density-matrix form):

* ``M[mu, nu] = Re(<d_mu Psi|d_nu Psi> - <d_mu Psi|Psi><Psi|d_nu Psi>)``
* ``V[mu] = Im(<d_mu Psi|H|Psi> - <d_mu Psi|Psi> <H>)``
* ``L2 = 2 (thetadot M thetadot - 2 V thetadot + <H^2> - <H>^2)``

``ansatz`` (the ansatz itself must reproduce the phase ``exp(-i E t)``, which
is what a Green's function overlap needs):

* ``M[mu, nu] = Re <d_mu Psi|d_nu Psi>``
* ``V[mu] = Im <d_mu Psi|H|Psi>``
* ``L2 = 2 (thetadot M thetadot - 2 V thetadot + <H^2>)``

Imaginary time uses the gauge metric with ``V[mu] = -Re <d_mu Psi|H|Psi>``.

``M`` and ``V`` are kept without the overall factor of two so that, for a
single generator ``A``, ``M = V = var(A)`` when ``H = A`` in the gauge form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum, PauliWord
from .state import Ansatz, ansatz_with_derivatives, apply_pauli, apply_sum

log = logging.getLogger(__name__)

TIKHONOV = 1e-6
RESIDUAL_SWITCH = 1e-8
L2_NEGATIVE_TOL = 1e-10
PHASE_MODES = ("ansatz", "gauge")


class ConditioningError(RuntimeError):
    """Linear solve failed even after regularization (large condition number of M)."""


class NumericalConsistencyError(RuntimeError):
    pass


@dataclass
class Tangent:
    """Everything the equations of motion need at one point of the flow."""

    psi: np.ndarray
    derivs: np.ndarray  # (N_theta, dim)
    h_psi: np.ndarray
    energy: float
    variance: float  # <H^2> - <H>^2
    overlaps: np.ndarray  # <d_mu Psi|Psi>

    @property
    def n_params(self) -> int:
        return self.derivs.shape[0]

    @property
    def h2(self) -> float:
        return self.variance + self.energy**2

    def offset(self, gauge: bool) -> float:
        """Constant term of the distance: the variance, or ``<H^2>`` without the gauge."""
        return self.variance if gauge else self.h2


def tangent(ansatz: Ansatz, psi_init: np.ndarray, hamiltonian: PauliSum) -> Tangent:
    psi, derivs = ansatz_with_derivatives(ansatz, psi_init)
    h_psi = apply_sum(hamiltonian, psi)
    energy = float(np.vdot(psi, h_psi).real)
    variance = max(float(np.vdot(h_psi, h_psi).real) - energy**2, 0.0)
    overlaps = derivs.conj() @ psi
    return Tangent(psi, derivs, h_psi, energy, variance, overlaps)


def residual_distance(
    tg: Tangent, thetadot: np.ndarray, imaginary: bool = False, gauge: bool = True
) -> float:
    """Distance evaluated from the residual vector itself, non-negative by construction.

    Equals ``mclachlan_distance`` in exact arithmetic but avoids the cancellation
    in the quadratic form when ``thetadot`` is large.
    """
    move = thetadot @ tg.derivs if tg.n_params else np.zeros_like(tg.psi)
    if gauge or imaginary:
        move = move - np.vdot(tg.psi, move) * tg.psi
        flow = tg.h_psi - tg.energy * tg.psi
    else:
        flow = tg.h_psi
    target = -flow if imaginary else -1j * flow
    return 2.0 * float(np.vdot(move - target, move - target).real)


def compute_M(tg: Tangent, gauge: bool = True) -> np.ndarray:
    gram = tg.derivs.conj() @ tg.derivs.T
    if gauge:
        gram = gram - np.outer(tg.overlaps, tg.overlaps.conj())
    m = gram.real
    return 0.5 * (m + m.T)


def compute_V(tg: Tangent, gauge: bool = True) -> np.ndarray:
    hv = tg.derivs.conj() @ tg.h_psi
    if gauge:
        hv = hv - tg.overlaps * tg.energy
    return hv.imag


def compute_V_imaginary(tg: Tangent) -> np.ndarray:
    return -(tg.derivs.conj() @ tg.h_psi).real


def mclachlan_distance(M: np.ndarray, V: np.ndarray, thetadot: np.ndarray, variance: float) -> float:
    """``2 (thetadot M thetadot - 2 V thetadot + var)``.

    ``variance`` is ``<H^2> - <H>^2`` for the gauge form and ``<H^2>`` otherwise.
    """
    l2 = 2.0 * (thetadot @ M @ thetadot - 2.0 * V @ thetadot + variance)
    if l2 < -L2_NEGATIVE_TOL:
        raise NumericalConsistencyError(f"McLachlan distance {l2:.3e} is negative")
    return max(float(l2), 0.0)


@dataclass
class Solution:
    thetadot: np.ndarray
    residual: float
    method: str


def solve_eom(M: np.ndarray, V: np.ndarray, lam: float = TIKHONOV, fallback: bool = False) -> Solution:
    """Regularized solve of ``M thetadot = V``: ``thetadot = (M + lam I)^-1 V``.

    With ``fallback`` a truncated least-squares solution replaces the Tikhonov
    one whenever the Tikhonov residual exceeds ``RESIDUAL_SWITCH`` and the
    least-squares residual is smaller. It is off by default: near-singular
    metrics make that solution jump along almost-null directions, which
    destabilizes the time integration.
    """
    n = len(V)
    if n == 0:
        return Solution(np.zeros(0), 0.0, "empty")
    try:
        x = np.linalg.solve(M + lam * np.eye(n), V)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            "matrix M with large condition number: regularized solve failed"
        ) from exc
    if not np.all(np.isfinite(x)):
        raise ConditioningError("matrix M with large condition number: non-finite solution")
    res = float(np.linalg.norm(M @ x - V))
    if not fallback or res <= RESIDUAL_SWITCH:
        return Solution(x, res, "tikhonov")
    x_ls = np.linalg.lstsq(M, V, rcond=None)[0]
    res_ls = float(np.linalg.norm(M @ x_ls - V))
    if np.all(np.isfinite(x_ls)) and res_ls < res:
        return Solution(x_ls, res_ls, "lstsq")
    return Solution(x, res, "tikhonov")


@dataclass
class Candidates:
    """Bordered ``M``/``V`` for every pool operator appended at the end (angle 0)."""

    columns: np.ndarray  # (n_pool, N_theta) new off-diagonal column
    diag: np.ndarray  # (n_pool,)
    v_new: np.ndarray  # (n_pool,)


def candidate_extensions(
    tg: Tangent, pool: list[PauliWord], imaginary: bool = False, gauge: bool = True
) -> Candidates:
    """Derivative of a zero-angle factor appended last is ``-i A Psi``."""
    a_new = -1j * np.stack([apply_pauli(w, tg.psi) for w in pool])
    ov_new = a_new.conj() @ tg.psi
    # cols[k, mu] = <d_mu|a_k> - <d_mu|Psi><Psi|a_k>
    cols = (tg.derivs.conj() @ a_new.T).T
    diag = np.einsum("kd,kd->k", a_new.conj(), a_new).real
    if gauge or imaginary:
        cols = cols - np.outer(ov_new.conj(), tg.overlaps)
        diag = diag - np.abs(ov_new) ** 2
    hv = a_new.conj() @ tg.h_psi
    if imaginary:
        v_new = -hv.real
    elif gauge:
        v_new = (hv - ov_new * tg.energy).imag
    else:
        v_new = hv.imag
    return Candidates(cols.real, diag, v_new)


def candidate_distances(
    M: np.ndarray, V: np.ndarray, variance: float, cand: Candidates, lam: float = TIKHONOV
) -> np.ndarray:
    """McLachlan distance after appending each candidate, using the Tikhonov solve.

    ``variance`` is the constant term matching the formulation of ``M`` and ``V``.
    """
    n_pool, n = cand.columns.shape
    big = np.zeros((n_pool, n + 1, n + 1))
    big[:, :n, :n] = M
    big[:, :n, n] = cand.columns
    big[:, n, :n] = cand.columns
    big[:, n, n] = cand.diag
    vv = np.zeros((n_pool, n + 1))
    vv[:, :n] = V
    vv[:, n] = cand.v_new
    reg = big + lam * np.eye(n + 1)
    x = np.linalg.solve(reg, vv[..., None])[..., 0]
    l2 = 2.0 * (
        np.einsum("ki,kij,kj->k", x, big, x) - 2.0 * np.einsum("ki,ki->k", vv, x) + variance
    )
    return np.maximum(l2, 0.0)


@dataclass
class StepState:
    """Tangent data, equations of motion and distance for the current ansatz."""

    tangent: Tangent
    M: np.ndarray
    V: np.ndarray
    solution: Solution
    l2: float
    added: list[int]
    exhausted: bool = False

    @property
    def thetadot(self) -> np.ndarray:
        return self.solution.thetadot


def evaluate(
    ansatz: Ansatz,
    psi_init: np.ndarray,
    hamiltonian: PauliSum,
    imaginary: bool = False,
    gauge: bool = True,
    lam: float = TIKHONOV,
) -> StepState:
    tg = tangent(ansatz, psi_init, hamiltonian)
    M = compute_M(tg, gauge or imaginary)
    V = compute_V_imaginary(tg) if imaginary else compute_V(tg, gauge)
    sol = solve_eom(M, V, lam)
    l2 = residual_distance(tg, sol.thetadot, imaginary, gauge)
    return StepState(tg, M, V, sol, l2, [])


def grow(
    ansatz: Ansatz,
    psi_init: np.ndarray,
    hamiltonian: PauliSum,
    pool: list[PauliWord],
    cut: float,
    imaginary: bool = False,
    gauge: bool = True,
    lam: float = TIKHONOV,
    max_params: int | None = None,
    state: StepState | None = None,
) -> StepState:
    """Greedily append pool words (zero angle, acting last) while the distance exceeds ``cut``.

    Each round scores every pool word by the distance of the bordered system and
    keeps the lowest one (first index on ties). Growth stops once the distance is
    at or below ``cut``, when no word improves it by more than ``1e-12``, or at
    ``max_params``. ``ansatz`` is modified in place.
    """
    st = state or evaluate(ansatz, psi_init, hamiltonian, imaginary, gauge, lam)
    added: list[int] = []
    offset = st.tangent.variance if (gauge or imaginary) else st.tangent.h2
    while st.l2 > cut:
        if max_params is not None and len(ansatz) >= max_params:
            log.warning("parameter cap %d reached with distance %.3e", max_params, st.l2)
            st.exhausted = True
            break
        cand = candidate_extensions(st.tangent, pool, imaginary, gauge)
        scores = candidate_distances(st.M, st.V, offset, cand, lam)
        k = int(np.argmin(scores))
        if scores[k] >= st.l2 - 1e-12:
            log.warning("no pool operator lowers the distance %.3e", st.l2)
            st.exhausted = True
            break
        ansatz.append(pool[k])
        added.append(k)
        st = evaluate(ansatz, psi_init, hamiltonian, imaginary, gauge, lam)
    st.added = added
    return st
