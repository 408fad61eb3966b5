"""Adaptive variational real-time dynamics of an electron-added (or removed) state.

The state ``c_q^dag |psi_0>`` is written as a sum of branch states
``eta_b P_b |psi_0>`` (the Pauli expansion of the ladder operator), normalized,
and propagated as ``U(theta(t))`` applied to it. The angles follow McLachlan's
equations of motion, integrated with explicit Euler steps; whenever the
McLachlan distance exceeds ``l2_cut`` the ansatz is grown from a pool made of
the Hamiltonian words and the ladder-operator words.

Two real-time formulations are available (see :mod:`adaptgf.mclachlan`):
``phase_mode="ansatz"`` asks the ansatz to carry the full time dependence
including the global phase, so ``U(theta)`` alone reproduces ``exp(-iHt)``;
``phase_mode="gauge"`` projects the global phase out of the equations and
integrates it separately as ``gamma(t)``, so the propagated state is
``exp(-i gamma) U(theta) psi``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io
from .exact import ExactSolver
from .mclachlan import (
    PHASE_MODES,
    TIKHONOV,
    StepState,
    compute_M,
    compute_V,
    evaluate,
    grow,
    tangent,
)
from .pauli import PauliSum, PauliWord
from .state import Ansatz, ansatz_with_derivatives, apply_ansatz, apply_pauli, apply_sum

log = logging.getLogger(__name__)


class ZeroBranchError(ValueError):
    """The ladder operator annihilates the state (e.g. adding to a full orbital)."""


@dataclass(frozen=True)
class BranchSet:
    """``op = sum_b eta_b P_b`` for one ladder operator."""

    entries: tuple[tuple[complex, PauliWord], ...]
    source: str = ""

    @classmethod
    def from_operator(cls, op: PauliSum, source: str = "") -> BranchSet:
        return cls(tuple((complex(c), w) for c, w in op), source)

    @property
    def n_qubits(self) -> int:
        return self.entries[0][1].n_qubits

    @property
    def words(self) -> list[PauliWord]:
        return [w for _, w in self.entries]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi, dtype=complex)
        for eta, w in self.entries:
            out += eta * apply_pauli(w, psi)
        return out

    def adjoint(self) -> BranchSet:
        return BranchSet(tuple((c.conjugate(), w) for c, w in self.entries), self.source + "^dag")

    def operator(self) -> PauliSum:
        return PauliSum(list(self.entries), self.n_qubits)


def build_dynamics_pool(H: PauliSum, branch_p: BranchSet, branch_q: BranchSet) -> list[PauliWord]:
    """Hamiltonian words followed by ladder words, deduplicated, identity removed.

    The identity only generates a global phase, so it is never offered as a
    generator; the selectable pool therefore has ``N_H + 1`` words for ``p == q``
    (``N_H`` counting the identity term) and up to ``N_H + 3`` otherwise.
    """
    pool: list[PauliWord] = []
    seen: set[PauliWord] = set()
    for w in list(H.words) + branch_q.words + branch_p.words:
        if w.is_identity() or w in seen:
            continue
        seen.add(w)
        pool.append(w)
    return pool


def prepare_branch_state(psi0: np.ndarray, branch: BranchSet) -> tuple[np.ndarray, float]:
    """Return the normalized ``sum_b eta_b P_b psi0`` and its norm before normalization."""
    phi = branch.apply(psi0)
    c = float(np.linalg.norm(phi))
    if c < 1e-12:
        raise ZeroBranchError(f"ladder operator {branch.source or ''} annihilates the state")
    return phi / c, c


@dataclass
class DynConfig:
    l2_cut: float = 1e-3
    dt: float = 0.01
    total_time: float = 10.0
    tikhonov_lambda: float = TIKHONOV
    max_params: int | None = None
    phase_mode: str = "ansatz"
    split_identity: bool = True

    def __post_init__(self):
        if self.l2_cut <= 0:
            raise ValueError("l2_cut must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.total_time < 0:
            raise ValueError("total_time must be nonnegative")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")

    @property
    def gauge(self) -> bool:
        return self.phase_mode == "gauge"

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.dt))


@dataclass
class Trajectory:
    """Recorded variational path on the uniform grid ``k * dt``."""

    times: np.ndarray
    generators: list[PauliWord]
    angle_history: list[np.ndarray]
    generator_log: list[tuple[int, PauliWord]]
    l2_history: np.ndarray
    variance_history: np.ndarray
    phase_history: np.ndarray
    delta_history: np.ndarray | None
    branch_norm: float
    config: DynConfig
    meta: dict = field(default_factory=dict)

    def ansatz_at(self, k: int) -> Ansatz:
        ang = self.angle_history[k]
        return Ansatz(self.generators[: len(ang)], list(ang))

    def n_params_history(self) -> np.ndarray:
        return np.array([len(a) for a in self.angle_history])

    def state_at(self, k: int, psi_init: np.ndarray) -> np.ndarray:
        """``exp(-i gamma_k) U(theta_k) psi_init``."""
        return np.exp(-1j * self.phase_history[k]) * apply_ansatz(self.ansatz_at(k), psi_init)

    def to_dict(self) -> dict:
        return {
            "times": self.times,
            "generators": [w.sparse_label() for w in self.generators],
            "n_qubits": self.generators[0].n_qubits if self.generators else self.meta.get("n_qubits"),
            "angle_history": [list(map(float, a)) for a in self.angle_history],
            "generator_log": [[int(k), w.sparse_label()] for k, w in self.generator_log],
            "l2_history": self.l2_history,
            "variance_history": self.variance_history,
            "phase_history": self.phase_history,
            "delta_history": self.delta_history,
            "branch_norm": self.branch_norm,
            "config": asdict(self.config),
            "meta": self.meta,
        }

    def save(self, path) -> None:
        io.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> Trajectory:
        d = io.read_json(path)
        n = d["n_qubits"]

        def word(label: str) -> PauliWord:
            toks = [] if label == "I" else [(int(t[1:]), t[0]) for t in label.split()]
            return PauliWord.from_sparse(toks, n)

        delta = d.get("delta_history")
        return cls(
            times=np.asarray(d["times"], dtype=float),
            generators=[word(s) for s in d["generators"]],
            angle_history=[np.asarray(a, dtype=float) for a in d["angle_history"]],
            generator_log=[(int(k), word(s)) for k, s in d["generator_log"]],
            l2_history=np.asarray(d["l2_history"], dtype=float),
            variance_history=np.asarray(d["variance_history"], dtype=float),
            phase_history=np.asarray(d["phase_history"], dtype=float),
            delta_history=None if delta is None else np.asarray(delta, dtype=float),
            branch_norm=float(d["branch_norm"]),
            config=DynConfig(**d["config"]),
            meta=d.get("meta", {}),
        )


def adapt_step(
    ansatz: Ansatz,
    psi: np.ndarray,
    H: PauliSum,
    pool: list[PauliWord],
    cfg: DynConfig,
    state: StepState | None = None,
) -> StepState:
    """Grow the ansatz while the real-time distance exceeds ``cfg.l2_cut``."""
    return grow(ansatz, psi, H, pool, cfg.l2_cut, imaginary=False, gauge=cfg.gauge,
                lam=cfg.tikhonov_lambda, max_params=cfg.max_params, state=state)


def phase_rate(st: StepState) -> float:
    """``d gamma / dt = <H> - sum_mu Im<d_mu Psi|Psi> thetadot_mu`` (gauge mode)."""
    tg = st.tangent
    if tg.n_params == 0:
        return tg.energy
    return float(tg.energy - np.imag(tg.overlaps) @ st.thetadot)


def unitary_error(variational: np.ndarray, exact: np.ndarray) -> float:
    """``|| psi_var - psi_exact ||``."""
    return float(np.linalg.norm(variational - exact))


def evolve(
    psi: np.ndarray,
    H: PauliSum,
    pool: list[PauliWord],
    cfg: DynConfig | None = None,
    exact: ExactSolver | None = None,
    branch_norm: float = 1.0,
    meta: dict | None = None,
) -> Trajectory:
    """Integrate the adaptive equations of motion on ``[0, total_time]``.

    ``psi`` must be normalized. When ``exact`` is given, the distance ``Delta(t)``
    to ``exp(-iHt) psi`` is recorded at every step.

    With ``cfg.split_identity`` the identity part ``c0`` of ``H``, which
    commutes with everything, is integrated exactly into the recorded phase
    ``gamma`` and the variational flow only sees ``H - c0``. Without the split
    the ansatz phase mode needs the pool to reproduce ``c0 psi``; that works on
    the chain ends but not for interior sites, where growth stalls above the cut.
    """
    cfg = cfg or DynConfig()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    c0 = 0.0
    if cfg.split_identity:
        c0 = float(sum(c.real for c, w in H if w.is_identity()))
        H = PauliSum([(c, w) for c, w in H if not w.is_identity()], H.n_qubits)
    n_steps = cfg.n_steps
    times = cfg.dt * np.arange(n_steps + 1)
    ansatz = Ansatz()
    angles_hist: list[np.ndarray] = []
    gen_log: list[tuple[int, PauliWord]] = []
    l2_hist = np.empty(n_steps + 1)
    var_hist = np.empty(n_steps + 1)
    phase_hist = np.zeros(n_steps + 1)
    delta_hist = np.empty(n_steps + 1) if exact is not None else None
    if exact is not None:
        e_vals, e_vecs = exact._eigh
        amps = e_vecs.conj().T @ psi
    gamma = 0.0
    t0 = time.perf_counter()
    exhausted_steps = 0
    for k in range(n_steps + 1):
        st = evaluate(ansatz, psi, H, gauge=cfg.gauge, lam=cfg.tikhonov_lambda)
        if st.l2 > cfg.l2_cut:
            before = len(ansatz)
            st = adapt_step(ansatz, psi, H, pool, cfg, st)
            gen_log += [(k, w) for w in ansatz.generators[before:]]
            exhausted_steps += st.exhausted
        angles_hist.append(np.array(ansatz.angles))
        l2_hist[k] = st.l2
        var_hist[k] = st.tangent.variance
        phase_hist[k] = gamma
        if exact is not None:
            ref = e_vecs @ (np.exp(-1j * e_vals * times[k]) * amps)
            delta_hist[k] = unitary_error(np.exp(-1j * gamma) * st.tangent.psi, ref)
        if k == n_steps:
            break
        gamma += cfg.dt * (c0 + (phase_rate(st) if cfg.gauge else 0.0))
        if len(ansatz):
            ansatz.angles = list(np.asarray(ansatz.angles) + cfg.dt * st.thetadot)
    info = dict(meta or {})
    info.update(
        wall_time=time.perf_counter() - t0,
        n_params=len(ansatz),
        exhausted_steps=int(exhausted_steps),
        n_qubits=H.n_qubits,
    )
    return Trajectory(times, list(ansatz.generators), angles_hist, gen_log, l2_hist, var_hist,
                      phase_hist, delta_hist, branch_norm, cfg, info)


def branch_matrix_elements(
    ansatz: Ansatz,
    psi0: np.ndarray,
    branch: BranchSet,
    H: PauliSum,
    gauge: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """``M`` and ``V`` assembled from branch-resolved overlaps.

    Every quantity is a double sum over branch pairs ``(a, b)`` of
    ``conj(eta_a) eta_b`` times an overlap between the propagated branch states
    ``U P_a psi0`` and ``U P_b psi0`` (or their derivatives). This is the form a
    device would measure; it is used here only to cross-check the direct path.
    """
    props = []
    for eta, w in branch.entries:
        psi_b, d_b = ansatz_with_derivatives(ansatz, apply_pauli(w, psi0))
        props.append((eta, psi_b, d_b, apply_sum(H, psi_b)))
    n_par = len(ansatz)
    gram = np.zeros((n_par, n_par), dtype=complex)
    ov = np.zeros(n_par, dtype=complex)
    hv = np.zeros(n_par, dtype=complex)
    norm2 = 0j
    energy = 0j
    for ea, pa, da, _ in props:
        for eb, pb, db, hb in props:
            w = np.conj(ea) * eb
            gram += w * (da.conj() @ db.T)
            ov += w * (da.conj() @ pb)
            hv += w * (da.conj() @ hb)
            norm2 += w * np.vdot(pa, pb)
            energy += w * np.vdot(pa, hb)
    c2 = norm2.real
    gram, ov, hv, energy = gram / c2, ov / c2, hv / c2, energy.real / c2
    if gauge:
        M = (gram - np.outer(ov, ov.conj())).real
        V = (hv - ov * energy).imag
    else:
        M = gram.real
        V = hv.imag
    return 0.5 * (M + M.T), V


def direct_matrix_elements(ansatz: Ansatz, psi0: np.ndarray, branch: BranchSet, H: PauliSum,
                           gauge: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Same quantities as :func:`branch_matrix_elements` from the combined normalized state."""
    psi, _ = prepare_branch_state(psi0, branch)
    tg = tangent(ansatz, psi, H)
    return compute_M(tg, gauge), compute_V(tg, gauge)
