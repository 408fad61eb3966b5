"""Ground states by adaptive variational imaginary-time evolution."""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io
from .exact import ExactSolver, half_filling_sector, sector_indices
from .lattice import DOWN, UP, HubbardSpec, QubitLayout, build_hamiltonian, number_operator, sz_operator
from .mclachlan import TIKHONOV, evaluate, grow
from .pauli import PauliSum, PauliWord
from .state import Ansatz, apply_ansatz, basis_state, expectation

log = logging.getLogger(__name__)


def _odd_y_words(qubits: tuple[int, ...], n_qubits: int) -> list[PauliWord]:
    """All words on exactly ``qubits`` using only X and Y with an odd number of Y."""
    out = []
    for pattern in itertools.product("XY", repeat=len(qubits)):
        if pattern.count("Y") % 2 == 1:
            out.append(PauliWord.from_sparse(dict(zip(qubits, pattern)), n_qubits))
    return out


def build_qubit_adapt_pool(
    layout: QubitLayout, conserving: bool = True, single_index: bool = False
) -> list[PauliWord]:
    """Individual Pauli strings of one- and two-body excitation generators, Z tails dropped.

    With ``conserving`` the index sets are limited to same-spin pairs and to
    quadruples made of two spin-up and two spin-down qubits; otherwise every
    pair and every quadruple is used. ``single_index`` adds the lone ``Y_p``
    words that a single-index reading of the one-body pattern would produce
    (they change the particle number and are left out by default).
    """
    n = layout.n_qubits
    words: list[PauliWord] = []
    if single_index:
        words += [PauliWord.from_sparse({q: "Y"}, n) for q in range(n)]
    if conserving:
        pairs = [p for s in (UP, DOWN) for p in itertools.combinations(sorted(layout.spin_qubits(s)), 2)]
        quads = [
            tuple(sorted(a + b))
            for a in itertools.combinations(sorted(layout.spin_qubits(UP)), 2)
            for b in itertools.combinations(sorted(layout.spin_qubits(DOWN)), 2)
        ]
    else:
        pairs = list(itertools.combinations(range(n), 2))
        quads = list(itertools.combinations(range(n), 4))
    for idx in sorted(pairs) + sorted(quads):
        words += _odd_y_words(idx, n)
    seen: set[PauliWord] = set()
    pool = []
    for w in words:
        if w not in seen:
            seen.add(w)
            pool.append(w)
    return pool


@dataclass
class IteConfig:
    distance_threshold: float = 1e-4
    dtau: float = 0.01
    max_tau: float = 30.0
    max_params: int | None = None
    target_infidelity: float = 1e-4
    tikhonov_lambda: float = TIKHONOV
    record_every: int = 10

    def __post_init__(self):
        if self.distance_threshold <= 0:
            raise ValueError("distance_threshold must be positive")
        if self.dtau <= 0:
            raise ValueError("dtau must be positive")


def ite_step(
    ansatz: Ansatz,
    psi_ref: np.ndarray,
    hamiltonian: PauliSum,
    cfg: IteConfig,
    pool: list[PauliWord] | None = None,
):
    """One Euler step of the imaginary-time equations of motion, growing first if needed.

    Returns the step state evaluated before the update (its ``l2`` is the
    distance that was integrated); the ansatz angles are advanced in place.
    """
    if pool:
        st = grow(ansatz, psi_ref, hamiltonian, pool, cfg.distance_threshold, imaginary=True,
                  lam=cfg.tikhonov_lambda, max_params=cfg.max_params)
    else:
        st = evaluate(ansatz, psi_ref, hamiltonian, imaginary=True, lam=cfg.tikhonov_lambda)
    if len(ansatz):
        ansatz.angles = [a + cfg.dtau * d for a, d in zip(ansatz.angles, st.thetadot)]
    return st


@dataclass
class IteResult:
    ansatz: Ansatz
    psi_ref: np.ndarray
    state: np.ndarray
    energy: float
    tau: float
    infidelity: float | None
    exact_energy: float | None
    converged: bool
    warning: str | None = None
    history: dict[str, list] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self, spec: HubbardSpec, layout: QubitLayout, cfg: IteConfig) -> dict:
        return {
            "model": asdict(spec) | {"chemical_potential": spec.chemical_potential},
            "ordering": layout.ordering,
            "initial_occupation": _occupied(self.psi_ref),
            "generators": [w.sparse_label() for w in self.ansatz.generators],
            "angles": list(self.ansatz.angles),
            "energy": self.energy,
            "exact_energy": self.exact_energy,
            "infidelity": self.infidelity,
            "tau": self.tau,
            "converged": self.converged,
            "warning": self.warning,
            "config": asdict(cfg),
            "history": self.history,
            "wall_time": self.wall_time,
        }


def _occupied(psi: np.ndarray) -> list[int]:
    idx = int(np.argmax(np.abs(psi)))
    return [q for q in range(idx.bit_length()) if (idx >> q) & 1]


def run_avqite(
    spec: HubbardSpec,
    cfg: IteConfig | None = None,
    layout: QubitLayout | None = None,
    reference: np.ndarray | None = None,
    use_exact: bool = True,
) -> IteResult:
    """Imaginary-time flow from the spin-segregated product state.

    When an exact ground state is available (``use_exact``) the flow stops as
    soon as the infidelity drops below ``cfg.target_infidelity``; otherwise it
    runs to ``cfg.max_tau``. Reaching ``max_tau`` first sets ``converged=False``
    and a warning, and the final state is returned.
    """
    cfg = cfg or IteConfig()
    layout = layout or QubitLayout(spec.n_sites)
    H = build_hamiltonian(spec, layout)
    n = layout.n_qubits
    psi_ref = basis_state(n, layout.segregated_occupation())
    exact_energy = None
    if reference is None and use_exact:
        gs = ExactSolver(H).ground_state(sector_indices(layout, *half_filling_sector(layout)))
        reference, exact_energy = gs.state, gs.energy
    pool = build_qubit_adapt_pool(layout)
    n_op, sz_op = number_operator(layout), sz_operator(layout)
    ansatz = Ansatz()
    hist: dict[str, list] = {k: [] for k in ("tau", "energy", "infidelity", "n_params", "l2",
                                             "number", "sz")}
    t0 = time.perf_counter()
    n_steps = int(round(cfg.max_tau / cfg.dtau))
    converged = False
    step = 0
    psi = psi_ref.copy()
    infid = None
    for step in range(n_steps + 1):
        tau = step * cfg.dtau
        psi = apply_ansatz(ansatz, psi_ref)
        infid = None if reference is None else 1.0 - abs(np.vdot(reference, psi)) ** 2
        if infid is not None and infid < cfg.target_infidelity:
            converged = True
        if step % cfg.record_every == 0 or converged or step == n_steps:
            hist["tau"].append(tau)
            hist["energy"].append(float(expectation(H, psi).real))
            hist["infidelity"].append(infid)
            hist["n_params"].append(len(ansatz))
            hist["number"].append(float(expectation(n_op, psi).real))
            hist["sz"].append(float(expectation(sz_op, psi).real))
        if converged or step == n_steps:
            break
        st = ite_step(ansatz, psi_ref, H, cfg, pool)
        if step % cfg.record_every == 0:
            hist["l2"].append(st.l2)
    energy = float(expectation(H, psi).real)
    warning = None
    if not converged and reference is not None:
        warning = (f"max_tau={cfg.max_tau} reached with infidelity {infid:.3e} above "
                   f"{cfg.target_infidelity:g}")
        log.warning(warning)
    return IteResult(ansatz, psi_ref, psi, energy, step * cfg.dtau, infid, exact_energy,
                     converged or reference is None, warning, hist, time.perf_counter() - t0)


def save_ground_state(path, result: IteResult, spec: HubbardSpec, layout: QubitLayout,
                      cfg: IteConfig) -> None:
    io.write_json(path, result.to_dict(spec, layout, cfg))


def load_ground_state(path) -> tuple[HubbardSpec, QubitLayout, Ansatz, np.ndarray, dict]:
    """Rebuild ``(spec, layout, ansatz, state, payload)`` from a ground-state artifact."""
    d = io.read_json(path)
    m = d["model"]
    spec = HubbardSpec(int(m["n_sites"]), float(m["t"]), float(m["U"]), m.get("mu"))
    layout = QubitLayout(spec.n_sites, d["ordering"])
    n = layout.n_qubits
    gens = [PauliWord.from_sparse(_parse_label(lbl), n) for lbl in d["generators"]]
    ansatz = Ansatz(gens, d["angles"])
    psi_ref = basis_state(n, d["initial_occupation"])
    return spec, layout, ansatz, apply_ansatz(ansatz, psi_ref), d


def _parse_label(label: str) -> list[tuple[int, str]]:
    if label == "I":
        return []
    return [(int(tok[1:]), tok[0]) for tok in label.split()]
