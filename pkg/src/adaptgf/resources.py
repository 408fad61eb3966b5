"""Gate and circuit counts for the adaptive method and two baselines."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .pauli import PauliWord
from .state import Ansatz


@dataclass(frozen=True)
class CnotBound:
    unitary_cnots: int
    controlled_total: int


def word_cnots(word: PauliWord) -> int:
    """CNOT ladder cost of ``exp(-i theta P)``: ``2 (weight - 1)``, zero for weight <= 1."""
    return 2 * max(word.weight - 1, 0)


def cnot_upper_bound(ansatz: Ansatz | list[PauliWord]) -> CnotBound:
    """Upper bound on CNOTs for the ansatz unitary and for its ancilla-controlled version.

    Controlling each factor from an ancilla costs two extra CNOTs per parameter.
    """
    gens = ansatz.generators if isinstance(ansatz, Ansatz) else list(ansatz)
    unitary = sum(word_cnots(w) for w in gens)
    return CnotBound(unitary, unitary + 2 * len(gens))


def cnot_series(generator_log: list[tuple[int, PauliWord]], n_steps: int) -> list[int]:
    """Controlled CNOT bound at every time step given ``(step, word)`` insertion events.

    The result is a non-decreasing staircase since generators are only ever added.
    """
    series = []
    total = 0
    events = sorted(generator_log, key=lambda e: e[0])
    k = 0
    for step in range(n_steps):
        while k < len(events) and events[k][0] <= step:
            total += word_cnots(events[k][1]) + 2
            k += 1
        series.append(total)
    return series


def circuits_per_step(n_params: int, n_terms: int, adaptive: bool = False) -> int:
    """Circuits needed to measure ``M`` and ``V`` at one time step.

    ``4 (Np^2 + 2 Np + 2 Np NH + NH^2)``, plus ``8 (NH + 4) NH`` when the step
    enters the adaptive procedure.
    """
    if n_params < 0 or n_terms < 0:
        raise ValueError("counts must be nonnegative")
    base = 4 * (n_params**2 + 2 * n_params + 2 * n_params * n_terms + n_terms**2)
    if adaptive:
        base += 8 * (n_terms + 4) * n_terms
    return base


def trotter_unitaries(n_terms: int, delta: float, t: float) -> float:
    """Unitary count ``2 NH (4 sqrt(5) / sqrt(delta)) (NH t)^1.5`` for a Trotter scheme."""
    if delta <= 0:
        raise ValueError("target error delta must be positive")
    if t < 0:
        raise ValueError("time must be nonnegative")
    return 2.0 * n_terms * (4.0 * math.sqrt(5.0) / math.sqrt(delta)) * (n_terms * t) ** 1.5


def vha_layer_cnots(n_sites: int) -> float:
    return 8.0 * n_sites**1.5 + n_sites - 4.0 * math.sqrt(n_sites)


def vha_cnots(n_sites: int, layers: int) -> int:
    """Two-qubit gate count of a variational Hamiltonian ansatz with ``layers`` layers.

    The per-layer count ``8 N^1.5 + N - 4 sqrt(N)`` is not an integer for every
    ``N``; the total is rounded to the nearest gate.
    """
    if n_sites < 1 or layers < 0:
        raise ValueError("need n_sites >= 1 and layers >= 0")
    return int(round(layers * vha_layer_cnots(n_sites)))


@dataclass
class ResourceReport:
    n_sites: int
    n_terms: int
    n_params: int
    unitary_cnots: int
    controlled_cnots: int
    circuits_per_step: int
    circuits_per_adaptive_step: int
    trotter_unitaries: float
    trotter_delta: float
    total_time: float
    vha_layers: int
    vha_cnots: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def table(self) -> str:
        rows = [
            ("sites", self.n_sites),
            ("Hamiltonian terms", self.n_terms),
            ("ansatz parameters", self.n_params),
            ("CNOTs (unitary)", self.unitary_cnots),
            ("CNOTs (controlled)", self.controlled_cnots),
            ("circuits per step", self.circuits_per_step),
            ("circuits per adaptive step", self.circuits_per_adaptive_step),
            (f"Trotter unitaries (delta={self.trotter_delta:g}, t={self.total_time:g})",
             f"{self.trotter_unitaries:.3e}"),
            (f"VHA CNOTs ({self.vha_layers} layers)", self.vha_cnots),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def build_report(
    n_sites: int,
    n_terms: int,
    ansatz: Ansatz | list[PauliWord],
    trotter_delta: float = 4e-4,
    total_time: float = 10.0,
    vha_layers: int | None = None,
) -> ResourceReport:
    gens = ansatz.generators if isinstance(ansatz, Ansatz) else list(ansatz)
    bound = cnot_upper_bound(gens)
    layers = vha_layers if vha_layers is not None else 4 * n_sites
    return ResourceReport(
        n_sites=n_sites,
        n_terms=n_terms,
        n_params=len(gens),
        unitary_cnots=bound.unitary_cnots,
        controlled_cnots=bound.controlled_total,
        circuits_per_step=circuits_per_step(len(gens), n_terms),
        circuits_per_adaptive_step=circuits_per_step(len(gens), n_terms, adaptive=True),
        trotter_unitaries=trotter_unitaries(n_terms, trotter_delta, total_time),
        trotter_delta=trotter_delta,
        total_time=total_time,
        vha_layers=layers,
        vha_cnots=vha_cnots(n_sites, layers),
    )
