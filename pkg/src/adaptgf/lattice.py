"""Open-chain Hubbard model in the Jordan-Wigner qubit picture."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .pauli import PauliSum, PauliWord

UP, DOWN = "up", "down"
SPINS = (UP, DOWN)


@dataclass(frozen=True)
class HubbardSpec:
    n_sites: int
    t: float = 1.0
    U: float = 4.0
    mu: float | None = None  # None means half filling, mu = U / 2

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("n_sites must be at least 2")

    @property
    def chemical_potential(self) -> float:
        return self.U / 2 if self.mu is None else self.mu

    @property
    def particle_hole_symmetric(self) -> bool:
        return self.chemical_potential == self.U / 2

    @classmethod
    def from_config(cls, cfg: dict) -> HubbardSpec:
        mu = None if cfg.get("half_filling", "mu" not in cfg) else cfg["mu"]
        return cls(int(cfg["n_sites"]), float(cfg.get("t", 1.0)), float(cfg.get("U", 4.0)), mu)


@dataclass(frozen=True)
class QubitLayout:
    """Maps (site, spin) to a qubit.

    ``interleaved`` puts site ``j`` spin-up on qubit ``2j`` and spin-down on
    ``2j+1``; ``blocked`` puts all spin-up orbitals on qubits ``0..N-1`` followed
    by spin-down on ``N..2N-1``.
    """

    n_sites: int
    ordering: str = "interleaved"

    def __post_init__(self):
        if self.ordering not in ("interleaved", "blocked"):
            raise ValueError(f"unknown ordering {self.ordering!r}")

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_sites

    def qubit(self, site: int, spin: str) -> int:
        if not 0 <= site < self.n_sites:
            raise IndexError(f"site {site} out of range for {self.n_sites} sites")
        if spin not in SPINS:
            raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")
        s = 0 if spin == UP else 1
        if self.ordering == "interleaved":
            return 2 * site + s
        return site + s * self.n_sites

    def orbital(self, qubit: int) -> tuple[int, str]:
        for site in range(self.n_sites):
            for spin in SPINS:
                if self.qubit(site, spin) == qubit:
                    return site, spin
        raise IndexError(qubit)

    def spin_qubits(self, spin: str) -> list[int]:
        return [self.qubit(j, spin) for j in range(self.n_sites)]

    def spin_mask(self, spin: str) -> int:
        return sum(1 << q for q in self.spin_qubits(spin))

    def segregated_occupation(self) -> list[int]:
        """Spin-up electrons on the left half, spin-down on the right half.

        For four sites this is the product state up-up-down-down.
        """
        n_up = (self.n_sites + 1) // 2
        occ = [self.qubit(j, UP) for j in range(n_up)]
        occ += [self.qubit(j, DOWN) for j in range(n_up, self.n_sites)]
        return sorted(occ)


def _ladder(qubit: int, n_qubits: int, creation: bool) -> PauliSum:
    zs = {q: "Z" for q in range(qubit)}
    x = PauliWord.from_sparse({**zs, qubit: "X"}, n_qubits)
    y = PauliWord.from_sparse({**zs, qubit: "Y"}, n_qubits)
    sign = -1 if creation else 1
    return PauliSum([(0.5, x), (sign * 0.5j, y)], n_qubits)


def jw_creation(site: int, spin: str, layout: QubitLayout) -> PauliSum:
    """``c^dagger`` = Z-string times ``(X - iY)/2``; qubit state 1 means occupied."""
    return _ladder(layout.qubit(site, spin), layout.n_qubits, creation=True)


def jw_annihilation(site: int, spin: str, layout: QubitLayout) -> PauliSum:
    return _ladder(layout.qubit(site, spin), layout.n_qubits, creation=False)


def number_operator(layout: QubitLayout, spin: str | None = None) -> PauliSum:
    spins = SPINS if spin is None else (spin,)
    n = layout.n_qubits
    terms = []
    for s in spins:
        for j in range(layout.n_sites):
            q = layout.qubit(j, s)
            terms += [(0.5, PauliWord.identity(n)), (-0.5, PauliWord.from_sparse({q: "Z"}, n))]
    return PauliSum(terms, n)


def sz_operator(layout: QubitLayout) -> PauliSum:
    return (number_operator(layout, UP) - number_operator(layout, DOWN)).scale(0.5)


def build_hamiltonian(spec: HubbardSpec, layout: QubitLayout | None = None) -> PauliSum:
    """Qubit Hamiltonian ``-t sum (c^dag c + h.c.) + U sum n_up n_dn - mu sum n``."""
    layout = layout or QubitLayout(spec.n_sites)
    n = layout.n_qubits
    mu = spec.chemical_potential
    terms = []
    for spin in SPINS:
        for j in range(spec.n_sites - 1):
            cdag_i = jw_creation(j, spin, layout)
            cdag_j = jw_creation(j + 1, spin, layout)
            c_i = jw_annihilation(j, spin, layout)
            c_j = jw_annihilation(j + 1, spin, layout)
            hop = (cdag_i @ c_j) + (cdag_j @ c_i)
            terms += [(-spec.t * c, w) for c, w in hop]
    n_up = [number_operator_site(layout, j, UP) for j in range(spec.n_sites)]
    n_dn = [number_operator_site(layout, j, DOWN) for j in range(spec.n_sites)]
    for j in range(spec.n_sites):
        terms += [(spec.U * c, w) for c, w in (n_up[j] @ n_dn[j])]
        terms += [(-mu * c, w) for c, w in (n_up[j] + n_dn[j])]
    return PauliSum(terms, n)


def number_operator_site(layout: QubitLayout, site: int, spin: str) -> PauliSum:
    n = layout.n_qubits
    q = layout.qubit(site, spin)
    return PauliSum(
        [(0.5, PauliWord.identity(n)), (-0.5, PauliWord.from_sparse({q: "Z"}, n))], n
    )


def momentum_grid(n_sites: int) -> list[float]:
    return [2 * math.pi * m / n_sites for m in range(n_sites)]


def momentum_coefficients(k: float, n_sites: int) -> dict[tuple[int, int], complex]:
    """Weights ``exp(-i k (p - q)) / N`` combining ``G_pq`` into ``G_k``."""
    return {
        (p, q): cmath.exp(-1j * k * (p - q)) / n_sites
        for p in range(n_sites)
        for q in range(n_sites)
    }
