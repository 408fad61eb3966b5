"""Pauli words and weighted Pauli sums.

A word on ``n`` qubits is stored as two bitmasks ``x`` and ``z``; qubit ``q``
carries ``I`` (0, 0), ``X`` (1, 0), ``Z`` (0, 1) or ``Y`` (1, 1). As an operator
the word equals ``i**popcount(x & z) * X**x Z**z`` so that every ``Y`` is the
Hermitian Pauli matrix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

_SYMBOLS = "IXZY"  # index = x_bit + 2 * z_bit
_CODE = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_PHASES = (1, 1j, -1, -1j)

DEDUP_TOL = 1e-14


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliWord:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("bitmask exceeds n_qubits")

    @classmethod
    def from_symbols(cls, symbols: str) -> PauliWord:
        """Build from a per-qubit string, ``symbols[q]`` acting on qubit ``q``."""
        x = z = 0
        for q, s in enumerate(symbols.upper()):
            if s not in _CODE:
                raise ValueError(f"bad Pauli symbol {s!r}")
            xb, zb = _CODE[s]
            x |= xb << q
            z |= zb << q
        return cls(len(symbols), x, z)

    @classmethod
    def from_sparse(cls, ops: dict[int, str] | Iterable[tuple[int, str]], n_qubits: int) -> PauliWord:
        items = ops.items() if isinstance(ops, dict) else ops
        x = z = 0
        for q, s in items:
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            xb, zb = _CODE[s.upper()]
            x |= xb << q
            z |= zb << q
        return cls(n_qubits, x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliWord:
        return cls(n_qubits)

    @property
    def symbols(self) -> str:
        return "".join(
            _SYMBOLS[((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)] for q in range(self.n_qubits)
        )

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def n_y(self) -> int:
        return _popcount(self.x & self.z)

    def is_identity(self) -> bool:
        return not (self.x or self.z)

    def is_diagonal(self) -> bool:
        return self.x == 0

    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n_qubits) if (m >> q) & 1]

    def sparse_label(self) -> str:
        """Token form such as ``X0 Z1 Y3``; ``I`` for the identity."""
        syms = self.symbols
        toks = [f"{syms[q]}{q}" for q in self.support()]
        return " ".join(toks) if toks else "I"

    def __str__(self) -> str:
        return self.sparse_label()

    def __mul__(self, other: PauliWord) -> tuple[complex, PauliWord]:
        return multiply(self, other)


def _check(a: PauliWord, b: PauliWord) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"{a.n_qubits}-qubit word vs {b.n_qubits}-qubit word")


def multiply(a: PauliWord, b: PauliWord) -> tuple[complex, PauliWord]:
    """Return ``(phase, word)`` with ``phase * word == a @ b``."""
    _check(a, b)
    x, z = a.x ^ b.x, a.z ^ b.z
    k = _popcount(a.x & a.z) + _popcount(b.x & b.z) + 2 * _popcount(a.z & b.x) - _popcount(x & z)
    return _PHASES[k % 4], PauliWord(a.n_qubits, x, z)


def commutes(a: PauliWord, b: PauliWord) -> bool:
    _check(a, b)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


class PauliSum:
    """Immutable complex-weighted sum of Pauli words.

    Construction always simplifies: like words are merged, terms whose
    magnitude falls below ``DEDUP_TOL`` times the largest coefficient are
    dropped, and terms are ordered lexicographically by symbol string.
    """

    __slots__ = ("_terms", "n_qubits")

    def __init__(self, terms: Iterable[tuple[complex, PauliWord]], n_qubits: int | None = None):
        terms = list(terms)
        if n_qubits is None:
            if not terms:
                raise ValueError("n_qubits required for an empty sum")
            n_qubits = terms[0][1].n_qubits
        acc: dict[PauliWord, complex] = {}
        for c, w in terms:
            if w.n_qubits != n_qubits:
                raise DimensionError("all words in a sum must share n_qubits")
            acc[w] = acc.get(w, 0j) + complex(c)
        scale = max((abs(c) for c in acc.values()), default=0.0)
        cut = DEDUP_TOL * scale
        kept = [(c, w) for w, c in acc.items() if abs(c) > cut]
        kept.sort(key=lambda cw: cw[1].symbols)
        self._terms: tuple[tuple[complex, PauliWord], ...] = tuple(kept)
        self.n_qubits = n_qubits

    @classmethod
    def from_word(cls, word: PauliWord, coeff: complex = 1.0) -> PauliSum:
        return cls([(coeff, word)], word.n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls([(coeff, PauliWord.identity(n_qubits))], n_qubits)

    @classmethod
    def zero(cls, n_qubits: int) -> PauliSum:
        return cls([], n_qubits)

    @property
    def terms(self) -> tuple[tuple[complex, PauliWord], ...]:
        return self._terms

    @property
    def words(self) -> list[PauliWord]:
        return [w for _, w in self._terms]

    @property
    def coeffs(self) -> list[complex]:
        return [c for c, _ in self._terms]

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[complex, PauliWord]]:
        return iter(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.n_qubits, self._terms))

    def isclose(self, other: PauliSum, atol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= atol for c, _ in diff)

    def __add__(self, other: PauliSum) -> PauliSum:
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit count mismatch")
        return PauliSum(self._terms + other._terms, self.n_qubits)

    def __neg__(self) -> PauliSum:
        return PauliSum([(-c, w) for c, w in self._terms], self.n_qubits)

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-other)

    def scale(self, factor: complex) -> PauliSum:
        return PauliSum([(factor * c, w) for c, w in self._terms], self.n_qubits)

    def __rmul__(self, factor: complex) -> PauliSum:
        return self.scale(factor)

    def __matmul__(self, other: PauliSum) -> PauliSum:
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit count mismatch")
        out = []
        for ca, wa in self._terms:
            for cb, wb in other._terms:
                ph, w = multiply(wa, wb)
                out.append((ca * cb * ph, w))
        return PauliSum(out, self.n_qubits)

    def dagger(self) -> PauliSum:
        return PauliSum([(c.conjugate(), w) for c, w in self._terms], self.n_qubits)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= atol for c, _ in self._terms)

    def commutator(self, other: PauliSum) -> PauliSum:
        return (self @ other) - (other @ self)

    def anticommutator(self, other: PauliSum) -> PauliSum:
        return (self @ other) + (other @ self)

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        return "\n".join(f"{_fmt_coeff(c)} * {w.sparse_label()}" for c, w in self._terms)

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> PauliSum:
        """Parse lines (or ``;``-separated entries) of the form ``c * X0 Z1``."""
        entries = [e.strip() for e in re.split(r"[;\n]", text) if e.strip()]
        parsed = []
        max_q = -1
        for e in entries:
            if e == "0":
                continue
            coeff_s, _, ops_s = e.partition("*")
            coeff = complex(coeff_s.strip().replace(" ", ""))
            ops = []
            for tok in ops_s.split():
                if tok.upper() == "I":
                    continue
                m = re.fullmatch(r"([IXYZixyz])(\d+)", tok)
                if not m:
                    raise ValueError(f"bad Pauli token {tok!r}")
                q = int(m.group(2))
                max_q = max(max_q, q)
                if m.group(1).upper() != "I":
                    ops.append((q, m.group(1)))
            parsed.append((coeff, ops))
        if n_qubits is None:
            n_qubits = max(max_q + 1, 1)
        return cls(
            [(c, PauliWord.from_sparse(ops, n_qubits)) for c, ops in parsed], n_qubits
        )

    def __repr__(self) -> str:
        return f"PauliSum({self.to_text()!r}, n_qubits={self.n_qubits})"


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0.0:
        return repr(c.real)
    return repr(c).strip("()")


def simplify(s: PauliSum) -> PauliSum:
    """Re-simplify a sum; construction already simplifies, so this is a copy."""
    return PauliSum(s.terms, s.n_qubits)
