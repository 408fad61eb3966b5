"""Emulated measurement layer: ancilla overlap test, shot sampling, readout noise.

A bitstring is the ancilla bit followed by the ``n`` system bits. The system
part is printed little-endian (its rightmost character is system qubit 0), and
the ancilla is the leading, most significant character. The decimal value of
a bitstring is therefore ``ancilla * 2**n + system_index``: the ancilla-0 and
ancilla-1 outcomes form two contiguous blocks, each ordered by system index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pauli import DimensionError, PauliWord
from .state import Ansatz, apply_ansatz, apply_pauli, n_qubits_of

PHASE_MODES = ("real", "imag")


def bitstring(index: int, width: int) -> str:
    return format(index, f"0{width}b")


def ancilla_bit(key: str) -> int:
    return int(key[0])


def system_bits(key: str) -> int:
    """System basis index encoded in a bitstring (ancilla stripped)."""
    return int(key[1:], 2) if len(key) > 1 else 0


@dataclass
class Histogram:
    """Bitstring counts from one measured circuit.

    ``shots`` is the current total, which drops when post-selection discards
    bitstrings; ``raw_shots`` keeps the number originally taken, for the record.
    ``counts`` may hold real-valued reformed frequencies after resolution
    enhancement.
    """

    counts: dict[str, float]
    n_bits: int
    raw_shots: int | None = None
    meta: dict = field(default_factory=dict)
    empty: bool = False

    def __post_init__(self):
        for k in self.counts:
            if len(k) != self.n_bits:
                raise ValueError(f"bitstring {k!r} does not have {self.n_bits} bits")
        if self.raw_shots is None:
            self.raw_shots = int(round(self.shots))

    @property
    def shots(self) -> float:
        return float(sum(self.counts.values()))

    def ancilla_counts(self) -> tuple[float, float]:
        n0 = sum(c for k, c in self.counts.items() if ancilla_bit(k) == 0)
        n1 = sum(c for k, c in self.counts.items() if ancilla_bit(k) == 1)
        return n0, n1

    def p0(self) -> float:
        """Ancilla-0 frequency relative to the retained total."""
        n0, n1 = self.ancilla_counts()
        if self.empty or n0 + n1 <= 0:
            raise ValueError("empty histogram has no estimate")
        return n0 / (n0 + n1)

    def overlap_estimate(self) -> float:
        """Estimate of ``p0 - p1``, i.e. ``2 p0 - 1``."""
        return 2.0 * self.p0() - 1.0

    def as_array(self) -> np.ndarray:
        """Counts indexed by the decimal value of the bitstring."""
        arr = np.zeros(1 << self.n_bits)
        for k, c in self.counts.items():
            arr[int(k, 2)] = c
        return arr

    @classmethod
    def from_array(cls, arr, n_bits: int, raw_shots: int | None = None, meta=None) -> Histogram:
        counts = {bitstring(i, n_bits): (int(c) if float(c).is_integer() else float(c))
                  for i, c in enumerate(arr) if c}
        return cls(counts, n_bits, raw_shots, dict(meta or {}))

    def to_json(self) -> str:
        return json.dumps(
            {"counts": dict(sorted(self.counts.items())), "n_bits": self.n_bits,
             "raw_shots": self.raw_shots, "empty": self.empty, "meta": self.meta},
            indent=2, sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> Histogram:
        d = json.loads(text)
        return cls(d["counts"], d["n_bits"], d["raw_shots"], d.get("meta", {}), d.get("empty", False))

    def save(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> Histogram:
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-qubit readout flips: ``p01`` is P(read 1 | 0), ``p10`` is P(read 0 | 1)."""

    p01: float = 0.0
    p10: float = 0.0

    def __post_init__(self):
        for p in (self.p01, self.p10):
            if not 0.0 <= p < 0.5:
                raise ValueError("flip probabilities must lie in [0, 0.5)")

    @property
    def trivial(self) -> bool:
        return self.p01 == 0.0 and self.p10 == 0.0


@dataclass
class OverlapDistribution:
    p0: float
    p1: float
    joint: np.ndarray  # indexed by ancilla * 2**n + system index
    n_bits: int


def overlap_probabilities(
    psi0: np.ndarray,
    p1: PauliWord | None,
    ansatz: Ansatz | None,
    p2: PauliWord | None,
    phase_mode: str = "real",
) -> OverlapDistribution:
    """Exact outcome distribution of the ancilla interference circuit.

    The ancilla is prepared in ``|+>``; controlled on it the system receives
    ``W = P2 U P1``. For ``imag`` an extra ``S^dagger`` on the ancilla precedes
    the closing Hadamard. Then ``p0 - p1 = Re <W>`` (``Im <W>`` for ``imag``),
    and the system register is measured together with the ancilla.
    """
    if phase_mode not in PHASE_MODES:
        raise ValueError(f"phase_mode must be one of {PHASE_MODES}")
    n = n_qubits_of(psi0)
    for w in (p1, p2):
        if w is not None and w.n_qubits != n:
            raise DimensionError(f"{w.n_qubits}-qubit word vs {n}-qubit state")
    w_psi = psi0.copy()
    if p1 is not None:
        w_psi = apply_pauli(p1, w_psi)
    if ansatz is not None:
        w_psi = apply_ansatz(ansatz, w_psi)
    if p2 is not None:
        w_psi = apply_pauli(p2, w_psi)
    phase = 1.0 if phase_mode == "real" else -1j
    amp0 = 0.5 * (psi0 + phase * w_psi)
    amp1 = 0.5 * (psi0 - phase * w_psi)
    joint = np.concatenate([np.abs(amp0) ** 2, np.abs(amp1) ** 2])
    p0 = float(joint[: 1 << n].sum())
    p1_ = float(joint[1 << n :].sum())
    return OverlapDistribution(p0, p1_, joint, n + 1)


def sample(dist: OverlapDistribution | np.ndarray, shots: int, seed=None, n_bits=None,
           meta=None) -> Histogram:
    """Multinomial draw of ``shots`` bitstrings."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = dist.joint if isinstance(dist, OverlapDistribution) else np.asarray(dist, float)
    n_bits = dist.n_bits if isinstance(dist, OverlapDistribution) else n_bits
    if n_bits is None:
        n_bits = int(len(probs)).bit_length() - 1
    if abs(probs.sum() - 1.0) > 1e-10:
        raise ValueError("distribution does not sum to one")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, np.clip(probs, 0.0, None) / probs.sum())
    return Histogram.from_array(counts, n_bits, shots, meta)


def _flip_matrix(model: NoiseModel) -> np.ndarray:
    # rows: true bit, columns: read bit
    return np.array([[1 - model.p01, model.p01], [model.p10, 1 - model.p10]])


def noisy_distribution(probs: np.ndarray, n_bits: int, model: NoiseModel) -> np.ndarray:
    """Push a distribution through independent per-bit readout flips."""
    t = _flip_matrix(model)
    out = np.asarray(probs, dtype=float).reshape((2,) * n_bits)
    # axis 0 of the reshaped array is the most significant bit; the flips are
    # identical on every bit so the order does not matter
    for ax in range(n_bits):
        out = np.moveaxis(np.tensordot(out, t, axes=([ax], [0])), -1, ax)
    return out.reshape(-1)


def apply_readout_noise(hist: Histogram, model: NoiseModel, seed=None) -> Histogram:
    """Flip every bit of every recorded shot independently with the model probabilities."""
    if model.trivial:
        return Histogram(dict(hist.counts), hist.n_bits, hist.raw_shots, dict(hist.meta))
    rng = np.random.default_rng(seed)
    arr = hist.as_array().astype(np.int64)
    idx = np.repeat(np.arange(len(arr)), arr)
    bits = (idx[:, None] >> np.arange(hist.n_bits)) & 1
    u = rng.random(bits.shape)
    flip_prob = np.where(bits == 0, model.p01, model.p10)
    bits = bits ^ (u < flip_prob)
    new_idx = (bits << np.arange(hist.n_bits)).sum(axis=1)
    counts = np.bincount(new_idx, minlength=len(arr))
    meta = dict(hist.meta, noise={"p01": model.p01, "p10": model.p10})
    return Histogram.from_array(counts, hist.n_bits, hist.raw_shots, meta)


def task_seed(master: int, *index: int) -> np.random.SeedSequence:
    """Independent generator stream for one (time step, branch pair, mode) task."""
    return np.random.SeedSequence([master, *index])
