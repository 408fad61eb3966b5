"""Dense statevector kernels.

Basis index ``i`` encodes qubit ``q`` in bit ``q`` (qubit 0 is the least
significant bit). Every kernel accepts either a single vector of length
``2**n`` or a stack of vectors with the amplitude axis last, so derivative
states can be propagated through an ansatz in one call per factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .pauli import DimensionError, PauliSum, PauliWord

MAX_QUBITS = 14


@lru_cache(maxsize=4096)
def _kernel(n_qubits: int, x: int, z: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    src = idx ^ x
    parity = np.bitwise_count(src & z) & 1
    phase = (1j) ** (bin(x & z).count("1") % 4)
    factor = phase * (1.0 - 2.0 * parity)
    factor.setflags(write=False)
    src.setflags(write=False)
    return src, factor


def _check_dim(n_qubits: int, psi: np.ndarray) -> None:
    if psi.shape[-1] != 1 << n_qubits:
        raise DimensionError(f"state of length {psi.shape[-1]} vs {n_qubits}-qubit operator")


def n_qubits_of(psi: np.ndarray) -> int:
    n = psi.shape[-1].bit_length() - 1
    if 1 << n != psi.shape[-1]:
        raise DimensionError(f"length {psi.shape[-1]} is not a power of two")
    return n


def basis_state(n_qubits: int, occupied: list[int] | tuple[int, ...]) -> np.ndarray:
    """Computational basis state with the listed qubits set to 1."""
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[sum(1 << q for q in occupied)] = 1.0
    return psi


def apply_pauli(word: PauliWord, psi: np.ndarray) -> np.ndarray:
    _check_dim(word.n_qubits, psi)
    if word.is_identity():
        return psi.copy()
    src, factor = _kernel(word.n_qubits, word.x, word.z)
    return factor * psi[..., src]


def apply_exp_pauli(theta: float, word: PauliWord, psi: np.ndarray) -> np.ndarray:
    """Return ``exp(-i theta P) psi = cos(theta) psi - i sin(theta) P psi``."""
    _check_dim(word.n_qubits, psi)
    if theta == 0.0:
        return psi.copy()
    return np.cos(theta) * psi - 1j * np.sin(theta) * apply_pauli(word, psi)


def apply_sum(op: PauliSum, psi: np.ndarray) -> np.ndarray:
    _check_dim(op.n_qubits, psi)
    out = np.zeros_like(psi, dtype=complex)
    for c, w in op:
        if w.is_identity():
            out += c * psi
        else:
            src, factor = _kernel(w.n_qubits, w.x, w.z)
            out += (c * factor) * psi[..., src]
    return out


def inner(phi: np.ndarray, psi: np.ndarray) -> complex:
    """``<phi|psi>``."""
    if phi.shape != psi.shape:
        raise DimensionError(f"{phi.shape} vs {psi.shape}")
    return complex(np.vdot(phi, psi))


def expectation(op: PauliSum, psi: np.ndarray) -> complex:
    return inner(psi, apply_sum(op, psi))


def norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(psi))


@dataclass
class Ansatz:
    """Product of Pauli-word exponentials; ``generators[0]`` acts first.

    ``U(theta) = exp(-i theta_N A_N) ... exp(-i theta_1 A_1)``.
    """

    generators: list[PauliWord] = field(default_factory=list)
    angles: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.generators) != len(self.angles):
            raise ValueError("generators and angles must have equal length")
        self.angles = [float(a) for a in self.angles]

    def __len__(self) -> int:
        return len(self.generators)

    def copy(self) -> Ansatz:
        return Ansatz(list(self.generators), list(self.angles))

    def append(self, word: PauliWord, angle: float = 0.0) -> None:
        self.generators.append(word)
        self.angles.append(float(angle))

    def with_angles(self, angles) -> Ansatz:
        return Ansatz(list(self.generators), [float(a) for a in angles])


def apply_ansatz(ansatz: Ansatz, psi: np.ndarray) -> np.ndarray:
    out = psi.copy()
    for w, th in zip(ansatz.generators, ansatz.angles):
        out = apply_exp_pauli(th, w, out)
    return out


def ansatz_with_derivatives(ansatz: Ansatz, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Psi, D)`` where row ``mu`` of ``D`` is ``d Psi / d theta_mu``.

    The derivative inserts ``-i A_mu`` right after factor ``mu`` and carries the
    result through the remaining factors together with the main state.
    """
    n_par = len(ansatz)
    dim = psi.shape[-1]
    stack = np.zeros((n_par + 1, dim), dtype=complex)
    stack[0] = psi
    for mu, (w, th) in enumerate(zip(ansatz.generators, ansatz.angles)):
        live = stack[: mu + 1]
        if th != 0.0:
            stack[: mu + 1] = np.cos(th) * live - 1j * np.sin(th) * apply_pauli(w, live)
        stack[mu + 1] = -1j * apply_pauli(w, stack[0])
    return stack[0].copy(), stack[1:].copy()


def dump_binary(psi: np.ndarray) -> bytes:
    """Little-endian interleaved real/imag doubles (debugging aid)."""
    return np.ascontiguousarray(psi, dtype="<c16").tobytes()


def load_binary(blob: bytes) -> np.ndarray:
    return np.frombuffer(blob, dtype="<c16").copy()
