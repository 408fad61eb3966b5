"""Time to frequency transforms for retarded Green's functions.

Both transforms approximate ``G(w) = int_0^inf exp(i w t - zeta t) G(t) dt``
which, for the retarded function, equals the resolvent evaluated at
``w + i zeta``. The Pade route fits the damped samples ``g_k`` as the
coefficients of a power series in ``z = exp(i w dt)`` and resums it as a
ratio of two polynomials, which extrapolates the series beyond the sampled
window.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .io import write_csv, write_sidecar

log = logging.getLogger(__name__)

POLE_TOL = 1e-12
CONDITION_LIMIT = 1e12


def default_omega_grid(lo: float = -12.0, hi: float = 12.0, step: float = 0.01) -> np.ndarray:
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


class PadeFitError(ValueError):
    pass


@dataclass
class PadeSpectrum:
    """Rational approximant ``sum a_k z^k / sum b_k z^k`` with ``b[0] == 1``."""

    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    dt: float
    zeta: float
    source_len: int
    c0: complex
    method: str = "solve"
    omega_grid: np.ndarray | None = None
    values: np.ndarray | None = None
    pole_flags: np.ndarray | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return len(self.b_coeffs) - 1

    def poles(self) -> np.ndarray:
        """Roots of the denominator in the ``z`` plane."""
        b = np.trim_zeros(self.b_coeffs, "b")
        if len(b) < 2:
            return np.zeros(0, dtype=complex)
        return np.roots(b[::-1])


def damp(series, times, zeta: float) -> np.ndarray:
    if zeta < 0:
        raise ValueError("zeta must be nonnegative")
    return np.asarray(series, dtype=complex) * np.exp(-zeta * np.asarray(times, dtype=float))


def _solve_denominator(c: np.ndarray, m: int) -> tuple[np.ndarray, str]:
    # rows k = M+1 .. 2M, columns j = 1 .. M: sum_j b_j c_{k-j} = -c_k
    col = c[m : 2 * m]  # c_{k-1} for k = M+1..2M
    row = c[m:0:-1]  # c_{M+1-j} for j = 1..M
    mat = scipy.linalg.toeplitz(col, row)
    rhs = -c[m + 1 : 2 * m + 1]
    if not np.any(mat):
        return np.zeros(m, dtype=complex), "zero"
    try:
        sol = np.linalg.solve(mat, rhs)
        if np.all(np.isfinite(sol)) and np.linalg.cond(mat) < CONDITION_LIMIT:
            return sol, "solve"
    except np.linalg.LinAlgError:
        pass
    sol, *_ = scipy.linalg.lstsq(mat, rhs, cond=1e-13)
    if not np.all(np.isfinite(sol)):
        raise PadeFitError("denominator system is singular beyond regularization")
    return sol, "lstsq"


def pade_fit(
    series,
    dt: float,
    order: int | None = None,
    zeta: float = 0.0,
    times=None,
) -> PadeSpectrum:
    """Fit Pade coefficients to uniformly sampled time data.

    Args:
        series: samples ``G(t_k)`` on ``t_k = k dt``; damping is applied here
            when ``zeta > 0`` (pass ``zeta=0`` for data that is already damped).
        dt: sampling step.
        order: denominator degree ``M``; defaults to the largest value with
            ``2M + 1 <= K``.
        zeta: damping rate.
        times: optional explicit sample times (must start at 0, uniform).
    """
    c = np.asarray(series, dtype=complex)
    k_len = len(c)
    if times is None:
        times = dt * np.arange(k_len)
    c = damp(c, times, zeta)
    m = (k_len - 1) // 2 if order is None else int(order)
    if m < 0 or k_len < 2 * m + 1:
        raise PadeFitError(f"need at least {2 * m + 1} samples for order {m}, got {k_len}")
    if m == 0:
        b = np.ones(1, dtype=complex)
        method = "trivial"
    else:
        tail, method = _solve_denominator(c, m)
        b = np.concatenate([[1.0 + 0j], tail])
    a = np.array([np.dot(b[: k + 1], c[k::-1]) for k in range(m + 1)])
    return PadeSpectrum(a, b, float(dt), float(zeta), k_len, complex(c[0]) if k_len else 0j, method)


def pade_eval(spec: PadeSpectrum, omegas=None) -> np.ndarray:
    """Evaluate ``dt * (A(z) / B(z) - c0 / 2)`` at ``z = exp(i w dt)``.

    The ``-c0/2`` term is the trapezoid weight of the ``t = 0`` sample. Grid
    points whose denominator falls below ``POLE_TOL`` are recorded in
    ``spec.pole_flags``.
    """
    omegas = default_omega_grid() if omegas is None else np.asarray(omegas, dtype=float)
    z = np.exp(1j * omegas * spec.dt)
    num = np.polynomial.polynomial.polyval(z, spec.a_coeffs)
    den = np.polynomial.polynomial.polyval(z, spec.b_coeffs)
    flags = np.abs(den) < POLE_TOL
    if flags.any():
        log.warning("%d frequency points sit on a Pade pole", int(flags.sum()))
    safe = np.where(flags, POLE_TOL, den)
    values = spec.dt * (num / safe - 0.5 * spec.c0)
    spec.omega_grid = omegas
    spec.values = values
    spec.pole_flags = flags
    return values


def damped_dft(series, zeta: float, omegas, dt: float) -> np.ndarray:
    """Trapezoid rule for ``int_0^T exp(i w t - zeta t) G(t) dt`` on ``t_k = k dt``."""
    if zeta <= 0:
        raise ValueError("damping zeta must be positive")
    g = np.asarray(series, dtype=complex)
    times = dt * np.arange(len(g))
    w = np.full(len(g), dt)
    w[0] = w[-1] = 0.5 * dt
    weighted = w * g * np.exp(-zeta * times)
    omegas = np.asarray(omegas, dtype=float)
    out = np.empty(len(omegas), dtype=complex)
    # chunk over frequencies to bound memory for long series
    chunk = max(1, 2_000_000 // max(len(g), 1))
    for s in range(0, len(omegas), chunk):
        ph = np.exp(1j * np.outer(omegas[s : s + chunk], times))
        out[s : s + chunk] = ph @ weighted
    return out


def spectral_from_greens(g_omega) -> np.ndarray:
    return -np.imag(np.asarray(g_omega)) / np.pi


def find_peaks(omegas, values, rel_height: float = 0.1) -> list[tuple[float, float]]:
    """Local maxima with height at least ``rel_height`` times the global maximum."""
    v = np.asarray(values, dtype=float)
    top = v.max() if len(v) else 0.0
    out = []
    for i in range(1, len(v) - 1):
        if v[i] >= v[i - 1] and v[i] > v[i + 1] and v[i] >= rel_height * top:
            out.append((float(omegas[i]), float(v[i])))
    return out


def write_spectrum_csv(path, omegas, values, meta: dict) -> None:
    values = np.asarray(values)
    write_csv(
        path,
        ["omega", "re", "im", "spectral"],
        [omegas, values.real, values.imag, spectral_from_greens(values)],
    )
    write_sidecar(path, meta)


def sidecar(spec: PadeSpectrum) -> dict:
    return {"zeta": spec.zeta, "M": spec.order, "K": spec.source_len, "dt": spec.dt,
            "method": spec.method}
