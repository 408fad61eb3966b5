"""Post-processing mitigation for measured histograms and recombined time series."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import savgol_coeffs

from .shots import Histogram, system_bits

log = logging.getLogger(__name__)

DEFAULT_K2_GRID = np.round(np.arange(0.0, 4.0 + 1e-9, 0.1), 10)
DEFAULT_EPS = 1e-4


def number_postselect(hist: Histogram, n_electrons: int) -> Histogram:
    """Keep only bitstrings whose system register holds ``n_electrons`` ones.

    The shot total becomes the retained count (``raw_shots`` still records the
    original number). If nothing survives the result has ``empty=True`` and
    estimators refuse it.
    """
    kept = {k: c for k, c in hist.counts.items() if bin(system_bits(k)).count("1") == n_electrons}
    meta = dict(hist.meta, postselected_n=n_electrons)
    out = Histogram(kept, hist.n_bits, hist.raw_shots, meta)
    out.empty = not kept or out.shots == 0
    if out.empty:
        log.warning("post-selection on %d electrons removed every shot", n_electrons)
    return out


def second_difference(y: np.ndarray) -> np.ndarray:
    """Central second difference with replicate-edge padding."""
    padded = np.concatenate([[y[0]], y, [y[-1]]])
    return padded[2:] - 2.0 * padded[1:-1] + padded[:-2]


def resolution_enhance(hist: Histogram, k2: float, peak_only: bool = False) -> Histogram:
    """Sharpen a histogram with ``r = y - k2 y''`` over the decimal bitstring axis.

    Negative ``r`` is clipped to zero and the result is rescaled to the original
    total. With ``peak_only`` only the local maxima of ``r`` take the reformed
    value and every other bin keeps its measured frequency.
    """
    if k2 < 0:
        raise ValueError("k2 must be nonnegative")
    y = hist.as_array()
    total = y.sum()
    if np.count_nonzero(y) < 3 or k2 == 0.0:
        if k2 != 0.0:
            log.warning("fewer than three populated bins: resolution enhancement skipped")
        return Histogram(dict(hist.counts), hist.n_bits, hist.raw_shots, dict(hist.meta), hist.empty)
    r = np.clip(y - k2 * second_difference(y), 0.0, None)
    if peak_only:
        padded = np.concatenate([[-np.inf], r, [-np.inf]])
        peaks = (r >= padded[:-2]) & (r >= padded[2:]) & (r > 0)
        r = np.where(peaks, r, y)
    s = r.sum()
    if s > 0:
        r = r * (total / s)
    out = Histogram.from_array(r, hist.n_bits, hist.raw_shots, dict(hist.meta, k2=float(k2)))
    out.counts = {k: float(v) for k, v in out.counts.items()}
    return out


@dataclass
class SweepResult:
    k2: float
    estimate: float
    visited: list[float]
    values: list[float]
    converged: bool


def k2_sweep(
    hist: Histogram,
    estimator: Callable[[Histogram], float],
    eps: float = DEFAULT_EPS,
    grid=DEFAULT_K2_GRID,
    peak_only: bool = False,
) -> SweepResult:
    """Average the estimator over an increasing ``k2`` grid until the running mean settles.

    The running mean after ``j`` grid points is compared to the one after ``j - 1``;
    the sweep stops at the first change smaller than ``eps``.
    """
    grid = [float(g) for g in grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("k2 grid must be non-empty and strictly ascending")
    values: list[float] = []
    running = prev = None
    for j, k2 in enumerate(grid, start=1):
        values.append(float(estimator(resolution_enhance(hist, k2, peak_only))))
        running = sum(values) / j
        if prev is not None and abs(running - prev) < eps:
            return SweepResult(k2, running, grid[:j], values, True)
        prev = running
    return SweepResult(grid[-1], running, grid, values, False)


def smooth_series(series, window: int = 9, polyorder: int = 3) -> np.ndarray:
    """Savitzky-Golay smoothing whose window shrinks symmetrically near the ends.

    Interior points use the full ``window``; the point ``i`` positions from an
    edge uses a window of ``2 i + 1`` samples and a polynomial order no larger
    than that window allows, so the first and last samples are left as measured.
    Works on complex input (real and imaginary parts are filtered alike).
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if polyorder < 0 or polyorder >= window:
        raise ValueError("polyorder must satisfy 0 <= polyorder < window")
    x = np.asarray(series)
    n = len(x)
    half = window // 2
    out = np.empty_like(x, dtype=np.result_type(x.dtype, float))
    cache: dict[int, np.ndarray] = {}
    for i in range(n):
        h = min(half, i, n - 1 - i)
        if h not in cache:
            w = 2 * h + 1
            cache[h] = savgol_coeffs(w, min(polyorder, w - 1), use="dot") if w > 1 else np.ones(1)
        out[i] = cache[h] @ x[i - h : i + h + 1]
    return out
