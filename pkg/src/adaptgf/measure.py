"""Shot-based Green's function points: circuits, sampling, recombination, mitigation.

Each point ``G~(t_k)`` is a weighted sum of overlaps ``<psi0| P_a U P_b |psi0>``
over the branch words of ``c_p`` (left) and ``c_q^dag`` (right). Every branch
pair needs a real-part and an imaginary-part ancilla circuit; their measured
``p0 - p1`` values are recombined with the weights ``conj(eta_a) eta_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .avqds import BranchSet, Trajectory
from .mitigation import DEFAULT_EPS, DEFAULT_K2_GRID, k2_sweep, number_postselect, smooth_series
from .pauli import PauliWord
from .shots import Histogram, NoiseModel, noisy_distribution, overlap_probabilities, sample, task_seed


@dataclass(frozen=True)
class Circuit:
    left: PauliWord
    right: PauliWord
    phase_mode: str
    weight: complex
    pair_index: tuple[int, int]


def point_circuits(branch_p: BranchSet, branch_q: BranchSet) -> list[Circuit]:
    """Real and imaginary circuits for every branch pair, in a fixed order."""
    out = []
    for a, (eta_a, w_a) in enumerate(branch_p.entries):
        for b, (eta_b, w_b) in enumerate(branch_q.entries):
            weight = np.conj(eta_a) * eta_b
            for mode in ("real", "imag"):
                out.append(Circuit(w_a, w_b, mode, complex(weight), (a, b)))
    return out


def recombine(circuits: list[Circuit], values, phase: float = 0.0) -> complex:
    """``exp(-i phase) sum_ab w_ab (Re_ab + i Im_ab)``."""
    acc = 0j
    for c, v in zip(circuits, values):
        acc += c.weight * (v if c.phase_mode == "real" else 1j * v)
    return complex(np.exp(-1j * phase) * acc)


@dataclass
class PointData:
    """Everything measured for one time step."""

    step: int
    time: float
    circuits: list[Circuit]
    exact: list[float]
    histograms: list[Histogram]
    phase: float


def measure_point(
    traj: Trajectory,
    step: int,
    psi0: np.ndarray,
    branch_p: BranchSet,
    branch_q: BranchSet,
    shots: int,
    seed: int,
    noise: NoiseModel | None = None,
) -> PointData:
    """Sample every circuit of one time step.

    Readout noise is folded into the outcome distribution before sampling,
    which is statistically the same as flipping the bits of each recorded shot.
    """
    ansatz = traj.ansatz_at(step)
    circuits = point_circuits(branch_p, branch_q)
    exact, hists = [], []
    for j, c in enumerate(circuits):
        dist = overlap_probabilities(psi0, c.right, ansatz, c.left, c.phase_mode)
        exact.append(dist.p0 - dist.p1)
        probs = dist.joint
        if noise is not None and not noise.trivial:
            probs = noisy_distribution(probs, dist.n_bits, noise)
            probs = probs / probs.sum()
        meta = {"time_index": step, "branch_pair": list(c.pair_index), "phase_mode": c.phase_mode,
                "seed": seed, "shots": shots}
        if noise is not None:
            meta["noise"] = {"p01": noise.p01, "p10": noise.p10}
        hists.append(sample(probs, shots, task_seed(seed, step, j), dist.n_bits, meta))
    return PointData(step, float(traj.times[step]), circuits, exact, hists,
                     float(traj.phase_history[step]))


@dataclass
class MitigationLog:
    raw: list[float] = field(default_factory=list)
    postselected: list[float] = field(default_factory=list)
    k2: list[float] = field(default_factory=list)
    mitigated: list[float] = field(default_factory=list)


def mitigate_point(
    point: PointData,
    n_electrons: int,
    estimator: Callable[[Histogram], float] = Histogram.overlap_estimate,
    eps: float = DEFAULT_EPS,
    grid=DEFAULT_K2_GRID,
    peak_only: bool = False,
) -> tuple[list[float], MitigationLog]:
    """Post-selection followed by the ``k2`` sweep, circuit by circuit."""
    log = MitigationLog()
    values = []
    for h in point.histograms:
        log.raw.append(estimator(h))
        ps = number_postselect(h, n_electrons)
        if ps.empty:
            values.append(0.0)
            log.postselected.append(float("nan"))
            log.k2.append(float("nan"))
            log.mitigated.append(0.0)
            continue
        log.postselected.append(estimator(ps))
        sweep = k2_sweep(ps, estimator, eps, grid, peak_only)
        log.k2.append(sweep.k2)
        log.mitigated.append(sweep.estimate)
        values.append(sweep.estimate)
    return values, log


@dataclass
class ShotSeries:
    times: np.ndarray
    exact: np.ndarray
    raw: np.ndarray
    mitigated: np.ndarray | None = None
    smoothed: np.ndarray | None = None
    logs: list[MitigationLog] = field(default_factory=list)


def shot_gtilde(
    traj: Trajectory,
    psi0: np.ndarray,
    branch_p: BranchSet,
    branch_q: BranchSet,
    steps,
    shots: int,
    seed: int,
    noise: NoiseModel | None = None,
    mitigate: bool = True,
    n_electrons: int | None = None,
    window: int = 9,
    polyorder: int = 3,
    eps: float = DEFAULT_EPS,
    grid=DEFAULT_K2_GRID,
) -> ShotSeries:
    """``G~`` on the chosen steps: noiseless value, raw shot estimate and mitigated estimate."""
    steps = list(steps)
    times, exact, raw, mit, logs = [], [], [], [], []
    for k in steps:
        pt = measure_point(traj, k, psi0, branch_p, branch_q, shots, seed, noise)
        times.append(pt.time)
        exact.append(recombine(pt.circuits, pt.exact, pt.phase))
        raw.append(recombine(pt.circuits, [h.overlap_estimate() for h in pt.histograms], pt.phase))
        if mitigate:
            if n_electrons is None:
                raise ValueError("mitigation needs the electron number for post-selection")
            vals, lg = mitigate_point(pt, n_electrons, eps=eps, grid=grid)
            mit.append(recombine(pt.circuits, vals, pt.phase))
            logs.append(lg)
    out = ShotSeries(np.array(times), np.array(exact), np.array(raw), logs=logs)
    if mitigate:
        out.mitigated = np.array(mit)
        out.smoothed = smooth_series(out.mitigated, window, polyorder) if len(mit) >= 3 else out.mitigated
    return out


def resample_steps(dt: float, every: float, total_time: float) -> list[int]:
    """Trajectory steps lying on a coarser grid of spacing ``every``."""
    stride = int(round(every / dt))
    if stride < 1 or abs(stride * dt - every) > 1e-9:
        raise ValueError("resampling interval must be a multiple of dt")
    return list(range(0, int(round(total_time / dt)) + 1, stride))
