"""Green's functions assembled from variational trajectories.

``G>_pq(t) = -i exp(i E0 t) <psi0| c_p U(t) c_q^dag |psi0>`` and
``G<_pq(t) = i exp(-i E0 t) <psi0| c_q^dag U(-t) c_p |psi0>``, where ``U(t)``
is the variational stand-in for ``exp(-iHt)``. The retarded function is
``theta(t) (G> - G<)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .avqds import BranchSet, Trajectory
from .io import write_csv, write_sidecar
from .lattice import HubbardSpec, momentum_coefficients
from .state import apply_ansatz, apply_pauli

KINDS = ("gtilde", "greater", "lesser", "retarded")


class GridMismatchError(ValueError):
    pass


@dataclass
class GreensSeries:
    times: np.ndarray
    values: np.ndarray
    kind: str
    index: tuple | float
    spin: str = "up"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.shape != self.values.shape:
            raise GridMismatchError("times and values differ in length")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")

    def same_grid(self, other: GreensSeries) -> bool:
        return self.times.shape == other.times.shape and np.allclose(self.times, other.times)

    def write(self, path, extra: dict | None = None) -> None:
        write_csv(path, ["time", "re", "im"], [self.times, self.values.real, self.values.imag])
        index = list(self.index) if isinstance(self.index, tuple) else self.index
        write_sidecar(path, {"kind": self.kind, "index": index, "spin": self.spin,
                             **self.meta, **(extra or {})})


def _check_grid(a: GreensSeries, b: GreensSeries) -> None:
    if not a.same_grid(b):
        raise GridMismatchError("series are sampled on different time grids")


def gtilde(
    traj: Trajectory,
    psi0: np.ndarray,
    branch_p: BranchSet,
    branch_q: BranchSet,
    mode: str = "direct",
) -> GreensSeries:
    """``<psi0| c_p U(theta(t)) c_q^dag |psi0>`` replayed from a stored trajectory.

    ``branch_p`` and ``branch_q`` are the expansions of ``c_p^dag`` and
    ``c_q^dag``; ``c_p`` on the left is their adjoint. ``direct`` uses
    ``<c_p^dag psi0| U |c_q^dag psi0>`` with the stored branch norm; ``branch``
    sums ``conj(eta_a) eta_b <psi0| P_a U P_b |psi0>`` over all branch pairs,
    which is what a device measures.
    """
    if traj.branch_norm <= 0:
        raise ValueError("trajectory lacks the branch norm")
    n = len(traj.times)
    out = np.empty(n, dtype=complex)
    if mode == "direct":
        left = branch_p.apply(psi0)
        right = branch_q.apply(psi0)
        psi_q = right / traj.branch_norm
        for k in range(n):
            out[k] = traj.branch_norm * np.vdot(left, traj.state_at(k, psi_q))
    elif mode == "branch":
        lefts = [(eta, apply_pauli(w, psi0)) for eta, w in branch_p.entries]
        rights = [(eta, apply_pauli(w, psi0)) for eta, w in branch_q.entries]
        for k in range(n):
            ans = traj.ansatz_at(k)
            ph = np.exp(-1j * traj.phase_history[k])
            acc = 0j
            for eb, rb in rights:
                urb = apply_ansatz(ans, rb)
                for ea, la in lefts:
                    acc += np.conj(ea) * eb * np.vdot(la, urb)
            out[k] = ph * acc
    else:
        raise ValueError("mode must be 'direct' or 'branch'")
    return GreensSeries(traj.times, out, "gtilde", tuple(traj.meta.get("pair", ())),
                        meta={"branch_norm": traj.branch_norm})


def g_greater(gt: GreensSeries, e0: float) -> GreensSeries:
    vals = -1j * np.exp(1j * e0 * gt.times) * gt.values
    return GreensSeries(gt.times, vals, "greater", gt.index, gt.spin, dict(gt.meta, e0=e0))


def g_lesser_from_hole(gt_hole: GreensSeries, e0: float) -> GreensSeries:
    """``i exp(-i E0 t) <c_q psi0| V(t) |c_p psi0>`` with ``V(t)`` approximating ``exp(+iHt)``."""
    vals = 1j * np.exp(-1j * e0 * gt_hole.times) * gt_hole.values
    return GreensSeries(gt_hole.times, vals, "lesser", gt_hole.index, gt_hole.spin,
                        dict(gt_hole.meta, e0=e0))


def g_lesser(
    gg: GreensSeries,
    spec: HubbardSpec | None = None,
    mode: str = "symmetry",
    hole: GreensSeries | None = None,
    e0: float | None = None,
) -> GreensSeries:
    """Lesser function by particle-hole symmetry or from a hole-state evolution.

    On a bipartite chain at ``mu = U/2`` the particle-hole map
    ``c_j -> (-1)^j c_j^dag`` gives ``G<_pq(t) = (-1)^(p+q) conj(G>_pq(t))``;
    ``symmetry`` applies this and refuses any other chemical potential.
    ``direct`` converts a hole-propagated overlap (see :func:`g_lesser_from_hole`).
    """
    if mode == "symmetry":
        if spec is not None and not spec.particle_hole_symmetric:
            raise ValueError("particle-hole shortcut requires mu = U/2")
        p, q = gg.index if isinstance(gg.index, tuple) and len(gg.index) == 2 else (0, 0)
        sign = -1.0 if (p + q) % 2 else 1.0
        return GreensSeries(gg.times, sign * np.conj(gg.values), "lesser", gg.index, gg.spin,
                            dict(gg.meta, lesser_mode="symmetry"))
    if mode == "direct":
        if hole is None or e0 is None:
            raise ValueError("direct mode needs the hole overlap series and E0")
        _check_grid(gg, hole)
        out = g_lesser_from_hole(hole, e0)
        out.meta["lesser_mode"] = "direct"
        return out
    raise ValueError("mode must be 'symmetry' or 'direct'")


def retarded(gg: GreensSeries, gl: GreensSeries) -> GreensSeries:
    """``theta(t) (G> - G<)``; exactly zero at negative times."""
    _check_grid(gg, gl)
    vals = np.where(gg.times >= 0, gg.values - gl.values, 0.0)
    return GreensSeries(gg.times, vals, "retarded", gg.index, gg.spin, dict(gg.meta))


def momentum(series: dict[tuple[int, int], GreensSeries], k: float, n_sites: int) -> GreensSeries:
    """``G_k = (1/N) sum_pq exp(-i k (p - q)) G_pq``."""
    coef = momentum_coefficients(k, n_sites)
    missing = set(coef) - set(series)
    if missing:
        raise KeyError(f"missing orbital pairs {sorted(missing)}")
    first = next(iter(series.values()))
    acc = np.zeros_like(first.values)
    for pq, c in coef.items():
        _check_grid(first, series[pq])
        acc = acc + c * series[pq].values
    return GreensSeries(first.times, acc, first.kind, float(k), first.spin, {"k": k})


def spectral(g_omega) -> np.ndarray:
    """``A(w) = -Im G(w) / pi``."""
    return -np.imag(np.asarray(g_omega)) / np.pi
