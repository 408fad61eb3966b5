"""End-to-end helpers chaining ground state, dynamics and Green's function assembly.

These are the building blocks the command line drives; they are also handy
from a notebook or a test. Only spin-up Green's functions are computed (the
model is SU(2) symmetric at half filling).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .avqds import BranchSet, DynConfig, Trajectory, build_dynamics_pool, evolve, prepare_branch_state
from .avqite import IteConfig, IteResult, run_avqite
from .exact import ExactSolver, exact_greens_time, half_filling_sector, reference_greens_omega, sector_indices
from .greens import GreensSeries, g_greater, g_lesser, gtilde, momentum, retarded
from .lattice import UP, HubbardSpec, QubitLayout, build_hamiltonian, jw_creation, momentum_coefficients
from .pauli import PauliSum

log = logging.getLogger(__name__)


@dataclass
class GroundStateData:
    spec: HubbardSpec
    layout: QubitLayout
    hamiltonian: PauliSum
    psi0: np.ndarray
    e0: float
    e0_source: str
    solver: ExactSolver
    ite: IteResult | None = None
    meta: dict = field(default_factory=dict)

    def creation(self, site: int, spin: str = UP) -> BranchSet:
        return BranchSet.from_operator(jw_creation(site, spin, self.layout), f"c{site}{spin}^dag")


def prepare_ground_state(
    spec: HubbardSpec,
    source: str = "avqite",
    ite_cfg: IteConfig | None = None,
    layout: QubitLayout | None = None,
    energy_from: str = "exact",
) -> GroundStateData:
    """Ground state from AVQITE (``source="avqite"``) or exact diagonalization.

    ``energy_from="exact"`` uses the exact ground energy in the ``exp(i E0 t)``
    phase; ``"variational"`` uses the energy of the state actually prepared.
    Both numbers end up in ``meta``.
    """
    layout = layout or QubitLayout(spec.n_sites)
    H = build_hamiltonian(spec, layout)
    solver = ExactSolver(H)
    gs = solver.ground_state(sector_indices(layout, *half_filling_sector(layout)))
    ite = None
    if source == "avqite":
        ite = run_avqite(spec, ite_cfg, layout, reference=gs.state)
        ite.exact_energy = gs.energy
        psi0, e_var = ite.state, ite.energy
    elif source == "exact":
        psi0, e_var = gs.state, gs.energy
    else:
        raise ValueError("source must be 'avqite' or 'exact'")
    if energy_from not in ("exact", "variational"):
        raise ValueError("energy_from must be 'exact' or 'variational'")
    e0 = gs.energy if energy_from == "exact" else e_var
    meta = {"e0_exact": gs.energy, "e0_variational": e_var, "e0_source": energy_from,
            "ground_state_source": source}
    return GroundStateData(spec, layout, H, psi0, e0, energy_from, solver, ite, meta)


def pair_trajectory(
    gsd: GroundStateData,
    p: int,
    q: int,
    cfg: DynConfig | None = None,
    record_delta: bool = False,
    spin: str = UP,
) -> Trajectory:
    """Propagate ``c_q^dag psi0`` with a pool built from ``H``, ``c_q^dag`` and ``c_p^dag``."""
    bp, bq = gsd.creation(p, spin), gsd.creation(q, spin)
    psi, norm = prepare_branch_state(gsd.psi0, bq)
    pool = build_dynamics_pool(gsd.hamiltonian, bp, bq)
    meta = {"pair": [p, q], "spin": spin, "n_sites": gsd.spec.n_sites, "U": gsd.spec.U}
    return evolve(psi, gsd.hamiltonian, pool, cfg, gsd.solver if record_delta else None, norm, meta)


def pair_greens(
    gsd: GroundStateData,
    p: int,
    q: int,
    traj: Trajectory,
    lesser_mode: str = "symmetry",
    hole_traj: Trajectory | None = None,
) -> dict[str, GreensSeries]:
    """Greater, lesser and retarded series for one orbital pair from its trajectory."""
    bp, bq = gsd.creation(p), gsd.creation(q)
    gt = gtilde(traj, gsd.psi0, bp, bq)
    gt.index = (p, q)
    gg = g_greater(gt, gsd.e0)
    if lesser_mode == "symmetry":
        gl = g_lesser(gg, gsd.spec, "symmetry")
    else:
        if hole_traj is None:
            raise ValueError("direct lesser mode needs the hole trajectory")
        hole = gtilde(hole_traj, gsd.psi0, bq.adjoint(), bp.adjoint())
        hole.index = (p, q)
        gl = g_lesser(gg, mode="direct", hole=hole, e0=gsd.e0)
    gr = retarded(gg, gl)
    for s in (gg, gl, gr):
        s.meta.update(gsd.meta, U=gsd.spec.U, N=gsd.spec.n_sites, l2_cut=traj.config.l2_cut,
                      dt=traj.config.dt, e0=gsd.e0, branch_norm=traj.branch_norm)
    return {"greater": gg, "lesser": gl, "retarded": gr}


def hole_trajectory(gsd: GroundStateData, p: int, q: int, cfg: DynConfig | None = None) -> Trajectory:
    """Propagate ``c_p psi0`` under ``-H`` so that ``U`` approximates ``exp(+iHt)``."""
    bp, bq = gsd.creation(p).adjoint(), gsd.creation(q).adjoint()
    psi, norm = prepare_branch_state(gsd.psi0, bp)
    neg = -1.0 * gsd.hamiltonian
    pool = build_dynamics_pool(neg, bq, bp)
    return evolve(psi, neg, pool, cfg, None, norm, {"pair": [p, q], "hole": True})


def required_pairs(n_sites: int, k_points) -> list[tuple[int, int]]:
    pairs: set[tuple[int, int]] = set()
    for k in k_points:
        pairs |= set(momentum_coefficients(k, n_sites))
    return sorted(pairs)


def variational_retarded(
    gsd: GroundStateData,
    cfg: DynConfig | None = None,
    pairs: list[tuple[int, int]] | None = None,
    lesser_mode: str = "symmetry",
    on_pair=None,
) -> tuple[dict[tuple[int, int], GreensSeries], dict[tuple[int, int], Trajectory]]:
    """Retarded functions (and trajectories) for every requested orbital pair.

    ``on_pair(p, q, traj, series)`` is called after each pair, e.g. to persist it.
    """
    n = gsd.spec.n_sites
    pairs = pairs or [(p, q) for p in range(n) for q in range(n)]
    out, trajs = {}, {}
    for p, q in pairs:
        traj = pair_trajectory(gsd, p, q, cfg)
        hole = hole_trajectory(gsd, p, q, cfg) if lesser_mode == "direct" else None
        series = pair_greens(gsd, p, q, traj, lesser_mode, hole)
        out[(p, q)], trajs[(p, q)] = series["retarded"], traj
        log.info("pair (%d,%d): Np=%d, %.1fs", p, q, len(traj.generators), traj.meta["wall_time"])
        if on_pair is not None:
            on_pair(p, q, traj, series)
    return out, trajs


def exact_retarded(gsd: GroundStateData, times, pairs=None, use_exact_state: bool = True):
    """Oracle retarded functions on ``times`` for each pair, from the exact ground state."""
    n = gsd.spec.n_sites
    pairs = pairs or [(p, q) for p in range(n) for q in range(n)]
    gs = gsd.solver.ground_state(sector_indices(gsd.layout, *half_filling_sector(gsd.layout)))
    psi = gs.state if use_exact_state else gsd.psi0
    out = {}
    for p, q in pairs:
        eg = exact_greens_time(gsd.solver, psi, gs.energy, jw_creation(p, UP, gsd.layout),
                               jw_creation(q, UP, gsd.layout), times)
        out[(p, q)] = GreensSeries(eg.times, eg.retarded, "retarded", (p, q), meta={"oracle": True})
    return out


def exact_k_resolvent(gsd: GroundStateData, k: float, omegas, zeta: float) -> np.ndarray:
    """Oracle ``G_k(omega + i zeta)`` combined from the pair resolvents."""
    gs = gsd.solver.ground_state(sector_indices(gsd.layout, *half_filling_sector(gsd.layout)))
    total = np.zeros(len(omegas), dtype=complex)
    for (p, q), c in momentum_coefficients(k, gsd.spec.n_sites).items():
        total += c * reference_greens_omega(gsd.solver, gs.state, gs.energy,
                                            jw_creation(p, UP, gsd.layout),
                                            jw_creation(q, UP, gsd.layout), omegas, zeta)
    return total


def k_series(pair_series: dict[tuple[int, int], GreensSeries], k: float, n_sites: int) -> GreensSeries:
    return momentum(pair_series, k, n_sites)


def ground_state_payload(gsd: GroundStateData, ite_cfg: IteConfig | None = None) -> dict:
    """Serializable record of a prepared ground state (the state vector is stored too)."""
    payload = {
        "model": {"n_sites": gsd.spec.n_sites, "t": gsd.spec.t, "U": gsd.spec.U, "mu": gsd.spec.mu,
                  "chemical_potential": gsd.spec.chemical_potential},
        "ordering": gsd.layout.ordering,
        "state_re": gsd.psi0.real,
        "state_im": gsd.psi0.imag,
        "e0": gsd.e0,
        **gsd.meta,
    }
    if gsd.ite is not None:
        payload["avqite"] = gsd.ite.to_dict(gsd.spec, gsd.layout, ite_cfg or IteConfig())
    return payload


def ground_state_from_payload(d: dict) -> GroundStateData:
    m = d["model"]
    spec = HubbardSpec(int(m["n_sites"]), float(m["t"]), float(m["U"]), m.get("mu"))
    layout = QubitLayout(spec.n_sites, d["ordering"])
    H = build_hamiltonian(spec, layout)
    psi0 = np.asarray(d["state_re"], dtype=float) + 1j * np.asarray(d["state_im"], dtype=float)
    meta = {k: d[k] for k in ("e0_exact", "e0_variational", "e0_source", "ground_state_source")
            if k in d}
    return GroundStateData(spec, layout, H, psi0, float(d["e0"]), meta.get("e0_source", "exact"),
                           ExactSolver(H), None, meta)
