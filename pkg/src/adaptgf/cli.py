"""Command-line pipeline: ground state, dynamics, Green's functions, spectra, shots, mitigation.

Every stage reads its inputs from the output directory written by the stage
before it. A typical run::

    adaptgf ground-state --n 2 --u 4 --out runs/n2
    adaptgf dynamics --out runs/n2
    adaptgf greens --out runs/n2
    adaptgf spectrum --out runs/n2

``reproduce-figure`` chains the stages with the default parameters.
"""

from __future__ import annotations

import argparse
import copy
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .avqds import DynConfig, Trajectory
from .avqite import IteConfig
from .config import ConfigError, k2_grid, load_config
from .lattice import HubbardSpec, momentum_coefficients, momentum_grid
from .measure import (
    Circuit,
    PointData,
    measure_point,
    mitigate_point,
    recombine,
    resample_steps,
)
from .mitigation import number_postselect, resolution_enhance, smooth_series
from .pauli import PauliWord
from .resources import build_report, cnot_series, trotter_unitaries, vha_cnots
from .shots import Histogram, NoiseModel
from .spectral import find_peaks, pade_eval, pade_fit, sidecar, write_spectrum_csv
from .workflow import (
    exact_k_resolvent,
    exact_retarded,
    ground_state_from_payload,
    ground_state_payload,
    pair_greens,
    pair_trajectory,
    prepare_ground_state,
)

log = logging.getLogger("adaptgf")

GS_FILE = "ground_state.json"
TRAJ_DIR = "trajectories"
GREENS_DIR = "greens"
SPECTRUM_DIR = "spectrum"
SHOTS_DIR = "shots"
MITIGATED_DIR = "mitigated"


class MissingArtifactError(RuntimeError):
    pass


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(f"{path} not found; run the '{stage}' stage first "
                                   f"(with the same --out directory)")
    return path


def _pair_name(p: int, q: int) -> str:
    return f"p{p}_q{q}"


def _k_name(i: int) -> str:
    return f"k{i}"


def _spec(cfg: dict) -> HubbardSpec:
    m = cfg["model"]
    return HubbardSpec(int(m["n_sites"]), float(m["t"]), float(m["U"]), m["mu"])


def _pairs(cfg: dict, n: int) -> list[tuple[int, int]]:
    pairs = cfg["dynamics"]["pairs"]
    if pairs is None:
        return [(p, q) for p in range(n) for q in range(n)]
    return [tuple(map(int, pq)) for pq in pairs]


def _dyn_config(cfg: dict) -> DynConfig:
    d = cfg["dynamics"]
    return DynConfig(l2_cut=d["l2_cut"], dt=d["dt"], total_time=d["total_time"],
                     tikhonov_lambda=d["tikhonov_lambda"], phase_mode=d["phase_mode"],
                     split_identity=d["split_identity"])


def _load_gsd(out: Path):
    return ground_state_from_payload(io.read_json(_require(out / GS_FILE, "ground-state")))


def _load_trajectories(out: Path) -> dict[tuple[int, int], Trajectory]:
    tdir = _require(out / TRAJ_DIR, "dynamics")
    trajs = {}
    for path in sorted(tdir.glob("traj_p*_q*.json")):
        t = Trajectory.load(path)
        p, q = t.meta["pair"]
        trajs[(int(p), int(q))] = t
    if not trajs:
        raise MissingArtifactError(f"no trajectories in {tdir}; run the 'dynamics' stage first")
    return trajs


# ----------------------------------------------------------------------------- stages


def stage_ground_state(cfg: dict, out: Path) -> dict:
    g = cfg["ground_state"]
    ite_cfg = IteConfig(distance_threshold=g["distance_threshold"], dtau=g["dtau"],
                        max_tau=g["max_tau"], target_infidelity=g["target_infidelity"],
                        tikhonov_lambda=g["tikhonov_lambda"])
    gsd = prepare_ground_state(_spec(cfg), g["source"], ite_cfg,
                               energy_from=cfg["greens"]["energy_from"])
    payload = ground_state_payload(gsd, ite_cfg)
    io.write_json(out / GS_FILE, payload)
    if gsd.ite is not None:
        h = gsd.ite.history
        io.write_csv(out / "ite_history.csv", ["tau", "energy", "infidelity", "n_params", "number", "sz"],
                     [h["tau"], h["energy"], h["infidelity"], h["n_params"], h["number"], h["sz"]])
        log.info("AVQITE: E=%.10f (exact %.10f), infidelity %.3e at tau=%.2f, Np=%d",
                 gsd.ite.energy, gsd.meta["e0_exact"], gsd.ite.infidelity, gsd.ite.tau,
                 len(gsd.ite.ansatz))
        if gsd.ite.warning:
            log.warning(gsd.ite.warning)
    return payload


def stage_dynamics(cfg: dict, out: Path) -> dict[tuple[int, int], Trajectory]:
    gsd = _load_gsd(out)
    dcfg = _dyn_config(cfg)
    tdir = out / TRAJ_DIR
    trajs = {}
    for p, q in _pairs(cfg, gsd.spec.n_sites):
        traj = pair_trajectory(gsd, p, q, dcfg, record_delta=True)
        traj.save(tdir / f"traj_{_pair_name(p, q)}.json")
        np_hist = traj.n_params_history()
        io.write_csv(tdir / f"growth_{_pair_name(p, q)}.csv",
                     ["time", "n_params", "l2", "delta", "unitary_cnots"],
                     [traj.times, np_hist, traj.l2_history, traj.delta_history,
                      cnot_series(traj.generator_log, len(traj.times) - 1)])
        log.info("pair (%d,%d): Np=%d, max delta %.3e, %.1fs", p, q, len(traj.generators),
                 float(np.max(traj.delta_history)), traj.meta["wall_time"])
        trajs[(p, q)] = traj
    return trajs


def stage_greens(cfg: dict, out: Path) -> dict:
    gsd = _load_gsd(out)
    trajs = _load_trajectories(out)
    gdir = out / GREENS_DIR
    lesser_mode = cfg["greens"]["lesser_mode"]
    if lesser_mode != "symmetry":
        raise ConfigError("the command line assembles the lesser function by symmetry only")
    retarded = {}
    for (p, q), traj in sorted(trajs.items()):
        series = pair_greens(gsd, p, q, traj, lesser_mode)
        for kind, s in series.items():
            s.write(gdir / f"G_{kind}_{_pair_name(p, q)}.csv", {"p": p, "q": q})
        retarded[(p, q)] = series["retarded"]
    times = next(iter(trajs.values())).times
    oracle = exact_retarded(gsd, times, list(retarded))
    n = gsd.spec.n_sites
    results = {}
    for i, k in enumerate(momentum_grid(n)):
        coef = momentum_coefficients(k, n)
        if not set(coef) <= set(retarded):
            log.info("skipping k=%g: not all orbital pairs were propagated", k)
            continue
        var = sum(c * retarded[pq].values for pq, c in coef.items())
        ex = sum(c * oracle[pq].values for pq, c in coef.items())
        path = gdir / f"G_retarded_{_k_name(i)}.csv"
        io.write_csv(path, ["time", "re", "im", "exact_re", "exact_im"],
                     [times, var.real, var.imag, ex.real, ex.imag])
        err = float(np.abs(var - ex).max())
        io.write_sidecar(path, {"kind": "retarded", "k": k, "U": gsd.spec.U, "N": n,
                                "e0": gsd.e0, "max_abs_error": err, **gsd.meta})
        results[k] = err
        log.info("G^R at k=%.4f: max deviation from exact %.3e", k, err)
    return results


def _k_series_from_csv(out: Path, i: int) -> tuple[np.ndarray, np.ndarray, dict]:
    path = _require(out / GREENS_DIR / f"G_retarded_{_k_name(i)}.csv", "greens")
    d = io.read_csv(path)
    meta = io.read_json(io.sidecar_path(path))
    return d["time"], d["re"] + 1j * d["im"], meta


def stage_spectrum(cfg: dict, out: Path) -> dict:
    gsd = _load_gsd(out)
    s = cfg["spectrum"]
    omegas = np.round(np.arange(s["omega_min"], s["omega_max"] + s["omega_step"] / 2,
                                s["omega_step"]), 10)
    n = gsd.spec.n_sites
    _require(out / GREENS_DIR, "greens")
    results = {}
    for i, k in enumerate(momentum_grid(n)):
        if not (out / GREENS_DIR / f"G_retarded_{_k_name(i)}.csv").exists():
            continue
        times, values, meta = _k_series_from_csv(out, i)
        dt = float(times[1] - times[0])
        fit = pade_fit(values, dt, s["order"], s["zeta"])
        g_pade = pade_eval(fit, omegas)
        g_exact = exact_k_resolvent(gsd, k, omegas, s["zeta"])
        common = {"k": k, "U": gsd.spec.U, "N": n, "e0": gsd.e0}
        write_spectrum_csv(out / SPECTRUM_DIR / f"A_pade_{_k_name(i)}.csv", omegas, g_pade,
                           {**common, **sidecar(fit), "source": "variational"})
        write_spectrum_csv(out / SPECTRUM_DIR / f"A_exact_{_k_name(i)}.csv", omegas, g_exact,
                           {**common, "zeta": s["zeta"], "source": "oracle"})
        results[k] = {"pade_peaks": find_peaks(omegas, -g_pade.imag / np.pi),
                      "exact_peaks": find_peaks(omegas, -g_exact.imag / np.pi)}
        log.info("k=%.4f peaks: pade %s exact %s", k, results[k]["pade_peaks"],
                 results[k]["exact_peaks"])
    if not results:
        raise MissingArtifactError("no momentum-space series found; run the 'greens' stage "
                                   "with every orbital pair propagated")
    io.write_json(out / SPECTRUM_DIR / "peaks.json", {str(k): v for k, v in results.items()})
    return results


def stage_resources(cfg: dict, out: Path) -> dict:
    gsd = _load_gsd(out)
    trajs = _load_trajectories(out)
    r = cfg["resources"]
    reports = {}
    lines = []
    for (p, q), traj in sorted(trajs.items()):
        rep = build_report(gsd.spec.n_sites, len(gsd.hamiltonian), traj.generators,
                           r["trotter_delta"], traj.config.total_time, r["vha_layers"])
        reports[_pair_name(p, q)] = rep.__dict__
        lines.append(f"[pair {p},{q}]\n{rep.table()}\n")
    summary = {
        "pairs": reports,
        "trotter_reference": trotter_unitaries(17, 4e-4, 10.0),
        "vha_reference": {"N2_8_layers": vha_cnots(2, 8), "N4_16_layers": vha_cnots(4, 16)},
    }
    io.write_json(out / "resources.json", summary)
    (out / "resources.txt").write_text("\n".join(lines))
    print("\n".join(lines))
    return summary


def _noise(cfg: dict) -> NoiseModel:
    return NoiseModel(cfg["shots"]["noise_p01"], cfg["shots"]["noise_p10"])


def stage_shots(cfg: dict, out: Path) -> list[Path]:
    gsd = _load_gsd(out)
    trajs = _load_trajectories(out)
    sc = cfg["shots"]
    noise = _noise(cfg)
    written = []
    for idx, ((p, q), traj) in enumerate(sorted(trajs.items())):
        steps = resample_steps(traj.config.dt, sc["resample_dt"], traj.config.total_time)
        bp, bq = gsd.creation(p), gsd.creation(q)
        points = []
        for k in steps:
            pt = measure_point(traj, k, gsd.psi0, bp, bq, sc["shots"],
                               int(cfg["seed"]) * 1000 + idx, noise)
            points.append({
                "step": pt.step, "time": pt.time, "phase": pt.phase, "exact": pt.exact,
                "circuits": [{"left": c.left.sparse_label(), "right": c.right.sparse_label(),
                              "phase_mode": c.phase_mode, "weight": [c.weight.real, c.weight.imag],
                              "branch_pair": list(c.pair_index)} for c in pt.circuits],
                "histograms": [{"counts": h.counts, "n_bits": h.n_bits, "raw_shots": h.raw_shots,
                                "meta": h.meta} for h in pt.histograms],
            })
        path = out / SHOTS_DIR / f"shots_{_pair_name(p, q)}.json"
        io.write_json(path, {"pair": [p, q], "n_electrons": gsd.spec.n_sites,
                             "n_qubits": gsd.layout.n_qubits, "shots": sc["shots"],
                             "noise": {"p01": noise.p01, "p10": noise.p10}, "seed": cfg["seed"],
                             "points": points})
        written.append(path)
        log.info("pair (%d,%d): %d points x %d circuits sampled", p, q, len(points),
                 len(points[0]["circuits"]) if points else 0)
    return written


def _word(label: str, n: int) -> PauliWord:
    toks = [] if label == "I" else [(int(t[1:]), t[0]) for t in label.split()]
    return PauliWord.from_sparse(toks, n)


def _point_from_json(d: dict, n_qubits: int) -> PointData:
    circuits = [Circuit(_word(c["left"], n_qubits), _word(c["right"], n_qubits), c["phase_mode"],
                        complex(*c["weight"]), tuple(c["branch_pair"])) for c in d["circuits"]]
    hists = [Histogram(h["counts"], h["n_bits"], h["raw_shots"], h["meta"]) for h in d["histograms"]]
    return PointData(d["step"], d["time"], circuits, d["exact"], hists, d["phase"])


def stage_mitigate(cfg: dict, out: Path) -> dict:
    gsd = _load_gsd(out)
    sdir = _require(out / SHOTS_DIR, "shots")
    files = sorted(sdir.glob("shots_p*_q*.json"))
    if not files:
        raise MissingArtifactError(f"no shot artifacts in {sdir}; run the 'shots' stage first")
    m = cfg["mitigation"]
    grid = k2_grid(cfg)
    mdir = out / MITIGATED_DIR
    per_pair = {}
    for path in files:
        d = io.read_json(path)
        p, q = d["pair"]
        times, exact, raw, mit, prov = [], [], [], [], []
        for pd in d["points"]:
            pt = _point_from_json(pd, d["n_qubits"])
            vals, lg = mitigate_point(pt, d["n_electrons"], eps=m["eps"], grid=grid,
                                      peak_only=m["peak_only"])
            times.append(pt.time)
            exact.append(recombine(pt.circuits, pt.exact, pt.phase))
            raw.append(recombine(pt.circuits, [h.overlap_estimate() for h in pt.histograms], pt.phase))
            mit.append(recombine(pt.circuits, vals, pt.phase))
            prov.append({"step": pt.step, "raw_p0": [(1 + v) / 2 for v in lg.raw],
                         "postselected_p0": [(1 + v) / 2 for v in lg.postselected],
                         "k2": lg.k2, "mitigated_p0": [(1 + v) / 2 for v in lg.mitigated]})
        times, exact, raw, mit = map(np.asarray, (times, exact, raw, mit))
        smooth = smooth_series(mit, m["window"], m["polyorder"]) if len(mit) >= 3 else mit
        cols = [times]
        for arr in (exact, raw, mit, smooth):
            cols += [arr.real, arr.imag]
        name = _pair_name(p, q)
        io.write_csv(mdir / f"gtilde_{name}.csv",
                     ["time", "exact_re", "exact_im", "raw_re", "raw_im", "mitigated_re",
                      "mitigated_im", "smoothed_re", "smoothed_im"], cols)
        io.write_json(mdir / f"provenance_{name}.json", {"pair": [p, q], "points": prov})
        per_pair[(p, q)] = {"times": times, "exact": exact, "raw": raw, "mitigated": mit,
                            "smoothed": smooth}
        rms = {key: float(np.sqrt(np.mean(np.abs(per_pair[(p, q)][key] - exact) ** 2)))
               for key in ("raw", "mitigated", "smoothed")}
        log.info("pair (%d,%d) rms error vs noiseless: %s", p, q, rms)
    _mitigated_k_series(gsd, per_pair, mdir, cfg)
    return per_pair


def _mitigated_k_series(gsd, per_pair: dict, mdir: Path, cfg: dict) -> None:
    """Retarded ``G_k`` from each stage of the shot data, plus a Pade spectrum of the final one."""
    n = gsd.spec.n_sites
    s = cfg["spectrum"]
    omegas = np.round(np.arange(s["omega_min"], s["omega_max"] + s["omega_step"] / 2,
                                s["omega_step"]), 10)
    for i, k in enumerate(momentum_grid(n)):
        coef = momentum_coefficients(k, n)
        if not set(coef) <= set(per_pair):
            continue
        times = per_pair[next(iter(coef))]["times"]
        cols = [times]
        header = ["time"]
        final = None
        for key in ("exact", "raw", "mitigated", "smoothed"):
            acc = np.zeros(len(times), dtype=complex)
            for (p, q), c in coef.items():
                gg = -1j * np.exp(1j * gsd.e0 * times) * per_pair[(p, q)][key]
                sign = -1.0 if (p + q) % 2 else 1.0
                acc += c * (gg - sign * np.conj(gg))
            cols += [acc.real, acc.imag]
            header += [f"{key}_re", f"{key}_im"]
            final = acc
        io.write_csv(mdir / f"G_retarded_{_k_name(i)}.csv", header, cols)
        fit = pade_fit(final, float(times[1] - times[0]), s["order"], s["zeta"])
        write_spectrum_csv(mdir / f"A_pade_{_k_name(i)}.csv", omegas, pade_eval(fit, omegas),
                           {"k": k, **sidecar(fit), "source": "mitigated shots"})
        write_spectrum_csv(mdir / f"A_exact_{_k_name(i)}.csv", omegas,
                           exact_k_resolvent(gsd, k, omegas, s["zeta"]),
                           {"k": k, "zeta": s["zeta"], "source": "oracle"})


def figure5(cfg: dict, out: Path, step_index: int | None = None) -> Path:
    """One measured histogram before and after resolution enhancement."""
    sdir = _require(out / SHOTS_DIR, "shots")
    files = sorted(sdir.glob("shots_p*_q*.json"))
    if not files:
        raise MissingArtifactError(f"no shot artifacts in {sdir}; run the 'shots' stage first")
    d = io.read_json(files[0])
    points = d["points"]
    pd = points[len(points) // 2 if step_index is None else step_index]
    pt = _point_from_json(pd, d["n_qubits"])
    h = number_postselect(pt.histograms[0], d["n_electrons"])
    y = h.as_array()
    cols = [np.arange(len(y)), y]
    header = ["decimal", "postselected"]
    for k2 in (0.5, 1.0, 2.0):
        cols.append(resolution_enhance(h, k2).as_array())
        header.append(f"k2_{k2:g}")
    path = out / "figure5_histogram.csv"
    io.write_csv(path, header, cols)
    io.write_sidecar(path, {"pair": d["pair"], "step": pt.step, "time": pt.time,
                            "circuit": pd["circuits"][0]})
    return path


# ----------------------------------------------------------------------------- figures


def _with(cfg: dict, **sections) -> dict:
    new = copy.deepcopy(cfg)
    for sec, vals in sections.items():
        new[sec].update(vals)
    return new


def reproduce_figure(fig: str, cfg: dict, out: Path, args) -> None:
    u_values = [args.u] if args.u is not None else None
    if fig == "1":
        for u in u_values or [4.0, 8.0]:
            sub = _with(cfg, model={"n_sites": args.n or 4, "U": u})
            d = out / f"U{u:g}"
            stage_ground_state(sub, d)
            stage_dynamics(sub, d)
            stage_greens(sub, d)
    elif fig == "2":
        for u in u_values or [4.0, 8.0]:
            sub = _with(cfg, model={"n_sites": args.n or 4, "U": u})
            d = out / f"U{u:g}"
            stage_ground_state(sub, d)
            stage_dynamics(sub, d)
            stage_greens(sub, d)
            stage_spectrum(sub, d)
            stage_resources(sub, d)
    elif fig == "3c":
        sub = _with(cfg, model={"n_sites": args.n or 4, "U": args.u or 4.0})
        stage_ground_state(sub, out)
        stage_dynamics(sub, out)
    elif fig in ("4", "5"):
        sub = _with(cfg, model={"n_sites": args.n or 2, "U": args.u or 4.0})
        stage_ground_state(sub, out)
        stage_dynamics(sub, out)
        stage_shots(sub, out)
        if fig == "4":
            stage_mitigate(sub, out)
        else:
            figure5(sub, out)
    else:
        raise ConfigError(f"unknown figure {fig!r}")


# ----------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptgf", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, default=Path("runs/default"), help="artifact directory")
    common.add_argument("--n", type=int, help="number of lattice sites")
    common.add_argument("--u", type=float, help="on-site repulsion U")
    common.add_argument("--dt", type=float)
    common.add_argument("--total-time", type=float)
    common.add_argument("--zeta", type=float, help="damping used by the spectral transform")
    common.add_argument("--l2-cut", type=float, help="McLachlan distance threshold for growth")
    common.add_argument("--shots", type=int)
    common.add_argument("--noise-p01", type=float)
    common.add_argument("--noise-p10", type=float)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("ground-state", "prepare the ground state (AVQITE or exact)"),
        ("dynamics", "propagate c_q^dag|psi0> for each orbital pair"),
        ("greens", "assemble greater, lesser, retarded and momentum-space functions"),
        ("spectrum", "Pade spectra of the momentum-space retarded functions"),
        ("shots", "sample the overlap circuits of every Green's function point"),
        ("mitigate", "post-selection, resolution enhancement and smoothing"),
        ("resources", "CNOT bounds, circuit counts, Trotter and VHA estimates"),
    ]:
        sub.add_parser(name, parents=[common], help=helptext)
    fig = sub.add_parser("reproduce-figure", parents=[common], help="chain stages for one figure")
    fig.add_argument("figure", choices=["1", "2", "3c", "4", "5"])
    return parser


STAGES = {
    "ground-state": stage_ground_state,
    "dynamics": stage_dynamics,
    "greens": stage_greens,
    "spectrum": stage_spectrum,
    "shots": stage_shots,
    "mitigate": stage_mitigate,
    "resources": stage_resources,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(logging.INFO)
    overrides = {"seed": args.seed, "n": args.n, "u": args.u, "dt": args.dt,
                 "total_time": args.total_time, "zeta": args.zeta, "l2_cut": args.l2_cut,
                 "shots": args.shots, "noise_p01": args.noise_p01, "noise_p10": args.noise_p10}
    try:
        cfg = load_config(args.config, overrides)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "reproduce-figure":
            reproduce_figure(args.figure, cfg, args.out, args)
        else:
            STAGES[args.command](cfg, args.out)
    except (MissingArtifactError, ConfigError, ValueError) as exc:
        print(f"adaptgf {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
