"""Command line entry point and experiment orchestration.

Every experiment writes into its output directory through one
:class:`Collector`, which performs atomic writes and keeps the list of files.
Sweep members run on a process pool and only return plain data; the parent
process does all of the writing.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, io, plots
from .config import KINDS, OUTPUT_DIR_ENV, ConfigError, ExperimentConfig, merge, parse_config_dict
from .curves import Cones, Limacon, ShrinkerProfile, Sphere, sample_initial, sphere_samples
from .grid_ops import check_discrete_sobolev, check_sbp, sbp_scale
from .linsolve import SingularSystemError
from .shrinker import ProfileSearchError, find_profile, shrinker_residual
from .stepper import SchemeParams, run

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
NUMERICAL_FAILURES = ("degeneracy", "singular_system", "extinction")


@dataclass
class RunReport:
    config: dict
    kind: str
    termination: str
    series: dict = field(default_factory=dict)
    wall_time: float = 0.0
    eoc: list = field(default_factory=list)
    members: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    failed: bool = False

    def as_dict(self, timing: bool = False) -> dict:
        d = {"config": self.config, "kind": self.kind, "termination": self.termination,
             "series": self.series, "eoc": self.eoc, "members": self.members,
             "results": self.results, "failed": self.failed}
        if timing:
            d["wall_time"] = self.wall_time
        return d


class Collector:
    """Single writer for one experiment's output directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.files: list[str] = []

    def _path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name

    def text(self, name: str, text: str):
        io.atomic_write(self._path(name), text)

    def curve(self, name: str, nodes):
        io.write_curve_csv(self._path(name), nodes)

    def series(self, name: str, series: dict):
        keys = [k for k in ("m", "t") if k in series] + sorted(k for k in series if k not in ("m", "t"))
        n = len(series[keys[0]]) if keys else 0
        lines = [",".join(keys)]
        for i in range(n):
            lines.append(",".join(io.fmt(series[k][i]) if not isinstance(series[k][i], (int, np.integer))
                                  else str(series[k][i]) for k in keys))
        self.text(name, "\n".join(lines) + "\n")


def _stand_in(spec) -> bool:
    return isinstance(spec, (Limacon, Cones))


def _check_series(series: dict):
    t = series.get("t", [])
    if any(b <= a for a, b in zip(t[:-1], t[1:])):
        raise RuntimeError("series timestamps are not strictly increasing")


def _snapshot_name(m: int, t: float) -> str:
    return f"snapshots/snap_{m:07d}_t{t:.6f}.csv"


# members run in worker processes -----------------------------------------------

def _eoc_member(p: SchemeParams) -> dict:
    try:
        s, res = analysis.error_series(p)
    except (SingularSystemError, ValueError, RuntimeError) as exc:
        return {"J": p.J, "ok": False, "termination": "error", "message": str(exc)}
    return {"J": p.J, "ok": s.termination == "final_time", "termination": s.termination,
            "message": res.message, "steps": s.steps, "dt": s.dt, "max_e0": s.max_e0,
            "max_e1": s.max_e1, "max_emax": s.max_emax, "summed": s.summed,
            "wall_time": res.wall_time}


def _map(fn, items, workers: int | None):
    workers = workers or os.cpu_count() or 1
    workers = min(workers, len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# experiment kinds ------------------------------------------------------------------

def _run(cfg: ExperimentConfig, out: Collector, rep: RunReport):
    p = cfg.scheme
    observers, obs = [], None
    if isinstance(cfg.initial, Sphere):
        obs = analysis.SphereErrorObserver(p, cfg.initial.radius)
        observers.append(obs)
    initial = cfg.initial
    if isinstance(initial, ShrinkerProfile) and initial.path is None:
        initial = sample_initial(initial, p.J)
        out.curve("initial_profile.csv", initial.nodes)
    snaps = []

    def on_snapshot(m, c):
        name = _snapshot_name(m, c.t)
        out.curve(name, c.nodes)
        snaps.append((name, c.t))

    res = run(initial, p, observers=observers, snapshots=cfg.snapshots,
              record_every=cfg.record_every if obs is None else 1,
              track_intersections=cfg.track_intersections, on_snapshot=on_snapshot)
    _check_series(res.series)
    out.series("series.csv", res.series)
    rep.termination = res.termination
    rep.series = res.series
    rep.wall_time = res.wall_time
    rep.failed = res.termination in NUMERICAL_FAILURES
    rep.results = {"steps_taken": res.steps_taken, "t_final": res.t_final, "message": res.message,
                   "min_pivot_ratio": res.min_pivot_ratio, "max_solve_residual": res.max_residual,
                   "snapshots": [n for n, _ in snaps], "stand_in_defaults": _stand_in(cfg.initial)}
    if obs is not None:
        s = analysis.summarize(obs.records, p.J, p.dt, res.termination)
        rep.results["errors"] = {"max_e0": s.max_e0, "max_e1": s.max_e1, "max_emax": s.max_emax,
                                 "summed": s.summed}
    if len(res.series["t"]) >= 10:
        try:
            fit = analysis.area_decay_fit(res.series["t"], res.series["area"])
            rep.results["area_fit"] = {"slope": fit.slope, "extinction": fit.extinction,
                                       "residual": fit.residual}
        except ValueError as exc:
            rep.results["area_fit"] = {"error": str(exc)}
    if cfg.plots:
        (cname, ctitle), (aname, atitle) = plots.figure_names(cfg.initial.family)
        names = [n for n, _ in snaps]
        labels = [f"t = {t:g}" for _, t in snaps]
        out.text(f"{cname}.py", plots.curves_script(names, labels, ctitle, f"{cname}.png"))
        out.text(f"{aname}.py", plots.area_script("series.csv", atitle, f"{aname}.png"))


def _eoc_sweep(cfg: ExperimentConfig, out: Collector, rep: RunReport):
    plan = cfg.sweep_plan()
    members = _map(_eoc_member, plan, cfg.workers)
    rep.wall_time = sum(m.get("wall_time", 0.0) for m in members)
    for m in members:
        m.pop("wall_time", None)
    rep.members = members
    ok = [m for m in members if m["ok"]]
    rep.failed = len(ok) != len(members)
    rep.termination = "failed_members" if rep.failed else "complete"
    if len(ok) >= 1:
        Js = [m["J"] for m in ok]
        vals = {"0h": [m["max_e0"] for m in ok], "1h": [m["max_e1"] for m in ok]}
        try:
            rows = analysis.eoc_rows(Js, vals)
        except ValueError:
            rows = []  # failed members broke the doubling sequence
        if rows:
            out.text("eoc.csv", io.eoc_csv_text(rows))
            rep.eoc = [{"J": r.J, "errors": r.errors, "eoc": r.eoc} for r in rows]
        if len(ok) >= 2:
            rep.results["summed_bound_slope"] = analysis.loglog_slope([1 / J for J in Js],
                                                                      [m["summed"] for m in ok])


def _consistency_sweep(cfg: ExperimentConfig, out: Collector, rep: RunReport):
    t0 = time.perf_counter()
    sw = analysis.consistency_sweep(cfg.Js, cfg.scheme.dt_mode, cfg.scheme.T)
    rep.wall_time = time.perf_counter() - t0
    lines = ["J,interior,boundary"]
    for J, a, b in zip(sw.Js, sw.interior, sw.boundary):
        lines.append(f"{J},{io.fmt(a)},{io.fmt(b)}")
    out.text("consistency.csv", "\n".join(lines) + "\n")
    rep.termination = "complete"
    rep.results = {"interior": sw.interior, "boundary": sw.boundary,
                   "interior_slope": sw.interior_slope, "boundary_slope": sw.boundary_slope}


def sphere_baseline(J: int, radius: float = 2.0) -> float:
    return shrinker_residual(sphere_samples(J, 0.0, radius))


def _shrinker_search(cfg: ExperimentConfig, out: Collector, rep: RunReport):
    s = cfg.shrinker
    t0 = time.perf_counter()
    prof = find_profile(s.intersections, bracket=s.bracket, J=s.J, ds=s.ds)
    res = shrinker_residual(prof.curve)
    base = sphere_baseline(s.J)
    out.curve("profile.csv", prof.nodes)
    rep.results = {"h0": prof.h0, "crossing": prof.crossing, "intersections": prof.intersections,
                   "residual": res, "sphere2_residual": base, "residual_ratio": res / base}
    rep.termination = "found"
    if s.evolve:
        p = SchemeParams(J=s.J, T=s.T, dt_mode=s.dt)
        every = max(1, int(round(0.01 / s.dt)))
        r = run(prof.curve, p, record_every=every, track_intersections=True)
        _check_series(r.series)
        out.series("series.csv", r.series)
        rep.series = r.series
        rep.termination = r.termination
        rep.failed = r.termination in NUMERICAL_FAILURES
        fit = analysis.area_decay_fit(r.series["t"], r.series["area"])
        rep.results["area_fit"] = {"slope": fit.slope, "extinction": fit.extinction,
                                   "residual": fit.residual}
        if cfg.plots:
            out.text("fig4_3.py", plots.area_script("series.csv", "Surface area of the shrinker evolution",
                                                    "fig4_3.png"))
    if cfg.plots:
        out.text("fig4_2.py", plots.curves_script(["profile.csv"], ["t = 0"],
                                                  "Self-shrinker profile", "fig4_2.png"))
    rep.wall_time = time.perf_counter() - t0


def fuzz_identities(n: int, J_min: int, J_max: int, seed: int) -> dict:
    """Seeded random grid functions: worst summation-by-parts defect and worst inequality slacks."""
    rng = np.random.default_rng(seed)
    worst_sbp, worst = 0.0, {"inverse": math.inf, "sup": math.inf, "sup_derivative": math.inf,
                             "axis": math.inf}
    for _ in range(n):
        J = int(rng.integers(J_min, J_max + 1))
        v = rng.uniform(-1.0, 1.0, (J + 1, 2))
        w = rng.uniform(-1.0, 1.0, (J + 1, 2))
        scale = sbp_scale(v, w)
        if scale > 0.0:
            worst_sbp = max(worst_sbp, abs(check_sbp(v, w)) / scale)
        v[0, 0] = v[-1, 0] = 0.0
        sl = check_discrete_sobolev(v, require_axis=True).as_dict()
        for k, val in sl.items():
            worst[k] = min(worst[k], val)
    return {"n": n, "J_range": [J_min, J_max], "seed": seed, "max_relative_sbp_defect": worst_sbp,
            "min_slacks": worst, "min_slack": min(worst.values())}


def _diagnostics(cfg: ExperimentConfig, out: Collector, rep: RunReport):
    d = cfg.diagnostics
    t0 = time.perf_counter()
    bd = analysis.boundary_orders(d.t, d.hs)
    fz = fuzz_identities(d.n_random, d.J_min, d.J_max, cfg.seed)
    rep.wall_time = time.perf_counter() - t0
    rep.results = {"boundary": bd, "fuzz": fz}
    rep.termination = "complete"
    rep.failed = not (fz["max_relative_sbp_defect"] <= 1e-12 and fz["min_slack"] >= -1e-12)


_DISPATCH = {"run": _run, "eoc_sweep": _eoc_sweep, "consistency_sweep": _consistency_sweep,
             "shrinker_search": _shrinker_search, "diagnostics": _diagnostics}


def execute(cfg: ExperimentConfig) -> RunReport:
    """Run one experiment, write its artifacts and ``report.json``; returns the report."""
    out = Collector(cfg.output_dir)
    rep = RunReport(config=cfg.echo(), kind=cfg.kind, termination="")
    _DISPATCH[cfg.kind](cfg, out, rep)
    out.files.append("report.json")
    rep.files = sorted(out.files)
    # wall time lives in its own file so the report itself is reproducible bit for bit
    io.write_report(cfg.output_dir / "report.json", rep.as_dict())
    io.atomic_write(cfg.output_dir / "timing.json", json.dumps({"wall_time": rep.wall_time}) + "\n")
    rep.files.append("timing.json")
    return rep


# argument parsing ----------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="axismcf", description="Axisymmetric mean curvature flow experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind.replace("_", "-"), help=f"{kind.replace('_', ' ')} experiment")
        sp.add_argument("--config", type=Path, help="JSON config file; flags override its fields")
        sp.add_argument("--output-dir", type=Path)
        sp.add_argument("--J", type=int)
        sp.add_argument("--T", type=float)
        sp.add_argument("--dt-mode", help="h, h2 or fixed:<value>")
        sp.add_argument("--max-steps", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--no-plots", action="store_true")
        if kind == "run":
            sp.add_argument("--family", choices=["sphere", "limacon", "cones", "shrinker_profile", "custom"])
            sp.add_argument("--initial-path", help="curve CSV for custom or shrinker_profile data")
            sp.add_argument("--snapshot-every", type=int)
            sp.add_argument("--snapshot-times", type=_floats, help="comma separated times")
            sp.add_argument("--record-every", type=int)
            sp.add_argument("--track-intersections", action="store_true")
        if kind in ("eoc_sweep", "consistency_sweep"):
            sp.add_argument("--Js", type=_ints, help="comma separated, doubling")
        if kind == "shrinker_search":
            sp.add_argument("--intersections", type=int)
            sp.add_argument("--evolve", action="store_true")
            sp.add_argument("--dt", type=float, help="time step for the evolution")
        if kind == "diagnostics":
            sp.add_argument("--n-random", type=int)
    return ap


def overrides_from_args(args) -> dict:
    g = lambda name: getattr(args, name, None)  # noqa: E731
    o = {"kind": args.command.replace("-", "_"),
         "output_dir": str(args.output_dir) if args.output_dir else None,
         "seed": g("seed"), "workers": g("workers"), "Js": g("Js"),
         "record_every": g("record_every"),
         "scheme": {"J": g("J"), "T": g("T"), "dt_mode": g("dt_mode"), "max_steps": g("max_steps")},
         "snapshots": {"every": g("snapshot_every"), "times": g("snapshot_times")},
         "shrinker": {"intersections": g("intersections"), "dt": g("dt"),
                      "evolve": True if g("evolve") else None},
         "diagnostics": {"n_random": g("n_random")}}
    if g("no_plots"):
        o["plots"] = False
    if g("track_intersections"):
        o["track_intersections"] = True
    if g("family"):
        o["initial"] = {"family": g("family")}
        if g("family") in ("shrinker_profile", "custom") and g("initial_path"):
            o["initial"]["path"] = g("initial_path")
    if args.command == "shrinker-search":
        # J and T describe the profile grid and the evolution, not the scheme section
        o["shrinker"]["J"] = o["scheme"].pop("J")
        o["shrinker"]["T"] = o["scheme"].pop("T")
    return o


def _prune(d):
    if isinstance(d, dict):
        out = {k: _prune(v) for k, v in d.items() if v is not None}
        return {k: v for k, v in out.items() if v != {}}
    return d


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        base = {}
        if args.config is not None:
            base = json.loads(Path(args.config).read_text())
            if not isinstance(base, dict):
                raise ConfigError(["top level must be an object"])
        ov = _prune(overrides_from_args(args))
        if "initial" in ov and base.get("initial", {}).get("family") not in (None, ov["initial"]["family"]):
            base = {k: v for k, v in base.items() if k != "initial"}
        raw = merge(base, ov)
        env = dict(os.environ)
        if args.output_dir is not None:
            env.pop(OUTPUT_DIR_ENV, None)  # an explicit flag beats the environment
        cfg = parse_config_dict(raw, env)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(f"invalid configuration: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        rep = execute(cfg)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SingularSystemError, ProfileSearchError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{cfg.kind}: {rep.termination} ({rep.wall_time:.2f} s) -> {cfg.output_dir}")
    return EXIT_NUMERICAL if rep.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
