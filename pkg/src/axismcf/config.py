"""Experiment configuration: JSON text in, fully validated dataclasses out.

Unknown keys are rejected at every level and all problems are collected before
raising, so one pass over a config reports everything that is wrong with it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .curves import FAMILIES, Custom, InitialDataSpec, Sphere
from .stepper import SchemeParams, SnapshotSchedule

KINDS = ("run", "eoc_sweep", "consistency_sweep", "shrinker_search", "diagnostics")
OUTPUT_DIR_ENV = "AXISMCF_OUTPUT_DIR"
DT_ALIASES = {"h": "h", "proportional": "h", "h2": "h2", "quadratic": "h2"}
TABLE_JS = (32, 64, 128, 256, 512)


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ShrinkerSearch:
    intersections: int = 3
    bracket: tuple[float, float] = (0.1, 4.0)
    J: int = 512
    ds: float = 1e-4
    evolve: bool = False
    T: float = 0.95
    dt: float = 1e-4


@dataclass(frozen=True)
class Diagnostics:
    n_random: int = 1000
    J_min: int = 4
    J_max: int = 64
    t: float = 0.0
    hs: tuple[float, ...] = (4e-2, 2e-2, 1e-2, 5e-3)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    scheme: SchemeParams
    initial: InitialDataSpec
    output_dir: Path
    snapshots: SnapshotSchedule
    seed: int = 0
    Js: tuple[int, ...] = TABLE_JS
    workers: int | None = None
    record_every: int = 1
    track_intersections: bool = False
    plots: bool = True
    name: str = ""
    shrinker: ShrinkerSearch = field(default_factory=ShrinkerSearch)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def sweep_plan(self) -> list[SchemeParams]:
        """One parameter set per member of a sweep (a single entry for other kinds)."""
        if self.kind in ("eoc_sweep", "consistency_sweep"):
            s = self.scheme
            return [SchemeParams(J=J, T=s.T, dt_mode=s.dt_mode, eps_axis=s.eps_axis,
                                 eps_len=s.eps_len, max_steps=s.max_steps) for J in self.Js]
        return [self.scheme]

    def echo(self) -> dict:
        """Plain-data view of the validated config, as recorded in reports."""
        from .io import to_jsonable
        d = to_jsonable(self)
        d["output_dir"] = str(self.output_dir)
        return d


# parsing helpers ------------------------------------------------------------------

_TOP_KEYS = {"kind", "scheme", "initial", "output_dir", "snapshots", "seed", "Js", "workers",
             "record_every", "track_intersections", "plots", "name", "shrinker", "diagnostics"}
_SCHEME_KEYS = {"J", "T", "dt_mode", "eps_axis", "eps_len", "max_steps"}
_SNAP_KEYS = {"every", "times", "include_initial", "include_final"}


def _keys(cls) -> set[str]:
    return {f.name for f in fields(cls) if f.init}


def _check_keys(d: dict, allowed: set[str], where: str, errors: list[str]):
    for k in sorted(set(d) - allowed):
        errors.append(f"{where}: unknown key '{k}'")


def _section(raw: dict, key: str, errors: list[str]) -> dict:
    v = raw.get(key, {})
    if v is None:
        return {}
    if not isinstance(v, dict):
        errors.append(f"{key}: expected an object, got {type(v).__name__}")
        return {}
    return v


def parse_dt_mode(v) -> str | float:
    """``"h"``, ``"h2"`` (or their aliases), ``"fixed:<value>"`` or a positive number."""
    if isinstance(v, bool):
        raise ValueError(f"invalid dt_mode {v!r}")
    if isinstance(v, (int, float)):
        if not v > 0:
            raise ValueError(f"fixed time step must be positive, got {v!r}")
        return float(v)
    if isinstance(v, str):
        if v in DT_ALIASES:
            return DT_ALIASES[v]
        if v.startswith("fixed:"):
            try:
                dt = float(v[len("fixed:"):])
            except ValueError:
                raise ValueError(f"invalid fixed time step in {v!r}") from None
            if not dt > 0:
                raise ValueError(f"fixed time step must be positive, got {v!r}")
            return dt
    raise ValueError(f"dt_mode must be h, h2 or fixed:<value>, got {v!r}")


def _int(v, name, errors, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        errors.append(f"{name}: expected an integer, got {v!r}")
        return None
    if lo is not None and v < lo:
        errors.append(f"{name}: must be >= {lo}, got {v}")
        return None
    return v


def _float(v, name, errors, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{name}: expected a number, got {v!r}")
        return None
    if positive and not v > 0:
        errors.append(f"{name}: must be positive, got {v!r}")
        return None
    return float(v)


def _writable(path: Path) -> bool:
    p = path.resolve()
    while not p.exists():
        p = p.parent
    return p.is_dir() and os.access(p, os.W_OK)


def _parse_initial(d: dict, errors: list[str]):
    family = d.get("family", "sphere")
    if family not in FAMILIES:
        errors.append(f"initial.family: unknown family '{family}' (choose from {', '.join(FAMILIES)})")
        return Sphere()
    cls = FAMILIES[family]
    rest = {k: v for k, v in d.items() if k != "family"}
    _check_keys(rest, _keys(cls), f"initial ({family})", errors)
    rest = {k: v for k, v in rest.items() if k in _keys(cls)}
    for k, v in rest.items():
        if k in ("path", "nodes"):
            continue
        if k == "intersections":
            _int(v, "initial.intersections", errors, lo=0)
        elif _float(v, f"initial.{k}", errors) is None:
            return Sphere()
    if "nodes" in rest and rest["nodes"] is not None:
        rest["nodes"] = tuple(tuple(float(c) for c in row) for row in rest["nodes"])
    if rest.get("path") is not None and not Path(rest["path"]).is_file():
        errors.append(f"initial.path: file not found: {rest['path']}")
    if cls is Custom and rest.get("path") is None and rest.get("nodes") is None:
        errors.append("initial (custom): needs 'path' or 'nodes'")
    try:
        return cls(**rest)
    except (TypeError, ValueError) as exc:
        errors.append(f"initial: {exc}")
        return Sphere()


def parse_config_dict(raw: Any, env: dict | None = None) -> ExperimentConfig:
    env = os.environ if env is None else env
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError([f"top level must be an object, got {type(raw).__name__}"])
    _check_keys(raw, _TOP_KEYS, "config", errors)

    kind = raw.get("kind", "run")
    if kind not in KINDS:
        errors.append(f"kind: must be one of {', '.join(KINDS)}, got {kind!r}")

    # scheme
    sc = _section(raw, "scheme", errors)
    _check_keys(sc, _SCHEME_KEYS, "scheme", errors)
    J = _int(sc.get("J", 128), "scheme.J", errors, lo=2)
    T = _float(sc.get("T", 0.125), "scheme.T", errors, positive=True)
    try:
        dt_mode = parse_dt_mode(sc.get("dt_mode", "h"))
    except ValueError as exc:
        errors.append(f"scheme.dt_mode: {exc}")
        dt_mode = None
    eps = {}
    for k in ("eps_axis", "eps_len"):
        v = _float(sc.get(k, 1e-12), f"scheme.{k}", errors, positive=True)
        if v is not None and v > 1e-6:
            errors.append(f"scheme.{k}: must lie in (0, 1e-6], got {v!r}")
            v = None
        eps[k] = v
    max_steps = sc.get("max_steps")
    if max_steps is not None:
        max_steps = _int(max_steps, "scheme.max_steps", errors, lo=1)
    scheme = None
    if None not in (J, T, dt_mode, eps["eps_axis"], eps["eps_len"]):
        try:
            scheme = SchemeParams(J=J, T=T, dt_mode=dt_mode, max_steps=max_steps, **eps)
        except ValueError as exc:
            errors.append(f"scheme: {exc}")

    initial = _parse_initial(_section(raw, "initial", errors), errors)

    # snapshots
    sn = _section(raw, "snapshots", errors)
    _check_keys(sn, _SNAP_KEYS, "snapshots", errors)
    every = sn.get("every")
    if every is not None:
        every = _int(every, "snapshots.every", errors, lo=1)
    times = sn.get("times", [])
    if not isinstance(times, list) or any(_float(t, "snapshots.times", errors) is None for t in times):
        if not isinstance(times, list):
            errors.append("snapshots.times: expected a list of numbers")
        times = []
    if any(t < 0 for t in times):
        errors.append("snapshots.times: times must be non-negative")
    snapshots = SnapshotSchedule(every=every, times=tuple(float(t) for t in times),
                                 include_initial=bool(sn.get("include_initial", True)),
                                 include_final=bool(sn.get("include_final", True)))

    # output directory: explicit config value, overridden by the environment
    out = env.get(OUTPUT_DIR_ENV) or raw.get("output_dir") or "axismcf_out"
    output_dir = Path(out)
    if output_dir.exists() and not output_dir.is_dir():
        errors.append(f"output_dir: {output_dir} exists and is not a directory")
    elif not _writable(output_dir):
        errors.append(f"output_dir: {output_dir} is not writable")

    seed = _int(raw.get("seed", 0), "seed", errors, lo=0)
    Js = raw.get("Js", list(TABLE_JS))
    if not isinstance(Js, list) or not Js or any(_int(j, "Js", errors, lo=2) is None for j in Js):
        if not isinstance(Js, list) or not Js:
            errors.append("Js: expected a non-empty list of integers")
        Js = list(TABLE_JS)
    elif kind in ("eoc_sweep", "consistency_sweep") and any(b != 2 * a for a, b in zip(Js[:-1], Js[1:])):
        errors.append(f"Js: sweep resolutions must double, got {Js}")
    workers = raw.get("workers")
    if workers is not None:
        workers = _int(workers, "workers", errors, lo=1)
    record_every = _int(raw.get("record_every", 1), "record_every", errors, lo=1)

    sh = _section(raw, "shrinker", errors)
    _check_keys(sh, _keys(ShrinkerSearch), "shrinker", errors)
    shrinker = ShrinkerSearch()
    try:
        if "bracket" in sh:
            b = sh["bracket"]
            if not (isinstance(b, list) and len(b) == 2 and 0 < b[0] < b[1]):
                errors.append(f"shrinker.bracket: expected [lo, hi] with 0 < lo < hi, got {b!r}")
                sh = {k: v for k, v in sh.items() if k != "bracket"}
            else:
                sh = {**sh, "bracket": (float(b[0]), float(b[1]))}
        shrinker = ShrinkerSearch(**{k: v for k, v in sh.items() if k in _keys(ShrinkerSearch)})
    except TypeError as exc:
        errors.append(f"shrinker: {exc}")
    if shrinker.J < 2:
        errors.append(f"shrinker.J: must be >= 2, got {shrinker.J}")
    for k in ("ds", "dt", "T"):
        if not getattr(shrinker, k) > 0:
            errors.append(f"shrinker.{k}: must be positive")

    dg = _section(raw, "diagnostics", errors)
    _check_keys(dg, _keys(Diagnostics), "diagnostics", errors)
    diagnostics = Diagnostics()
    try:
        if "hs" in dg:
            dg = {**dg, "hs": tuple(float(h) for h in dg["hs"])}
        diagnostics = Diagnostics(**{k: v for k, v in dg.items() if k in _keys(Diagnostics)})
    except (TypeError, ValueError) as exc:
        errors.append(f"diagnostics: {exc}")
    if not (2 <= diagnostics.J_min <= diagnostics.J_max):
        errors.append("diagnostics: need 2 <= J_min <= J_max")
    if diagnostics.n_random < 1:
        errors.append("diagnostics.n_random: must be positive")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        kind=kind, scheme=scheme, initial=initial, output_dir=output_dir, snapshots=snapshots,
        seed=seed, Js=tuple(Js), workers=workers, record_every=record_every,
        track_intersections=bool(raw.get("track_intersections", False)),
        plots=bool(raw.get("plots", True)), name=str(raw.get("name", "")),
        shrinker=shrinker, diagnostics=diagnostics)


def parse_config(text: str, env: dict | None = None) -> ExperimentConfig:
    """Parse JSON config text into a validated :class:`ExperimentConfig`."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from exc
    return parse_config_dict(raw, env)


def merge(base: dict, overrides: dict) -> dict:
    """Recursive dict merge; ``overrides`` wins and ``None`` values are skipped."""
    out = dict(base)
    for k, v in overrides.items():
        if v is None:
            continue
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = v
    return out
