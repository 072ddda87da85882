"""Command-line front end: ``synth``, ``infer``, ``oracle``, ``publish`` and ``sweep``.

Settings come from built-in defaults, then an optional JSON ``--config``
file (keys match the long flag names, with ``-`` or ``_``), then explicit
flags. Every output is a pure function of the inputs and resolved settings.

Exit codes: 0 success, 2 validation error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, gp
from .bo import BoConfig, replay, run_bo
from .data import (
    Location,
    SyntheticScenario,
    load_generation_csv,
    load_irradiance_csv,
    synthesize,
    write_generation_csv,
    write_irradiance_csv,
)
from .dp import (
    DpParams,
    bootstrap_se,
    analytic_rmse,
    circular_mean_deg,
    normalize_log_weights,
    release_from_scores,
    release_rmse,
)
from .errors import DataError, PvMetaError, ValidationError
from .fitscore import DomainGrid, FitObjective, grid_search
from .gp import KernelSpec
from .output import header_comment, read_csv, read_json, write_csv, write_json
from .preprocess import preprocess

DEFAULTS = {
    "grid_az_step": 1.0,
    "grid_tilt_step": 1.0,
    "iters": 100,
    "warm_start": 10,
    "delta": 0.1,
    "epsilon": 1.0,
    "samples": 1,
    "seed": 0,
    "lat": None,
    "lon": None,
    "site_id": "site",
    "group_by": "month",
    "albedo": 0.2,
    "attenuation": "step",
    "lengthscales": [90.0, 30.0],
    "jitter": 1e-10,
    "azimuth_metric": "chord",
    "unit_kernel": False,
    "exhaustive": False,
    "denominator": "bound",
    "epsilons": [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0],
    "deltas": [0.01, 0.1],
    "reference": None,
    "bootstrap": 200,
}

# settings that influence each verb's outputs (and hence its config hash)
_DATA_KEYS = ["lat", "lon", "site_id", "group_by", "albedo", "attenuation",
              "grid_az_step", "grid_tilt_step"]
VERB_KEYS = {
    "synth": ["seed"],
    "infer": _DATA_KEYS + ["iters", "warm_start", "delta", "seed", "lengthscales", "jitter",
                           "azimuth_metric", "unit_kernel", "exhaustive"],
    "oracle": _DATA_KEYS + ["seed"],
    "publish": ["epsilon", "delta", "samples", "seed", "denominator"],
    "sweep": ["epsilons", "deltas", "samples", "seed", "denominator", "reference", "bootstrap"],
}


# ------------------------------------------------------------------ settings

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in ("iters", "warm_start", "samples", "seed", "bootstrap"):
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            return int(value)
        if key in ("grid_az_step", "grid_tilt_step", "delta", "epsilon", "lat", "lon",
                   "albedo", "jitter"):
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if key in ("lengthscales", "epsilons", "deltas", "reference"):
            if isinstance(value, str):
                value = _float_list(value)
            return [float(v) for v in value]
        if key in ("unit_kernel", "exhaustive"):
            if not isinstance(value, bool):
                raise ValueError
            return value
        return str(value)
    except (TypeError, ValueError, argparse.ArgumentTypeError):
        raise ValidationError(f"config value for {key!r} has the wrong type: {value!r}") from None


def resolve_settings(verb: str, args: argparse.Namespace, explicit: set | None = None) -> dict:
    """Defaults, overlaid by the JSON config file, overlaid by explicit flags.

    Keys set by the file or a flag are added to ``explicit`` when given.
    """
    explicit = set() if explicit is None else explicit
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ValidationError("config file must hold a JSON object")
        for raw, value in doc.items():
            key = raw.replace("-", "_")
            if key not in DEFAULTS:
                raise ValidationError(f"unknown config key {raw!r}")
            settings[key] = _coerce(key, value)
            explicit.add(key)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = _coerce(key, value)
            explicit.add(key)
    return settings


def _verb_config(verb: str, settings: dict, **extra) -> dict:
    cfg = {k: settings[k] for k in VERB_KEYS[verb]}
    cfg.update(extra)
    cfg["command"] = verb
    return cfg


def _grid(settings: dict) -> DomainGrid:
    return DomainGrid.regular(settings["grid_az_step"], settings["grid_tilt_step"])


def _kernel(settings: dict) -> KernelSpec:
    try:
        if settings["unit_kernel"]:
            return KernelSpec.unit(settings["jitter"])
        return KernelSpec(tuple(settings["lengthscales"]), settings["jitter"], settings["azimuth_metric"])
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _location(settings: dict, generation: Path) -> Location:
    lat, lon = settings["lat"], settings["lon"]
    if lat is None or lon is None:
        # fall back to the ground truth written next to synthetic data
        gt = generation.parent / "ground_truth.json"
        if gt.exists():
            loc = read_json(gt).get("location", {})
            lat = loc.get("latitude") if lat is None else lat
            lon = loc.get("longitude") if lon is None else lon
    if lat is None or lon is None:
        raise ValidationError("site location unknown: pass --lat and --lon")
    try:
        return Location(float(lat), float(lon))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _load_inputs(args, settings):
    generation = Path(args.generation)
    for p in (generation, Path(args.irradiance)):
        if not p.exists():
            raise DataError(f"input file not found: {p}")
    location = _location(settings, generation)
    irradiance = load_irradiance_csv(args.irradiance)
    profile = load_generation_csv(generation, settings["site_id"], location)
    pre = preprocess(profile, irradiance, scheme=settings["group_by"])
    objective = FitObjective(pre.groups, irradiance, albedo=settings["albedo"],
                             attenuation=settings["attenuation"])
    return location, pre, objective


def _out_dir(args, default: Path | None = None) -> Path:
    out = Path(args.out) if getattr(args, "out", None) else default
    if out is None:
        raise ValidationError("--out is required")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _best_doc(method: str, azimuth: float, tilt: float, score: float, grid: DomainGrid,
              tied: int | None = None) -> dict:
    doc = {
        "method": method,
        "azimuth_deg": azimuth,
        "tilt_deg": tilt,
        "fit_score": score,
        "grid_shape": list(grid.shape),
        # a horizontal panel sees the same irradiance whatever way it faces
        "azimuth_identifiable": tilt != 0.0,
    }
    if tied is not None:
        doc["n_tied_points"] = tied
    return doc


# --------------------------------------------------------------------- verbs

def cmd_synth(args) -> int:
    path = Path(args.scenario)
    if not path.exists():
        raise DataError(f"scenario file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario is not valid JSON: {exc}") from None
    if args.seed is not None:
        doc["rng_seed"] = args.seed
    scenario = SyntheticScenario.from_dict(doc)
    irradiance, profile = synthesize(scenario)
    settings = {"seed": scenario.rng_seed}
    cfg = _verb_config("synth", settings, scenario=scenario.to_dict())
    comment = header_comment(scenario.rng_seed, cfg)
    out = _out_dir(args)
    write_irradiance_csv(out / "irradiance.csv", irradiance, comment)
    write_generation_csv(out / "generation.csv", profile, comment)
    write_json(out / "ground_truth.json", scenario.to_dict(), scenario.rng_seed, cfg)
    return 0


def cmd_infer(args) -> int:
    settings = resolve_settings("infer", args)
    grid = _grid(settings)
    kernel = _kernel(settings)
    location, pre, objective = _load_inputs(args, settings)
    iters, warm = settings["iters"], settings["warm_start"]
    if settings["exhaustive"]:
        iters = grid.size
        warm = min(warm, iters - 1)
    config = BoConfig(budget=iters, grid=grid, warm_start_count=warm, delta=settings["delta"],
                      rng_seed=settings["seed"], kernel=kernel,
                      exclude_visited=settings["exhaustive"])
    trace = run_bo(objective, config)

    seed = settings["seed"]
    cfg = _verb_config("infer", settings, lat=location.latitude, lon=location.longitude)
    comment = header_comment(seed, cfg)
    out = _out_dir(args)
    write_csv(out / "trace.csv",
              ["t", "phase", "grid_index", "azimuth_deg", "tilt_deg", "phi", "score",
               "mu_prev", "sigma_prev", "incumbent_score"],
              ([r.t, r.phase, r.grid_index, r.azimuth_deg, r.tilt_deg, r.phi, r.score,
                r.mu_prev, r.sigma_prev, r.incumbent_score] for r in trace.records),
              comment)
    mean, var = trace.posterior_surface()
    pts = grid.points
    write_csv(out / "posterior_surface.csv", ["azimuth_deg", "tilt_deg", "mu", "sigma"],
              zip(pts[:, 0], pts[:, 1], mean, np.sqrt(var)), comment)

    az, tilt = trace.incumbent
    best = _best_doc("bo", az, tilt, trace.incumbent_score, grid)
    k = int(np.argmax(mean))
    best["mu_argmax"] = {"azimuth_deg": float(pts[k, 0]), "tilt_deg": float(pts[k, 1]),
                         "mu": float(mean[k])}
    best["n_objective_calls"] = trace.n_objective_calls
    write_json(out / "best.json", best, seed, cfg)
    write_json(out / "preprocess.json", pre.report, seed, cfg)
    write_json(out / "run.json", {
        "grid": grid.to_dict(),
        "budget": iters,
        "warm_start": warm,
        "delta": settings["delta"],
        "exhaustive": settings["exhaustive"],
        "kernel": kernel.to_dict(),
        "location": {"latitude": location.latitude, "longitude": location.longitude},
    }, seed, cfg)
    return 0


def cmd_oracle(args) -> int:
    settings = resolve_settings("oracle", args)
    grid = _grid(settings)
    location, pre, objective = _load_inputs(args, settings)
    table = grid_search(grid, pre.groups, None, objective=objective)

    seed = settings["seed"]
    cfg = _verb_config("oracle", settings, lat=location.latitude, lon=location.longitude)
    comment = header_comment(seed, cfg)
    out = _out_dir(args)
    pts = grid.points
    write_csv(out / "surface.csv", ["azimuth_deg", "tilt_deg", "fit_score"],
              zip(pts[:, 0], pts[:, 1], table.total_scores), comment)
    az, tilt = table.best
    write_json(out / "best.json",
               _best_doc("oracle", az, tilt, table.best_score, grid, tied=len(table.ties())),
               seed, cfg)
    write_json(out / "preprocess.json", pre.report, seed, cfg)
    return 0


def _load_run(run_dir: Path):
    """Grid, budget and replayed posterior mean of an ``infer`` run directory."""
    for name in ("run.json", "trace.csv", "best.json"):
        if not (run_dir / name).exists():
            raise DataError(f"{run_dir} is not an infer run directory (missing {name})")
    run = read_json(run_dir / "run.json")
    grid = DomainGrid.from_dict(run["grid"])
    kernel = KernelSpec.from_dict(run["kernel"])
    header, rows = read_csv(run_dir / "trace.csv")
    try:
        col = {name: header.index(name) for name in ("grid_index", "score")}
        indices = [int(r[col["grid_index"]]) for r in rows]
        scores = [float(r[col["score"]]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise DataError(f"malformed trace.csv: {exc}") from None
    if len(indices) != run["budget"]:
        raise ValidationError(f"trace has {len(indices)} rows but the run budget is {run['budget']}")
    if indices and (min(indices) < 0 or max(indices) >= grid.size):
        raise ValidationError("trace refers to points outside the run grid")
    config = BoConfig(budget=run["budget"], grid=grid, warm_start_count=run["warm_start"],
                      delta=run["delta"], kernel=kernel, exclude_visited=run.get("exhaustive", False))
    state = replay(config, indices, scores)
    mean, _ = gp.posterior(state, grid.points)
    best = read_json(run_dir / "best.json")
    return run, grid, mean, best


def cmd_publish(args) -> int:
    explicit: set = set()
    settings = resolve_settings("publish", args, explicit)
    run_dir = Path(args.run_dir)
    run, grid, mean, _ = _load_run(run_dir)
    if "delta" not in explicit:
        settings["delta"] = run["delta"]
    params = DpParams(settings["epsilon"], settings["delta"], grid.size, run["budget"])
    seed = settings["seed"]
    rel = release_from_scores(mean, grid.points, params, seed, settings["samples"],
                              settings["denominator"])

    cfg = _verb_config("publish", settings, run=run)
    comment = header_comment(seed, cfg)
    out = _out_dir(args, run_dir)
    write_csv(out / "releases.csv", ["draw", "grid_index", "azimuth_deg", "tilt_deg"],
              ((i, int(k), p[0], p[1]) for i, (k, p) in enumerate(zip(rel.samples, rel.points))),
              comment)
    log_p = np.log(normalize_log_weights(rel.log_weights))
    pts = grid.points
    write_csv(out / "weights.csv", ["azimuth_deg", "tilt_deg", "log_weight"],
              zip(pts[:, 0], pts[:, 1], log_p), comment)
    k = int(np.argmax(mean))
    report = {
        "epsilon": params.epsilon,
        "delta": params.delta,
        "domain_size": params.domain_size,
        "budget": params.budget,
        "denominator": settings["denominator"],
        "sensitivity_bound": rel.bound.to_dict(),
        "sensitivity_used": rel.sensitivity,
        "n_samples": len(rel.samples),
        "first_release": {"azimuth_deg": rel.sample[0], "tilt_deg": rel.sample[1]},
        "mean_release": {"azimuth_deg": circular_mean_deg(rel.points[:, 0]),
                         "tilt_deg": float(rel.points[:, 1].mean())},
        "mu_argmax": {"azimuth_deg": float(pts[k, 0]), "tilt_deg": float(pts[k, 1]),
                      "probability": float(math.exp(log_p[k]))},
    }
    write_json(out / "report.json", report, seed, cfg)
    return 0


def cmd_sweep(args) -> int:
    settings = resolve_settings("sweep", args)
    run_dir = Path(args.run_dir)
    run, grid, mean, best = _load_run(run_dir)
    if settings["reference"] is not None:
        if len(settings["reference"]) != 2:
            raise ValidationError("--reference needs AZIMUTH,TILT")
        ref = tuple(settings["reference"])
    else:
        ref = (best["azimuth_deg"], best["tilt_deg"])
    if not settings["epsilons"] or not settings["deltas"]:
        raise ValidationError("need at least one epsilon and one delta")
    seed = settings["seed"]
    rows = []
    for delta in settings["deltas"]:
        for eps in settings["epsilons"]:
            params = DpParams(eps, delta, grid.size, run["budget"])
            # every cell reuses the seed so that differences reflect (eps, delta) only
            rel = release_from_scores(mean, grid.points, params, seed, settings["samples"],
                                      settings["denominator"])
            se = bootstrap_se(rel.points, ref, np.random.default_rng([seed, 1]),
                              settings["bootstrap"]) if settings["samples"] > 1 else math.nan
            rows.append([eps, delta, rel.sensitivity, release_rmse(rel.points, ref), se,
                         analytic_rmse(rel.log_weights, grid.points, ref),
                         circular_mean_deg(rel.points[:, 0]), float(rel.points[:, 1].mean())])

    cfg = _verb_config("sweep", settings, run=run)
    out = _out_dir(args, run_dir)
    write_csv(out / "rmse.csv",
              ["epsilon", "delta", "sensitivity", "rmse", "rmse_se", "analytic_rmse",
               "mean_azimuth_deg", "mean_tilt_deg"], rows, header_comment(seed, cfg))
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvmeta",
        description="Infer PV panel azimuth/tilt from generation data and publish it privately.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="output directory"):
        p.add_argument("--config", help="JSON file with settings; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", required=out_help == "output directory", help=out_help)

    def data_opts(p):
        p.add_argument("generation", help="generation CSV (timestamp,power_w)")
        p.add_argument("irradiance", help="irradiance CSV")
        p.add_argument("--lat", type=float, help="site latitude")
        p.add_argument("--lon", type=float, help="site longitude")
        p.add_argument("--site-id", dest="site_id")
        p.add_argument("--group-by", dest="group_by", choices=["month", "week"])
        p.add_argument("--albedo", type=float)
        p.add_argument("--attenuation", choices=["step", "ashrae"])
        p.add_argument("--grid-az-step", dest="grid_az_step", type=float)
        p.add_argument("--grid-tilt-step", dest="grid_tilt_step", type=float)

    p = sub.add_parser("synth", help="generate a synthetic dataset from a scenario JSON")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, help="override the scenario's rng_seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("infer", help="preprocess and run GP-UCB over the orientation grid")
    data_opts(p)
    common(p)
    p.add_argument("--iters", type=int, help="evaluation budget T")
    p.add_argument("--warm-start", dest="warm_start", type=int)
    p.add_argument("--delta", type=float, help="confidence parameter of the UCB schedule")
    p.add_argument("--lengthscales", type=_float_list, help="AZIMUTH,TILT kernel lengthscales")
    p.add_argument("--jitter", type=float)
    p.add_argument("--azimuth-metric", dest="azimuth_metric", choices=["chord", "arc", "linear"])
    p.add_argument("--unit-kernel", dest="unit_kernel", action="store_const", const=True,
                   help="exp(-||x-y||^2) on raw degrees")
    p.add_argument("--exhaustive", action="store_const", const=True,
                   help="visit every grid point once (T = grid size)")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("oracle", help="exhaustive grid search of the fit score")
    data_opts(p)
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("publish", help="draw differentially private releases from an infer run")
    p.add_argument("run_dir")
    common(p, "output directory (default: RUN_DIR)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, help="defaults to the run's delta")
    p.add_argument("--samples", type=int)
    p.add_argument("--denominator", choices=["bound", "algorithm"])
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser("sweep", help="normalized RMSE of the mean release over (epsilon, delta)")
    p.add_argument("run_dir")
    common(p, "output directory (default: RUN_DIR)")
    p.add_argument("--epsilons", type=_float_list)
    p.add_argument("--deltas", type=_float_list)
    p.add_argument("--samples", type=int)
    p.add_argument("--denominator", choices=["bound", "algorithm"])
    p.add_argument("--reference", type=_float_list, help="AZIMUTH,TILT; defaults to the incumbent")
    p.add_argument("--bootstrap", type=int, help="bootstrap replicates for the standard error")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PvMetaError as exc:
        print(f"pvmeta {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"pvmeta {args.command}: {exc}", file=sys.stderr)
        return DataError.exit_code
    except ValueError as exc:
        print(f"pvmeta {args.command}: invalid input: {exc}", file=sys.stderr)
        return ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
