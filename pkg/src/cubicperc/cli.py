"""Command-line front end.

Subcommands: ``sweep``, ``threshold``, ``table``, ``fit``.

Exit codes
----------
0  success
2  configuration error (bad flag, unknown neighborhood, unknown config key)
3  crossing failure (no or ambiguous crossing; for ``table``, any failed row)
4  I/O failure (unwritable output directory, unreadable input)
5  run aborted before completion (partial results flushed, marked incomplete)
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import output
from .experiment import (
    CrossingError,
    SweepPlan,
    estimate_threshold,
    run_sweep,
)
from .fitting import InputFormatError, fit_power_law, read_points_csv
from .neighborhood import CANONICAL_NAMES, by_name

log = logging.getLogger("cubicperc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CROSSING = 3
EXIT_IO = 4
EXIT_ABORTED = 5

DEFAULT_SEED = 20120401
OUT_ENV = "CUBICPERC_OUT"

PRESETS = {
    "desk": {"sizes": (32, 64), "realizations": 10_000, "delta_p": 2e-3},
    "paper": {"sizes": (63, 100), "realizations": 100_000, "delta_p": 2e-4},
}

CONFIG_KEYS = {
    "neighborhood", "sizes", "p", "realizations", "seed", "threads",
    "out", "preset", "weighting", "input",
}


class ConfigError(Exception):
    pass


def _parse_sizes(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"--sizes expects comma-separated integers, got {text!r}") from None


def _parse_p(text):
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",")]
        except ValueError:
            raise ConfigError(f"--p expects min,max,step, got {text!r}") from None
    if len(vals) != 3:
        raise ConfigError(f"--p expects exactly three numbers min,max,step, got {text!r}")
    return tuple(vals)


def _neighborhoods(value, allow_many):
    if isinstance(value, (list, tuple)):
        value = ",".join(value)
    names = [v for v in str(value).split(",") if v.strip()] if allow_many else [value]
    specs = []
    for n in names:
        try:
            specs.append(by_name(n))
        except ValueError:
            raise ConfigError(
                f"unknown neighborhood {n!r}; valid names: {', '.join(CANONICAL_NAMES)}"
            ) from None
    return specs


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (flags override it)")
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./results)")
    common.add_argument("-v", "--verbose", action="store_true")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--sizes", help="comma-separated lattice sizes, e.g. 32,64")
    mc.add_argument("--p", help="grid or search window as min,max,step")
    mc.add_argument("--realizations", type=int, help="realizations N per size")
    mc.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
    mc.add_argument("--threads", type=int, help="worker processes (results do not depend on it)")
    mc.add_argument("--preset", choices=sorted(PRESETS), help="desk (default) or full scale (paper)")

    ap = argparse.ArgumentParser(prog="cubicperc", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common, mc], help="P(p) curves for one neighborhood")
    p.add_argument("--neighborhood")
    p = sub.add_parser("threshold", parents=[common, mc], help="crossing threshold for one neighborhood")
    p.add_argument("--neighborhood")
    p = sub.add_parser("table", parents=[common, mc], help="thresholds for all seven neighborhoods")
    p.add_argument("--neighborhood", help="comma-separated subset (default: all seven)")
    p = sub.add_parser("fit", parents=[common], help="power-law fit of p_c against z")
    p.add_argument("input", nargs="?", help="CSV with columns label,z,p_c,u")
    p.add_argument("--weighting", choices=["uniform", "inverse-variance"])
    return ap


def resolve_config(args) -> dict:
    """Merge config file, preset and flags into one canonical dict."""
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        if "schema_version" in loaded:
            # replaying a run manifest
            if loaded["schema_version"] != output.MANIFEST_SCHEMA_VERSION:
                raise ConfigError(f"unsupported manifest schema {loaded['schema_version']!r}")
            loaded = {k: v for k, v in loaded.get("config", {}).items()
                      if k not in ("command", "delta_p") and v is not None}
        unknown = sorted(set(loaded) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val

    out = {"command": args.command}
    out["out"] = str(cfg.get("out") or os.environ.get(OUT_ENV) or "results")
    if args.command == "fit":
        if not cfg.get("input"):
            raise ConfigError("fit needs an input CSV")
        out["input"] = str(cfg["input"])
        out["weighting"] = cfg.get("weighting", "uniform")
        if out["weighting"] not in ("uniform", "inverse-variance"):
            raise ConfigError(f"unknown weighting {out['weighting']!r}")
        return out

    preset = cfg.get("preset", "desk")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    ps = PRESETS[preset]
    out["preset"] = preset
    out["sizes"] = list(_parse_sizes(cfg["sizes"])) if "sizes" in cfg else list(ps["sizes"])
    out["realizations"] = int(cfg.get("realizations", ps["realizations"]))
    out["seed"] = int(cfg.get("seed", DEFAULT_SEED))
    out["threads"] = int(cfg.get("threads", 1))
    out["p"] = list(_parse_p(cfg["p"])) if "p" in cfg else None
    out["delta_p"] = out["p"][2] if out["p"] else ps["delta_p"]

    if out["realizations"] < 1:
        raise ConfigError("--realizations must be >= 1")
    if out["threads"] < 1:
        raise ConfigError("--threads must be >= 1")
    if any(L < 2 for L in out["sizes"]):
        raise ConfigError(f"lattice sizes must be >= 2, got {out['sizes']}")

    if args.command == "table":
        nb = cfg.get("neighborhood") or ",".join(CANONICAL_NAMES)
        out["neighborhood"] = [s.name for s in _neighborhoods(nb, allow_many=True)]
    else:
        if not cfg.get("neighborhood"):
            raise ConfigError(f"--neighborhood is required; valid names: {', '.join(CANONICAL_NAMES)}")
        out["neighborhood"] = _neighborhoods(cfg["neighborhood"], allow_many=False)[0].name
    if args.command in ("threshold", "table") and len(out["sizes"]) < 2:
        raise ConfigError("threshold estimation needs at least two sizes")
    return out


def _prepare_outdir(path):
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    probe = d / ".write-test"
    probe.write_text("")
    probe.unlink()
    return d


def _progress(L, done, total):
    log.info("L=%d  %d/%d realizations", L, done, total)


def _threshold(name, cfg):
    p = cfg["p"]
    return estimate_threshold(
        by_name(name),
        sizes=cfg["sizes"][-2:],
        delta_p=cfg["delta_p"],
        N=cfg["realizations"],
        master_seed=cfg["seed"],
        search_window=(p[0], p[1]) if p else None,
        workers=cfg["threads"],
        progress=_progress,
    )


def cmd_sweep(cfg, outdir):
    spec = by_name(cfg["neighborhood"])
    p = cfg["p"] or (0.0, 1.0, 10 * cfg["delta_p"])
    plan = SweepPlan(spec, tuple(cfg["sizes"]), p[0], p[1], p[2], cfg["realizations"], cfg["seed"])
    curves = run_sweep(plan, workers=cfg["threads"], progress=_progress)
    files = []
    for c in curves:
        fn = output.curve_filename(c)
        output.write_curve_csv(c, outdir / fn)
        files.append(fn)
    complete = len(curves) == len(plan.sizes) and all(c.complete for c in curves)
    return files, complete, EXIT_OK if complete else EXIT_ABORTED, {}


def cmd_threshold(cfg, outdir):
    name = cfg["neighborhood"]
    try:
        est = _threshold(name, cfg)
    except CrossingError as exc:
        fn = f"threshold_{name}.json"
        output.write_json({"neighborhood": name, "error": str(exc), "kind": type(exc).__name__,
                           "brackets": exc.brackets, "history": exc.history}, outdir / fn)
        log.error("%s: %s", name, exc)
        return [fn], True, EXIT_CROSSING, {}
    files = [f"threshold_{name}.json"]
    output.write_json(est.to_dict(), outdir / files[0])
    for c in est.curves:
        fn = output.curve_filename(c)
        output.write_curve_csv(c, outdir / fn)
        files.append(fn)
    print(f"{name}: p_c = {est.p_c:.5f}  u = {est.u:.2g}  bracket = {est.bracket}")
    return files, True, EXIT_OK, {}


def cmd_table(cfg, outdir):
    rows = []
    failed = False
    for name in cfg["neighborhood"]:
        spec = by_name(name)
        row = {"neighborhood": name, "z": spec.z, "p_c": None, "u": None,
               "bracket_lo": None, "bracket_hi": None}
        try:
            est = _threshold(name, cfg)
        except CrossingError as exc:
            failed = True
            row["status"] = f"{type(exc).__name__}: {exc}"
            log.error("%s: %s", name, exc)
        else:
            row.update(p_c=est.p_c, u=est.u, bracket_lo=est.bracket[0], bracket_hi=est.bracket[1], status="ok")
        print(f"{name:<11} z={spec.z:<3d} p_c={row['p_c'] if row['p_c'] is None else format(row['p_c'], '.4f')}  {row['status']}",
              flush=True)
        rows.append(row)
    output.write_table(rows, outdir / "table.csv", outdir / "table.json")
    return ["table.csv", "table.json"], True, EXIT_CROSSING if failed else EXIT_OK, {}


def cmd_fit(cfg, outdir):
    points = read_points_csv(cfg["input"])
    fit = fit_power_law(points, cfg["weighting"])
    output.write_json(fit.to_dict(), outdir / "fit.json")
    output.write_fit_curve_csv(points, fit, outdir / "fit_curve.csv")
    print(f"gamma = {fit.gamma:.4f} +- {fit.gamma_stderr:.4f}  A = {fit.amplitude:.4f}  (n = {fit.n_points})")
    return ["fit.json", "fit_curve.csv"], True, EXIT_OK, {}


COMMANDS = {"sweep": cmd_sweep, "threshold": cmd_threshold, "table": cmd_table, "fit": cmd_fit}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"cubicperc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outdir = _prepare_outdir(cfg["out"])
    except OSError as exc:
        print(f"cubicperc: cannot write to {cfg['out']}: {exc}", file=sys.stderr)
        return EXIT_IO

    t0 = time.perf_counter()
    try:
        files, complete, code, extra = COMMANDS[args.command](cfg, outdir)
    except InputFormatError as exc:
        print(f"cubicperc: {cfg.get('input')}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"cubicperc: invalid argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cubicperc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    wall = time.perf_counter() - t0
    try:
        output.write_json(output.manifest(args.command, cfg, files, wall, complete, **extra),
                          outdir / f"manifest_{args.command}.json")
    except OSError as exc:
        print(f"cubicperc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
