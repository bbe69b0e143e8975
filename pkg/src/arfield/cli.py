"""Command-line driver.

Exit codes: 0 success, 2 configuration/validation error, 3 runtime error.
Relative output paths resolve against $ARFIELD_OUTPUT_DIR when it is set.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import compute_bounds
from .experiment import (
    ConfigError,
    export,
    load_config,
    monte_carlo,
    reconstruction_runs,
    write_reconstruction_svg,
)
from .field import random_field
from .sampling import ARConfig, RenewalSpec, generate_path, path_report

log = logging.getLogger("arfield")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _out_path(p) -> Path:
    p = Path(p)
    base = os.environ.get("ARFIELD_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        path = _out_path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        log.info("wrote %s", path)


def cmd_generate_field(args) -> int:
    f = random_field(args.b, np.random.default_rng(args.seed))
    _emit(f.to_json() + "\n", args.out)
    return EXIT_OK


def _read_draws(path) -> list:
    text = Path(path).read_text().strip()
    if text.startswith("["):
        return [float(v) for v in json.loads(text)]
    return [float(tok) for tok in text.replace(",", " ").split()]


def _path_config(args) -> ARConfig:
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
    renewal = dict(d.get("renewal", {}))
    for flag, key in (("kind", "kind"), ("n", "n"), ("lam", "lambda"), ("alpha", "alpha"), ("s", "s"), ("xi", "xi")):
        v = getattr(args, flag)
        if v is not None:
            renewal[key] = v
    rho = args.rho if args.rho is not None else d.get("rho", 0.0)
    try:
        return ARConfig(float(rho), RenewalSpec.from_dict(renewal))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sample_path(args) -> int:
    cfg = _path_config(args)
    if args.draws:
        path = generate_path(cfg, draws=_read_draws(args.draws))
    else:
        path = generate_path(cfg, np.random.default_rng(args.seed))
    if args.out:
        _emit(path.to_csv(), args.out)
    report = {
        "m": path.m,
        "remainder": path.remainder,
        "overshoot": path.overshoot,
        "checks": {k: ("n/a" if v is None else v) for k, v in path_report(path, cfg).to_dict().items()},
    }
    if cfg.renewal.bounded:
        b = compute_bounds(cfg.rho, cfg.renewal.lam, cfg.renewal.n)
        report["m_lower"] = b.m_lower
        report["remainder_upper"] = b.remainder_upper
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_verify_bounds(args) -> int:
    try:
        b = compute_bounds(args.rho, args.lam, args.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(b.to_dict(), indent=2) if args.json else b.table())
    return EXIT_OK


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(master_seed=args.seed, trials=args.trials)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    runs = reconstruction_runs(cfg, grid=args.grid)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho", "n", "trial", "x", "truth", "estimate"])
        for rho, n, t, vals in runs["runs"]:
            for x, g, v in zip(runs["x"], runs["truth"], vals):
                w.writerow([repr(rho), n, t, repr(float(x)), repr(float(g)), repr(float(v))])
    if args.svg:
        write_reconstruction_svg(runs, _out_path(args.svg))
    for rho, n, t, vals in runs["runs"]:
        dev = float(np.max(np.abs(vals - runs["truth"])))
        print(f"rho={rho:g} n={n:g} trial={t} max|G_hat-g|={dev:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)

    def progress(p):
        log.info("rho=%g n=%g D=%.4g se=%.2g M=%.1f", p.rho, p.n, p.mean_distortion, p.stderr, p.mean_m)

    curve = monte_carlo(cfg, workers=args.workers, progress=progress)
    out_dir = _out_path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.stem or cfg.name or Path(args.config).stem
    for fmt in args.format:
        log.info("wrote %s", export(curve, fmt, out_dir / f"{stem}.{fmt}"))
    for rho, slope in curve.slopes.items():
        print(f"rho={rho:g} slope={slope:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arfield", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-field", help="draw a random normalized bandlimited field")
    g.add_argument("--b", type=int, required=True, help="bandwidth index")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--out", help="output JSON file (default stdout)")
    g.set_defaults(func=cmd_generate_field)

    s = sub.add_parser("sample-path", help="generate one sampling path and check its bounds")
    s.add_argument("--config", help="JSON with 'rho' and 'renewal' keys")
    s.add_argument("--rho", type=float, help="AR(1) coefficient in [0, 1)")
    s.add_argument("--kind", help="renewal kind")
    s.add_argument("--n", type=float, help="sampling density")
    s.add_argument("--lambda", dest="lam", type=float, help="support parameter (> 1)")
    s.add_argument("--alpha", type=float, help="scaled-beta shape")
    s.add_argument("--s", type=float, help="lognormal underlying variance")
    s.add_argument("--xi", type=float, help="generalized Pareto tail index")
    s.add_argument("--draws", help="file of forced driving terms (JSON list or whitespace separated)")
    s.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    s.add_argument("--out", help="write the path as CSV (index, location)")
    s.set_defaults(func=cmd_sample_path)

    v = sub.add_parser("verify-bounds", help="print sample-count bounds and density threshold")
    v.add_argument("--rho", type=float, required=True)
    v.add_argument("--lambda", dest="lam", type=float, default=2.0, help="support parameter (default 2)")
    v.add_argument("--n", type=float, help="sampling density; enables the n-dependent rows")
    v.add_argument("--json", action="store_true", help="print JSON instead of a table")
    v.set_defaults(func=cmd_verify_bounds)

    for name, helptext in (
        ("simulate", "reconstruct the field for individual trials (Fig. a style)"),
        ("sweep", "Monte Carlo distortion sweep over (rho, n)"),
    ):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("config", help="experiment JSON config")
        c.add_argument("--seed", type=int, help="override master_seed")
        c.add_argument("--trials", type=int, help="override trials")
        if name == "simulate":
            c.add_argument("--grid", type=int, default=512, help="reconstruction grid size (default 512)")
            c.add_argument("--out", default="reconstruction.csv", help="output CSV")
            c.add_argument("--svg", help="also write a plot")
            c.set_defaults(func=cmd_simulate)
        else:
            c.add_argument("--out-dir", default=".", help="output directory")
            c.add_argument("--stem", help="output file stem (default: config name)")
            c.add_argument(
                "--format",
                nargs="+",
                choices=("csv", "json", "svg"),
                default=["csv"],
                help="one or more of csv json svg (default csv)",
            )
            c.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
            c.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
