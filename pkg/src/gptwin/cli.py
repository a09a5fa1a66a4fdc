"""Command-line harness for the GP digital-twin scenarios.

Exit codes: 0 success, 2 validation failure, 3 pipeline failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, load_config, parse_kernel_name, validate_config
from .dynamics import MeasurementSeries
from .emulator.gp import EmulatorSpec, fit_multioutput
from .errors import ArgumentError, ConfigError, GPTwinError, PipelineError
from .inversion import DeltaEstimateSeries, invert_series
from .pipeline import _targets, emit_report, run_matrix, run_scenario, simulate
from .selection import select_model

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_PIPELINE = 3


def _resolve(args) -> ScenarioConfig:
    raw = load_config(args.config) if args.config else {}
    overrides = {
        "case": args.case,
        "seed": args.seed,
        "out_dir": args.out,
        "jobs": args.jobs,
    }
    points = getattr(args, "points", None)
    sigma = getattr(args, "sigma", None)
    if points is not None and not isinstance(points, list):
        overrides["n_points"] = points
    if sigma is not None and not isinstance(sigma, list):
        overrides["noise_sigma"] = sigma
    if args.case and args.case != raw.get("case", args.case):
        raw.pop("n_points", None)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return validate_config(raw)


def _common(p):
    p.add_argument("--config", metavar="PATH", help="scenario TOML file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--case", choices=["stiffness", "mass", "joint"])
    p.add_argument("--jobs", type=int, help="parallel workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gptwin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb, help_ in [
        ("validate", "check a config and print the resolved values"),
        ("simulate", "sample noisy measurements of the physical twin"),
        ("run", "full pipeline: simulate, invert, select, predict, report"),
    ]:
        p = sub.add_parser(verb, help=help_)
        _common(p)
        p.add_argument("--points", type=int, help="number of measurements")
        p.add_argument("--sigma", type=float, help="noise standard deviation")

    p = sub.add_parser("invert", help="turn measurements into delta estimates")
    _common(p)
    p.add_argument("--measurements", metavar="PATH", help="measurements JSON (default OUT/measurements.json)")

    p = sub.add_parser("select", help="BIC selection over the candidate pool")
    _common(p)
    p.add_argument("--deltas", metavar="PATH", help="delta JSON (default OUT/deltas.json)")

    p = sub.add_parser("fit", help="fit one mean/kernel combination")
    _common(p)
    p.add_argument("--deltas", metavar="PATH", help="delta JSON (default OUT/deltas.json)")
    p.add_argument("--mean", default="constant", choices=["constant", "linear", "quadratic"])
    p.add_argument("--kernel", default="squared_exponential", help="e.g. matern52 or ard_matern52")

    p = sub.add_parser("matrix", help="sweep point counts, noise levels and seeds")
    _common(p)
    p.add_argument("--points", type=int, nargs="+", required=True)
    p.add_argument("--sigma", type=float, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+")

    p = sub.add_parser("report", help="write report.md for a run directory")
    _common(p)
    p.add_argument("--run", metavar="DIR", help="run directory (default OUT)")
    return parser


def _out(args, cfg) -> Path:
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_deltas(args, out) -> DeltaEstimateSeries:
    return DeltaEstimateSeries.from_json(args.deltas or out / "deltas.json")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for e in exc.errors:
            print(f"  - {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        if args.verb == "validate":
            print(json.dumps(cfg.to_dict(), indent=2))
        elif args.verb == "simulate":
            out = _out(args, cfg)
            series = simulate(cfg)
            series.to_csv(out / "measurements.csv")
            series.to_json(out / "measurements.json")
            print(out / "measurements.csv")
        elif args.verb == "invert":
            out = _out(args, cfg)
            src = Path(args.measurements or out / "measurements.json")
            series = MeasurementSeries.from_json(src)
            deltas = invert_series(series, cfg.system if args.config else None, source=str(src.name))
            deltas.to_csv(out / "deltas.csv")
            deltas.to_json(out / "deltas.json")
            print(out / "deltas.csv")
        elif args.verb == "select":
            out = _out(args, cfg)
            deltas = _load_deltas(args, out)
            report = select_model(deltas.slow_times, _targets(deltas, deltas.case),
                                  cfg.candidate_specs, cfg.optimizer, cfg.textbook_bic, cfg.jobs)
            report.to_json(out / "selection.json", include_timing=False)
            (out / "selection.txt").write_text(report.to_table())
            print(report.to_table(), end="")
        elif args.verb == "fit":
            out = _out(args, cfg)
            deltas = _load_deltas(args, out)
            kind, ard = parse_kernel_name(args.kernel)
            ems = fit_multioutput(EmulatorSpec(args.mean, kind, ard), deltas.slow_times,
                                  _targets(deltas, deltas.case), cfg.optimizer)
            for ch, em in ems.items():
                em.to_json(out / f"emulator_{ch}.json")
                print(f"{ch}: {em.spec.name}, log L = {em.lml:.6g} -> {out / f'emulator_{ch}.json'}")
        elif args.verb == "run":
            art = run_scenario(cfg, args.out)
            print((art.out_dir / "report.md").read_text(), end="")
        elif args.verb == "matrix":
            rows = run_matrix(cfg, args.points, args.sigma, args.seeds, args.out, cfg.jobs)
            root = Path(args.out or cfg.out_dir)
            print((root / "summary.csv").read_text(), end="")
            if any(r["status"] != "ok" for r in rows):
                return EXIT_PIPELINE
        elif args.verb == "report":
            print(emit_report(args.run or args.out or cfg.out_dir), end="")
    except PipelineError as exc:
        print(f"pipeline failed at stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return EXIT_PIPELINE
    except ArgumentError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (GPTwinError, OSError, KeyError, np.linalg.LinAlgError) as exc:
        print(f"{args.verb} failed: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
