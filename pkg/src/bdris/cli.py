"""Command-line entry point: ``bdris {sweep,validate,design,figure}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .design import DesignConfig, TrainingDesign, validate_identifiability
from .experiments import SweepConfig, _grid, rows_to_csv, run_sweep
from .figures import COMPLEXITY_COLUMNS, FIGURES, complexity_rows, preset


class CLIError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"cannot read config {path!r}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CLIError(f"config {path!r} must hold a JSON object")
    return data


def _load_sweep(path: str) -> SweepConfig:
    try:
        return SweepConfig.from_dict(_load_json(path))
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid sweep config: {exc}") from exc


def _write(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _apply_overrides(cfg: SweepConfig, args) -> SweepConfig:
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials
    if getattr(args, "output", None) is not None:
        cfg.output = args.output
    if cfg.seed < 0:
        raise CLIError("seed must be non-negative")
    return cfg


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(_load_sweep(args.config), args)
    rows = run_sweep(cfg, threads=args.threads)
    _write(rows_to_csv(rows, timing=args.timing), cfg.output)
    return 0


def cmd_validate(args) -> int:
    cfg = _load_sweep(args.config)
    failed = 0
    for p in _grid(cfg):
        for alg in cfg.algorithms:
            where = f"M_T={p.M_T} M_R={p.M_R} Nbar={p.Nbar} Q={p.Q} K={p.K}"
            try:
                dcfg = DesignConfig.for_algorithm(alg, p.Nbar, p.Q, p.K, K1=p.K1, K2=p.K2,
                                                  theta_kind=cfg.theta_kind, seed=cfg.seed)
                report = validate_identifiability(dcfg, p.M_T, p.M_R, alg)
                line = report.summary()
                ok = report.passed
            except ValueError as exc:
                line, ok = f"{alg}: fail (invalid design: {exc})", False
            print(f"{where}  {line}")
            failed += not ok
    return 1 if failed else 0


def cmd_design(args) -> int:
    data = _load_json(args.config)
    try:
        design = TrainingDesign.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid design config: {exc}") from exc
    text = json.dumps(design.to_dict(), indent=2) + "\n"
    _write(text, args.output)
    cfg = design.config
    print(
        f"design Nbar={cfg.Nbar} Q={cfg.Q} K={cfg.K} (K1={cfg.K1}, K2={cfg.K2}) "
        f"theta={cfg.theta_kind} rotated={cfg.rotated} "
        f"S3-orthogonal={design.s3_orthogonal} proportional-slices={design.proportional}",
        file=sys.stderr,
    )
    return 0


def cmd_figure(args) -> int:
    if args.name not in FIGURES:
        raise CLIError(f"unknown figure {args.name!r}; choose from {', '.join(FIGURES)}")
    output = args.output or "-"
    if args.name == "fig9":
        import io

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COMPLEXITY_COLUMNS)
        writer.writerows(complexity_rows())
        _write(buf.getvalue(), output)
        return 0
    cfg = _apply_overrides(preset(args.name), args)
    cfg.output = output
    rows = run_sweep(cfg, threads=args.threads)
    _write(rows_to_csv(rows, timing=args.timing), output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdris", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def run_opts(p):
        p.add_argument("--output", "-o", help="CSV path, '-' for stdout")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--trials", type=int, help="override trials per point")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $BDRIS_THREADS or 1)")
        p.add_argument("--timing", action="store_true",
                       help="add a wall_time column (output is then not reproducible)")

    p = sub.add_parser("sweep", help="run a Monte-Carlo sweep and write CSV")
    p.add_argument("config")
    run_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="identifiability report for every grid point")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("design", help="resolve and export a training design")
    p.add_argument("config")
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("figure", help="run a desk-scale figure preset")
    p.add_argument("name", help=", ".join(FIGURES))
    run_opts(p)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"bdris: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
