"""Command-line front end: ``eval``, ``sweep`` and ``figure``.

Exit codes: 0 success, 2 scenario/schema error, 3 physics-domain error,
4 quadrature convergence error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import ConvergenceError, PhysicsDomainError
from .figures import FIGURES
from .numerics import set_default_tolerance
from .scenario import (
    SWEEP_COLUMNS,
    SchemaError,
    build,
    check_result,
    evaluate,
    load_file,
    resolve_axis,
    sweep_row,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PHYSICS = 3
EXIT_CONVERGENCE = 4
OUT_DIR_ENV = "FSOQKD_OUT_DIR"


def _init_worker(tolerance):
    if tolerance is not None:
        set_default_tolerance(tolerance)


def _write_text(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_eval(args) -> int:
    doc = load_file(args.scenario)
    scenario = build(doc, Path(args.scenario).resolve().parent)
    result, failure = evaluate(scenario, seed=args.seed)
    check_result(result)
    _write_text(json.dumps(result, indent=2) + "\n", args.out)
    if isinstance(failure, ConvergenceError):
        return EXIT_CONVERGENCE
    if failure is not None:
        return EXIT_PHYSICS
    return EXIT_OK


def _sweep_task(task):
    doc, field_name, index, value, base_dir = task
    return sweep_row(doc, field_name, index, value, base_dir)


def cmd_sweep(args) -> int:
    doc = load_file(args.scenario)
    field_name = resolve_axis(args.axis)
    grid = doc.get("sweep", {}).get(field_name)
    if grid is None:
        declared = ", ".join(doc.get("sweep", {})) or "none"
        raise SchemaError(f"/sweep: axis {args.axis!r} is not declared (declared: {declared})")
    base_dir = Path(args.scenario).resolve().parent
    build(doc, base_dir)  # fail fast on bad base values
    tasks = [(doc, field_name, i, v, base_dir) for i, v in enumerate(grid)]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs, initializer=_init_worker,
                                 initargs=(args.tolerance,)) as pool:
            rows = list(pool.map(_sweep_task, tasks))  # map keeps grid order
    else:
        rows = [_sweep_task(t) for t in tasks]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    writer.writerows(rows)
    _write_text(buf.getvalue(), args.out)
    return EXIT_OK


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_table(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_format_cell(v) for v in row] for row in rows)


def cmd_figure(args) -> int:
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "figures")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in FIGURES[args.name]().items():
        path = out_dir / name
        write_table(path, header, rows)
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsoqkd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps (default 1)")
    parser.add_argument("--seed", type=int, default=None, help="seed for Monte-Carlo estimation")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="relative quadrature tolerance (default 1e-9)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one scenario and print a JSON result")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluate a scenario over one declared grid and write CSV")
    p.add_argument("scenario")
    p.add_argument("--axis", required=True,
                   help="z, h, theta, N, a_R or the field name (distance_km, altitude_km, ...)")
    p.add_argument("--out", default="-", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="write the data series of a built-in figure preset")
    p.add_argument("name", choices=sorted(FIGURES))
    p.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or ./figures)")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_SCHEMA
    if args.tolerance is not None:
        if not 0 < args.tolerance < 1:
            print("error: --tolerance must lie in (0, 1)", file=sys.stderr)
            return EXIT_SCHEMA
        set_default_tolerance(args.tolerance)
    try:
        return args.func(args)
    except SchemaError as exc:
        for msg in exc.messages:
            print(f"schema error: {msg}", file=sys.stderr)
        return EXIT_SCHEMA
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PhysicsDomainError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
