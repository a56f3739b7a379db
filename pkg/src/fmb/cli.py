"""Command-line entry point: ``fmb compute | verify | plot | schema``."""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bodies as bd
from .config import DEFAULT_QUAD, QuadConfig
from .meanbodies import FAMILIES, sample_family
from .starops import convexity_check_2d, write_star_csv
from .verify import REPORT_SCHEMA, SUITES, run_suite

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

COMMANDS = ("compute", "verify", "plot", "schema")
SCHEMA_KINDS = ("body", "report", "all")
ROUTES = ("direct", "closed_form", "split_quadrature", "z_route", "i_route")
PLOT_ORDERS = (0.5, 1.0, 1.5)


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line.

    Attributes
    ----------
    command:
        One of ``compute``, ``verify``, ``plot``, ``schema``.
    body_path:
        Body JSON file, or None for the built-in reference bodies.
    family:
        Mean-body family tag for ``compute``.
    p:
        Order of the mean body, or the single order a suite is restricted to.
    grid:
        Number of directions of a planar sample (at least 8).
    out_path:
        Output file or directory; None writes to standard output.
    seed:
        Seed of every random draw.
    tol_overrides:
        Replacement values for fields of :class:`QuadConfig`.
    """

    command: str
    body_path: Path | None = None
    family: str = "R"
    p: float | None = None
    grid: int = 720
    out_path: Path | None = None
    seed: int = 0
    tol_overrides: dict[str, float] = field(default_factory=dict)
    suite: str = "all"
    route: str = "direct"
    kind: str = "all"
    timing: bool = False
    threads: int | None = None

    def quad(self) -> QuadConfig:
        try:
            return DEFAULT_QUAD.with_(seed=self.seed, **self.tol_overrides)
        except TypeError as exc:
            raise UsageError(f"bad --tol override: {exc}") from exc


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


def write_atomic(path: Path, text: str) -> None:
    """Write text to a sibling temporary file, then rename it over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def dump_json(data) -> str:
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def load_body(path: Path) -> bd.BodySpec:
    """Read and validate a body file; every failure becomes a UsageError."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read body file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return bd.body_from_json(data)
    except bd.BodyValidationError as exc:
        lines = "\n".join(f"  - {d}" for d in exc.diagnostics)
        raise UsageError(f"{path}: invalid body\n{lines}") from exc


def _parse_tol(items: Sequence[str]) -> dict[str, float]:
    known = set(QuadConfig.__dataclass_fields__)
    out: dict[str, float] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in known:
            raise UsageError(f"--tol expects KEY=VALUE with KEY in {sorted(known)}; got {item!r}")
        kind = type(getattr(DEFAULT_QUAD, key))
        try:
            out[key] = kind(float(value)) if kind is int else kind(value)
        except ValueError as exc:
            raise UsageError(f"--tol {key}: {exc}") from exc
    return out


def star_csv(sample) -> str:
    buf = io.StringIO()
    write_star_csv(sample, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_compute(config: RunConfig) -> int:
    if config.body_path is None:
        raise UsageError("compute requires --body")
    if config.p is None:
        raise UsageError("compute requires --p")
    body = load_body(config.body_path)
    try:
        sample = sample_family(body, config.family, config.p, config.grid, config.route, config.quad())
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    diverged = int(np.count_nonzero(np.isinf(sample.radii)))
    if diverged:
        print(f"warning: {diverged} of {sample.size} radii diverged and were written as inf", file=sys.stderr)
    emit(star_csv(sample), config.out_path)
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    if config.suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {config.suite!r}; expected one of {', '.join(SUITES + ('all',))}")
    chosen = None
    if config.body_path is not None:
        chosen = {Path(config.body_path).stem: load_body(config.body_path)}
    result = run_suite(
        config.suite,
        bodies=chosen,
        seed=config.seed,
        quad=config.quad(),
        p=config.p,
        timing=config.timing,
        threads=config.threads,
    )
    emit(dump_json(result.to_json()), config.out_path)
    failed = [r for r in result.reports if not r.passed]
    for r in failed:
        print(f"FAIL {r.check_id} [{r.body_id}] margin={r.margin:.3g}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


def plot_series(p: float, grid: int, quad: QuadConfig = DEFAULT_QUAD) -> tuple[str, bool]:
    """CSV (angle, rho, x, y) of F_p of the square [-1, 1]^2 and its convexity verdict."""
    sample = sample_family(bd.box([1.0, 1.0]), "F", p, grid, quad=quad)
    angle = np.arctan2(sample.directions[:, 1], sample.directions[:, 0])
    rows = ["angle,rho,x,y"]
    for a, r, u in zip(angle, sample.radii, sample.directions):
        rows.append(",".join(f"{float(v):.17g}" for v in (a, r, r * u[0], r * u[1])))
    convex = convexity_check_2d(sample).convex
    return "\n".join(rows) + "\n", convex


def cmd_plot(config: RunConfig) -> int:
    orders = (config.p,) if config.p is not None else PLOT_ORDERS
    out_dir = config.out_path if config.out_path is not None else Path(".")
    quad = config.quad()
    for p in orders:
        text, convex = plot_series(p, config.grid, quad)
        target = Path(out_dir) / f"fourier_square_p{p:g}.csv"
        write_atomic(target, text)
        print(f"{target}: p={p:g} {'convex' if convex else 'not convex'}")
    return EXIT_OK


def cmd_schema(config: RunConfig) -> int:
    if config.kind not in SCHEMA_KINDS:
        raise UsageError(f"unknown schema kind {config.kind!r}; expected one of {', '.join(SCHEMA_KINDS)}")
    if config.kind == "body":
        data = bd.BODY_SCHEMA
    elif config.kind == "report":
        data = REPORT_SCHEMA
    else:
        data = {"body": bd.BODY_SCHEMA, "report": REPORT_SCHEMA}
    emit(dump_json(data), config.out_path)
    return EXIT_OK


HANDLERS = {"compute": cmd_compute, "verify": cmd_verify, "plot": cmd_plot, "schema": cmd_schema}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _grid(text: str) -> int:
    value = int(text)
    if value < 8:
        raise argparse.ArgumentTypeError("grid must be at least 8")
    return value


def _order(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("order must be finite")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmb", description="Mean bodies of convex bodies: compute, verify, plot.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="sample the radial function of a mean body to CSV")
    c.add_argument("--body", type=Path, required=True, help="body JSON file")
    c.add_argument("--family", choices=FAMILIES, default="R")
    c.add_argument("--p", type=_order, required=True, help="order of the mean body")
    c.add_argument("--grid", type=_grid, default=720, help="number of directions (planar bodies)")
    c.add_argument("--route", choices=ROUTES, default="direct", help="computation route for the F family")
    c.add_argument("--out", type=Path, default=None, help="output CSV (default: stdout)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE", help="override a quadrature setting")

    v = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    v.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES + ('all',))}")
    v.add_argument("--body", type=Path, default=None, help="body JSON file replacing the reference bodies")
    v.add_argument("--p", type=_order, default=None, help="restrict order-scanning suites to one order")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", type=Path, default=None, help="output JSON (default: stdout)")
    v.add_argument("--timing", action="store_true", help="record wall-clock runtimes in the report")
    v.add_argument("--threads", type=int, default=None, help="work pool size (default: FMB_THREADS or min(4, cpus))")
    v.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE", help="override a quadrature setting")

    pl = sub.add_parser("plot", help="write figure data for F_p of the square [-1, 1]^2")
    pl.add_argument("--p", type=_order, default=None, help="single order (default: 0.5, 1 and 1.5)")
    pl.add_argument("--grid", type=_grid, default=720)
    pl.add_argument("--out", type=Path, default=None, help="output directory (default: .)")
    pl.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE")

    s = sub.add_parser("schema", help="print the body and report JSON schemas")
    s.add_argument("--kind", default="all", help="body, report or all")
    s.add_argument("--out", type=Path, default=None)
    return parser


def parse_config(argv: Sequence[str] | None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        command=args.command,
        body_path=getattr(args, "body", None),
        family=getattr(args, "family", "R"),
        p=getattr(args, "p", None),
        grid=getattr(args, "grid", 720),
        out_path=args.out,
        seed=getattr(args, "seed", 0),
        tol_overrides=_parse_tol(getattr(args, "tol", [])),
        suite=getattr(args, "suite", "all"),
        route=getattr(args, "route", "direct"),
        kind=getattr(args, "kind", "all"),
        timing=getattr(args, "timing", False),
        threads=getattr(args, "threads", None),
    )


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_config(argv)
        return HANDLERS[config.command](config)
    except UsageError as exc:
        print(f"fmb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
