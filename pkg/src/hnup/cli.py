"""Command line: ``hnup build | analyze | table1 | render``.

Exit codes: 0 success, 2 budget exhausted or bad input, 3 invariant
violation (including a failed table1 check), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import report as rpt
from .arith import parse_rational
from .cantor import DEFAULT_BUDGET_BITS, MAX_ENUMERATION, VARIANTS, RatioSpec
from .errors import BudgetError, InvariantViolation
from .table1 import run_table1, table1_text

log = logging.getLogger("hnup")

OUT_DIR_ENV = "HNUP_OUT_DIR"
EXIT_OK, EXIT_BUDGET, EXIT_INVARIANT, EXIT_IO = 0, 2, 3, 4


@dataclass
class RunConfig:
    m: int = 2
    variant: str = "constant"
    a: str = "1/3"
    values: list = field(default_factory=list)
    seed: int = 0
    precision_bits: int = 64
    depth: int | None = None
    budget_bits: int = DEFAULT_BUDGET_BITS
    max_enumeration: int = MAX_ENUMERATION
    tol: float = 1e-9
    target: str = "4"
    point: str = ""
    mmax: int = 5
    planar: bool = True
    out: str | None = None
    format: str = "json"

    def validate(self):
        if self.budget_bits <= 0 or self.max_enumeration <= 0 or self.tol <= 0:
            raise ValueError("budgets and tolerances must be positive")
        if self.depth is not None and self.depth < 0:
            raise ValueError("depth must be non-negative")
        self.spec()
        return self

    def spec(self) -> RatioSpec:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {', '.join(VARIANTS)}")
        if self.variant == "random":
            return RatioSpec.random(self.seed, self.m, self.precision_bits)
        if self.variant == "explicit":
            return RatioSpec.explicit([parse_rational(v) for v in self.values], self.m)
        return RatioSpec(m=self.m, variant=self.variant, a=parse_rational(self.a))

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


def _config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    return cfg.validate()


def _out_path(cfg: RunConfig, default_name: str) -> Path | None:
    """Explicit --out wins; otherwise $HNUP_OUT_DIR/default_name; else stdout."""
    if cfg.out:
        p = Path(cfg.out)
        return p / default_name if p.is_dir() or cfg.out.endswith(os.sep) else p
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env) / default_name
    return None


def _emit(text: str, path: Path | None, meta: dict | None = None):
    if path is None:
        sys.stdout.write(text)
        return
    rpt.write_atomic(path, text)
    if meta is not None:
        rpt.write_atomic(path.with_name(path.name + ".meta.json"), rpt.dumps(meta))
    log.info("wrote %s", path)


def _meta(started: float) -> dict:
    return {"created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "elapsed_s": round(time.perf_counter() - started, 3)}


def cmd_build(cfg: RunConfig) -> int:
    started = time.perf_counter()
    k = 3 if cfg.depth is None else cfg.depth
    payload = rpt.build_payload(cfg.spec(), k, cfg.budget_bits, cfg.max_enumeration)
    if not payload["exact"]:
        log.warning(payload["warning"])
    report = rpt.envelope(cfg.echo(), payload)
    path = _out_path(cfg, "build.json" if cfg.format == "json" else f"intervals.{cfg.format}")
    if cfg.format == "csv":
        text = rpt.build_csv(payload)
    elif cfg.format == "svg":
        text = rpt.render_svg(report)
    else:
        text = rpt.dumps(report)
    _emit(text, path, _meta(started))
    # the JSON metadata travels next to CSV output
    if cfg.format == "csv" and path is not None:
        rpt.write_atomic(path.with_suffix(".json"), rpt.dumps(report))
    return EXIT_OK


ANALYSES = ("dim", "cap", "up", "porosity", "assembly")


def cmd_analyze(cfg: RunConfig, which: str) -> int:
    started = time.perf_counter()
    spec = cfg.spec()
    if which == "dim":
        payload = rpt.dim_payload(spec, cfg.depth or 4096)
    elif which == "cap":
        payload = rpt.cap_payload(spec, 8 if cfg.depth is None else cfg.depth, cfg.tol)
    elif which == "up":
        payload = rpt.up_payload(spec, parse_rational(cfg.target), cfg.depth or 16, cfg.point)
    elif which == "porosity":
        payload = rpt.porosity_payload(spec, cfg.depth or 6)
    else:
        payload = rpt.assembly_payload(cfg.mmax, cfg.depth or 8, parse_rational(cfg.target),
                                       seed=cfg.seed, planar=cfg.planar)
    report = rpt.envelope(cfg.echo(), payload)
    if cfg.format == "json":
        text = rpt.dumps(report)
    elif cfg.format == "csv":
        text = rpt.render_csv(report)
    else:
        text = rpt.render_svg(report)
    _emit(text, _out_path(cfg, f"{which}.{cfg.format}"), _meta(started))
    return EXIT_OK


def cmd_table1(cfg: RunConfig) -> int:
    started = time.perf_counter()
    result = run_table1()
    report = rpt.envelope(cfg.echo(), result)
    path = _out_path(cfg, "table1.json")
    if path is None and cfg.format == "text":
        sys.stdout.write(table1_text(result) + "\n")
    else:
        _emit(rpt.dumps(report), path, _meta(started))
    if path is not None:
        log.info("\n%s", table1_text(result))
    return EXIT_OK if result["passed"] else EXIT_INVARIANT


def cmd_render(cfg: RunConfig, report_path: str) -> int:
    with open(report_path, encoding="utf-8") as fh:
        report = json.load(fh)
    kind = report["result"]["kind"]
    fmt = cfg.format if cfg.format in ("svg", "csv") else "svg"
    text = rpt.render_svg(report) if fmt == "svg" else rpt.render_csv(report)
    _emit(text, _out_path(cfg, f"{kind}.{fmt}"))
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--m", type=int, help="branching count (default 2)")
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--a", help="ratio bound as an exact rational p/q")
    p.add_argument("--values", nargs="+", help="explicit ratios a_1 a_2 ... (p/q each)")
    p.add_argument("--depth", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--precision-bits", dest="precision_bits", type=int)
    p.add_argument("--budget-bits", dest="budget_bits", type=int)
    p.add_argument("--max-enumeration", dest="max_enumeration", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help=f"output file or directory (default: ${OUT_DIR_ENV} or stdout)")
    p.add_argument("--format", choices=("json", "csv", "svg", "text"))
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hnup", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hnup {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="intervals of a finite-depth approximation")
    _add_common(p)

    p = sub.add_parser("analyze", help="run one analysis pipeline")
    p.add_argument("which", choices=ANALYSES)
    _add_common(p)
    p.add_argument("--target", help="target annulus ratio M (p/q)")
    p.add_argument("--point", help="address of the probed point, e.g. 0110")
    p.add_argument("--mmax", type=int, help="largest component index for assembly")
    p.add_argument("--line", dest="planar", action="store_false", default=None,
                   help="assemble on the real line instead of the plane")

    p = sub.add_parser("table1", help="verify the implication table")
    _add_common(p)

    p = sub.add_parser("render", help="SVG or CSV plot data from a saved report")
    p.add_argument("report")
    _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.which)
        if args.command == "table1":
            return cmd_table1(cfg)
        return cmd_render(cfg, args.report)
    except BudgetError as e:
        log.error("budget exhausted: %s", e)
        return EXIT_BUDGET
    except InvariantViolation as e:
        log.error("invariant violated: %s", e)
        return EXIT_INVARIANT
    except OSError as e:
        log.error("I/O error: %s", e)
        return EXIT_IO
    except ValueError as e:
        log.error("invalid input: %s", e)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
