"""``hessbound`` command line.

Exit codes: 0 success, 1 malformed input (expression, box, corpus, cost table),
2 domain violation, 3 Hertz-Rohn dimension cap exceeded, 4 inconsistent bounds.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import re
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .bench import (
    EQ_REL_TOL,
    aggregate,
    aggregate_csv,
    aggregate_markdown,
    load_boxes,
    load_corpus,
    overall_line,
    parse_boxes,
    parse_corpus,
    ranking_csv,
    trials_csv,
)
from .bench import run_corpus
from .codelist import dump, format_line, parse
from .costmodel import HERTZ_ROHN_COMPLEXITY, CostTable, count, default_cost_table, format_report
from .errors import (
    CorpusError,
    DimensionError,
    DimensionLimitExceeded,
    DomainViolation,
    InconsistentBounds,
    ParseError,
)
from .interval import Box
from .propagate import Mode, propagate
from .spectral import HERTZ_ROHN_MAX_DIM, gershgorin, hertz_rohn, sampled_oracle

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_DIMENSION, EXIT_INCONSISTENT = 0, 1, 2, 3, 4

BUILTIN_PREFIX = "builtin:"
BUILTIN_CORPORA = {"demo": "demo_corpus.txt", "illustrative": "illustrative.txt"}
BUILTIN_BOXES = {"illustrative": "illustrative_boxes.txt"}


def fmt(x: float, digits: int = 6) -> str:
    s = f"{x:.{digits}g}"
    return "0" if s in ("-0", "0") else s


def parse_box(text: str) -> Box:
    """``"lo,hi;lo,hi;..."`` into a box."""
    dims = []
    for part in text.split(";"):
        fields = [f.strip() for f in part.split(",")]
        if len(fields) != 2:
            raise CorpusError(f"box component {part!r} is not 'lo,hi'")
        try:
            dims.append((float(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise CorpusError(f"bad number in box component {part!r}") from exc
    try:
        return Box.from_bounds([d[0] for d in dims], [d[1] for d in dims])
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc


def _infer_n(expr: str) -> int:
    idx = [int(m) for m in re.findall(r"x(\d+)", expr)]
    if not idx:
        raise ParseError("cannot infer the dimension; pass --n")
    return max(idx)


def _builtin_text(arg: str, table: dict[str, str], kind: str) -> str | None:
    if not arg.startswith(BUILTIN_PREFIX):
        return None
    name = arg[len(BUILTIN_PREFIX):]
    if name not in table:
        raise CorpusError(f"unknown built-in {kind} {name!r}; choose from {sorted(table)}")
    return resources.files("hessbound").joinpath("data", table[name]).read_text(encoding="utf-8")


def _cost_table(path: str | None) -> CostTable:
    return CostTable.load(path) if path else default_cost_table()


# --- subcommands -------------------------------------------------------------------


def cmd_bounds(args) -> int:
    box = parse_box(args.box)
    n = args.n or box.n
    if n != box.n:
        raise DimensionError(f"--n {n} does not match the box dimension {box.n}")
    cl = parse(args.expr, n)
    methods = [m.strip().upper() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - {"A", "G", "H", "S"}
    if unknown:
        raise CorpusError(f"unknown method(s) {sorted(unknown)}; use A, G, H, S")
    if "H" in methods and n > args.max_dim:
        raise DimensionLimitExceeded(f"Hertz-Rohn is capped at n <= {args.max_dim}, got n = {n}")
    trace = propagate(cl, box, Mode.BOTH, inflate_eps=args.inflate)
    H = trace.hessian
    for m in methods:
        if m == "A":
            lo, hi = trace.eigen.lo, trace.eigen.hi
        elif m == "G":
            lo, hi = gershgorin(H)
        elif m == "H":
            lo, hi = hertz_rohn(H, args.max_dim)
        else:
            lo, hi = sampled_oracle(cl, box, args.samples, args.seed)
        print(f"{m} {fmt(lo, args.digits)} {fmt(hi, args.digits)}")
    return EXIT_OK


def cmd_codelist(args) -> int:
    box = parse_box(args.box) if args.box else None
    n = args.n or (box.n if box else _infer_n(args.expr))
    cl = parse(args.expr, n, cse=args.cse)
    if box is None:
        print(dump(cl))
        return EXIT_OK
    trace = propagate(cl, box, Mode.BOTH)
    d = args.digits

    def iv(x) -> str:
        return f"[{fmt(x.lo, d)}, {fmt(x.hi, d)}]"

    for k, line in enumerate(cl.lines, start=1):
        rec = trace.line(k)
        grad = ", ".join(iv(g) for g in rec["grad"])
        print(format_line(k, line))
        print(f"    val  {iv(rec['val'])}")
        print(f"    grad ({grad})")
        print(f"    eig  {iv(rec['eig'])}")
        if args.hessian:
            Hk = rec["hess"]
            for i in range(n):
                print("    hess " + " ".join(iv(Hk[i, j]) for j in range(n)))
    return EXIT_OK


def cmd_count(args) -> int:
    n = args.n or _infer_n(args.expr)
    cl = parse(args.expr, n)
    report = count(cl, n, _cost_table(args.cost_table))
    print(format_report(report))
    print(f"hertz_rohn={HERTZ_ROHN_COMPLEXITY}")
    return EXIT_OK


def cmd_bench(args) -> int:
    text = _builtin_text(args.corpus, BUILTIN_CORPORA, "corpus")
    cases = parse_corpus(text) if text is not None else load_corpus(args.corpus)
    boxes = {}
    if args.boxes_file:
        btext = _builtin_text(args.boxes_file, BUILTIN_BOXES, "boxes file")
        boxes = parse_boxes(btext) if btext is not None else load_boxes(args.boxes_file)
        unknown = set(boxes) - {c.name for c in cases}
        if unknown:
            raise CorpusError(f"boxes given for cases not in the corpus: {sorted(unknown)}")

    results = run_corpus(cases, args.trials, args.seed, boxes, args.jobs, _cost_table(args.cost_table), args.eq_tol)
    report = aggregate([r.tally for r in results], [r.cost for r in results])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.csv").write_text(trials_csv(rec for r in results for rec in r.records), encoding="utf-8")
    (out / "aggregate.csv").write_text(aggregate_csv(report), encoding="utf-8")
    (out / "ranking.csv").write_text(ranking_csv(report), encoding="utf-8")
    (out / "report.md").write_text(aggregate_markdown(report), encoding="utf-8")
    print(overall_line(report))
    print(f"wrote {out / 'trials.csv'}, aggregate.csv, ranking.csv, report.md", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    box = parse_box(args.box)
    cl = parse(args.expr, args.n or box.n)
    lo, hi = sampled_oracle(cl, box, args.samples, args.seed)
    print(f"S {fmt(lo, args.digits)} {fmt(hi, args.digits)}")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


VALUE_FLAGS = ("--box", "--expr")


def _glue_values(argv: Sequence[str]) -> list[str]:
    # box strings such as "-0.3,0.2;..." look like options to argparse
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hessbound", description="Eigenvalue bounds for Hessians over boxes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, box_required: bool) -> None:
        sp.add_argument("--expr", required=True, help="expression in x1..xn")
        sp.add_argument("--box", required=box_required, help='box as "lo,hi;lo,hi;..."')
        sp.add_argument("--n", type=int, help="dimension (default: from the box or the expression)")
        sp.add_argument("--digits", type=int, default=6, help="significant digits printed (default 6)")

    b = sub.add_parser("bounds", help="spectral bounds on one box")
    common(b, True)
    b.add_argument("--methods", default="A,G,H", help="comma list of A (arithmetic), G, H, S (sampled)")
    b.add_argument("--inflate", type=float, default=0.0, help="relative outward widening per line")
    b.add_argument("--max-dim", type=int, default=HERTZ_ROHN_MAX_DIM, help="Hertz-Rohn dimension cap")
    b.add_argument("--samples", type=int, default=1000, help="sample count for method S")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("codelist", help="print the codelist, or a per-line trace when --box is given")
    common(c, False)
    c.add_argument("--cse", action="store_true", help="share identical subexpressions")
    c.add_argument("--hessian", action="store_true", help="include interval Hessians in the trace")
    c.set_defaults(func=cmd_codelist)

    k = sub.add_parser("count", help="static operation counts")
    k.add_argument("--expr", required=True)
    k.add_argument("--n", type=int)
    k.add_argument("--cost-table", help="alternate cost table file")
    k.set_defaults(func=cmd_count)

    r = sub.add_parser("bench", help="random-box benchmark over a corpus")
    r.add_argument("--corpus", required=True, help=f"corpus file, or {BUILTIN_PREFIX}demo / {BUILTIN_PREFIX}illustrative")
    r.add_argument("--boxes-file", help=f"pinned boxes per case, or {BUILTIN_PREFIX}illustrative")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", default="bench_out", help="output directory")
    r.add_argument("--eq-tol", type=float, default=EQ_REL_TOL, help="relative tolerance for the (o) class")
    r.add_argument("--cost-table", help="alternate cost table file")
    r.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="sampled inner bound of the spectral range")
    common(o, True)
    o.add_argument("--samples", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except DomainViolation as exc:
        print(f"domain violation: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DimensionLimitExceeded as exc:
        print(f"dimension cap: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except InconsistentBounds as exc:
        print(f"inconsistent bounds: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ParseError, CorpusError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
