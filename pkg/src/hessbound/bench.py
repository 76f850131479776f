"""Benchmark harness: random boxes, three-way bound comparison, classification and aggregation.

For every function case the harness draws random sub-boxes of its domain,
computes eigenvalue bounds by eigenvalue arithmetic (A), Gershgorin on the
interval Hessian (G) and Hertz-Rohn (H), and labels how the arithmetic bounds
compare:

=========  ====================================  ====================================
label      lower bound                           upper bound
=========  ====================================  ====================================
``-``      lo_A < lo_G                           hi_A > hi_G
``o``      lo_A = lo_G                           hi_A = hi_G
``+``      lo_G < lo_A <= lo_H                   hi_G > hi_A >= hi_H
``++``     lo_A > lo_H                           hi_A < hi_H
=========  ====================================  ====================================

Every random stream is keyed by ``(seed, crc32(case name), trial, attempt)`` so
results do not depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import zlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .codelist import Codelist, parse
from .costmodel import CostReport, CostTable, count
from .errors import CorpusError, DimensionLimitExceeded, DomainViolation, InconsistentBounds
from .interval import Box
from .propagate import Mode, propagate
from .spectral import HERTZ_ROHN_MAX_DIM, Method, SpectralBounds, gershgorin, hertz_rohn, sampled_oracle

__all__ = [
    "ClassLabel",
    "FunctionCase",
    "TrialRecord",
    "Tally",
    "CaseResult",
    "DimensionRow",
    "AggregateReport",
    "random_boxes",
    "compute_bounds",
    "classify",
    "run_case",
    "run_corpus",
    "aggregate",
    "load_corpus",
    "parse_corpus",
    "load_boxes",
    "parse_boxes",
    "trials_csv",
    "aggregate_csv",
    "ranking_csv",
    "aggregate_markdown",
    "overall_line",
    "TRIALS_HEADER",
]

EQ_REL_TOL = 1e-4  # ties at roughly four significant digits count as equal
CONTAIN_REL_TOL = 1e-9
MAX_RESAMPLE = 10
ORACLE_EVERY = 20  # spot-check one trial in twenty
ORACLE_SAMPLES = 64

TRIALS_HEADER = ("case", "trial", "feasible", "lo_A", "hi_A", "lo_G", "hi_G", "lo_H", "hi_H", "class_lo", "class_hi")


class ClassLabel(str, Enum):
    MINUS = "-"
    CIRCLE = "o"
    PLUS = "+"
    PLUS_PLUS = "++"


LABELS = (ClassLabel.MINUS, ClassLabel.CIRCLE, ClassLabel.PLUS, ClassLabel.PLUS_PLUS)


@dataclass(frozen=True)
class FunctionCase:
    name: str
    n: int
    domain: Box
    expression: str

    def __post_init__(self) -> None:
        if not self.name or any(ch in self.name for ch in ";,\n\""):
            raise CorpusError(f"invalid case name {self.name!r}")
        if self.domain.n != self.n:
            raise CorpusError(f"case {self.name}: domain has {self.domain.n} components, n = {self.n}")

    def codelist(self) -> Codelist:
        return parse(self.expression, self.n)


@dataclass(frozen=True)
class TrialRecord:
    case: str
    trial: int
    box: Box
    feasible: bool
    bounds_a: SpectralBounds | None = None
    bounds_g: SpectralBounds | None = None
    bounds_h: SpectralBounds | None = None
    class_lo: ClassLabel | None = None
    class_hi: ClassLabel | None = None
    oracle: SpectralBounds | None = None


@dataclass
class Tally:
    case: str
    n: int
    lower: dict[ClassLabel, int] = field(default_factory=lambda: dict.fromkeys(LABELS, 0))
    upper: dict[ClassLabel, int] = field(default_factory=lambda: dict.fromkeys(LABELS, 0))
    feasible: int = 0
    infeasible: int = 0

    def add(self, record: TrialRecord) -> None:
        if not record.feasible:
            self.infeasible += 1
            return
        self.feasible += 1
        self.lower[record.class_lo] += 1
        self.upper[record.class_hi] += 1

    def column_sum(self, label: ClassLabel) -> int:
        return self.lower[label] + self.upper[label]

    def percent(self, label: ClassLabel) -> float:
        """Share of ``label`` among all lower and upper labels, in percent."""
        return 100.0 * self.column_sum(label) / (2 * self.feasible) if self.feasible else 0.0

    @property
    def rank_key(self) -> tuple:
        return (
            -self.column_sum(ClassLabel.PLUS_PLUS),
            -self.column_sum(ClassLabel.PLUS),
            -self.column_sum(ClassLabel.CIRCLE),
            -self.column_sum(ClassLabel.MINUS),
            self.case,
        )


@dataclass(frozen=True)
class CaseResult:
    case: FunctionCase
    records: tuple[TrialRecord, ...]
    tally: Tally
    cost: CostReport


# --- random boxes ------------------------------------------------------------------


def _stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def _rng(seed: int, stream: int, trial: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, stream, trial, attempt])


def _draw_box(domain: Box, rng: np.random.Generator) -> Box:
    lo, hi = domain.lower, domain.upper
    corners = np.sort(lo + (hi - lo) * rng.random((2, domain.n)), axis=0)
    corners = np.clip(corners, lo, hi)
    return Box.from_bounds(corners[0], corners[1])


def random_boxes(domain: Box, count: int, seed: int, stream: int = 0) -> list[Box]:
    """``count`` sub-boxes of ``domain``; each side is the sorted pair of two uniform draws."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return [_draw_box(domain, _rng(seed, stream, t, 0)) for t in range(count)]


# --- bounds and classification -----------------------------------------------------


def compute_bounds(cl: Codelist, box: Box) -> tuple[SpectralBounds, SpectralBounds, SpectralBounds]:
    trace = propagate(cl, box, Mode.BOTH)
    eig = trace.eigen
    a = SpectralBounds(eig.lo, eig.hi, Method.ARITHMETIC)
    H = trace.hessian
    return a, gershgorin(H), hertz_rohn(H)


def _close(x: float, y: float, rel_tol: float) -> bool:
    return x == y or abs(x - y) <= rel_tol * max(abs(x), abs(y))


def _scale(*bounds: SpectralBounds) -> float:
    return max(1.0, *(max(abs(b.lo), abs(b.hi)) for b in bounds))


def classify(
    a: SpectralBounds, g: SpectralBounds, h: SpectralBounds, rel_tol: float = EQ_REL_TOL
) -> tuple[ClassLabel, ClassLabel]:
    """Label the lower and upper arithmetic bound against Gershgorin and Hertz-Rohn."""
    if not g.contains(h, tol=CONTAIN_REL_TOL * _scale(g, h)):
        raise InconsistentBounds(f"Hertz-Rohn bounds {tuple(h)} not inside Gershgorin bounds {tuple(g)}")

    if _close(a.lo, g.lo, rel_tol):
        lo = ClassLabel.CIRCLE
    elif a.lo < g.lo:
        lo = ClassLabel.MINUS
    elif a.lo <= h.lo or _close(a.lo, h.lo, rel_tol):
        lo = ClassLabel.PLUS
    else:
        lo = ClassLabel.PLUS_PLUS

    if _close(a.hi, g.hi, rel_tol):
        hi = ClassLabel.CIRCLE
    elif a.hi > g.hi:
        hi = ClassLabel.MINUS
    elif a.hi >= h.hi or _close(a.hi, h.hi, rel_tol):
        hi = ClassLabel.PLUS
    else:
        hi = ClassLabel.PLUS_PLUS
    return lo, hi


# --- running cases -------------------------------------------------------------------


def _evaluate(
    case: FunctionCase, cl: Codelist, trial: int, box: Box, seed: int, check_oracle: bool, eq_tol: float
) -> TrialRecord:
    a, g, h = compute_bounds(cl, box)
    lo, hi = classify(a, g, h, eq_tol)
    oracle = None
    if check_oracle:
        oracle = sampled_oracle(cl, box, ORACLE_SAMPLES, seed=seed)
        for b in (a, g, h):
            if not b.contains(oracle, tol=CONTAIN_REL_TOL * _scale(b, oracle)):
                raise InconsistentBounds(
                    f"{case.name} trial {trial}: sampled eigenvalues {tuple(oracle)} escape {b.method.name} bounds {tuple(b)}"
                )
    return TrialRecord(case.name, trial, box, True, a, g, h, lo, hi, oracle)


def run_case(
    case: FunctionCase,
    trials: int = 100,
    seed: int = 0,
    boxes: Sequence[Box] | None = None,
    max_dim: int = HERTZ_ROHN_MAX_DIM,
    eq_tol: float = EQ_REL_TOL,
) -> tuple[list[TrialRecord], Tally]:
    """Run ``trials`` random boxes (or exactly the pinned ``boxes``) for one case.

    Random boxes that leave the function's domain are redrawn up to ten times
    before the slot is recorded as infeasible; pinned boxes are never redrawn.
    """
    cl = case.codelist()
    if case.n > max_dim:
        raise DimensionLimitExceeded(f"case {case.name} has n={case.n} above the Hertz-Rohn cap {max_dim}")
    stream = _stream_key(case.name)
    tally = Tally(case.name, case.n)
    records: list[TrialRecord] = []
    slots = len(boxes) if boxes is not None else trials
    for t in range(slots):
        check = t % ORACLE_EVERY == 0
        oracle_seed = int(_rng(seed, stream, t, MAX_RESAMPLE + 1).integers(2**31))
        candidates = [boxes[t]] if boxes is not None else None
        record = None
        for attempt in range(1 if candidates else MAX_RESAMPLE + 1):
            box = candidates[0] if candidates else _draw_box(case.domain, _rng(seed, stream, t, attempt))
            try:
                record = _evaluate(case, cl, t, box, oracle_seed, check, eq_tol)
                break
            except DomainViolation:
                record = TrialRecord(case.name, t, box, False)
        records.append(record)
        tally.add(record)
    return records, tally


def _run_one(args) -> CaseResult:
    case, trials, seed, boxes, table, eq_tol = args
    records, tally = run_case(case, trials, seed, boxes, eq_tol=eq_tol)
    return CaseResult(case, tuple(records), tally, count(case.codelist(), case.n, table))


def run_corpus(
    cases: Sequence[FunctionCase],
    trials: int = 100,
    seed: int = 0,
    boxes: Mapping[str, Sequence[Box]] | None = None,
    jobs: int = 1,
    table: CostTable | None = None,
    eq_tol: float = EQ_REL_TOL,
) -> list[CaseResult]:
    """Run every case; results come back in corpus order whatever ``jobs`` is."""
    boxes = boxes or {}
    work = [(c, trials, seed, boxes.get(c.name), table, eq_tol) for c in cases]
    if jobs <= 1 or len(work) <= 1:
        return [_run_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, work))


# --- aggregation ---------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionRow:
    n: int | None  # None for the overall row
    examples: int
    percent: tuple[float, float, float, float]  # -, o, +, ++
    mean_na_ng: float
    mean_dna_ng: float
    std_na_ng: float
    std_dna_ng: float


@dataclass(frozen=True)
class AggregateReport:
    rows: tuple[DimensionRow, ...]
    overall: DimensionRow
    ranking: tuple[tuple[int, Tally, CostReport], ...]


def _row(n: int | None, pairs: list[tuple[Tally, CostReport]]) -> DimensionRow:
    counted = [t for t, _ in pairs if t.feasible]
    pct = tuple(statistics.fmean([t.percent(lab) for t in counted]) if counted else 0.0 for lab in LABELS)
    ra = [100.0 * r.ratio_a_g for _, r in pairs]
    rd = [100.0 * r.ratio_delta_g for _, r in pairs]
    return DimensionRow(
        n,
        len(pairs),
        pct,
        statistics.fmean(ra) if ra else 0.0,
        statistics.fmean(rd) if rd else 0.0,
        statistics.pstdev(ra) if ra else 0.0,
        statistics.pstdev(rd) if rd else 0.0,
    )


def aggregate(tallies: Sequence[Tally], reports: Sequence[CostReport]) -> AggregateReport:
    """Per-dimension class shares and cost ratios, plus the ranked per-case listing.

    Class shares pool lower and upper labels and are averaged over cases with
    at least one feasible trial; standard deviations are population ones.
    """
    if len(tallies) != len(reports):
        raise ValueError("tallies and cost reports must be paired")
    pairs = list(zip(tallies, reports))
    by_n: dict[int, list] = defaultdict(list)
    for t, r in pairs:
        by_n[t.n].append((t, r))
    rows = tuple(_row(n, by_n[n]) for n in sorted(by_n))
    ranked = sorted(pairs, key=lambda p: p[0].rank_key)
    ranking = tuple((i, t, r) for i, (t, r) in enumerate(ranked, start=1))
    return AggregateReport(rows, _row(None, pairs), ranking)


# --- corpus and boxes files --------------------------------------------------------


def _parse_bounds(text: str, where: str) -> Box:
    try:
        values = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise CorpusError(f"{where}: bad number in {text!r}") from exc
    if not values or len(values) % 2:
        raise CorpusError(f"{where}: expected lo,hi pairs, got {len(values)} numbers")
    try:
        return Box.from_bounds(values[0::2], values[1::2])
    except ValueError as exc:
        raise CorpusError(f"{where}: {exc}") from exc


def parse_corpus(text: str) -> list[FunctionCase]:
    """Parse corpus text: ``name; n; lo_1,hi_1,...,lo_n,hi_n; expression`` per line, or a JSON array."""
    stripped = text.lstrip()
    if stripped.startswith("["):
        return _parse_corpus_json(json.loads(stripped))
    cases = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(";", 3)]
        if len(parts) != 4:
            raise CorpusError(f"corpus line {lineno}: expected 4 ';'-separated fields")
        name, n_text, bounds, expr = parts
        try:
            n = int(n_text)
        except ValueError as exc:
            raise CorpusError(f"corpus line {lineno}: bad dimension {n_text!r}") from exc
        cases.append(FunctionCase(name, n, _parse_bounds(bounds, f"corpus line {lineno}"), expr))
    _check_unique(cases)
    return cases


def _parse_corpus_json(data) -> list[FunctionCase]:
    if not isinstance(data, list):
        raise CorpusError("JSON corpus must be an array")
    cases = []
    for i, item in enumerate(data):
        try:
            domain = item["domain"]
            flat = [v for pair in domain for v in pair] if domain and isinstance(domain[0], list) else domain
            box = Box.from_bounds(flat[0::2], flat[1::2])
            cases.append(FunctionCase(item["name"], int(item["n"]), box, item["expression"]))
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise CorpusError(f"JSON corpus entry {i}: {exc}") from exc
    _check_unique(cases)
    return cases


def _check_unique(cases: Iterable[FunctionCase]) -> None:
    seen = set()
    for c in cases:
        if c.name in seen:
            raise CorpusError(f"duplicate case name {c.name!r}")
        seen.add(c.name)


def load_corpus(path: str | Path) -> list[FunctionCase]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def parse_boxes(text: str) -> dict[str, list[Box]]:
    """Pinned boxes: ``name; lo_1,hi_1,...,lo_n,hi_n`` per line, in trial order."""
    out: dict[str, list[Box]] = defaultdict(list)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, bounds = line.partition(";")
        if not sep:
            raise CorpusError(f"boxes line {lineno}: expected 'name; bounds'")
        out[name.strip()].append(_parse_bounds(bounds, f"boxes line {lineno}"))
    return dict(out)


def load_boxes(path: str | Path) -> dict[str, list[Box]]:
    return parse_boxes(Path(path).read_text(encoding="utf-8"))


# --- writers ---------------------------------------------------------------------------


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x: float) -> str:
    return repr(float(x) + 0.0)  # + 0.0 folds -0.0


def trials_csv(records: Iterable[TrialRecord]) -> str:
    rows = []
    for r in records:
        if r.feasible:
            rows.append([
                r.case, r.trial, 1,
                _num(r.bounds_a.lo), _num(r.bounds_a.hi),
                _num(r.bounds_g.lo), _num(r.bounds_g.hi),
                _num(r.bounds_h.lo), _num(r.bounds_h.hi),
                r.class_lo.value, r.class_hi.value,
            ])
        else:
            rows.append([r.case, r.trial, 0, "", "", "", "", "", "", "", ""])
    return _csv_text(TRIALS_HEADER, rows)


AGGREGATE_HEADER = ("n", "examples", "minus", "circle", "plus", "plusplus",
                    "mean_na_ng", "mean_dna_ng", "std_na_ng", "std_dna_ng")


def _row_cells(row: DimensionRow) -> list[str]:
    return [
        "all" if row.n is None else str(row.n),
        str(row.examples),
        *(f"{p:.2f}" for p in row.percent),
        f"{row.mean_na_ng:.2f}", f"{row.mean_dna_ng:.2f}", f"{row.std_na_ng:.2f}", f"{row.std_dna_ng:.2f}",
    ]


def _all_rows(report: AggregateReport) -> tuple[DimensionRow, ...]:
    # an empty corpus has no overall row either
    return (*report.rows, report.overall) if report.overall.examples else ()


def aggregate_csv(report: AggregateReport) -> str:
    return _csv_text(AGGREGATE_HEADER, [_row_cells(r) for r in _all_rows(report)])


RANKING_HEADER = ("rank", "case", "n", "feasible", "infeasible",
                  "lo_minus", "lo_circle", "lo_plus", "lo_plusplus",
                  "hi_minus", "hi_circle", "hi_plus", "hi_plusplus",
                  "N_A", "N_G", "dN_A", "na_ng", "dna_ng")


def ranking_csv(report: AggregateReport) -> str:
    rows = []
    for rank, t, c in report.ranking:
        rows.append([
            rank, t.case, t.n, t.feasible, t.infeasible,
            *(t.lower[lab] for lab in LABELS), *(t.upper[lab] for lab in LABELS),
            c.n_a, c.n_g, c.delta_n_a, f"{100 * c.ratio_a_g:.2f}", f"{100 * c.ratio_delta_g:.2f}",
        ])
    return _csv_text(RANKING_HEADER, rows)


def aggregate_markdown(report: AggregateReport) -> str:
    out = ["## Classes per case", ""]
    out.append("| rank | case | n | lo (-) | lo (o) | lo (+) | lo (++) | hi (-) | hi (o) | hi (+) | hi (++) "
               "| N_A | N_G | dN_A | N_A/N_G % | dN_A/N_G % |")
    out.append("|" + "---:|" * 16)
    for rank, t, c in report.ranking:
        cells = [rank, t.case, t.n, *(t.lower[lab] for lab in LABELS), *(t.upper[lab] for lab in LABELS),
                 c.n_a, c.n_g, c.delta_n_a, f"{100 * c.ratio_a_g:.2f}", f"{100 * c.ratio_delta_g:.2f}"]
        out.append("| " + " | ".join(map(str, cells)) + " |")
    out += ["", "## Aggregation by dimension", ""]
    out.append("| n | examples | (-) % | (o) % | (+) % | (++) % | mean N_A/N_G % | mean dN_A/N_G % "
               "| std N_A/N_G % | std dN_A/N_G % |")
    out.append("|" + "---:|" * 10)
    for row in _all_rows(report):
        out.append("| " + " | ".join(_row_cells(row)) + " |")
    return "\n".join(out) + "\n"


def overall_line(report: AggregateReport) -> str:
    o = report.overall
    if not o.examples:
        return "all: no cases"
    p = o.percent
    return (f"all: examples={o.examples} (-)={p[0]:.2f}% (o)={p[1]:.2f}% (+)={p[2]:.2f}% (++)={p[3]:.2f}% "
            f"N_A/N_G={o.mean_na_ng:.2f}% dNA/N_G={o.mean_dna_ng:.2f}%")

