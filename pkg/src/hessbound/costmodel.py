"""Static operation counts for the two bounding pipelines.

``N_A`` counts value, gradient and eigenvalue-bound propagation (eigenvalue
arithmetic).  ``N_G`` counts value, gradient and interval Hessian propagation
plus the Gershgorin step.  ``dN_A`` is the extra work the eigenvalue column adds
on top of what a Gershgorin run already computes.

Counts are pure table lookups: they depend on the codelist and ``n`` only,
never on the box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .codelist import Codelist, Op
from .errors import CorpusError

__all__ = [
    "COLUMNS",
    "HERTZ_ROHN_COMPLEXITY",
    "CostCell",
    "OpCost",
    "CostTable",
    "LineCost",
    "CostReport",
    "default_cost_table",
    "count",
    "complexity_predicate",
    "format_report",
]

COLUMNS = ("val", "grad", "eig", "hess")
HERTZ_ROHN_COMPLEXITY = "O(2^n n^3)"


@dataclass(frozen=True)
class CostCell:
    """``q*m*(m+1) + l*m + c`` with non-negative integer coefficients."""

    q: int = 0
    l: int = 0  # noqa: E741
    c: int = 0
    source: str = "calibrated"

    def __post_init__(self) -> None:
        if min(self.q, self.l, self.c) < 0:
            raise CorpusError(f"negative cost coefficient in {self}")

    def __call__(self, m: int) -> int:
        return self.q * m * (m + 1) + self.l * m + self.c

    @property
    def degree(self) -> int:
        return 2 if self.q else (1 if self.l else 0)


@dataclass(frozen=True)
class OpCost:
    val: int
    grad: int
    eig: int
    hess: int


@dataclass(frozen=True)
class CostTable:
    cells: Mapping[Op, Mapping[str, CostCell]]
    offset: int = -1
    overhead: CostCell = field(default_factory=lambda: CostCell(1, 0, 0))

    def __post_init__(self) -> None:
        for op in Op:
            missing = set(COLUMNS) - set(self.cells.get(op, {}))
            if missing:
                raise CorpusError(f"cost table lacks {sorted(missing)} for {op.value}")

    def _m(self, n: int) -> int:
        return max(n + self.offset, 0)

    def cost(self, op: Op, column: str, n: int) -> int:
        return self.cells[op][column](self._m(n))

    def op_cost(self, op: Op, n: int) -> OpCost:
        m = self._m(n)
        cells = self.cells[op]
        return OpCost(*(cells[col](m) for col in COLUMNS))

    def gershgorin_overhead(self, n: int) -> int:
        return self.overhead(n)

    # -- text config ---------------------------------------------------------

    @classmethod
    def loads(cls, text: str) -> CostTable:
        cells: dict[Op, dict[str, CostCell]] = {}
        offset, overhead = -1, CostCell(1, 0, 0)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            tokens = raw.split("#", 1)[0].split()
            if not tokens:
                continue
            try:
                if tokens[0] == "offset" and len(tokens) == 2:
                    offset = int(tokens[1])
                elif tokens[0] == "overhead" and len(tokens) == 4:
                    overhead = CostCell(*map(int, tokens[1:]), source="printed")
                elif len(tokens) in (5, 6):
                    op = Op(tokens[0])
                    col = tokens[1]
                    if col not in COLUMNS:
                        raise ValueError(f"unknown column {col!r}")
                    source = tokens[5] if len(tokens) == 6 else "calibrated"
                    cells.setdefault(op, {})[col] = CostCell(*map(int, tokens[2:5]), source=source)
                else:
                    raise ValueError("malformed row")
            except ValueError as exc:
                raise CorpusError(f"cost table line {lineno}: {exc}: {raw.strip()!r}") from exc
        return cls(cells, offset, overhead)

    @classmethod
    def load(cls, path: str | Path) -> CostTable:
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        out = [f"offset {self.offset}", f"overhead {self.overhead.q} {self.overhead.l} {self.overhead.c}", ""]
        for op in Op:
            for col in COLUMNS:
                cell = self.cells[op][col]
                out.append(f"{op.value:<10} {col:<4} {cell.q:>2} {cell.l:>2} {cell.c:>2} {cell.source}")
        return "\n".join(out) + "\n"


def default_cost_table() -> CostTable:
    text = resources.files("hessbound").joinpath("data/cost_table.txt").read_text(encoding="utf-8")
    return CostTable.loads(text)


@dataclass(frozen=True)
class LineCost:
    k: int
    op: Op
    val: int
    grad: int
    eig: int
    hess: int


@dataclass(frozen=True)
class CostReport:
    n: int
    per_line: tuple[LineCost, ...]
    n_a: int
    n_g: int
    delta_n_a: int
    n_phi: int
    gershgorin_overhead: int

    def column_sum(self, column: str) -> int:
        return sum(getattr(row, column) for row in self.per_line)

    @property
    def ratio_a_g(self) -> float:
        return self.n_a / self.n_g if self.n_g else 0.0

    @property
    def ratio_delta_g(self) -> float:
        return self.delta_n_a / self.n_g if self.n_g else 0.0


def count(cl: Codelist, n: int | None = None, table: CostTable | None = None) -> CostReport:
    n = cl.n_vars if n is None else n
    table = table or default_cost_table()
    rows = []
    for k, line in enumerate(cl.lines, start=1):
        c = table.op_cost(line.op, n)
        rows.append(LineCost(k, line.op, c.val, c.grad, c.eig, c.hess))
    s_val = sum(r.val for r in rows)
    s_grad = sum(r.grad for r in rows)
    s_eig = sum(r.eig for r in rows if r.op is not Op.VAR)
    s_hess = sum(r.hess for r in rows)
    overhead = table.gershgorin_overhead(n)
    return CostReport(
        n=n,
        per_line=tuple(rows),
        n_a=s_val + s_grad + s_eig,
        n_g=s_val + s_grad + s_hess + overhead,
        delta_n_a=s_eig,
        n_phi=s_val,
        gershgorin_overhead=overhead,
    )


def complexity_predicate(report: CostReport) -> bool:
    return report.n_a <= report.n_g


def format_report(report: CostReport) -> str:
    lines = [f"{'k':>3} {'op':<10} {'val':>6} {'grad':>6} {'eig':>6} {'hess':>6}"]
    for r in report.per_line:
        lines.append(f"{r.k:>3} {r.op.value:<10} {r.val:>6} {r.grad:>6} {r.eig:>6} {r.hess:>6}")
    lines.append(
        f"{'':>3} {'sum':<10} {report.column_sum('val'):>6} {report.column_sum('grad'):>6} "
        f"{report.delta_n_a:>6} {report.column_sum('hess'):>6}"
    )
    lines.append(f"gershgorin_overhead={report.gershgorin_overhead}")
    lines.append(
        f"N_A={report.n_a} N_G={report.n_g} dNA={report.delta_n_a} "
        f"N_A/N_G={100 * report.ratio_a_g:.2f}% dNA/N_G={100 * report.ratio_delta_g:.2f}%"
    )
    return "\n".join(lines)
