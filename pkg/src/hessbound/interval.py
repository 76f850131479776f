"""Closed-interval arithmetic over finite doubles.

Scalars are :class:`Interval` objects.  Interval vectors and (symmetric)
interval matrices keep their lower and upper endpoints in two numpy arrays so
that componentwise operations stay vectorised; every componentwise operation
uses the same endpoint formulas as the scalar one, so a vector entry is
bit-for-bit what the scalar rule would give.

All endpoint arithmetic is round-to-nearest.  Callers who need conservative
enclosures can widen results with :func:`inflate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, DomainViolation

__all__ = [
    "Interval",
    "IntervalVector",
    "IntervalMatrix",
    "Box",
    "add",
    "mul",
    "one_over",
    "add_const",
    "mul_by_const",
    "pow_nat",
    "sqrt_i",
    "exp_i",
    "ln_i",
    "lambda_aat",
    "lambda_abba",
    "inflate",
]


def _check_finite(lo: float, hi: float) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainViolation(f"non-finite interval endpoint [{lo}, {hi}]")
    if lo > hi:
        raise ValueError(f"interval lower endpoint {lo} exceeds upper endpoint {hi}")


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]`` with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        _check_finite(self.lo, self.hi)

    @classmethod
    def point(cls, x: float) -> Interval:
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def mag(self) -> float:
        return max(-self.lo, self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def issubset(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __contains__(self, x: float) -> bool:
        return self.contains(x)

    def __iter__(self) -> Iterator[float]:
        yield self.lo
        yield self.hi

    def __add__(self, other: Interval | float) -> Interval:
        if isinstance(other, Interval):
            return add(self, other)
        return add_const(self, other)

    __radd__ = __add__

    def __mul__(self, other: Interval | float) -> Interval:
        if isinstance(other, Interval):
            return mul(self, other)
        return mul_by_const(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: Interval | float) -> Interval:
        return self + (-other)

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


def add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def mul(a: Interval, b: Interval) -> Interval:
    p = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(p), max(p))


def one_over(b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        raise DomainViolation(f"reciprocal of {b!r}, which contains zero")
    return Interval(1.0 / b.hi, 1.0 / b.lo)


def add_const(a: Interval, c: float) -> Interval:
    return Interval(a.lo + c, a.hi + c)


def mul_by_const(a: Interval, c: float) -> Interval:
    if c >= 0:
        return Interval(c * a.lo, c * a.hi)
    return Interval(c * a.hi, c * a.lo)


def pow_nat(a: Interval, m: int) -> Interval:
    """``[a]**m`` for a natural exponent; ``m = 0`` and ``m = 1`` are accepted as trivial."""
    if m < 0 or int(m) != m:
        raise ValueError(f"exponent must be a natural number, got {m!r}")
    if m == 0:
        return ONE
    if m == 1:
        return a
    if a.lo > 0 or m % 2 == 1:
        return Interval(a.lo**m, a.hi**m)
    if a.hi < 0:
        return Interval(a.hi**m, a.lo**m)
    return Interval(0.0, max(-a.lo, a.hi) ** m)


def sqrt_i(a: Interval) -> Interval:
    if a.lo < 0:
        raise DomainViolation(f"sqrt of {a!r}, which has a negative part")
    return Interval(math.sqrt(a.lo), math.sqrt(a.hi))


def exp_i(a: Interval) -> Interval:
    try:
        return Interval(math.exp(a.lo), math.exp(a.hi))
    except OverflowError as exc:
        raise DomainViolation(f"exp of {a!r} overflows") from exc


def ln_i(a: Interval) -> Interval:
    # ln(0) is unbounded, so strict positivity is required.
    if a.lo <= 0:
        raise DomainViolation(f"ln of {a!r}, which is not strictly positive")
    return Interval(math.log(a.lo), math.log(a.hi))


def inflate(a: Interval, rel_eps: float) -> Interval:
    """Widen ``a`` outward by ``rel_eps`` times its magnitude."""
    if rel_eps <= 0:
        return a
    pad = rel_eps * max(abs(a.lo), abs(a.hi))
    return Interval(a.lo - pad, a.hi + pad)


# --- vectorised endpoint kernels --------------------------------------------


def _mul_arrays(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return lo, hi


def _scale_arrays(c: float, lo, hi):
    if c >= 0:
        return c * lo, c * hi
    return c * hi, c * lo


def _square_arrays(lo, hi):
    pos = lo > 0
    neg = hi < 0
    out_lo = np.where(pos, lo * lo, np.where(neg, hi * hi, 0.0))
    mag = np.maximum(-lo, hi)
    out_hi = np.where(pos, hi * hi, np.where(neg, lo * lo, mag * mag))
    return out_lo, out_hi


def _raw(cls, lo: np.ndarray, hi: np.ndarray):
    """Build an endpoint-array container without re-validating (internal results only)."""
    obj = object.__new__(cls)
    object.__setattr__(obj, "lo", lo)
    object.__setattr__(obj, "hi", hi)
    return obj


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class IntervalVector:
    """Vector of intervals, stored as endpoint arrays."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = _frozen(self.lo)
        hi = _frozen(self.hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionError("interval vector endpoints must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainViolation("non-finite entry in interval vector")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, entries: Iterable[Interval]) -> IntervalVector:
        entries = list(entries)
        return cls(np.array([e.lo for e in entries]), np.array([e.hi for e in entries]))

    @classmethod
    def unit(cls, n: int, k: int) -> IntervalVector:
        """Point vector ``e^(k)`` (0-based ``k``)."""
        e = np.zeros(n)
        e[k] = 1.0
        return cls(e, e.copy())

    @classmethod
    def zeros(cls, n: int) -> IntervalVector:
        return cls(np.zeros(n), np.zeros(n))

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, i: int) -> Interval:
        return Interval(float(self.lo[i]), float(self.hi[i]))

    def __iter__(self) -> Iterator[Interval]:
        for i in range(len(self)):
            yield self[i]

    def __add__(self, other: IntervalVector) -> IntervalVector:
        _same_len(self, other)
        return _raw(IntervalVector, self.lo + other.lo, self.hi + other.hi)

    def scale(self, s: Interval) -> IntervalVector:
        """Componentwise product with a scalar interval."""
        return _raw(IntervalVector, *_mul_arrays(s.lo, s.hi, self.lo, self.hi))

    def scale_const(self, c: float) -> IntervalVector:
        return _raw(IntervalVector, *_scale_arrays(c, self.lo, self.hi))

    def mag_sq_sum(self) -> float:
        """``sum_i max(lo_i^2, hi_i^2)``."""
        return float(np.sum(np.maximum(self.lo * self.lo, self.hi * self.hi)))

    def outer_self(self) -> IntervalMatrix:
        """Interval enclosure of ``a a^T``; the diagonal uses the square rule."""
        lo, hi = _mul_arrays(self.lo[:, None], self.hi[:, None], self.lo[None, :], self.hi[None, :])
        dlo, dhi = _square_arrays(self.lo, self.hi)
        np.fill_diagonal(lo, dlo)
        np.fill_diagonal(hi, dhi)
        return _raw(IntervalMatrix, lo, hi)

    def outer_sym(self, other: IntervalVector) -> IntervalMatrix:
        """Interval enclosure of ``a b^T + b a^T``."""
        _same_len(self, other)
        ablo, abhi = _mul_arrays(self.lo[:, None], self.hi[:, None], other.lo[None, :], other.hi[None, :])
        return _raw(IntervalMatrix, ablo + ablo.T, abhi + abhi.T)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def contains_point(self, x: Sequence[float], tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lo - tol <= x) and np.all(x <= self.hi + tol))

    def inflate(self, rel_eps: float) -> IntervalVector:
        if rel_eps <= 0:
            return self
        pad = rel_eps * np.maximum(np.abs(self.lo), np.abs(self.hi))
        return IntervalVector(self.lo - pad, self.hi + pad)

    def __repr__(self) -> str:
        return "(" + ", ".join(repr(e) for e in self) + ")"


@dataclass(frozen=True)
class IntervalMatrix:
    """Square symmetric interval matrix, stored as endpoint arrays."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = _frozen(self.lo)
        hi = _frozen(self.hi)
        if lo.shape != hi.shape or lo.ndim != 2 or lo.shape[0] != lo.shape[1]:
            raise DimensionError("interval matrix endpoints must be square arrays of equal shape")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainViolation("non-finite entry in interval matrix")
        if np.any(lo > hi):
            raise ValueError("interval matrix has an entry with lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def zeros(cls, n: int) -> IntervalMatrix:
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def from_intervals(cls, rows: Sequence[Sequence[Interval | tuple[float, float]]]) -> IntervalMatrix:
        lo = np.array([[Interval(*e).lo if isinstance(e, tuple) else e.lo for e in row] for row in rows])
        hi = np.array([[Interval(*e).hi if isinstance(e, tuple) else e.hi for e in row] for row in rows])
        return cls(lo, hi)

    @classmethod
    def point(cls, m: np.ndarray) -> IntervalMatrix:
        m = np.asarray(m, dtype=float)
        return cls(m, m.copy())

    @property
    def n(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, ij: tuple[int, int]) -> Interval:
        i, j = ij
        return Interval(float(self.lo[i, j]), float(self.hi[i, j]))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.lo, self.lo.T) and np.array_equal(self.hi, self.hi.T))

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def max_width(self) -> float:
        return float(np.max(self.hi - self.lo)) if self.lo.size else 0.0

    def __add__(self, other: IntervalMatrix) -> IntervalMatrix:
        if self.lo.shape != other.lo.shape:
            raise DimensionError("interval matrix shapes differ")
        return _raw(IntervalMatrix, self.lo + other.lo, self.hi + other.hi)

    def scale(self, s: Interval) -> IntervalMatrix:
        return _raw(IntervalMatrix, *_mul_arrays(s.lo, s.hi, self.lo, self.hi))

    def scale_const(self, c: float) -> IntervalMatrix:
        return _raw(IntervalMatrix, *_scale_arrays(c, self.lo, self.hi))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def contains_matrix(self, m: np.ndarray, tol: float = 0.0) -> bool:
        m = np.asarray(m, dtype=float)
        return bool(np.all(self.lo - tol <= m) and np.all(m <= self.hi + tol))

    def inflate(self, rel_eps: float) -> IntervalMatrix:
        if rel_eps <= 0:
            return self
        pad = rel_eps * np.maximum(np.abs(self.lo), np.abs(self.hi))
        return IntervalMatrix(self.lo - pad, self.hi + pad)

    def __repr__(self) -> str:
        rows = []
        for i in range(self.n):
            rows.append("  " + ", ".join(repr(self[i, j]) for j in range(self.n)))
        return "IntervalMatrix(\n" + "\n".join(rows) + "\n)"


def _same_len(a: IntervalVector, b: IntervalVector) -> None:
    if len(a) != len(b):
        raise DimensionError(f"interval vector lengths differ: {len(a)} vs {len(b)}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned hyperrectangle ``[lo_1, hi_1] x ... x [lo_n, hi_n]``."""

    dims: tuple[Interval, ...]

    def __post_init__(self) -> None:
        dims = tuple(d if isinstance(d, Interval) else Interval(*d) for d in self.dims)
        if not dims:
            raise DimensionError("a box needs at least one dimension")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> Box:
        if len(lo) != len(hi):
            raise DimensionError("lower and upper corner lengths differ")
        return cls(tuple(Interval(float(a), float(b)) for a, b in zip(lo, hi)))

    @classmethod
    def from_point(cls, x: Sequence[float]) -> Box:
        return cls(tuple(Interval.point(float(v)) for v in x))

    @property
    def n(self) -> int:
        return len(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __getitem__(self, i: int) -> Interval:
        return self.dims[i]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.dims)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lo for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.hi for d in self.dims])

    def contains_point(self, x: Sequence[float]) -> bool:
        return all(d.contains(float(v)) for d, v in zip(self.dims, x)) and len(x) == self.n

    def issubset(self, other: Box) -> bool:
        return self.n == other.n and all(a.issubset(b) for a, b in zip(self.dims, other.dims))

    def vertices(self) -> Iterator[np.ndarray]:
        lo, hi = self.lower, self.upper
        for mask in range(1 << self.n):
            yield np.array([hi[i] if (mask >> i) & 1 else lo[i] for i in range(self.n)])

    def __repr__(self) -> str:
        return " x ".join(repr(d) for d in self.dims)


# --- rank-structure spectral bounds -----------------------------------------


def lambda_aat(a: IntervalVector) -> Interval:
    """Bounds on the eigenvalues of ``a a^T`` for all ``a`` in ``[a]``."""
    return Interval(0.0, a.mag_sq_sum())


def lambda_abba(a: IntervalVector, b: IntervalVector) -> Interval:
    """Bounds on the eigenvalues of ``a b^T + b a^T`` for all ``a`` in ``[a]``, ``b`` in ``[b]``."""
    _same_len(a, b)
    beta = math.sqrt(a.mag_sq_sum() * b.mag_sq_sum())
    dot = ZERO
    for i in range(len(a)):
        dot = add(dot, mul(a[i], b[i]))
    return add(Interval(-beta, beta), dot)
