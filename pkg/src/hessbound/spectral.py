"""Spectral bounds for symmetric interval matrices and related utilities.

* :func:`gershgorin` -- interval circle criterion, O(n^2).
* :func:`hertz_rohn` -- tight bounds from ``2^(n-1)`` lower and upper vertex matrices.
* :func:`sym_eig_extremes` -- cyclic Jacobi eigensolver used by Hertz-Rohn.
* :func:`alpha_bb_underestimate` -- the alphaBB convex underestimator.
* :func:`sampled_oracle` -- inner approximation of the true spectral range by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np
from scipy.stats import qmc

from .codelist import Codelist, eval_point
from .errors import DimensionError, DimensionLimitExceeded, DomainViolation
from .interval import Box, IntervalMatrix
from .propagate import hessian_at_point

__all__ = [
    "Method",
    "SpectralBounds",
    "VertexMatrixPair",
    "HertzRohnResult",
    "gershgorin_radii",
    "gershgorin",
    "vertex_matrices",
    "hertz_rohn_detail",
    "hertz_rohn",
    "sym_eig_extremes",
    "alpha_bb_underestimate",
    "sampled_oracle",
    "HERTZ_ROHN_MAX_DIM",
]

HERTZ_ROHN_MAX_DIM = 16


class Method(str, Enum):
    ARITHMETIC = "A"
    GERSHGORIN = "G"
    HERTZ_ROHN = "H"
    SAMPLED_ORACLE = "S"


@dataclass(frozen=True)
class SpectralBounds:
    lo: float
    hi: float
    method: Method

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValueError(f"spectral bounds out of order: [{self.lo}, {self.hi}]")

    def contains(self, other: SpectralBounds | float, tol: float = 0.0) -> bool:
        if isinstance(other, SpectralBounds):
            return self.lo - tol <= other.lo and other.hi <= self.hi + tol
        return self.lo - tol <= other <= self.hi + tol

    def __iter__(self):
        yield self.lo
        yield self.hi


# --- Gershgorin ----------------------------------------------------------------


def gershgorin_radii(H: IntervalMatrix) -> np.ndarray:
    mag = np.maximum(-H.lo, H.hi)
    np.fill_diagonal(mag, 0.0)  # mag is a fresh array
    return mag.sum(axis=1)


def gershgorin(H: IntervalMatrix) -> SpectralBounds:
    r = gershgorin_radii(H)
    lo = float(np.min(np.diag(H.lo) - r))
    hi = float(np.max(np.diag(H.hi) + r))
    return SpectralBounds(lo, hi, Method.GERSHGORIN)


# --- symmetric eigensolver -------------------------------------------------------


def sym_eig_extremes(M: np.ndarray, tol: float = 1e-12, max_sweeps: int = 64) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius mass drops to ``tol * ||M||_F``.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    n = A.shape[0]
    fro = float(np.linalg.norm(A))
    if float(np.max(np.abs(A - A.T), initial=0.0)) > 1e-12 * max(1.0, fro):
        raise ValueError("matrix is not symmetric")
    rows = (0.5 * (A + A.T)).tolist()
    if n == 1:
        return rows[0][0], rows[0][0]

    # plain Python lists beat numpy slicing for the small n seen here
    target = tol * fro
    for _ in range(max_sweeps):
        off = math.sqrt(sum(rows[i][j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= target:
            break
        for p in range(n - 1):
            Ap = rows[p]
            for q in range(p + 1, n):
                Aq = rows[q]
                apq = Ap[q]
                if apq == 0.0:
                    continue
                tau = (Aq[q] - Ap[p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for r in range(n):
                    if r == p or r == q:
                        continue
                    Ar = rows[r]
                    arp, arq = Ar[p], Ar[q]
                    Ar[p] = Ap[r] = c * arp - s * arq
                    Ar[q] = Aq[r] = s * arp + c * arq
                Ap[p] -= t * apq
                Aq[q] += t * apq
                Ap[q] = Aq[p] = 0.0
    d = [rows[i][i] for i in range(n)]
    return min(d), max(d)


# --- Hertz-Rohn ------------------------------------------------------------------


@dataclass(frozen=True)
class VertexMatrixPair:
    """Lower vertex matrix ``L^(k)`` and upper vertex matrix ``U^(k)`` for one sign vector."""

    k: int
    signs: np.ndarray
    L: np.ndarray
    U: np.ndarray


@dataclass(frozen=True)
class HertzRohnResult:
    bounds: SpectralBounds
    argmin: int
    argmax: int
    n_pairs: int


def _sign_vector(k: int, n: int) -> np.ndarray:
    # Column k of the recursive sign matrix: entry i flips with bit i of k-1, last entry fixed +1.
    bits = k - 1
    return np.array([-1.0 if (bits >> i) & 1 else 1.0 for i in range(n - 1)] + [1.0])


def vertex_matrices(H: IntervalMatrix) -> Iterator[VertexMatrixPair]:
    """Yield the ``2^(n-1)`` vertex matrix pairs in sign-matrix column order (k = 1, 2, ...)."""
    n = H.n
    eye = np.eye(n, dtype=bool)
    for k in range(1, 2 ** (n - 1) + 1):
        s = _sign_vector(k, n)
        lower_mask = (np.outer(s, s) > 0) | eye
        L = np.where(lower_mask, H.lo, H.hi)
        U = np.where(lower_mask, H.hi, H.lo)
        yield VertexMatrixPair(k, s, L, U)


def hertz_rohn_detail(H: IntervalMatrix, max_dim: int = HERTZ_ROHN_MAX_DIM) -> HertzRohnResult:
    if H.n > max_dim:
        raise DimensionLimitExceeded(
            f"Hertz-Rohn needs 2^{H.n - 1} vertex pairs for n={H.n}; the cap is n <= {max_dim}"
        )
    best_lo, best_hi = math.inf, -math.inf
    arg_lo = arg_hi = 0
    count = 0
    for pair in vertex_matrices(H):
        count += 1
        lmin, _ = sym_eig_extremes(pair.L)
        _, umax = sym_eig_extremes(pair.U)
        if lmin < best_lo:  # strict: first attaining index wins ties
            best_lo, arg_lo = lmin, pair.k
        if umax > best_hi:
            best_hi, arg_hi = umax, pair.k
    return HertzRohnResult(SpectralBounds(best_lo, best_hi, Method.HERTZ_ROHN), arg_lo, arg_hi, count)


def hertz_rohn(H: IntervalMatrix, max_dim: int = HERTZ_ROHN_MAX_DIM) -> SpectralBounds:
    return hertz_rohn_detail(H, max_dim).bounds


# --- alphaBB and sampling --------------------------------------------------------


def alpha_bb_underestimate(cl: Codelist, box: Box, lambda_lo: float, x: Sequence[float]) -> float:
    """``phi(x) - lambda_lo/2 * sum_i (lo_i - x_i)(hi_i - x_i)``; plain ``phi(x)`` when ``lambda_lo >= 0``."""
    if not box.contains_point(x):
        raise ValueError("point lies outside the box")
    value = eval_point(cl, x)
    if lambda_lo >= 0:
        return value
    x = np.asarray(x, dtype=float)
    spread = float(np.sum((box.lower - x) * (box.upper - x)))
    return value - 0.5 * lambda_lo * spread


def sample_points(box: Box, samples: int, seed: int = 0, include_vertices: bool = True) -> np.ndarray:
    """Scrambled Halton points in the box, followed by all vertices when ``n <= 10``."""
    lo, hi = box.lower, box.upper
    u = qmc.Halton(d=box.n, scramble=True, seed=seed).random(samples)
    pts = lo + (hi - lo) * u
    if include_vertices and box.n <= 10:
        pts = np.vstack([pts, np.array(list(box.vertices()))])
    return pts


def sampled_oracle(cl: Codelist, box: Box, samples: int = 1000, seed: int = 0) -> SpectralBounds:
    """Extreme eigenvalues of the exact Hessian over sampled points: an inner bound of the true range."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lo, hi = math.inf, -math.inf
    last_error: DomainViolation | None = None
    for x in sample_points(box, samples, seed):
        try:
            H = hessian_at_point(cl, x).midpoint()
        except DomainViolation as exc:
            last_error = exc
            continue
        ev = np.linalg.eigvalsh(H)
        lo = min(lo, float(ev[0]))
        hi = max(hi, float(ev[-1]))
    if lo == math.inf:
        raise DomainViolation(f"no sample point lies in the function's domain ({last_error})")
    return SpectralBounds(lo, hi, Method.SAMPLED_ORACLE)
