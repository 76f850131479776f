"""Extended-codelist execution: interval values, gradients, Hessians and eigenvalue bounds.

Each line ``k`` stores ``[y_k]`` and ``[y'_k]`` plus, depending on the mode,
the interval Hessian ``[y''_k]`` and/or the eigenvalue enclosure ``[lambda_k]``
of the Hessian of ``y_k`` with respect to ``x``.  The eigenvalue rules mirror
the Hessian rules with ``[a][a]^T`` replaced by :func:`lambda_aat` and the
symmetrised outer product by :func:`lambda_abba`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .codelist import Codelist, Op
from .errors import DimensionError, DomainViolation
from .interval import (
    ZERO,
    Box,
    Interval,
    IntervalMatrix,
    IntervalVector,
    add,
    add_const,
    exp_i,
    inflate,
    lambda_aat,
    lambda_abba,
    ln_i,
    mul,
    mul_by_const,
    one_over,
    pow_nat,
    sqrt_i,
)

__all__ = ["Mode", "EvalTrace", "propagate", "hessian_at_point"]


class Mode(str, Enum):
    HESSIAN = "hessian"
    EIGEN = "eigen"
    BOTH = "both"

    @property
    def wants_hessian(self) -> bool:
        return self is not Mode.EIGEN

    @property
    def wants_eigen(self) -> bool:
        return self is not Mode.HESSIAN


@dataclass(frozen=True)
class EvalTrace:
    """Per-line results of an extended codelist run (lists are 0-based, lines 1-based)."""

    codelist: Codelist
    box: Box
    mode: Mode
    vals: tuple[Interval, ...]
    grads: tuple[IntervalVector, ...]
    hess: tuple[IntervalMatrix, ...] | None
    eig: tuple[Interval, ...] | None

    @property
    def value(self) -> Interval:
        return self.vals[self.codelist.result - 1]

    @property
    def gradient(self) -> IntervalVector:
        return self.grads[self.codelist.result - 1]

    @property
    def hessian(self) -> IntervalMatrix:
        if self.hess is None:
            raise ValueError(f"trace computed in {self.mode.value} mode has no interval Hessian")
        return self.hess[self.codelist.result - 1]

    @property
    def eigen(self) -> Interval:
        if self.eig is None:
            raise ValueError(f"trace computed in {self.mode.value} mode has no eigenvalue bounds")
        return self.eig[self.codelist.result - 1]

    def line(self, k: int) -> dict:
        out = {"val": self.vals[k - 1], "grad": self.grads[k - 1]}
        if self.hess is not None:
            out["hess"] = self.hess[k - 1]
        if self.eig is not None:
            out["eig"] = self.eig[k - 1]
        return out


def _neg(a: Interval) -> Interval:
    return mul_by_const(a, -1.0)


def _step(op: Op, line, k: int, vals, grads, hess, eig, want_h: bool, want_e: bool):
    """Value, gradient, Hessian and eigenvalue bound for a non-variable line."""
    i = line.arg_i - 1
    yi, gi = vals[i], grads[i]
    Hi = hess[i] if want_h else None
    Li = eig[i] if want_e else None
    H = L = None

    if op is Op.ADD_CONST:
        v, g = add_const(yi, line.param), gi
        H, L = Hi, Li
    elif op is Op.MUL_BY_CONST:
        c = line.param
        v, g = mul_by_const(yi, c), gi.scale_const(c)
        if want_h:
            H = Hi.scale_const(c)
        if want_e:
            L = mul_by_const(Li, c)
    elif op is Op.ADD:
        j = line.arg_j - 1
        v, g = add(yi, vals[j]), gi + grads[j]
        if want_h:
            H = Hi + hess[j]
        if want_e:
            L = add(Li, eig[j])
    elif op is Op.MUL:
        j = line.arg_j - 1
        yj, gj = vals[j], grads[j]
        v = mul(yi, yj)
        g = gj.scale(yi) + gi.scale(yj)
        if want_h:
            H = hess[j].scale(yi) + Hi.scale(yj) + gi.outer_sym(gj)
        if want_e:
            L = add(add(mul(yi, eig[j]), mul(yj, Li)), lambda_abba(gi, gj))
    elif op is Op.ONE_OVER:
        v = one_over(yi)
        v2 = pow_nat(v, 2)
        g = gi.scale(_neg(v2))
        two_v = mul_by_const(v, 2.0)
        if want_h:
            H = (gi.outer_self().scale(two_v) + Hi.scale_const(-1.0)).scale(v2)
        if want_e:
            L = mul(v2, add(mul(two_v, lambda_aat(gi)), _neg(Li)))
    elif op is Op.SQUARE:
        v = pow_nat(yi, 2)
        g = gi.scale(mul_by_const(yi, 2.0))
        if want_h:
            H = (gi.outer_self() + Hi.scale(yi)).scale_const(2.0)
        if want_e:
            L = mul_by_const(add(lambda_aat(gi), mul(yi, Li)), 2.0)
    elif op is Op.CUBE:
        v = pow_nat(yi, 3)
        g = gi.scale(mul_by_const(pow_nat(yi, 2), 3.0))
        three_y = mul_by_const(yi, 3.0)
        if want_h:
            H = (gi.outer_self().scale_const(2.0) + Hi.scale(yi)).scale(three_y)
        if want_e:
            L = mul(three_y, add(mul_by_const(lambda_aat(gi), 2.0), mul(yi, Li)))
    elif op is Op.POW_NAT:
        m = line.param
        v = pow_nat(yi, m)
        g = gi.scale(mul_by_const(pow_nat(yi, m - 1), float(m)))
        coef = mul_by_const(pow_nat(yi, m - 2), float(m))
        if want_h:
            H = (gi.outer_self().scale_const(m - 1.0) + Hi.scale(yi)).scale(coef)
        if want_e:
            L = mul(coef, add(mul_by_const(lambda_aat(gi), m - 1.0), mul(yi, Li)))
    elif op is Op.SQRT:
        v = sqrt_i(yi)
        half_inv = one_over(mul_by_const(v, 2.0))
        g = gi.scale(half_inv)
        if want_h or want_e:
            inner = one_over(mul_by_const(yi, -2.0))
        if want_h:
            H = (Hi + gi.outer_self().scale(inner)).scale(half_inv)
        if want_e:
            L = mul(half_inv, add(Li, mul(inner, lambda_aat(gi))))
    elif op is Op.EXP:
        v = exp_i(yi)
        g = gi.scale(v)
        if want_h:
            H = (gi.outer_self() + Hi).scale(v)
        if want_e:
            L = mul(v, add(lambda_aat(gi), Li))
    elif op is Op.LN:
        v = ln_i(yi)
        r = one_over(yi)
        g = gi.scale(r)
        if want_h:
            H = (Hi + gi.outer_self().scale(r).scale_const(-1.0)).scale(r)
        if want_e:
            L = mul(r, add(Li, mul(_neg(r), lambda_aat(gi))))
    else:  # pragma: no cover - Codelist validation rejects anything else
        raise AssertionError(op)
    return v, g, H, L


def propagate(cl: Codelist, box: Box, mode: Mode = Mode.BOTH, inflate_eps: float = 0.0) -> EvalTrace:
    """Run the extended codelist of ``cl`` over ``box``.

    For every ``x`` in the box the results enclose ``phi(x)``, ``grad phi(x)``
    and, in Hessian mode, each entry of ``hess phi(x)``; in eigen mode every
    eigenvalue of ``hess phi(x)``.  ``inflate_eps > 0`` widens every
    intermediate result outward by that relative amount.

    Raises :class:`DomainViolation` (carrying the line and op) when the box
    leaves the domain of some line; no partial trace is returned.
    """
    mode = Mode(mode)
    n = cl.n_vars
    if box.n != n:
        raise DimensionError(f"box has dimension {box.n}, codelist has {n} variables")
    want_h, want_e = mode.wants_hessian, mode.wants_eigen

    vals: list[Interval] = []
    grads: list[IntervalVector] = []
    hess: list[IntervalMatrix] = []
    eig: list[Interval] = []
    zero_h = IntervalMatrix.zeros(n) if want_h else None
    units = [IntervalVector.unit(n, i) for i in range(n)]

    for k, line in enumerate(cl.lines, start=1):
        if line.op is Op.VAR:
            vals.append(box[line.param - 1])
            grads.append(units[line.param - 1])
            if want_h:
                hess.append(zero_h)
            if want_e:
                eig.append(ZERO)
            continue
        try:
            v, g, H, L = _step(line.op, line, k, vals, grads, hess, eig, want_h, want_e)
        except DomainViolation as exc:
            if exc.line is not None:
                raise
            raise DomainViolation(str(exc), k, line.op.value) from exc
        if inflate_eps > 0:
            v = inflate(v, inflate_eps)
            g = g.inflate(inflate_eps)
            H = H.inflate(inflate_eps) if H is not None else None
            L = inflate(L, inflate_eps) if L is not None else None
        vals.append(v)
        grads.append(g)
        if want_h:
            hess.append(H)
        if want_e:
            eig.append(L)

    # componentwise kernels skip per-op validation; overflow shows up as inf/nan here
    last = cl.result - 1
    if not grads[last].is_finite() or (want_h and not hess[last].is_finite()):
        raise DomainViolation("non-finite derivative enclosure (overflow)", cl.result, cl.lines[last].op.value)

    return EvalTrace(
        codelist=cl,
        box=box,
        mode=mode,
        vals=tuple(vals),
        grads=tuple(grads),
        hess=tuple(hess) if want_h else None,
        eig=tuple(eig) if want_e else None,
    )


def hessian_at_point(cl: Codelist, x: Sequence[float]) -> IntervalMatrix:
    """Interval Hessian over the degenerate box ``[x, x]``; its midpoint is the Hessian at ``x``."""
    x = np.asarray(x, dtype=float)
    return propagate(cl, Box.from_point(x), Mode.HESSIAN).hessian
