"""Exact rational phase-1 simplex for ``A w = b, w >= 0`` with ``b >= 0``.

Revised simplex with an explicit rational basis inverse.  Columns are sparse
(``{row: coefficient}``).  Pricing runs on an integer-scaled copy of the dual
vector so reduced-cost signs are exact without Fraction overhead.  The
entering rule is Dantzig's (most negative reduced cost) while the objective
is decreasing and falls back to Bland's rule after a run of degenerate
pivots, which guarantees termination.

At termination either the artificial objective is zero (a basic feasible
``w`` is returned) or it is positive and the phase-1 duals ``y`` satisfy
``y . A_j <= 0`` for every column and ``y . b > 0``: a Farkas certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class PhaseOneResult:
    feasible: bool
    w: dict[int, Fraction]  # structural column -> value (nonzero entries only)
    y: list[Fraction]  # phase-1 duals, one per row
    objective: Fraction
    pivots: int


def phase_one(columns: Sequence[dict[int, int | Fraction]], b: Sequence[int | Fraction],
              degenerate_limit: int = 50, max_pivots: int = 1_000_000) -> PhaseOneResult:
    m = len(b)
    ncols = len(columns)
    if any(v < 0 for v in b):
        raise ValueError("phase_one expects b >= 0")
    cols = [{i: Fraction(v) for i, v in col.items() if v} for col in columns]
    # variables 0..ncols-1 structural, ncols+i artificial for row i
    basis = [ncols + i for i in range(m)]
    in_basis = set(basis)
    binv = [[ONE if i == j else ZERO for j in range(m)] for i in range(m)]
    x_b = [Fraction(v) for v in b]

    def column(var):
        if var >= ncols:
            return {var - ncols: ONE}
        return cols[var]

    def cost(var):
        return 1 if var >= ncols else 0

    pivots = 0
    degenerate_run = 0
    while True:
        cb = [cost(v) for v in basis]
        y = [sum((cb[i] * binv[i][j] for i in range(m) if cb[i]), ZERO) for j in range(m)]
        scale = math.lcm(*(v.denominator for v in y)) if m else 1
        yi = [v.numerator * (scale // v.denominator) for v in y]

        bland = degenerate_run >= degenerate_limit
        entering, best = None, 0
        for var in range(ncols + m):
            if var in in_basis:
                continue
            if var >= ncols:
                rc = scale - yi[var - ncols]
            else:
                rc = -sum(yi[i] * int(a) if a.denominator == 1 else Fraction(yi[i]) * a
                          for i, a in cols[var].items())
            if rc < 0:
                if bland:
                    entering = var
                    break
                if entering is None or rc < best:
                    entering, best = var, rc
        if entering is None:
            break
        if pivots >= max_pivots:
            raise RuntimeError(f"simplex exceeded {max_pivots} pivots")

        acol = column(entering)
        u = [sum((binv[i][k] * a for k, a in acol.items()), ZERO) for i in range(m)]
        leave, ratio = None, None
        for i in range(m):
            if u[i] > 0:
                q = x_b[i] / u[i]
                if ratio is None or q < ratio or (q == ratio and basis[i] < basis[leave]):
                    leave, ratio = i, q
        if leave is None:  # cannot happen: phase-1 objective is bounded below
            raise RuntimeError("unbounded phase-1 direction")

        degenerate_run = degenerate_run + 1 if ratio == 0 else 0
        piv = u[leave]
        row_l = [v / piv for v in binv[leave]]
        binv[leave] = row_l
        x_b[leave] = x_b[leave] / piv
        for i in range(m):
            if i != leave and u[i]:
                f = u[i]
                bi = binv[i]
                binv[i] = [bi[j] - f * row_l[j] if row_l[j] else bi[j] for j in range(m)]
                x_b[i] -= f * x_b[leave]
        in_basis.discard(basis[leave])
        basis[leave] = entering
        in_basis.add(entering)
        pivots += 1

    objective = sum((cost(v) * x for v, x in zip(basis, x_b)), ZERO)
    w = {v: x for v, x in zip(basis, x_b) if v < ncols and x != 0}
    return PhaseOneResult(objective == 0, w, y, objective, pivots)
