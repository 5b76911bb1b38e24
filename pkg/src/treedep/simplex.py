"""Dense simplex solver over exact rationals.

Solves  min c.x  subject to  A x <= b,  x >= 0  with b >= 0, which makes the
slack basis feasible from the start (no phase-1 needed).  Bland's rule keeps
the heavily degenerate supermodularity cones from cycling.  Intended for the
small lattices that the order oracles produce, not for large programs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SimplexError(RuntimeError):
    """Raised on unbounded or structurally invalid programs."""


def solve_lp_min(
    c: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]],
    b_ub: Sequence[Fraction],
    max_pivots: int | None = None,
) -> tuple[Fraction, list[Fraction]]:
    """Exact optimum of  min c.x  s.t.  A x <= b, x >= 0  (b >= 0).

    Returns ``(value, x)``.  Raises :class:`SimplexError` if the program is
    unbounded or the pivot budget is exhausted.
    """
    n = len(c)
    m = len(a_ub)
    if len(b_ub) != m or any(len(row) != n for row in a_ub):
        raise SimplexError("inconsistent program dimensions")
    if any(b < 0 for b in b_ub):
        raise SimplexError("b must be nonnegative (slack basis must be feasible)")

    zero = Fraction(0)
    # tableau rows: [a | slack identity | rhs]; objective row holds reduced costs
    rows: list[list[Fraction]] = []
    for i in range(m):
        row = [Fraction(x) for x in a_ub[i]]
        row.extend(Fraction(1) if j == i else zero for j in range(m))
        row.append(Fraction(b_ub[i]))
        rows.append(row)
    obj = [Fraction(x) for x in c] + [zero] * (m + 1)
    basis = list(range(n, n + m))

    if max_pivots is None:
        max_pivots = 200 * (n + m) + 1000

    # steepest reduced cost until progress stalls, then Bland (terminates)
    stall_limit = 2 * (n + m)
    stall = 0
    bland = False
    for _ in range(max_pivots):
        if bland:
            enter = next((j for j in range(n + m) if obj[j] < 0), None)
        else:
            enter = None
            best_cost = zero
            for j in range(n + m):
                if obj[j] < best_cost:
                    best_cost = obj[j]
                    enter = j
        if enter is None:
            x = [zero] * n
            for i, bvar in enumerate(basis):
                if bvar < n:
                    x[bvar] = rows[i][-1]
            return -obj[-1], x
        # ratio test, smallest-basis-index tie-break
        leave = None
        best = None
        for i in range(m):
            coeff = rows[i][enter]
            if coeff > 0:
                ratio = rows[i][-1] / coeff
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            raise SimplexError("program is unbounded")
        if not bland:
            stall = stall + 1 if best == 0 else 0
            if stall > stall_limit:
                bland = True
        _pivot(rows, obj, basis, leave, enter)
    raise SimplexError("pivot budget exhausted")


def _pivot(rows, obj, basis, leave: int, enter: int) -> None:
    pivot_row = rows[leave]
    piv = pivot_row[enter]
    inv = 1 / piv
    rows[leave] = [x * inv for x in pivot_row]
    pivot_row = rows[leave]
    for i, row in enumerate(rows):
        if i != leave and row[enter] != 0:
            f = row[enter]
            rows[i] = [x if p == 0 else x - f * p for x, p in zip(row, pivot_row)]
    if obj[enter] != 0:
        f = obj[enter]
        obj[:] = [x if p == 0 else x - f * p for x, p in zip(obj, pivot_row)]
    basis[leave] = enter
