"""Exact phase-one simplex over the rationals (Bland's rule, no cycling), plus a float-guided front end."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def feasible_point(a: Sequence[Sequence[int | Fraction]], b: Sequence[int | Fraction]) -> list[Fraction] | None:
    """Find x >= 0 with A x = b exactly, or return None if no such x exists."""
    m = len(a)
    n = len(a[0]) if m else 0
    if m == 0:
        return [Fraction(0)] * n

    # rows flipped so b >= 0; artificial variables occupy columns n..n+m-1
    rows: list[list[Fraction]] = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [Fraction(sign * v) for v in a[i]] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(sign * b[i])]
        rows.append(row)
    width = n + m
    basis = list(range(n, n + m))

    # reduced costs for minimising the sum of artificials
    cost = [Fraction(0)] * (width + 1)
    for row in rows:
        for j in range(n):
            cost[j] -= row[j]
        cost[width] -= row[width]

    while True:
        entering = next((j for j in range(width) if cost[j] < 0), None)
        if entering is None:
            break
        leaving = None
        best = None
        for i, row in enumerate(rows):
            if row[entering] > 0:
                ratio = row[width] / row[entering]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best, leaving = ratio, i
        if leaving is None:
            # objective bounded below by 0, so this cannot happen
            raise ArithmeticError("phase-one objective unbounded")
        _pivot(rows, cost, leaving, entering)
        basis[leaving] = entering

    if -cost[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = rows[i][width]
    return x


def _pivot(rows: list[list[Fraction]], cost: list[Fraction], r: int, c: int) -> None:
    pivot_row = rows[r]
    p = pivot_row[c]
    if p != 1:
        rows[r] = pivot_row = [v / p for v in pivot_row]
    nz = [j for j, v in enumerate(pivot_row) if v != 0]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            f = row[c]
            for j in nz:
                row[j] -= f * pivot_row[j]
    if cost[c] != 0:
        f = cost[c]
        for j in nz:
            cost[j] -= f * pivot_row[j]


def _solve_exact(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Exact solution of A x = b with free variables at zero (rref over Q), or None if A x = b is inconsistent."""
    m, n = len(a), len(a[0])
    aug = DomainMatrix([[QQ(int(v.numerator), int(v.denominator)) if isinstance(v, Fraction) else QQ(v) for v in row]
                        + [QQ(Fraction(bi).numerator, Fraction(bi).denominator)]
                        for row, bi in zip(a, b)], (m, n + 1), QQ)
    rref, pivots = aug.rref()
    if n in pivots:
        return None
    rows = rref.to_Matrix().tolist()
    x = [Fraction(0)] * n
    for i, j in enumerate(pivots):
        v = rows[i][n]
        x[j] = Fraction(int(v.p), int(v.q))
    return x


def _farkas_certificate(a: np.ndarray, b: np.ndarray) -> list[Fraction] | None:
    """Rational y with y.A <= 0 and y.b > 0, found numerically and checked exactly by the caller."""
    m = a.shape[0]
    # maximise y.b subject to A^T y <= 0, -1 <= y <= 1
    res = linprog(-b, A_ub=a.T, b_ub=np.zeros(a.shape[1]), bounds=[(-1, 1)] * m, method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    return [Fraction(v).limit_denominator(10**6) for v in res.x]


def feasible_point_guided(a: Sequence[Sequence[int | Fraction]], b: Sequence[int | Fraction]) -> list[Fraction] | None:
    """Same contract as feasible_point, using a floating LP only to pick columns or a certificate.

    Feasible: the float solution's support is solved exactly (linear solve,
    then exact simplex if that gives negative entries).
    Infeasible: a rationalised Farkas vector is verified exactly. Anything
    that fails exact checking falls back to the full exact simplex.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    if m == 0 or n == 0:
        return feasible_point(a, b)
    af = np.array([[float(v) for v in row] for row in a])
    bf = np.array([float(v) for v in b])
    res = linprog(np.zeros(n), A_eq=af, b_eq=bf, bounds=(0, None), method="highs")
    if res.status == 0:
        cols = [j for j in range(n) if res.x[j] > 1e-12]
        sub_a = [[row[j] for j in cols] for row in a]
        # a vertex solution has independent support columns, so one exact solve suffices
        sub = _solve_exact(sub_a, b) if cols else None
        if sub is None or any(v < 0 for v in sub):
            sub = feasible_point(sub_a, b)
        if sub is not None:
            x = [Fraction(0)] * n
            for j, v in zip(cols, sub):
                x[j] = v
            return x
    elif res.status == 2:
        y = _farkas_certificate(af, bf)
        if y is not None:
            yb = sum(yi * Fraction(bi) for yi, bi in zip(y, b))
            if yb > 0 and all(sum(y[i] * a[i][j] for i in range(m)) <= 0 for j in range(n)):
                return None
    return feasible_point(a, b)
