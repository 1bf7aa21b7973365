"""Linear Z-module equations valued in a finite abelian group or in the circle.

Elimination only ever uses unimodular integer row operations (swap, negate,
add an integer multiple of another row), so the solution set is preserved
exactly in any abelian group. Division by a pivot happens during
back-substitution and is multi-valued on the circle: ``(1/p)A`` is the set of
all ``b`` with ``p*b`` in ``A``.
"""
from __future__ import annotations

import itertools
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp

from .abgroup import (
    FiniteAbelianGroup,
    GroupElement,
    GroupError,
    RationalTurn,
    TorusPoint,
    parse_element,
)


class Circle:
    """Tag for circle-valued (R/Z) systems."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "CIRCLE"

    def __str__(self) -> str:
        return "S1"


CIRCLE = Circle()

ValueGroup = Union[FiniteAbelianGroup, Circle]
Rhs = Union[GroupElement, RationalTurn]


class UnsupportedValueGroup(TypeError):
    pass


class InconsistentSystemError(ValueError):
    def __init__(self, relation: Sequence[int], message: str):
        super().__init__(message)
        self.relation = tuple(relation)


class InternalInvariantError(AssertionError):
    """A result failed its own exact verification."""


@dataclass(frozen=True)
class ZModEquation:
    coeffs: Mapping[str, int]
    rhs: Rhs

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("an equation needs at least one variable")
        clean = {v: int(n) for v, n in self.coeffs.items() if int(n) != 0}
        object.__setattr__(self, "coeffs", clean)

    def __str__(self) -> str:
        lhs = " + ".join(f"{n}*{v}" for v, n in self.coeffs.items()) or "0"
        rhs = f"turn {self.rhs}" if isinstance(self.rhs, RationalTurn) else "(" + ",".join(map(str, self.rhs)) + ")"
        return f"{lhs} = {rhs}"


@dataclass(frozen=True)
class EquationSystem:
    equations: tuple[ZModEquation, ...]
    value_group: ValueGroup
    extra_variables: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        for eq in self.equations:
            if isinstance(self.value_group, Circle):
                if not isinstance(eq.rhs, RationalTurn):
                    raise GroupError(f"circle system with non-turn rhs {eq.rhs!r}")
            else:
                if isinstance(eq.rhs, RationalTurn):
                    raise GroupError("group-valued system with a turn rhs")
                self.value_group.check(eq.rhs)

    @property
    def is_circle(self) -> bool:
        return isinstance(self.value_group, Circle)

    @property
    def variables(self) -> tuple[str, ...]:
        seen = dict.fromkeys(self.extra_variables)
        for eq in self.equations:
            seen.update(dict.fromkeys(eq.coeffs))
        return tuple(seen)

    def matrix(self) -> list[list[int]]:
        names = self.variables
        return [[eq.coeffs.get(v, 0) for v in names] for eq in self.equations]

    def rhs(self) -> list[Rhs]:
        return [eq.rhs for eq in self.equations]

    def __str__(self) -> str:
        return "; ".join(str(eq) for eq in self.equations)


def system(equations, value_group: ValueGroup) -> EquationSystem:
    return EquationSystem(tuple(equations), value_group)


# integer elimination


def smith_decomposition(matrix: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """(S, U, V) with S = U A V diagonal and U, V unimodular."""
    n_rows, n_cols = len(matrix), len(matrix[0])
    a = DomainMatrix([[ZZ(int(v)) for v in row] for row in matrix], (n_rows, n_cols), ZZ)
    smith, u, v = smith_normal_decomp(a)
    return tuple([[int(x) for x in row] for row in m.to_Matrix().tolist()] for m in (smith, u, v))


def integer_relations(sys: EquationSystem) -> list[tuple[int, ...]]:
    """Generators of the lattice {c in Z^S : sum_s c_s * row_s = 0}.

    Rows of U that hit zero rows of the Smith form; U is unimodular, so they
    generate the whole left kernel.
    """
    matrix = sys.matrix()
    if not matrix:
        return []
    if not matrix[0]:
        return [tuple(int(i == j) for j in range(len(matrix))) for i in range(len(matrix))]
    smith, u, _ = smith_decomposition(matrix)
    return [tuple(u[i]) for i, row in enumerate(smith) if not any(row)]


def _combine_rhs(sys: EquationSystem, relation: Sequence[int]):
    if sys.is_circle:
        total = RationalTurn(0)
        for c, eq in zip(relation, sys.equations):
            total = total + eq.rhs * c
        return total
    group = sys.value_group
    return group.sum(group.scalar_mul(c, eq.rhs) for c, eq in zip(relation, sys.equations))


def find_violated_relation(sys: EquationSystem) -> tuple[int, ...] | None:
    for relation in integer_relations(sys):
        value = _combine_rhs(sys, relation)
        zero = RationalTurn(0) if sys.is_circle else sys.value_group.zero
        if value != zero:
            return relation
    return None


def check_consistency(sys: EquationSystem) -> bool:
    """Every integer relation among coefficient rows kills the right-hand sides."""
    if sys.is_circle:
        raise UnsupportedValueGroup("consistency over the circle is decided by gaussian_eliminate_circle")
    return find_violated_relation(sys) is None


# finite group search


def solve_in_group(sys: EquationSystem, group: FiniteAbelianGroup | None = None) -> dict[str, GroupElement] | None:
    """First satisfying assignment in enumeration order, or None."""
    group = group or sys.value_group
    if sys.is_circle:
        raise UnsupportedValueGroup("solve_in_group needs a finite value group")
    names = sys.variables
    rows = sys.matrix()
    rhs = sys.rhs()
    for values in itertools.product(group.elements(), repeat=len(names)):
        ok = all(
            group.sum(group.scalar_mul(n, x) for n, x in zip(row, values)) == b
            for row, b in zip(rows, rhs)
        )
        if ok:
            return dict(zip(names, values))
    return None


# set-valued circle arithmetic


def scale_set(values, p: int, q: int) -> frozenset[RationalTurn]:
    """(p/q)A := {p*b : q*b in A}."""
    if p == 0 or q == 0:
        raise ZeroDivisionError("scaling by zero")
    return frozenset(root * p for a in values for root in a.divide(q))


def sub_scaled_set(a_set, b_set, p: int, q: int = 1) -> frozenset[RationalTurn]:
    """A - (p/q)B."""
    scaled = scale_set(b_set, p, q) if p else frozenset([RationalTurn(0)])
    return frozenset(a - b for a in a_set for b in scaled)


@dataclass(frozen=True)
class CircleSolutionSet:
    """Candidate values per variable plus one verified joint selection.

    ``candidates[v]`` is the exact set of values ``v`` can take once every
    variable eliminated after it is fixed to its selected value. Free
    variables are pinned to 0 and listed in ``free``.
    """

    variables: tuple[str, ...]
    candidates: dict[str, tuple[RationalTurn, ...]]
    selection: dict[str, RationalTurn]
    free: frozenset[str] = field(default_factory=frozenset)


def gaussian_eliminate_circle(sys: EquationSystem) -> CircleSolutionSet | None:
    if not sys.is_circle:
        raise UnsupportedValueGroup("gaussian_eliminate_circle needs a circle-valued system")
    names = sys.variables
    if not sys.equations:
        return CircleSolutionSet(names, {v: (RationalTurn(0),) for v in names},
                                 {v: RationalTurn(0) for v in names}, frozenset(names))

    rows = [list(r) for r in sys.matrix()]
    rhs = [frozenset([eq.rhs]) for eq in sys.equations]
    n_cols = len(names)
    pivots: list[int] = []
    top = 0
    for col in range(n_cols):
        if top == len(rows):
            break
        while True:
            live = [i for i in range(top, len(rows)) if rows[i][col] != 0]
            if not live:
                break
            best = min(live, key=lambda i: (abs(rows[i][col]), i))
            rows[top], rows[best] = rows[best], rows[top]
            rhs[top], rhs[best] = rhs[best], rhs[top]
            if rows[top][col] < 0:
                rows[top] = [-a for a in rows[top]]
                rhs[top] = scale_set(rhs[top], -1, 1)
            done = True
            for i in range(top + 1, len(rows)):
                m = rows[i][col] // rows[top][col]
                if m:
                    rows[i] = [a - m * b for a, b in zip(rows[i], rows[top])]
                    rhs[i] = sub_scaled_set(rhs[i], rhs[top], m)
                if rows[i][col] != 0:
                    done = False
            if done:
                break
        if any(rows[i][col] != 0 for i in range(top, len(rows))):
            pivots.append(col)
            top += 1

    for i in range(len(pivots), len(rows)):
        if RationalTurn(0) not in rhs[i]:
            return None

    values: dict[int, RationalTurn] = {}
    candidates: dict[str, tuple[RationalTurn, ...]] = {}
    pivot_set = set(pivots)
    free = frozenset(names[c] for c in range(n_cols) if c not in pivot_set)
    for c in range(n_cols):
        if c not in pivot_set:
            values[c] = RationalTurn(0)
            candidates[names[c]] = (RationalTurn(0),)
    for i in reversed(range(len(pivots))):
        col = pivots[i]
        row = rows[i]
        target = rhs[i]
        for j in range(col + 1, n_cols):
            if row[j]:
                target = sub_scaled_set(target, [values[j]], row[j])
        options = sorted(scale_set(target, 1, row[col]))
        if not options:
            return None
        candidates[names[col]] = tuple(options)
        values[col] = options[0]

    selection = {names[c]: values[c] for c in range(n_cols)}
    if not verify_solution(sys, selection):
        raise InternalInvariantError(f"circle elimination produced a non-solution for {sys}")
    return CircleSolutionSet(names, {v: candidates[v] for v in names}, selection, free)


# torus


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CTXF_THREADS", "1")))
    except ValueError:
        return 1


def solve_torus(sys: EquationSystem, group: FiniteAbelianGroup | None = None) -> dict[str, TorusPoint]:
    """Solve a consistent K-valued system in the torus of phases containing K.

    Each right-hand side is embedded via the character pairing, then the D-1
    coordinate systems are solved independently on the circle.
    """
    group = group or sys.value_group
    if sys.is_circle:
        raise UnsupportedValueGroup("solve_torus needs a K-valued system")
    relation = find_violated_relation(sys)
    if relation is not None:
        raise InconsistentSystemError(
            relation, f"system is inconsistent: relation {list(relation)} does not annihilate the right-hand sides"
        )
    names = sys.variables
    embedded = [group.classical_to_torus(eq.rhs) for eq in sys.equations]

    def coordinate(j: int) -> dict[str, RationalTurn]:
        circle_sys = EquationSystem(
            tuple(ZModEquation(dict(eq.coeffs) or {"_": 0}, point.coords[j])
                  for eq, point in zip(sys.equations, embedded)),
            CIRCLE,
            extra_variables=names,
        )
        solved = gaussian_eliminate_circle(circle_sys)
        if solved is None:
            raise InternalInvariantError(f"consistent system {sys} has no circle solution at coordinate {j}")
        return solved.selection

    dims = range(group.order - 1)
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        per_coord = list(pool.map(coordinate, dims))
    result = {v: TorusPoint(group, tuple(c[v] for c in per_coord)) for v in names}
    if not verify_solution(sys, result):
        raise InternalInvariantError(f"torus solution failed verification for {sys}")
    return result


def verify_solution(sys: EquationSystem, assignment: Mapping[str, object]) -> bool:
    """Exact check of every equation; values may be group elements, turns or torus points."""
    if any(v not in assignment for v in sys.variables):
        return False
    on_torus = any(isinstance(x, TorusPoint) for x in assignment.values())
    for eq in sys.equations:
        if sys.is_circle:
            total = RationalTurn(0)
            for v, n in eq.coeffs.items():
                total = total + assignment[v] * n
            ok = total == eq.rhs
        elif on_torus:
            group = sys.value_group
            total = TorusPoint.zero(group)
            for v, n in eq.coeffs.items():
                total = total + assignment[v] * n
            ok = total == group.classical_to_torus(eq.rhs)
        else:
            group = sys.value_group
            total = group.sum(group.scalar_mul(n, assignment[v]) for v, n in eq.coeffs.items())
            ok = total == eq.rhs
        if not ok:
            return False
    return True


# text syntax

_TERM = re.compile(r"\s*([+-])?\s*(\d+)?\s*\*?\s*([A-Za-z_][A-Za-z_0-9]*)\s*")


class EquationSyntaxError(ValueError):
    pass


def parse_equation(text: str, value_group: ValueGroup) -> ZModEquation:
    """Parse ``2*y1 + y2 - 3*y3 = (1)`` or, over the circle, ``2*y = turn 1/2``."""
    if text.count("=") != 1:
        raise EquationSyntaxError(f"equation needs exactly one '=': {text!r}")
    lhs, rhs_text = (part.strip() for part in text.split("="))
    coeffs: dict[str, int] = {}
    pos = 0
    while pos < len(lhs):
        m = _TERM.match(lhs, pos)
        if not m or m.end() == pos:
            raise EquationSyntaxError(f"cannot parse term at {lhs[pos:]!r} in {text!r}")
        if pos > 0 and m.group(1) is None:
            raise EquationSyntaxError(f"missing operator before {m.group(3)!r} in {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        n = int(m.group(2)) if m.group(2) else 1
        coeffs[m.group(3)] = coeffs.get(m.group(3), 0) + sign * n
        pos = m.end()
    if not coeffs:
        raise EquationSyntaxError(f"no variables in {text!r}")
    try:
        if isinstance(value_group, Circle):
            if not rhs_text.lower().startswith("turn") and not rhs_text.lower().endswith("turn"):
                raise EquationSyntaxError(f"circle rhs must be written 'turn p/q': {rhs_text!r}")
            rhs: Rhs = RationalTurn.parse(rhs_text)
        else:
            rhs = parse_element(value_group, rhs_text)
    except GroupError as exc:
        raise EquationSyntaxError(str(exc)) from exc
    return ZModEquation(coeffs, rhs)
