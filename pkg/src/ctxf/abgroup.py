"""Finite abelian groups in invariant-factor form, and exact circle/torus phases.

Group elements are plain tuples of residues. Phases are measured in turns
(1 turn = 2*pi) and kept as exact fractions reduced modulo 1.
"""
from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Iterator, Sequence

GroupElement = tuple[int, ...]


class GroupError(ValueError):
    """Structural error: bad invariant factors, wrong element shape, etc."""


@total_ordering
class RationalTurn:
    """An element of the circle group R/Z, stored as an exact fraction in [0, 1)."""

    __slots__ = ("_value",)

    def __init__(self, numerator: int | Fraction | RationalTurn = 0, denominator: int = 1):
        if isinstance(numerator, RationalTurn):
            value = numerator._value
        else:
            value = Fraction(numerator) / denominator
        self._value = value - math.floor(value)

    @property
    def value(self) -> Fraction:
        return self._value

    @property
    def numerator(self) -> int:
        return self._value.numerator

    @property
    def denominator(self) -> int:
        return self._value.denominator

    def __add__(self, other: RationalTurn) -> RationalTurn:
        return RationalTurn(self._value + other._value)

    def __sub__(self, other: RationalTurn) -> RationalTurn:
        return RationalTurn(self._value - other._value)

    def __neg__(self) -> RationalTurn:
        return RationalTurn(-self._value)

    def __mul__(self, n: int) -> RationalTurn:
        return RationalTurn(self._value * n)

    __rmul__ = __mul__

    def divide(self, n: int) -> list[RationalTurn]:
        """All b with n*b == self; exactly |n| values, sorted."""
        if n == 0:
            raise ZeroDivisionError("division of a turn by zero")
        m = abs(n)
        roots = {RationalTurn((self._value + k) / m) for k in range(m)}
        if n < 0:
            roots = {-r for r in roots}
        return sorted(roots)

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalTurn):
            return self._value == other._value
        if isinstance(other, (int, Fraction)):
            return self._value == RationalTurn(other)._value
        return NotImplemented

    def __lt__(self, other: RationalTurn) -> bool:
        return self._value < other._value

    def __hash__(self) -> int:
        return hash(("turn", self._value))

    def __repr__(self) -> str:
        return f"RationalTurn({self._value})"

    def __str__(self) -> str:
        return str(self._value)

    @classmethod
    def parse(cls, text: str) -> RationalTurn:
        """Parse ``1/4``, ``0``, ``turn 3/8`` or ``3/8 turn``."""
        body = text.strip().lower().replace("turn", "").strip()
        try:
            return cls(Fraction(body))
        except (ValueError, ZeroDivisionError) as exc:
            raise GroupError(f"malformed turn literal {text!r}") from exc


class FiniteAbelianGroup:
    """Z_{n_1} x ... x Z_{n_J}; the empty factor list is the trivial group."""

    def __init__(self, invariant_factors: Sequence[int] = ()):
        factors = tuple(int(n) for n in invariant_factors)
        if any(n < 2 for n in factors):
            raise GroupError(f"invariant factors must be >= 2, got {factors}")
        self.invariant_factors = factors

    @cached_property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.invariant_factors) if self.invariant_factors else 1

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def zero(self) -> GroupElement:
        return (0,) * self.rank

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteAbelianGroup) and self.invariant_factors == other.invariant_factors

    def __hash__(self) -> int:
        return hash(self.invariant_factors)

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup({list(self.invariant_factors)})"

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "Z1"
        return "x".join(f"Z{n}" for n in self.invariant_factors)

    # elements

    def elements(self) -> list[GroupElement]:
        """All elements, lexicographic in residues (the fixed enumeration order)."""
        return self._elements

    @cached_property
    def _elements(self) -> list[GroupElement]:
        return list(itertools.product(*(range(n) for n in self.invariant_factors)))

    @cached_property
    def _index(self) -> dict[GroupElement, int]:
        return {g: i for i, g in enumerate(self._elements)}

    def index(self, g: GroupElement) -> int:
        return self._index[self.check(g)]

    def nonzero_elements(self) -> list[GroupElement]:
        return self._elements[1:]

    def check(self, g: Sequence[int]) -> GroupElement:
        g = tuple(g)
        if len(g) != self.rank:
            raise GroupError(f"element {g} has {len(g)} residues, {self} needs {self.rank}")
        if any(not 0 <= r < n for r, n in zip(g, self.invariant_factors)):
            raise GroupError(f"element {g} is not reduced for {self}")
        return g

    def element(self, residues: Sequence[int] | int) -> GroupElement:
        """Build an element, reducing residues; a bare int is broadcast to every factor."""
        if isinstance(residues, int):
            residues = (residues,) * self.rank
        residues = tuple(residues)
        if len(residues) != self.rank:
            raise GroupError(f"element {residues} has wrong length for {self}")
        return tuple(r % n for r, n in zip(residues, self.invariant_factors))

    # group structure

    def add(self, g: GroupElement, h: GroupElement) -> GroupElement:
        if len(g) != self.rank or len(h) != self.rank:
            raise GroupError(f"dimension mismatch adding {g} and {h} in {self}")
        return tuple((a + b) % n for a, b, n in zip(g, h, self.invariant_factors))

    def neg(self, g: GroupElement) -> GroupElement:
        return tuple((-a) % n for a, n in zip(g, self.invariant_factors))

    def sub(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return self.add(g, self.neg(h))

    def scalar_mul(self, n: int, g: GroupElement) -> GroupElement:
        if len(g) != self.rank:
            raise GroupError(f"dimension mismatch for {g} in {self}")
        return tuple((n * a) % m for a, m in zip(g, self.invariant_factors))

    def sum(self, elements) -> GroupElement:
        total = self.zero
        for g in elements:
            total = self.add(total, g)
        return total

    def pairing(self, y: GroupElement, x: GroupElement) -> RationalTurn:
        """Character pairing sum_j y_j x_j / n_j mod 1."""
        return RationalTurn(sum(Fraction(a * b, n) for a, b, n in zip(y, x, self.invariant_factors)))

    # torus embedding

    def classical_to_torus(self, x: GroupElement) -> TorusPoint:
        x = self.check(x)
        return TorusPoint(self, tuple(self.pairing(y, x) for y in self.nonzero_elements()))

    def torus_to_classical(self, point: TorusPoint) -> GroupElement | None:
        """Inverse of the embedding on its image, None for non-classical points."""
        return self._classical_points.get(point.coords)

    @cached_property
    def _classical_points(self) -> dict[tuple[RationalTurn, ...], GroupElement]:
        return {self.classical_to_torus(x).coords: x for x in self._elements}

    def format_element(self, g: GroupElement) -> str:
        return "(" + ",".join(str(r) for r in g) + ")"


class TorusPoint:
    """A point of T^(D-1): one turn per nonzero character, enumerated like the group."""

    __slots__ = ("group", "coords")

    def __init__(self, group: FiniteAbelianGroup, coords: Sequence[RationalTurn | Fraction | int]):
        coords = tuple(c if isinstance(c, RationalTurn) else RationalTurn(c) for c in coords)
        if len(coords) != group.order - 1:
            raise GroupError(f"torus point for {group} needs {group.order - 1} coordinates, got {len(coords)}")
        self.group = group
        self.coords = coords

    @classmethod
    def zero(cls, group: FiniteAbelianGroup) -> TorusPoint:
        return cls(group, (RationalTurn(0),) * (group.order - 1))

    def coordinate(self, y: GroupElement) -> RationalTurn:
        """Turn at character y; the y = 0 coordinate is pinned to 0."""
        i = self.group.index(y)
        return RationalTurn(0) if i == 0 else self.coords[i - 1]

    def as_dict(self) -> dict[GroupElement, RationalTurn]:
        return dict(zip(self.group.nonzero_elements(), self.coords))

    def _same(self, other: TorusPoint) -> None:
        if other.group != self.group:
            raise GroupError("torus points over different groups")

    def __add__(self, other: TorusPoint) -> TorusPoint:
        self._same(other)
        return TorusPoint(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: TorusPoint) -> TorusPoint:
        self._same(other)
        return TorusPoint(self.group, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> TorusPoint:
        return TorusPoint(self.group, tuple(-a for a in self.coords))

    def __mul__(self, n: int) -> TorusPoint:
        return TorusPoint(self.group, tuple(a * n for a in self.coords))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, TorusPoint) and self.group == other.group and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((self.group, self.coords))

    def __lt__(self, other: TorusPoint) -> bool:
        return self.coords < other.coords

    def __repr__(self) -> str:
        return f"TorusPoint({self.group}, {[str(c) for c in self.coords]})"

    def __str__(self) -> str:
        if len(self.coords) == 1:
            return f"{self.coords[0]} turn"
        return "(" + ", ".join(f"{c} turn" for c in self.coords) + ")"


def turn_add(a: RationalTurn, b: RationalTurn) -> RationalTurn:
    return a + b


def torus_add(a: TorusPoint, b: TorusPoint) -> TorusPoint:
    return a + b


def torus_sum(group: FiniteAbelianGroup, points) -> TorusPoint:
    total = TorusPoint.zero(group)
    for p in points:
        total = total + p
    return total


def parse_group(text: str) -> FiniteAbelianGroup:
    """Parse ``Z2``, ``Z2xZ4`` (case-insensitive); ``Z1`` is the trivial group."""
    parts = text.strip().lower().replace(" ", "").split("x")
    factors = []
    for part in parts:
        m = re.fullmatch(r"z(\d+)", part)
        if not m:
            raise GroupError(f"malformed group literal {text!r}")
        n = int(m.group(1))
        if n < 1:
            raise GroupError(f"malformed group literal {text!r}")
        if n > 1:
            factors.append(n)
    return FiniteAbelianGroup(factors)


def parse_element(group: FiniteAbelianGroup, text: str) -> GroupElement:
    """Parse ``(1,3)`` or ``1,3`` as a reduced element of ``group``."""
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    body = body.strip()
    try:
        residues = tuple(int(t) for t in body.split(",")) if body else ()
    except ValueError as exc:
        raise GroupError(f"malformed element literal {text!r}") from exc
    return group.check(residues)


def iter_assignments(group: FiniteAbelianGroup, count: int) -> Iterator[tuple[GroupElement, ...]]:
    return itertools.product(group.elements(), repeat=count)
