"""Linear theories of supports and All-vs-Nothing checks.

Theories over Z are represented by their Z_q quotient, q a multiple of the
outcome group's exponent: for assignments valued in that group, satisfaction
depends on the coefficients only modulo the exponent.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .abgroup import FiniteAbelianGroup, GroupElement
from .mermin import MerminScenario
from .sheaf import DomainError, EmpiricalModel, Section, domain, possibilize
from .zsolve import InternalInvariantError


class ModulusError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class LinearEquation:
    """sum_m coeffs[m] * s_m = rhs over the measurements in ``context``."""

    context: tuple
    coeffs: tuple[int, ...]
    rhs: GroupElement

    def __post_init__(self):
        if len(self.context) != len(self.coeffs):
            raise DomainError("one coefficient per measurement of the context")

    @property
    def index(self) -> tuple:
        return self.context

    def as_dict(self) -> dict:
        return dict(zip(self.context, self.coeffs))

    def is_trivial(self) -> bool:
        return not any(self.coeffs)


@dataclass(frozen=True)
class LinearTheory:
    modulus: int
    equations: tuple[LinearEquation, ...]
    contexts: tuple[tuple, ...]   # the supports it was generated from

    def for_context(self, context) -> list[LinearEquation]:
        context = tuple(context)
        return [eq for eq in self.equations if eq.context == context]


def _evaluate(group: FiniteAbelianGroup, coeffs: Sequence[int], values: Sequence[GroupElement]) -> GroupElement:
    return group.sum(group.scalar_mul(n, x) for n, x in zip(coeffs, values))


def satisfies(group: FiniteAbelianGroup, s: Section | Mapping, phi: LinearEquation) -> bool:
    if isinstance(s, Section):
        s = s.as_dict()
    try:
        values = [s[m] for m in phi.context]
    except KeyError as exc:
        raise DomainError(f"assignment is not defined on {exc.args[0]!r}") from exc
    return _evaluate(group, phi.coeffs, values) == phi.rhs


def _check_modulus(q: int, group: FiniteAbelianGroup) -> None:
    if q < 1 or q % group.exponent:
        raise ModulusError(f"modulus {q} is not a multiple of exponent {group.exponent} of {group}")


def theory_of_support(sections: Iterable[Section], context: Sequence, q: int,
                      group: FiniteAbelianGroup) -> LinearTheory:
    """All (n, b) with n in (Z_q)^C, b in G satisfied by every section, in lexicographic order."""
    _check_modulus(q, group)
    context = domain(context)
    rows = [s.restrict(context).values for s in sections]
    coeffs = list(itertools.product(range(q), repeat=len(context)))
    if not rows:
        return LinearTheory(q, tuple(
            LinearEquation(context, n, b) for n in coeffs for b in group.elements()), (context,))
    factors = np.array(group.invariant_factors, dtype=np.int64)
    # W[s, m, j]: coordinate j of the value at measurement m in section s
    w = np.array(rows, dtype=np.int64).reshape(len(rows), len(context), group.rank)
    n = np.array(coeffs, dtype=np.int64).reshape(len(coeffs), len(context))
    rhs = np.einsum("km,mj->kj", n, w[0]) % factors
    alive = np.arange(len(coeffs))
    # candidates die fast, so check sections in growing blocks
    start, block = 1, 8
    while start < len(rows) and alive.size:
        chunk = w[start:start + block]
        vals = np.einsum("km,smj->ksj", n[alive], chunk) % factors
        keep = (vals == rhs[alive][:, None, :]).all(axis=(1, 2))
        alive = alive[keep]
        start += block
        block *= 2
    equations = tuple(
        LinearEquation(context, coeffs[k], tuple(int(x) for x in rhs[k])) for k in alive
    )
    return LinearTheory(q, equations, (context,))


def model_theory(m: EmpiricalModel, q: int) -> LinearTheory:
    """Union over contexts of the theories of the context supports."""
    group = m.group
    equations: list[LinearEquation] = []
    for c, d in m.context_items():
        if not d.support():
            raise PreconditionError(f"context {c} has empty support")
        equations.extend(theory_of_support(d.sections(), c, q, group).equations)
    return LinearTheory(q, tuple(equations), m.scenario.cover)


def _satisfying_assignments(group: FiniteAbelianGroup, measurements: Sequence,
                            equations: Sequence[LinearEquation]) -> Iterator[tuple]:
    order = list(measurements)
    pos = {x: i for i, x in enumerate(order)}
    by_depth: dict[int, list] = {}
    for eq in equations:
        if eq.is_trivial():
            continue
        idx = [pos[x] for x in eq.context]
        by_depth.setdefault(max(idx), []).append((idx, eq.coeffs, eq.rhs))
    values: list = [None] * len(order)
    elems = group.elements()

    def extend(i: int):
        if i == len(order):
            yield tuple(values)
            return
        for g in elems:
            values[i] = g
            if all(_evaluate(group, coeffs, [values[j] for j in idx]) == rhs
                   for idx, coeffs, rhs in by_depth.get(i, ())):
                yield from extend(i + 1)

    if any(eq.is_trivial() and eq.rhs != group.zero for eq in equations):
        return iter(())
    return extend(0)


def avn_witness(m: EmpiricalModel, q: int, group: FiniteAbelianGroup | None = None) -> Section | None:
    """First global assignment satisfying the whole theory, or None when the model is AvN."""
    group = group or m.group
    if group != m.group:
        raise ModulusError(
            f"theory is generated from {m.group}-valued supports; use hierarchy_witness for other modules"
        )
    theory = model_theory(possibilize(m), q)
    everything = m.scenario.measurements
    first = next(_satisfying_assignments(group, everything, theory.equations), None)
    return None if first is None else Section(everything, first)


def avn_check(m: EmpiricalModel, q: int, group: FiniteAbelianGroup | None = None) -> bool:
    return avn_witness(m, q, group) is None


# non-collapse witness


def scaled_identity_solution(p: int, group: FiniteAbelianGroup) -> GroupElement:
    """y with p*y = (1,...,1), coordinatewise inverse of p."""
    return tuple(pow(p, -1, n) for n in group.invariant_factors)


def lifted_equations(p: int, kprime: FiniteAbelianGroup, scenario: MerminScenario,
                     model: EmpiricalModel | None = None) -> list[tuple[tuple, int, int]]:
    """Integer lift of the Z_p theory, reduced to what matters over ``kprime``.

    Returns (context, u, t) triples meaning sum_{m in context} u*s_m = u*t*(1,...,1)
    with u ranging over integers not divisible by p, one per residue pair
    (u mod p, u mod exponent(K')). With ``model`` the Z_p theory is generated
    from the supports and checked to consist of multiples of the all-ones equation.
    """
    e = kprime.exponent
    us = [u for u in range(1, p * e + 1) if u % p]
    out = []
    for v in range(scenario.parties + 1):
        ctx = domain(scenario.context(v))
        t = scenario.context_target(v)[0]
        if model is not None:
            dist = model.distributions[v]
            theory = theory_of_support(dist.sections(), ctx, p, model.group)
            for eq in theory.equations:
                if eq.is_trivial():
                    continue
                u0 = eq.coeffs[0]
                if any(c != u0 for c in eq.coeffs) or eq.rhs != ((u0 * t) % p,):
                    raise InternalInvariantError(f"unexpected theory equation {eq} over Z_{p}")
            units = sorted({eq.coeffs[0] for eq in theory.equations if not eq.is_trivial()})
            if units != list(range(1, p)):
                raise InternalInvariantError(f"Z_{p} theory of context {v} misses some multiples")
        out.extend((ctx, u, t) for u in us)
    return out


def hierarchy_witness(p: int, kprime: FiniteAbelianGroup, scenario: MerminScenario,
                      model: EmpiricalModel | None = None) -> Section:
    """Global K'-valued assignment satisfying the lifted theory of the p*y = 1 model.

    Controls get 0, phased measurements get the solution of p*y = 1 in K'; its
    existence shows the model is not AvN over K'.
    """
    if kprime.order == 1:
        raise PreconditionError("K' must be non-trivial")
    if math.gcd(p, kprime.exponent) != 1:
        raise PreconditionError(f"p={p} is not coprime to exponent {kprime.exponent} of {kprime}")
    if (scenario.group.invariant_factors != (p,) or scenario.coefficients != (p,)
            or scenario.target != (1,)):
        raise PreconditionError(f"scenario is not the p*y = 1 scenario over Z_{p}")
    y = scaled_identity_solution(p, kprime)
    values = {m: (kprime.zero if m.setting == 0 else y) for m in scenario.measurements}
    witness = Section.from_dict(values)
    ones = kprime.element(1)
    for ctx, u, t in lifted_equations(p, kprime, scenario, model):
        lhs = kprime.sum(kprime.scalar_mul(u, values[m]) for m in ctx)
        if lhs != kprime.scalar_mul(u * t, ones):
            raise InternalInvariantError(f"witness fails lifted equation u={u} on {ctx}")
    return witness
