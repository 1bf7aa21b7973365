"""Mermin measurement scenarios built from Z-module equations over K.

Given ``sum_r n_r y_r = a`` with a phase solution ``beta`` in the torus, the
scenario uses N parties (N >= sum n_r, N = 1 mod exponent(K)) sharing a
GHZ state: one control context with no phases and N variations, each a cyclic
shift of the per-party phase list ``alpha`` (n_r copies of beta_r followed by
n_0 zero phases).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from .abgroup import FiniteAbelianGroup, GroupElement, TorusPoint, torus_sum
from .sheaf import Distribution, EmpiricalModel, MeasurementScenario, Section, Semiring, domain
from .zsolve import (
    EquationSystem,
    ZModEquation,
    solve_torus,
    verify_solution,
)


class ScenarioError(ValueError):
    pass


class Measurement(NamedTuple):
    """Party ``party`` applies the phase of variable ``setting`` (0 = no phase), then measures X."""

    copy: int
    party: int
    setting: int


@dataclass(frozen=True)
class MerminScenario:
    group: FiniteAbelianGroup
    equation: ZModEquation          # normalised: positive coefficients only
    variables: tuple[str, ...]
    coefficients: tuple[int, ...]
    target: GroupElement
    beta: Mapping[str, TorusPoint]  # phase solution of the normalised equation
    parties: int
    padding: int
    settings: tuple[int, ...]       # R(i) for i = 1..N, stored 0-based by party
    flipped: frozenset[str] = frozenset()
    copy: int = 0

    @property
    def exponent(self) -> int:
        return self.group.exponent

    @property
    def alphas(self) -> tuple[TorusPoint, ...]:
        return tuple(self.phase(r) for r in self.settings)

    def phase(self, setting: int) -> TorusPoint:
        if setting == 0:
            return TorusPoint.zero(self.group)
        return self.beta[self.variables[setting - 1]]

    def context_settings(self, v: int) -> tuple[int, ...]:
        """Per-party settings of context v (0 = control, 1..N variations)."""
        n = self.parties
        if v == 0:
            return (0,) * n
        return tuple(self.settings[(i + v - 1) % n] for i in range(n))

    def context(self, v: int) -> tuple[Measurement, ...]:
        return tuple(Measurement(self.copy, i + 1, r) for i, r in enumerate(self.context_settings(v)))

    def context_target(self, v: int) -> GroupElement:
        return self.group.zero if v == 0 else self.target

    @property
    def measurements(self) -> tuple[Measurement, ...]:
        return tuple(
            Measurement(self.copy, i, r) for i in range(1, self.parties + 1) for r in range(len(self.variables) + 1)
        )

    @property
    def measurement_scenario(self) -> MeasurementScenario:
        return MeasurementScenario(
            self.measurements, self.group, tuple(self.context(v) for v in range(self.parties + 1))
        )

    def label(self, m: Measurement) -> str:
        name = "0" if m.setting == 0 else self.variables[m.setting - 1]
        prefix = f"S{m.copy + 1}." if self.copy else ""
        return f"{prefix}X{m.party}^{name}"

    def system(self) -> EquationSystem:
        return EquationSystem((self.equation,), self.group)


def _minimal_parties(total: int, k: int) -> int:
    n = max(2, total)
    while n % k != 1 % k:
        n += 1
    return n


def build_scenario(group: FiniteAbelianGroup, equation: ZModEquation,
                   beta: Mapping[str, TorusPoint] | None = None, parties: int | None = None) -> MerminScenario:
    """Lay out the control and N cyclic variations for ``equation`` over ``group``.

    Negative coefficients are absorbed by negating the variable (and its phase).
    ``beta`` defaults to the canonical torus solution.
    """
    if not isinstance(equation.rhs, tuple):
        raise ScenarioError("the equation must be valued in the finite group")
    a = group.check(equation.rhs)
    if not equation.coeffs:
        if a != group.zero:
            raise ScenarioError(f"equation {equation} is inconsistent")
        raise ScenarioError(f"equation {equation} is degenerate: no variables remain")
    flipped = frozenset(v for v, n in equation.coeffs.items() if n < 0)
    norm = ZModEquation({v: abs(n) for v, n in equation.coeffs.items()}, a)
    variables = tuple(norm.coeffs)
    coefficients = tuple(norm.coeffs[v] for v in variables)
    sys = EquationSystem((norm,), group)

    if beta is None:
        phases = solve_torus(sys, group)
    else:
        phases = {v: (-beta[v] if v in flipped else beta[v]) for v in variables}
        if not verify_solution(sys, phases):
            raise ScenarioError("beta is not a torus solution of the equation")

    k = group.exponent
    total = sum(coefficients)
    n = _minimal_parties(total, k) if parties is None else parties
    if n < max(2, total) or n % k != 1 % k:
        raise ScenarioError(f"N={n} must satisfy N >= max(2, {total}) and N = 1 mod {k}")
    padding = n - total

    settings = []
    for r, n_r in enumerate(coefficients, start=1):
        settings += [r] * n_r
    settings += [0] * padding

    scenario = MerminScenario(group, norm, variables, coefficients, a, phases, n, padding, tuple(settings), flipped)
    for v in range(n + 1):
        phase_sum = torus_sum(group, [scenario.phase(r) for r in scenario.context_settings(v)])
        if phase_sum != group.classical_to_torus(scenario.context_target(v)):
            raise ScenarioError(f"context {v} has phase sum {phase_sum}, not a classical point")
    return scenario


def _fibre_distribution(group: FiniteAbelianGroup, context: Sequence, target: GroupElement) -> Distribution:
    n = len(context)
    weight = Fraction(1, group.order ** (n - 1))
    weights = {
        tup: weight for tup in itertools.product(group.elements(), repeat=n) if group.sum(tup) == target
    }
    return Distribution(domain(context), weights, Semiring.NONNEG)


def empirical_model(s: MerminScenario) -> EmpiricalModel:
    """Each context: uniform 1/D^(N-1) on outcome tuples summing to the context's target."""
    dists = tuple(
        _fibre_distribution(s.group, s.context(v), s.context_target(v)) for v in range(s.parties + 1)
    )
    return EmpiricalModel(s.measurement_scenario, dists)


def f_S_pushforward(s: MerminScenario, joint: Sequence[Section]) -> GroupElement:
    """Sum of all variation outcomes minus n_0 times the control sum."""
    group = s.group
    if len(joint) != s.parties + 1:
        raise ScenarioError(f"need {s.parties + 1} context sections, got {len(joint)}")
    sums = []
    for v, sec in enumerate(joint):
        if set(sec.domain) != set(s.context(v)):
            raise ScenarioError(f"section {v} is not over context {v}")
        total = group.sum(sec.values)
        if total != s.context_target(v):
            raise ScenarioError(f"section {sec.values} is outside the support of context {v}")
        sums.append(total)
    return group.sub(group.sum(sums[1:]), group.scalar_mul(s.padding, sums[0]))


def lhv_when_solvable(s: MerminScenario, solution: Mapping[str, GroupElement]) -> Distribution:
    """Explicit hidden-variable model from a solution in K.

    Uniform over x in K^N with sum 0 of the global section X_i^r -> x_i + b_r (b_0 = 0).
    """
    group = s.group
    b = {v: group.check(solution[v]) for v in s.variables}
    b = {v: (group.neg(x) if v in s.flipped else x) for v, x in b.items()}
    if not verify_solution(s.system(), b):
        raise ScenarioError("assignment is not a solution of the equation in K")
    shifts = [group.zero] + [b[v] for v in s.variables]
    everything = domain(s.measurements)
    weight = Fraction(1, group.order ** (s.parties - 1))
    weights = {}
    for xs in itertools.product(group.elements(), repeat=s.parties):
        if group.sum(xs) != group.zero:
            continue
        values = {m: group.add(xs[m.party - 1], shifts[m.setting]) for m in everything}
        weights[tuple(values[m] for m in everything)] = weight
    return Distribution(everything, weights, Semiring.NONNEG)


@dataclass(frozen=True)
class CompositeScenario:
    """Independent Mermin scenarios side by side; contexts pick one context per factor."""

    factors: tuple[MerminScenario, ...]

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.factors[0].group

    @property
    def measurement_scenario(self) -> MeasurementScenario:
        measurements = [m for f in self.factors for m in f.measurements]
        cover = [
            tuple(m for ctx in combo for m in ctx)
            for combo in itertools.product(*(f.measurement_scenario.cover for f in self.factors))
        ]
        return MeasurementScenario(tuple(measurements), self.group, tuple(cover))

    def system(self) -> EquationSystem:
        return EquationSystem(tuple(f.equation for f in self.factors), self.group)

    def label(self, m: Measurement) -> str:
        return self.factors[m.copy].label(m)


def tensor_scenarios(scenarios: Sequence[MerminScenario]) -> CompositeScenario:
    if not scenarios:
        raise ScenarioError("tensor of an empty list of scenarios")
    group = scenarios[0].group
    if any(s.group != group for s in scenarios):
        raise ScenarioError("all factors must share the same group")
    relabelled = tuple(
        MerminScenario(s.group, s.equation, s.variables, s.coefficients, s.target, s.beta, s.parties,
                       s.padding, s.settings, s.flipped, copy=j)
        for j, s in enumerate(scenarios)
    )
    return CompositeScenario(relabelled)


def composite_empirical_model(c: CompositeScenario) -> EmpiricalModel:
    factor_models = [empirical_model(f) for f in c.factors]
    dists = []
    for combo in itertools.product(*(fm.distributions for fm in factor_models)):
        weights = {}
        for parts in itertools.product(*(d.weights.items() for d in combo)):
            key = tuple(x for k, _ in parts for x in k)
            w = Fraction(1)
            for _, pw in parts:
                w *= pw
            weights[key] = w
        dom = tuple(m for d in combo for m in d.domain)
        dists.append(Distribution(dom, weights, Semiring.NONNEG))
    return EmpiricalModel(c.measurement_scenario, tuple(dists))


def model_of(s: MerminScenario | CompositeScenario) -> EmpiricalModel:
    return composite_empirical_model(s) if isinstance(s, CompositeScenario) else empirical_model(s)
