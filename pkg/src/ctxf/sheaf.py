"""Measurement scenarios, semiring-valued empirical models and the contextuality hierarchy.

Every measurement shares one outcome group K, so the events over a set U of
measurements are K^U. A section over U is stored as a tuple of outcomes
aligned with the sorted tuple U.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .abgroup import FiniteAbelianGroup, GroupElement
from .simplex import feasible_point_guided
from .zsolve import InternalInvariantError

Measurement = Hashable
Domain = tuple


class Semiring(str, Enum):
    BOOLEAN = "boolean"
    NONNEG = "nonneg-rational"
    RATIONAL = "rational"

    @property
    def zero(self):
        return False if self is Semiring.BOOLEAN else Fraction(0)

    @property
    def one(self):
        return True if self is Semiring.BOOLEAN else Fraction(1)

    def add(self, a, b):
        return (a or b) if self is Semiring.BOOLEAN else a + b


class DomainError(ValueError):
    pass


class SignallingModelError(ValueError):
    pass


def domain(measurements: Iterable[Measurement]) -> Domain:
    return tuple(sorted(set(measurements)))


@dataclass(frozen=True)
class MeasurementScenario:
    measurements: Domain
    outcome_group: FiniteAbelianGroup
    cover: tuple[Domain, ...]

    def __post_init__(self):
        object.__setattr__(self, "measurements", domain(self.measurements))
        object.__setattr__(self, "cover", tuple(domain(c) for c in self.cover))
        everything = set(self.measurements)
        covered = set()
        for c in self.cover:
            if not set(c) <= everything:
                raise DomainError(f"context {c} uses unknown measurements")
            covered |= set(c)
        if covered != everything:
            raise DomainError("contexts do not cover every measurement")


@dataclass(frozen=True)
class Section:
    domain: Domain
    values: tuple[GroupElement, ...]

    def __post_init__(self):
        if len(self.domain) != len(self.values):
            raise DomainError("section values do not match its domain")

    def __getitem__(self, m: Measurement) -> GroupElement:
        return self.values[self.domain.index(m)]

    def as_dict(self) -> dict[Measurement, GroupElement]:
        return dict(zip(self.domain, self.values))

    def restrict(self, sub: Iterable[Measurement]) -> Section:
        sub = domain(sub)
        lookup = self.as_dict()
        try:
            return Section(sub, tuple(lookup[m] for m in sub))
        except KeyError as exc:
            raise DomainError(f"{exc.args[0]!r} is not in the section's domain") from exc

    @classmethod
    def from_dict(cls, values: Mapping[Measurement, GroupElement]) -> Section:
        dom = domain(values)
        return cls(dom, tuple(values[m] for m in dom))


@dataclass(frozen=True)
class Distribution:
    """Finite-support distribution on sections over ``domain``; zero weights are dropped."""

    domain: Domain
    weights: Mapping[tuple, object]
    semiring: Semiring = Semiring.NONNEG

    def __post_init__(self):
        dom = tuple(self.domain)
        if dom != domain(dom):
            raise DomainError(f"domain {dom} must be sorted and duplicate-free")
        sr = self.semiring
        clean = {}
        for key, w in self.weights.items():
            key = tuple(key)
            if len(key) != len(dom):
                raise DomainError(f"section {key} does not fit domain {dom}")
            if sr is Semiring.BOOLEAN:
                w = bool(w)
            else:
                w = Fraction(w)
                if sr is Semiring.NONNEG and w < 0:
                    raise ValueError(f"negative weight {w} in a nonneg-rational distribution")
            if w:
                clean[key] = w
        if sr is Semiring.BOOLEAN:
            if not clean:
                raise ValueError("boolean distribution with empty support")
        elif sum(clean.values(), Fraction(0)) != 1:
            raise ValueError(f"weights sum to {sum(clean.values(), Fraction(0))}, not 1")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "weights", clean)

    def __getitem__(self, key: tuple):
        return self.weights.get(tuple(key), self.semiring.zero)

    def support(self) -> frozenset[tuple]:
        return frozenset(self.weights)

    def sections(self) -> list[Section]:
        return [Section(self.domain, k) for k in sorted(self.weights)]

    def marginalize(self, sub: Iterable[Measurement]) -> Distribution:
        sub = domain(sub)
        if not set(sub) <= set(self.domain):
            raise DomainError(f"{sub} is not contained in {self.domain}")
        pos = [self.domain.index(m) for m in sub]
        out: dict[tuple, object] = {}
        sr = self.semiring
        for key, w in self.weights.items():
            k = tuple(key[i] for i in pos)
            out[k] = sr.add(out.get(k, sr.zero), w)
        return Distribution(sub, out, sr)

    def map_semiring(self, target: Semiring) -> Distribution:
        if target is Semiring.BOOLEAN:
            return Distribution(self.domain, {k: True for k in self.weights}, target)
        return Distribution(self.domain, dict(self.weights), target)


@dataclass(frozen=True)
class EmpiricalModel:
    scenario: MeasurementScenario
    distributions: tuple[Distribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "distributions", tuple(self.distributions))
        if len(self.distributions) != len(self.scenario.cover):
            raise DomainError("one distribution per context required")
        for c, d in zip(self.scenario.cover, self.distributions):
            if d.domain != c:
                raise DomainError(f"distribution domain {d.domain} does not match context {c}")
        if len({d.semiring for d in self.distributions}) > 1:
            raise ValueError("mixed semirings in one empirical model")

    @property
    def semiring(self) -> Semiring:
        return self.distributions[0].semiring

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.scenario.outcome_group

    def context_items(self):
        return zip(self.scenario.cover, self.distributions)


def marginalize(d: Distribution, sub: Iterable[Measurement]) -> Distribution:
    return d.marginalize(sub)


def is_no_signalling(m: EmpiricalModel) -> bool:
    items = list(m.context_items())
    for (c1, d1), (c2, d2) in itertools.combinations(items, 2):
        overlap = set(c1) & set(c2)
        if d1.marginalize(overlap).weights != d2.marginalize(overlap).weights:
            return False
    return True


def possibilize(m: EmpiricalModel) -> EmpiricalModel:
    return EmpiricalModel(m.scenario, tuple(d.map_semiring(Semiring.BOOLEAN) for d in m.distributions))


# support presheaf


def _consistent_sections(m: EmpiricalModel, sub: Sequence[Measurement]) -> Iterator[tuple]:
    """Sections over ``sub`` whose restriction to every U∩C lies in supp(e_C|U∩C), in lexicographic order."""
    sub = domain(sub)
    elems = m.group.elements()
    checks: list[tuple[int, list[int], frozenset]] = []
    for c, d in m.context_items():
        overlap = [x for x in sub if x in set(c)]
        if not overlap:
            continue
        positions = [sub.index(x) for x in overlap]
        allowed = d.marginalize(overlap).support()
        checks.append((max(positions), positions, allowed))
    by_depth: dict[int, list] = {}
    for depth, positions, allowed in checks:
        by_depth.setdefault(depth, []).append((positions, allowed))

    values: list = [None] * len(sub)

    def extend(i: int) -> Iterator[tuple]:
        if i == len(sub):
            yield tuple(values)
            return
        for g in elems:
            values[i] = g
            if all(tuple(values[p] for p in positions) in allowed for positions, allowed in by_depth.get(i, ())):
                yield from extend(i + 1)
        values[i] = None

    yield from extend(0)


def support_presheaf_at(m: EmpiricalModel, sub: Iterable[Measurement]) -> list[Section]:
    sub = domain(sub)
    return [Section(sub, v) for v in _consistent_sections(m, sub)]


def find_global_section_possibilistic(m: EmpiricalModel) -> Section | None:
    """First global assignment consistent with every context's support; None iff strongly contextual."""
    first = next(_consistent_sections(m, m.scenario.measurements), None)
    return None if first is None else Section(m.scenario.measurements, first)


def possibilistic_extension(m: EmpiricalModel) -> Distribution | None:
    """Boolean global distribution whose marginals are exactly the context supports, if any."""
    everything = m.scenario.measurements
    consistent = list(_consistent_sections(m, everything))
    if not consistent:
        return None
    d = Distribution(everything, {s: True for s in consistent}, Semiring.BOOLEAN)
    for c, e in m.context_items():
        if d.marginalize(c).support() != e.support():
            return None
    return d


def _require_no_signalling(m: EmpiricalModel) -> None:
    if not is_no_signalling(m):
        raise SignallingModelError("empirical model is signalling: marginals disagree on an overlap")


def find_global_section_probabilistic(m: EmpiricalModel) -> Distribution | None:
    """Exact nonnegative rational global section, via an exactly verified LP.

    Only deterministic global sections consistent with every support can carry
    weight in a global section, so the program is restricted to those columns.
    """
    _require_no_signalling(m)
    everything = m.scenario.measurements
    columns = list(_consistent_sections(m, everything))
    if not columns:
        return None
    rows: list[list[int]] = []
    rhs: list[Fraction] = []
    for c, e in m.context_items():
        pos = [everything.index(x) for x in c]
        for key in sorted(e.support()):
            rows.append([int(tuple(col[p] for p in pos) == key) for col in columns])
            rhs.append(Fraction(e[key]))
    x = feasible_point_guided(rows, rhs)
    if x is None:
        return None
    d = Distribution(everything, {col: w for col, w in zip(columns, x) if w}, Semiring.NONNEG)
    _verify_marginals(m, d)
    return d


def _verify_marginals(m: EmpiricalModel, d: Distribution) -> None:
    for c, e in m.context_items():
        if d.marginalize(c).weights != e.weights:
            raise InternalInvariantError(f"global section does not marginalise to the model on {c}")


def _intersection_family(cover: Sequence[Domain]) -> list[frozenset]:
    family = {frozenset(c) for c in cover}
    frontier = set(family)
    while frontier:
        new = set()
        for u in frontier:
            for c in cover:
                v = u & frozenset(c)
                if v not in family:
                    new.add(v)
        family |= new
        frontier = new
    return sorted(family, key=lambda u: (-len(u), sorted(u)))


def find_signed_global_section(m: EmpiricalModel) -> Distribution:
    """Signed rational global section; always exists for a no-signalling model.

    Built by inclusion-exclusion over the intersection-closed family generated
    by the cover: d = sum_U c(U) * uniform_lift(e|U), with coefficients chosen
    so every U in the family is counted exactly once from above. Each lift
    reproduces the marginal on U, so d marginalises to every e_C.
    """
    _require_no_signalling(m)
    everything = m.scenario.measurements
    family = _intersection_family(m.scenario.cover)
    coeff: dict[frozenset, int] = {}
    for u in family:
        above = sum(coeff[v] for v in coeff if u < v)
        coeff[u] = 1 - above

    d_size = m.group.order
    weights: dict[tuple, Fraction] = {}
    all_sections = list(itertools.product(m.group.elements(), repeat=len(everything)))
    for u, c in coeff.items():
        if c == 0:
            continue
        host = next(dist for ctx, dist in m.context_items() if u <= set(ctx))
        marg = host.marginalize(u)
        pos = [everything.index(x) for x in marg.domain]
        scale = Fraction(c, d_size ** (len(everything) - len(u)))
        for s in all_sections:
            w = marg[tuple(s[p] for p in pos)]
            if w:
                weights[s] = weights.get(s, Fraction(0)) + scale * w
    d = Distribution(everything, weights, Semiring.RATIONAL)
    _verify_marginals(m, d)
    return d


# hierarchy


class Level(str, Enum):
    NON_CONTEXTUAL = "NonContextual"
    PROBABILISTIC = "ProbabilisticallyContextual"
    POSSIBILISTIC = "PossibilisticallyContextual"
    STRONG = "StronglyContextual"


@dataclass(frozen=True)
class Verdicts:
    strongly_contextual: bool
    possibilistically_non_extendable: bool
    probabilistically_non_extendable: bool
    witness: object = field(default=None, compare=False)

    @property
    def level(self) -> Level:
        if self.strongly_contextual:
            return Level.STRONG
        if self.possibilistically_non_extendable:
            return Level.POSSIBILISTIC
        if self.probabilistically_non_extendable:
            return Level.PROBABILISTIC
        return Level.NON_CONTEXTUAL


def verdicts(m: EmpiricalModel) -> Verdicts:
    """The three contextuality verdicts, each computed by its own search."""
    _require_no_signalling(m)
    strong = find_global_section_possibilistic(m) is None
    possibilistic = possibilistic_extension(m) is None
    section = find_global_section_probabilistic(m)
    probabilistic = section is None
    if (strong and not possibilistic) or (possibilistic and not probabilistic):
        raise InternalInvariantError("contextuality verdicts are not monotone")
    return Verdicts(strong, possibilistic, probabilistic, section)


def classify(m: EmpiricalModel) -> Level:
    return verdicts(m).level


def check_flasque_beneath_cover(m: EmpiricalModel) -> bool:
    """Restriction of the support presheaf is onto for every V ⊆ U ⊆ C."""
    for c in m.scenario.cover:
        subsets = [domain(s) for r in range(len(c) + 1) for s in itertools.combinations(c, r)]
        cache = {u: support_presheaf_at(m, u) for u in subsets}
        for u in subsets:
            for v in subsets:
                if not set(v) <= set(u):
                    continue
                image = {s.restrict(v).values for s in cache[u]}
                if image != {s.values for s in cache[v]}:
                    return False
    return True
