import functools
from fractions import Fraction

from hypothesis import strategies as st

from ctxf.abgroup import FiniteAbelianGroup
from ctxf.mermin import build_scenario, empirical_model
from ctxf.sheaf import Distribution, EmpiricalModel, MeasurementScenario, Semiring
from ctxf.zsolve import ZModEquation

Z1 = FiniteAbelianGroup(())
Z2 = FiniteAbelianGroup((2,))
Z3 = FiniteAbelianGroup((3,))
Z2xZ4 = FiniteAbelianGroup((2, 4))


@functools.lru_cache(maxsize=None)
def mermin(n: int, coeff: int, a: int):
    """Scenario and model for coeff*y = a over Z_n, cached across tests."""
    group = FiniteAbelianGroup((n,))
    s = build_scenario(group, ZModEquation({"y": coeff}, (a,)))
    return s, empirical_model(s)


# every group with order <= 12, as invariant factor lists n_1 | n_2 | ...
SMALL_FACTORS = [
    (), (2,), (3,), (4,), (2, 2), (5,), (6,), (7,), (8,), (2, 4), (2, 2, 2),
    (9,), (3, 3), (10,), (11,), (12,), (2, 6),
]


def groups(max_order: int = 12):
    return st.sampled_from([f for f in SMALL_FACTORS if _order(f) <= max_order]).map(FiniteAbelianGroup)


def _order(factors) -> int:
    out = 1
    for n in factors:
        out *= n
    return out


def random_noncontextual_model(rng):
    """Random cover over 3-5 measurements, model = random rational mixture of global assignments."""
    group = FiniteAbelianGroup(rng.choice([(2,), (3,)]))
    n = rng.randint(3, 5 if group.order == 2 else 4)
    xs = tuple(f"m{i}" for i in range(n))
    cover = set()
    while not cover or set().union(*cover) != set(xs):
        size = rng.randint(2, min(3, n))
        cover.add(tuple(sorted(rng.sample(xs, size))))
    cover = tuple(sorted(cover))
    scenario = MeasurementScenario(xs, group, cover)
    terms = rng.randint(1, 4)
    raw = [rng.randint(1, 5) for _ in range(terms)]
    points = [tuple(rng.choice(group.elements()) for _ in xs) for _ in range(terms)]
    total = sum(raw)
    dists = []
    for c in cover:
        pos = [xs.index(m) for m in c]
        w = {}
        for r, g in zip(raw, points):
            key = tuple(g[p] for p in pos)
            w[key] = w.get(key, Fraction(0)) + Fraction(r, total)
        dists.append(Distribution(c, w, Semiring.NONNEG))
    return EmpiricalModel(scenario, tuple(dists))


# acceptance reporting: one PASS/FAIL line per criterion at the end of the run

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
