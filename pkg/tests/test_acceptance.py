"""Acceptance criteria, each at its stated tolerance and time budget.

Each test prints one ``PASS``/``FAIL`` line (also repeated in the terminal
summary). Run alone with ``pytest tests/test_acceptance.py -s``.
"""
import contextlib
import io
import itertools
import random
import time
from fractions import Fraction

import pytest

from ctxf.abgroup import FiniteAbelianGroup, RationalTurn, TorusPoint
from ctxf.avn import avn_check, hierarchy_witness, lifted_equations
from ctxf.cli import run
from ctxf.mermin import (
    build_scenario,
    composite_empirical_model,
    empirical_model,
    lhv_when_solvable,
    tensor_scenarios,
)
from ctxf.qrealize import UnrealizableContext, check_decoherence_lemma, check_parity_lemma
from ctxf.sheaf import (
    Level,
    check_flasque_beneath_cover,
    classify,
    find_global_section_probabilistic,
    find_signed_global_section,
    is_no_signalling,
    support_presheaf_at,
)
from ctxf.zsolve import (
    CIRCLE,
    EquationSystem,
    ZModEquation,
    check_consistency,
    gaussian_eliminate_circle,
    solve_in_group,
    solve_torus,
    verify_solution,
)
from conftest import ACCEPTANCE_LINES, Z2, Z3, random_noncontextual_model

T = RationalTurn


@contextlib.contextmanager
def criterion(number: int, name: str, budget: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < budget
        line = f"{'PASS' if ok and within else 'FAIL'} [{number}] {name} ({elapsed:.2f}s, budget {budget:g}s)"
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert within, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue()


def scenario(n, coeff, a):
    return build_scenario(FiniteAbelianGroup((n,)), ZModEquation({"y": coeff}, (a,)))


def parity(tup):
    return sum(x[0] for x in tup) % 2


def test_1_mermin_table():
    with criterion(1, "Mermin table reproduction", 1.0):
        code, out = cli("table", "--group", "Z2", "--eqn", "2*y=(1)")
        assert code == 0
        assert out.splitlines() == [
            "context\tsum=(0)\tsum=(1)",
            "X1^0 X2^0 X3^0\t1/4\t0",
            "X1^y X2^y X3^0\t0\t1/4",
            "X1^y X2^0 X3^y\t0\t1/4",
            "X1^0 X2^y X3^y\t0\t1/4",
        ]
        code, out = cli("table", "--group", "Z2", "--eqn", "2*y=(1)", "--possibilistic")
        assert [r.split("\t")[1:] for r in out.splitlines()[1:]] == [["1", "0"]] + [["0", "1"]] * 3
        # and entry by entry on the model itself
        m = empirical_model(scenario(2, 2, 1))
        for v, d in enumerate(m.distributions):
            for tup in itertools.product([(0,), (1,)], repeat=3):
                assert d[tup] == (Fraction(1, 4) if parity(tup) == (v > 0) else 0)


def test_2_quantum_cross_validation():
    with criterion(2, "quantum cross-validation (qubit and Z3)", 10.0):
        for argv in (["--group", "Z2", "--eqn", "2*y=(1)"], ["--group", "Z3", "--eqn", "3*y=(1)"]):
            code, out = cli("realize", *argv)
            assert code == 0
            lines = out.splitlines()
            assert len(lines) == (5 if "Z2" in argv else 6)
            assert float(lines[-1].split()[-1]) < 1e-9


def test_3_lemma_suite():
    with criterion(3, "parity and decoherence lemmas", 5.0):
        for s in (scenario(2, 2, 1), scenario(3, 3, 1)):
            for v in range(s.parties + 1):
                alphas = [s.phase(r) for r in s.context_settings(v)]
                assert check_parity_lemma(s.group, s.parties, alphas, 1e-9)
                assert check_decoherence_lemma(s.group, s.parties, alphas, 1e-9)
        bad = [TorusPoint(Z2, [T(1, 4)]), TorusPoint.zero(Z2), TorusPoint.zero(Z2)]
        with pytest.raises(UnrealizableContext):
            check_parity_lemma(Z2, 3, bad)
        with pytest.raises(UnrealizableContext):
            check_decoherence_lemma(Z2, 3, bad)


def test_4_contextual_iff_unsolvable():
    with criterion(4, "contextual iff unsolvable (both directions)", 30.0):
        for n in (2, 3):
            m = empirical_model(scenario(n, n, 1))
            assert classify(m) is Level.STRONG
            assert find_global_section_probabilistic(m) is None
        s0 = scenario(2, 2, 0)
        m0 = empirical_model(s0)
        assert classify(m0) is Level.NON_CONTEXTUAL
        lhv = lhv_when_solvable(s0, solve_in_group(s0.system()))
        for c, e in m0.context_items():
            assert lhv.marginalize(c).weights == e.weights


def test_5_avn_verdicts():
    with criterion(5, "AvN verdicts", 60.0):
        assert avn_check(empirical_model(scenario(2, 2, 1)), 2, Z2)
        assert avn_check(empirical_model(scenario(3, 3, 1)), 3, Z3)
        assert not avn_check(empirical_model(scenario(2, 2, 0)), 2, Z2)
        code, out = cli("avn", "--group", "Z2", "--eqn", "2*y=(0)", "--modulus", "2", "--module", "Z2")
        print(out, end="")
        assert code == 0 and out.startswith("not AvN")
        assert sum(1 for line in out.splitlines() if " = (" in line) == 6


def test_6_hierarchy_non_collapse():
    with criterion(6, "hierarchy non-collapse witnesses", 30.0):
        s3 = scenario(3, 3, 1)
        m3 = empirical_model(s3)
        w = hierarchy_witness(3, Z2, s3, m3)
        assert all(x == ((0,) if meas.setting == 0 else (1,)) for meas, x in w.as_dict().items())
        assert avn_check(m3, 3)
        s5 = scenario(5, 5, 1)
        assert s5.parties == 6
        w5 = hierarchy_witness(5, Z3, s5)
        assert all(x == ((0,) if meas.setting == 0 else (2,)) for meas, x in w5.as_dict().items())
        # canonical equations: sum over every context of u*s = u*t with u ranging over Z minus 5Z mod 15
        assert len(lifted_equations(5, Z3, s5)) == 7 * 12


def _planted_group_system(rng):
    group = FiniteAbelianGroup(rng.choice([(2,), (3,), (4,), (2, 2), (5,), (6,)]))
    names = [f"y{i}" for i in range(rng.randint(1, 3))]
    planted = {v: rng.choice(group.elements()) for v in names}
    eqs = []
    for _ in range(rng.randint(1, 3)):
        row = {v: rng.randint(-3, 3) for v in names}
        if not any(row.values()):
            row[names[0]] = 1
        rhs = group.sum(group.scalar_mul(n, planted[v]) for v, n in row.items())
        eqs.append(ZModEquation(row, rhs))
    return EquationSystem(tuple(eqs), group)


def _planted_circle_system(rng):
    names = [f"y{i}" for i in range(rng.randint(1, 3))]
    planted = {v: T(rng.randint(0, 11), rng.randint(1, 6)) for v in names}
    eqs = []
    for _ in range(rng.randint(1, 3)):
        row = {v: rng.randint(-3, 3) for v in names}
        if not any(row.values()):
            row[names[0]] = 1
        rhs = T(0)
        for v, n in row.items():
            rhs = rhs + planted[v] * n
        eqs.append(ZModEquation(row, rhs))
    return EquationSystem(tuple(eqs), CIRCLE, extra_variables=tuple(names))


def test_7_solver_properties():
    with criterion(7, "circle/torus solver properties", 10.0):
        rng = random.Random(20261016)
        for _ in range(100):
            sys_ = _planted_group_system(rng)
            assert check_consistency(sys_)
            assert verify_solution(sys_, solve_torus(sys_))
        for _ in range(100):
            sys_ = _planted_circle_system(rng)
            got = gaussian_eliminate_circle(sys_)
            assert got is not None and verify_solution(sys_, got.selection)
        half = gaussian_eliminate_circle(EquationSystem((ZModEquation({"y": 2}, T(1, 2)),), CIRCLE))
        assert set(half.candidates["y"]) == {T(1, 4), T(3, 4)}


def _check_sheaf_invariants(m):
    assert is_no_signalling(m)
    for c, e in m.context_items():
        assert {s.values for s in support_presheaf_at(m, c)} == set(e.support())
        for r in range(len(c)):
            for v in itertools.combinations(c, r + 1):
                for w in itertools.combinations(v, max(r, 0)):
                    assert e.marginalize(v).marginalize(w) == e.marginalize(w)
    assert check_flasque_beneath_cover(m)
    signed = find_signed_global_section(m)
    for c, e in m.context_items():
        assert signed.marginalize(c).weights == e.weights


def test_8_sheaf_invariants():
    with criterion(8, "sheaf invariant suite (generated + 50 random models)", 30.0):
        generated = [empirical_model(scenario(*args)) for args in [(2, 2, 1), (2, 2, 0), (3, 3, 1), (3, 3, 0)]]
        generated.append(composite_empirical_model(tensor_scenarios([scenario(2, 2, 1), scenario(2, 2, 0)])))
        for m in generated:
            _check_sheaf_invariants(m)
        rng = random.Random(8)
        for _ in range(50):
            m = random_noncontextual_model(rng)
            _check_sheaf_invariants(m)
            assert classify(m) is Level.NON_CONTEXTUAL


def test_9_consistent_yet_unsolvable():
    with criterion(9, "consistency versus solvability", 1.0):
        single = EquationSystem((ZModEquation({"y": 2}, (1,)),), Z2)
        rows = [("x1", "x2", "x3", 0), ("y1", "y2", "x3", 1), ("y1", "x2", "y3", 1), ("x1", "y2", "y3", 1)]
        mermin = EquationSystem(tuple(ZModEquation({a: 1, b: 1, c: 1}, (r,)) for a, b, c, r in rows), Z2)
        assert len(mermin.variables) == 6
        for sys_ in (single, mermin):
            assert check_consistency(sys_)
            assert solve_in_group(sys_) is None


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
