import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ctxf.abgroup import FiniteAbelianGroup
from ctxf.avn import (
    LinearEquation,
    ModulusError,
    PreconditionError,
    avn_check,
    avn_witness,
    hierarchy_witness,
    lifted_equations,
    model_theory,
    satisfies,
    scaled_identity_solution,
    theory_of_support,
)
from ctxf.sheaf import DomainError, Level, Section, classify, find_global_section_possibilistic
from conftest import Z2, Z3, mermin, random_noncontextual_model

C = ("a", "b", "c")


def test_satisfies_examples():
    phi = LinearEquation(C, (1, 1, 1), (0,))
    assert satisfies(Z2, Section(C, ((1,), (1,), (0,))), phi)
    assert not satisfies(Z2, Section(C, ((1,), (0,), (0,))), phi)
    trivial = LinearEquation(C, (0, 0, 0), (0,))
    for vals in itertools.product([(0,), (1,)], repeat=3):
        assert satisfies(Z2, Section(C, vals), trivial)
    with pytest.raises(DomainError):
        satisfies(Z2, Section(("a",), ((0,),)), phi)


def test_control_theory():
    s, m = mermin(2, 2, 1)
    control = m.distributions[0]
    theory = theory_of_support(control.sections(), control.domain, 2, Z2)
    found = {(eq.coeffs, eq.rhs) for eq in theory.equations}
    assert ((1, 1, 1), (0,)) in found
    assert ((0, 0, 0), (0,)) in found
    assert not any(eq.coeffs == (1, 0, 0) for eq in theory.equations)
    # exactly the two multiples of the parity equation
    assert len(found) == 2


def test_modulus_must_be_multiple_of_exponent():
    _, m = mermin(3, 3, 1)
    d = m.distributions[0]
    with pytest.raises(ModulusError):
        theory_of_support(d.sections(), d.domain, 2, Z3)
    assert theory_of_support(d.sections(), d.domain, 6, Z3).modulus == 6


def test_avn_examples():
    assert avn_check(mermin(2, 2, 1)[1], 2)
    assert not avn_check(mermin(2, 2, 0)[1], 2)
    assert avn_check(mermin(3, 3, 1)[1], 3)
    w = avn_witness(mermin(2, 2, 0)[1], 2)
    assert w is not None and set(w.values) == {(0,)}


def test_avn_rejects_foreign_module():
    with pytest.raises(ModulusError):
        avn_check(mermin(2, 2, 1)[1], 2, FiniteAbelianGroup((4,)))


def test_witness_examples():
    s, m = mermin(3, 3, 1)
    w = hierarchy_witness(3, Z2, s, m)
    for meas, x in w.as_dict().items():
        assert x == ((0,) if meas.setting == 0 else (1,))
    s5, m5 = mermin(5, 5, 1)
    assert scaled_identity_solution(5, Z3) == (2,)
    w5 = hierarchy_witness(5, Z3, s5)
    assert {x for x in w5.values} == {(0,), (2,)}
    # the generated Z5 theory agrees with the canonical context equations
    assert hierarchy_witness(5, Z3, s5, m5) == w5
    with pytest.raises(PreconditionError):
        hierarchy_witness(3, Z3, s)
    with pytest.raises(PreconditionError):
        hierarchy_witness(3, FiniteAbelianGroup(()), s)
    with pytest.raises(PreconditionError):
        hierarchy_witness(3, Z2, mermin(2, 2, 1)[0])


def test_witness_over_product_module():
    s, m = mermin(3, 3, 1)
    k = FiniteAbelianGroup((2, 4))
    w = hierarchy_witness(3, k, s, m)
    assert set(w.values) == {(0, 0), (1, 3)}


def test_lifted_theory_is_unsatisfiable_over_zp():
    """Over Z_p itself the lifted equations (u=1) force the unsolvable p*y = 1."""
    s, _ = mermin(3, 3, 1)
    eqs = [(ctx, u, t) for ctx, u, t in lifted_equations(3, Z2, s) if u == 1]
    values = list(itertools.product(Z3.elements(), repeat=len(s.measurements)))
    index = {m: i for i, m in enumerate(s.measurements)}
    for vals in values:
        if all(Z3.sum(vals[index[m]] for m in ctx) == (t,) for ctx, _, t in eqs):
            pytest.fail("found a Z3 solution of the lifted theory")


@pytest.mark.parametrize("n,coeff,a", [(2, 2, 1), (2, 2, 0), (3, 3, 1), (3, 3, 0), (3, 1, 2)])
def test_avn_implies_strong(n, coeff, a):
    _, m = mermin(n, coeff, a)
    if avn_check(m, n):
        assert classify(m) is Level.STRONG


def test_proportional_equations_have_proportional_rhs():
    s, m = mermin(3, 3, 1)
    theory = model_theory(m, 3)
    for ctx in s.measurement_scenario.cover:
        eqs = [eq for eq in theory.for_context(ctx) if not eq.is_trivial()]
        for e1, e2 in itertools.combinations(eqs, 2):
            for k in (1, 2):
                if tuple(k * c % 3 for c in e1.coeffs) == e2.coeffs:
                    assert Z3.scalar_mul(k, e1.rhs) == e2.rhs


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_theory_is_exactly_the_satisfied_equations(seed, data):
    m = random_noncontextual_model(random.Random(seed))
    group = m.group
    c, d = next(iter(m.context_items()))
    theory = theory_of_support(d.sections(), c, group.exponent, group)
    emitted = {(eq.coeffs, eq.rhs) for eq in theory.equations}
    for eq in theory.equations:
        assert all(satisfies(group, s, eq) for s in d.sections())
    q = group.exponent
    n = tuple(data.draw(st.integers(0, q - 1)) for _ in c)
    b = data.draw(st.sampled_from(group.elements()))
    if (n, b) not in emitted:
        phi = LinearEquation(c, n, b)
        assert not all(satisfies(group, s, phi) for s in d.sections())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_noncontextual_models_are_not_avn(seed):
    m = random_noncontextual_model(random.Random(seed))
    assert find_global_section_possibilistic(m) is not None
    assert not avn_check(m, m.group.exponent)
