"""Exact arithmetic kernel: canonical forms, field axioms on random inputs,
calculus rules, substitution, and serialization."""

import random
from fractions import Fraction

import pytest

from painleve4d.algebra import (
    DenominatorVanishes,
    DenominatorZeroAtPoint,
    Polynomial,
    RationalExpression,
    equals,
    exact_divide,
    rational,
    variable,
)

x, y, z, w, t, eps = (variable(v) for v in ("x", "y", "z", "w", "t", "eps"))

N_PROPERTY_SAMPLES = 100


def random_polynomial(rng, names=("x", "y", "t"), max_terms=3, max_exp=2):
    p = Polynomial.zero()
    for _ in range(rng.randint(1, max_terms)):
        mono = Polynomial.constant(Fraction(rng.choice([c for c in range(-5, 6) if c])))
        for v in names:
            mono = mono * Polynomial.variable(v) ** rng.randint(0, max_exp)
        p = p + mono
    return p


def random_expression(rng):
    num = random_polynomial(rng)
    den = random_polynomial(rng)
    while den.is_zero():
        den = random_polynomial(rng)
    return RationalExpression(num, den)


def test_zero_and_constant_normal_forms():
    zero = rational(0)
    assert zero.is_zero()
    assert zero.num.is_zero() and zero.den == Polynomial.constant(1)
    assert rational(Fraction(3, 6)).equals(rational(Fraction(1, 2)))


def test_catalog_binomials_cancel_on_construction():
    expr = ((y - 1) * (x + 1)) / (y - 1)
    assert expr.is_polynomial()
    assert expr.equals(x + 1)
    expr = (eps * x + eps ** 2) / eps
    assert expr.equals(x + eps)
    assert expr.is_polynomial()


def test_noncatalog_factor_stays_but_equality_sees_through():
    # x - 1 is not a catalog divisor, so the quotient stays unreduced;
    # cross-multiplication equality is unaffected.
    expr = (x * x - 1) / (x - 1)
    assert not expr.is_polynomial()
    assert expr.equals(x + 1)


def test_integer_content_and_sign_normalization():
    expr = (2 * x) / rational(4)
    assert expr.num == Polynomial.variable("x")
    assert expr.den == Polynomial.constant(2)
    expr = (-x) / (-y)
    assert expr.den.leading()[1] > 0
    assert expr.equals(x / y)


def test_power_laws_and_negative_powers():
    f = x / y
    assert (f ** -2).equals((y * y) / (x * x))
    assert (f ** 0).equals(rational(1))
    g = (x + y) / t
    assert (g ** 3).equals(g * g * g)


def test_hash_is_refused():
    with pytest.raises(TypeError):
        hash(x + y)


def test_field_axioms_on_random_inputs():
    rng = random.Random(20260814)
    for _ in range(N_PROPERTY_SAMPLES):
        a, b, c = (random_expression(rng) for _ in range(3))
        assert (a + b).equals(b + a)
        assert ((a + b) + c).equals(a + (b + c))
        assert (a * (b + c)).equals(a * b + a * c)
        assert (a - a).is_zero()
        assert ((a + b) - b).equals(a)
        if not a.is_zero():
            assert (a * (b / a)).equals(b)


def test_diff_product_and_quotient_rules_on_random_inputs():
    rng = random.Random(4912)
    for _ in range(N_PROPERTY_SAMPLES):
        f, g = random_expression(rng), random_expression(rng)
        lhs = (f * g).diff("x")
        rhs = f.diff("x") * g + f * g.diff("x")
        assert lhs.equals(rhs)
        if not g.is_zero():
            q = f / g
            assert (q * g).diff("y").equals(f.diff("y"))


def test_substitute_agrees_with_evaluation():
    rng = random.Random(7705)
    done = 0
    while done < N_PROPERTY_SAMPLES:
        f = random_expression(rng)
        image = random_expression(rng)
        point = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                 for v in ("x", "y", "t")}
        try:
            composed = f.substitute({"x": image})
            direct = dict(point, x=image.eval_exact(point))
            assert composed.eval_exact(point) == f.eval_exact(direct)
        except (DenominatorVanishes, DenominatorZeroAtPoint):
            continue
        done += 1


def test_substitute_detects_identically_vanishing_denominator():
    expr = rational(1) / (x * y - 1)
    with pytest.raises(DenominatorVanishes):
        expr.substitute({"x": 1 / y})


def test_substitute_clears_with_shared_powers():
    # both num and den depend on x, so the (y+t)^2 clearing factor is shared
    # and divided back out; a naive num/den clearing would leave degree 4
    expr = (x * x + 1) / (x * x - 1)
    sq = (y + t) ** 2
    out = expr.substitute({"x": rational(1) / (y + t)})
    assert out.equals((1 + sq) / (1 - sq))
    assert out.den.total_degree() <= 2


def test_eval_exact_raises_on_pole():
    expr = x / (y - 1)
    with pytest.raises(DenominatorZeroAtPoint):
        expr.eval_exact({"x": Fraction(1), "y": Fraction(1)})
    assert expr.eval_exact({"x": Fraction(3), "y": Fraction(3)}) == Fraction(3, 2)


def test_eval_complex_matches_exact():
    expr = (x * x + t) / (y + 2)
    exact = expr.eval_exact({"x": Fraction(2), "y": Fraction(1), "t": Fraction(1, 2)})
    approx = expr.eval_complex({"x": 2 + 0j, "y": 1 + 0j, "t": 0.5 + 0j})
    assert abs(approx - complex(exact)) < 1e-12


def test_exact_divide():
    product = (x * y + x) * (y + t)
    quotient = exact_divide(product, y + t)
    assert quotient is not None and quotient.terms == (x * y + x).num.terms
    assert exact_divide(x * x + 1, x + 1) is None


def test_leading_monomial_is_graded():
    p = (x * x + x * y + y).num
    mono, coeff = p.leading()
    assert dict(mono) == {"x": 2} and coeff == 1


def test_serialization_roundtrip_bit_exact():
    rng = random.Random(11)
    for _ in range(20):
        f = random_expression(rng)
        g = RationalExpression.from_obj(f.to_obj())
        assert g.num.terms == f.num.terms
        assert g.den.terms == f.den.terms


def test_equals_is_cross_multiplication():
    assert equals((x * x - 1) / (x + 1), x - 1)
    assert not equals(x / y, y / x)
