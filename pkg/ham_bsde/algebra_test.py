#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: algebra_test.py

import random
from fractions import Fraction

import numpy as np
import pytest

from ham_bsde.algebra import (
    COS,
    SIN,
    T,
    Expr,
    compile_evaluator,
    degree_summary,
    differentiate,
    evaluate,
    evaluate_array,
    integrate_t,
    linear_arg,
    linear_combine,
    multiply,
    normalize,
    substitute_t,
    symbolic_equal,
)
from ham_bsde.exceptions import DataError, UnboundVariableError, VariableMismatchError
from ham_bsde.verify import random_expr

TH = ("theta",)
X = ("x",)


def theta():
    return Expr.variable(TH, "theta")


def test_like_terms_merge():
    th, t = theta(), Expr.t(TH)
    got = linear_combine([(1, t * th + th * th), (-1, th * th)])
    assert symbolic_equal(got, t * th)
    assert len(got) == 1


def test_sum_to_zero_is_empty():
    th = theta()
    assert not (th - th)
    assert str(th - th) == "0"


def test_mixed_universes_rejected():
    with pytest.raises(VariableMismatchError):
        linear_combine([(1, Expr.variable(X, "x")), (1, theta())])
    with pytest.raises(VariableMismatchError):
        Expr.variable(X, "y")


def test_empty_combination_rejected():
    with pytest.raises(DataError):
        linear_combine([])


def test_float_coefficients_rejected():
    with pytest.raises(DataError):
        Expr.const(X, 0.5)


def test_product_to_sum():
    s = Expr.sin(X, {"x": 1})
    c = Expr.cos(X, {"x": 1})
    # sin x cos x = 1/2 sin 2x
    assert symbolic_equal(multiply(s, c), Expr.sin(X, {"x": 2}).scale(Fraction(1, 2)))
    # sin^2 + cos^2 = 1
    assert symbolic_equal(s * s + c * c, Expr.const(X, 1))


def test_trig_canonical_forms():
    # sin(-x) = -sin(x), cos(x + pi/2) = -sin(x)
    assert symbolic_equal(Expr.sin(X, {"x": -1}), -Expr.sin(X, {"x": 1}))
    assert symbolic_equal(Expr.cos(X, {"x": 1}, 0, Fraction(1, 2)), -Expr.sin(X, {"x": 1}))
    assert symbolic_equal(Expr.sin(X, {"x": 1}, 0, 2), Expr.sin(X, {"x": 1}))
    assert not Expr.sin(X, {})
    assert symbolic_equal(Expr.cos(X, {}), Expr.const(X, 1))


def test_trig_coefficients_must_be_integers():
    with pytest.raises(DataError):
        linear_arg({"x": Fraction(1, 2)})


def test_differentiate_t_and_space():
    th, t = theta(), Expr.t(TH)
    e = t * t * th
    assert symbolic_equal(differentiate(e, T), (t * th).scale(2))
    assert symbolic_equal(differentiate(e, "theta"), t * t)
    assert not differentiate(Expr.const(TH, 5), "theta")


def test_differentiate_gauss():
    g = Expr.gauss(X, "x")
    x = Expr.variable(X, "x")
    assert symbolic_equal(g.diff("x"), (x * g).scale(-4))


def test_differentiate_trig_shifts_phase():
    e = Expr.sin(X, {"x": 2}, 1)
    assert symbolic_equal(e.diff("x"), Expr.cos(X, {"x": 2}, 1).scale(2))


def test_integrate_t_anchor():
    th = theta()
    got = integrate_t(th, 1)
    assert symbolic_equal(got, Expr.t(TH) * th - th)
    assert not substitute_t(got, 1)
    assert symbolic_equal(integrate_t(Expr.t(TH), 0), Expr.t(TH, 2).scale(Fraction(1, 2)))


def test_integrate_then_differentiate():
    rng = random.Random(5)
    for _ in range(10):
        e = random_expr(rng, ("x", "y"), gauss=True)
        assert symbolic_equal(differentiate(integrate_t(e, Fraction(1, 3)), T), e)


def test_substitute_t():
    th, t = theta(), Expr.t(TH)
    e = t * t * th + th
    assert symbolic_equal(substitute_t(e, 0), th)
    assert symbolic_equal(substitute_t(e, Fraction(1, 2)), th.scale(Fraction(5, 4)))
    assert e.substitute_t(1).is_t_free()


def test_normalize_is_idempotent():
    rng = random.Random(9)
    for _ in range(10):
        e = random_expr(rng, ("x1", "x2"), n_terms=6, gauss=True)
        assert symbolic_equal(normalize(e), e)
        assert symbolic_equal(normalize(normalize(e)), e)


def test_evaluate(ctx):
    th = theta()
    e = th * th + Expr.t(TH)
    assert evaluate(e, {"theta": Fraction(1, 2)}, 1) == ctx.mpf(5) / 4
    s = Expr.sin(X, {"x": 1}, 0, Fraction(1, 2))
    assert abs(evaluate(s, {"x": 0}) - 1) < ctx.ldexp(1, -250)


def test_evaluate_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate(theta(), {})


def test_evaluate_low_precision_rejected():
    with pytest.raises(DataError):
        evaluate(theta(), {"theta": 1}, precision_bits=32)


def test_evaluator_matches_evaluate(ctx):
    rng = random.Random(13)
    e = random_expr(rng, ("x", "y"), n_terms=8, gauss=True)
    fn = compile_evaluator(e, ctx)
    for _ in range(5):
        point = {"x": ctx.mpf(rng.uniform(-1, 1)), "y": ctx.mpf(rng.uniform(-1, 1))}
        t = ctx.mpf(rng.uniform(0, 1))
        assert fn(point, t) == evaluate(e, point, t)


def test_evaluate_array_matches_big_float(ctx):
    rng = random.Random(17)
    e = random_expr(rng, ("x", "y"), n_terms=8, gauss=True)
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(0, 2, 7)
    ts = np.linspace(0, 1, 7)
    got = evaluate_array(e, {"x": xs, "y": ys}, ts)
    for i in range(7):
        expected = float(evaluate(e, {"x": xs[i], "y": ys[i]}, ts[i]))
        assert got[i] == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_multiplicative_homomorphism(ctx):
    rng = random.Random(21)
    a = random_expr(rng, ("x",), gauss=True)
    b = random_expr(rng, ("x",), gauss=True)
    point = {"x": ctx.mpf("0.3")}
    product = evaluate(multiply(a, b), point, ctx.mpf("0.7"))
    assert abs(product - evaluate(a, point, ctx.mpf("0.7")) * evaluate(b, point, ctx.mpf("0.7"))) < ctx.ldexp(
        1, -100
    )


def test_degree_summary():
    e = Expr.t(X, 3) * Expr.sin(X, {"x": 1}) + Expr.gauss(X, "x")
    summary = degree_summary(e)
    assert summary["terms"] == 2
    assert summary["max_t_power"] == 3
    assert summary["atoms"] == ["gauss", "trig"]


def test_str_is_readable():
    e = Expr.t(X) * Expr.sin(X, {"x": 1}, 1) - Expr.const(X, Fraction(1, 2))
    text = str(e)
    assert "sin(x + 1)" in text
    assert "1/2" in text


def test_equality_and_hash():
    a = Expr.sin(X, {"x": 1}) * Expr.cos(X, {"x": 1})
    b = Expr.sin(X, {"x": 2}).scale(Fraction(1, 2))
    assert a == b
    assert hash(a) == hash(b)
    assert a != Expr.trig(X, COS, linear_arg({"x": 2}))
    assert Expr.trig(X, SIN, linear_arg({"x": 2})) == b.scale(2)
