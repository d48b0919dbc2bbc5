#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: series_test.py

from fractions import Fraction

import pytest

from ham_bsde.algebra import COS, SIN, Expr, linear_arg, symbolic_equal
from ham_bsde.exceptions import DataError, HistoryError
from ham_bsde.series import (
    EmbeddedTrigSeries,
    HistorySeries,
    cauchy2,
    cauchy3,
    embedded_trig_coefficient,
)

X = ("x",)


def consts(*values):
    return [Expr.const(X, v) for v in values]


def test_cauchy2():
    a = consts(1, 2, 3)
    b = consts(4, 5, 6)
    # 1*6 + 2*5 + 3*4
    assert symbolic_equal(cauchy2(a, b, 2), Expr.const(X, 28))


def test_cauchy3():
    a = consts(1, 1, 1)
    # number of compositions of 2 into three parts
    assert symbolic_equal(cauchy3(a, a, a, 2), Expr.const(X, 6))


def test_cauchy_beyond_history():
    a = consts(1, 2)
    with pytest.raises(HistoryError):
        cauchy2(a, a, 2)
    with pytest.raises(HistoryError):
        cauchy2(a, a, -1)


def test_history_series_reads_live_list():
    history = consts(1)
    s = HistorySeries(history, X)
    history.append(Expr.const(X, 2))
    assert symbolic_equal(s[1], Expr.const(X, 2))
    with pytest.raises(HistoryError):
        s[2]


def test_product_series_matches_cauchy():
    history = consts(1, 2, 3)
    phi = HistorySeries(history, X)
    square = phi * phi
    for n in range(3):
        assert symbolic_equal(square[n], cauchy2(history, history, n))


def test_product_series_memoizes():
    history = consts(1, 2)
    phi = HistorySeries(history, X)
    square = phi * phi
    first = square[1]
    assert square[1] is first


def test_linear_and_mapped_series():
    history = [Expr.variable(X, "x"), Expr.variable(X, "x", 2)]
    phi = HistorySeries(history, X)
    combo = (phi - phi.scale(3)).diff("x")
    assert symbolic_equal(combo[1], Expr.variable(X, "x").scale(-4))


def test_embedded_trig_coefficient():
    base = linear_arg({"x": 1})
    e = embedded_trig_coefficient(SIN, 1, base, 3, X)
    # t^3/6 * sin(x + 3pi/2) = -t^3/6 * cos x
    expected = (Expr.t(X, 3) * Expr.cos(X, {"x": 1})).scale(Fraction(-1, 6))
    assert symbolic_equal(e, expected)


def test_embedded_trig_frequency():
    e = embedded_trig_coefficient(COS, 2, linear_arg({"x": 2}), 1, X)
    expected = (Expr.t(X) * Expr.sin(X, {"x": 2})).scale(-2)
    assert symbolic_equal(e, expected)


def test_embedded_trig_series():
    s = EmbeddedTrigSeries(COS, 1, linear_arg({"x": 1}), X)
    assert symbolic_equal(s[0], Expr.cos(X, {"x": 1}))
    assert symbolic_equal(s[2], embedded_trig_coefficient(COS, 1, linear_arg({"x": 1}), 2, X))


def test_embedded_trig_bad_arguments():
    with pytest.raises(DataError):
        embedded_trig_coefficient("tan", 1, linear_arg({"x": 1}), 0, X)
    with pytest.raises(DataError):
        embedded_trig_coefficient(SIN, 1, linear_arg({"x": 1}), -1, X)
