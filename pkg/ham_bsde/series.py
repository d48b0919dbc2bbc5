#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: series.py

"""
Homotopy-derivative combinators.

A ``Series`` stands for the q-expansion of some quantity built from the
deformation Phi(t, x; q) = sum_m phi_m q**m; ``series[k]`` is its k-th
homotopy derivative D_k.  Histories are append-only, so a coefficient once
computed never changes and is memoized.
"""
from fractions import Fraction
from math import factorial

from ham_bsde.algebra import (
    COS,
    SIN,
    Expr,
    LinearArg,
    Phase,
    linear_combine,
    multiply,
)
from ham_bsde.exceptions import DataError, HistoryError


class Series(object):
    """Lazily evaluated q-coefficient sequence with a memo."""

    def __init__(self, variables):
        self.variables = tuple(variables)
        self._memo = {}

    def __getitem__(self, k):
        if k < 0:
            raise HistoryError("[-] Error: negative series index %d." % k)
        try:
            return self._memo[k]
        except KeyError:
            value = self._memo[k] = self.coefficient(k)
            return value

    def coefficient(self, k):
        raise NotImplementedError

    def __mul__(self, other):
        return ProductSeries(self, other)

    def __add__(self, other):
        return LinearSeries([(1, self), (1, other)])

    def __sub__(self, other):
        return LinearSeries([(1, self), (-1, other)])

    def scale(self, c):
        return LinearSeries([(c, self)])

    def diff(self, v, times=1):
        return MappedSeries(self, lambda e: e.diff(v, times))


class HistorySeries(Series):
    """The phi_m of one component, read straight from the live history list."""

    def __init__(self, history, variables):
        Series.__init__(self, variables)
        self.history = history

    def __getitem__(self, k):
        if k < 0 or k >= len(self.history):
            raise HistoryError(
                "[-] Error: history holds orders 0..%d, order %d requested."
                % (len(self.history) - 1, k)
            )
        return self.history[k]


class MappedSeries(Series):
    """Coefficient-wise linear map, e.g. a spatial or time derivative."""

    def __init__(self, base, fn):
        Series.__init__(self, base.variables)
        self.base = base
        self.fn = fn

    def coefficient(self, k):
        return self.fn(self.base[k])


class LinearSeries(Series):
    def __init__(self, pairs):
        Series.__init__(self, pairs[0][1].variables)
        self.pairs = [(Fraction(c), s) for c, s in pairs]

    def coefficient(self, k):
        return linear_combine([(c, s[k]) for c, s in self.pairs])


class ProductSeries(Series):
    """Cauchy product: D_k[A B] = sum_i D_i[A] D_{k-i}[B]."""

    def __init__(self, a, b):
        Series.__init__(self, a.variables)
        self.a = a
        self.b = b

    def coefficient(self, k):
        pairs = []
        for i in range(k + 1):
            left = self.a[i]
            if not left:
                continue
            right = self.b[k - i]
            if right:
                pairs.append((1, multiply(left, right)))
        if not pairs:
            return Expr(self.variables)
        return linear_combine(pairs)


class EmbeddedTrigSeries(Series):
    """q-coefficients of kind(freq*t*q + base)."""

    def __init__(self, kind, freq, base, variables):
        Series.__init__(self, variables)
        self.kind = kind
        self.freq = freq
        self.base = base

    def coefficient(self, k):
        return embedded_trig_coefficient(self.kind, self.freq, self.base, k, self.variables)


def embedded_trig_coefficient(kind, freq, base, j, variables=None):
    """
    j-th q-Taylor coefficient of kind(freq*t*q + base).
    arguments:
    @kind: "sin" or "cos"
    @freq: positive int multiplying t
    @base: LinearArg, the t-free part of the argument
    @j: int >= 0
    @variables: variable universe, defaults to the variables of ``base``
    @return Expr, (freq*t)**j / j! * kind(base + j*pi/2)
    """
    if kind not in (SIN, COS):
        raise DataError("[-] Error: unknown trig kind %r." % (kind,))
    if j < 0 or freq < 1:
        raise DataError("[-] Error: need j >= 0 and freq >= 1, got j=%s freq=%s." % (j, freq))
    if variables is None:
        variables = tuple(name for name, _ in base.coeffs)
    shifted = LinearArg(base.coeffs, Phase(base.phase.rational, base.phase.pi + Fraction(j, 2)))
    trig = Expr.trig(variables, kind, shifted)
    return multiply(Expr.t(variables, j), trig).scale(Fraction(freq ** j, factorial(j)))


def _at(history, k):
    if isinstance(history, Series):
        return history[k]
    if k >= len(history):
        raise HistoryError(
            "[-] Error: history holds orders 0..%d, order %d requested." % (len(history) - 1, k)
        )
    return history[k]


def cauchy2(a, b, n):
    """sum_{i=0}^{n} a_i b_{n-i} for plain histories or Series."""
    if n < 0:
        raise HistoryError("[-] Error: negative order %d." % n)
    pairs = [(1, multiply(_at(a, i), _at(b, n - i))) for i in range(n + 1)]
    return linear_combine(pairs)


def cauchy3(a, b, c, n):
    """sum_{i=0}^{n} sum_{j=0}^{n-i} a_i b_j c_{n-i-j}."""
    if n < 0:
        raise HistoryError("[-] Error: negative order %d." % n)
    pairs = []
    for i in range(n + 1):
        inner = cauchy2(b, c, n - i)
        pairs.append((1, multiply(_at(a, i), inner)))
    return linear_combine(pairs)
