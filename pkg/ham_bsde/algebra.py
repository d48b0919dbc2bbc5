#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: algebra.py

"""
Exact term algebra.

Every quantity of the homotopy recursion is a finite sum of terms

    coeff * t**k * prod x_i**a_i * prod exp(-2 x_i**2)**c_i * trig(L(x) + r + s*pi)

with rational ``coeff``, ``r``, ``s``, integer coefficients in the linear form ``L``
and at most one trig factor.  Products of trig factors are linearized at multiply
time, so a canonical ``Expr`` is just a dict from term keys to non-zero Fractions.

A term key is the tuple ``(t_power, monomials, gausses, trig)`` where
``monomials`` and ``gausses`` are sorted ``(variable index, exponent)`` pairs and
``trig`` is ``()`` or ``(kind, coeffs, rational, pi)``.
"""
import logging
from collections import namedtuple
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ham_bsde.exceptions import (
    DataError,
    UnboundVariableError,
    VariableMismatchError,
)
from ham_bsde.utils import mp_context, to_mpf

logger = logging.getLogger(__name__)

T = "t"
SIN = "sin"
COS = "cos"
TRIG_KINDS = (SIN, COS)

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)

Phase = namedtuple("Phase", "rational pi")
LinearArg = namedtuple("LinearArg", "coeffs phase")
Monomial = namedtuple("Monomial", "var exponent")
Gauss = namedtuple("Gauss", "var multiplicity")
Trig = namedtuple("Trig", "kind arg")
Term = namedtuple("Term", "coeff t_power atoms")


def linear_arg(coeffs, rational=0, pi=0):
    """
    Build a LinearArg.
    arguments:
    @coeffs: dict, variable name -> int
    @rational: rational constant part of the phase
    @pi: rational coefficient of pi in the phase
    @return LinearArg
    """
    pairs = []
    for name, k in dict(coeffs).items():
        if int(k) != k:
            raise DataError("[-] Error: trig argument coefficients must be integers.")
        if k:
            pairs.append((name, int(k)))
    return LinearArg(tuple(pairs), Phase(Fraction(rational), Fraction(pi)))


def _rational(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise DataError("[-] Error: %r is not an exact rational coefficient." % (value,))


@lru_cache(maxsize=1 << 16)
def _canon_trig(kind, coeffs, rational, pi):
    """Canonical form of ``kind(coeffs.x + rational + pi*π)``.

    Returns ``(sign, trig)``; ``trig == ()`` means the atom folded into the
    coefficient, with ``sign`` holding its value (0 or ±1).
    """
    sign = 1
    if (coeffs and coeffs[0][1] < 0) or (not coeffs and rational < 0):
        coeffs = tuple((i, -k) for i, k in coeffs)
        rational, pi = -rational, -pi
        if kind == SIN:
            sign = -1
    pi = pi % 2
    while pi >= _HALF:
        pi -= _HALF
        if kind == SIN:
            kind = COS
        else:
            kind = SIN
            sign = -sign
    if not coeffs and rational == 0 and pi == 0:
        return (sign if kind == COS else 0), ()
    return sign, (kind, coeffs, rational, pi)


def _combine_coeffs(a, b, s):
    d = dict(a)
    for i, k in b:
        v = d.get(i, 0) + s * k
        if v:
            d[i] = v
        else:
            d.pop(i, None)
    return tuple(sorted(d.items()))


@lru_cache(maxsize=1 << 16)
def _trig_product(a, b):
    """Product-to-sum for two canonical trig tuples."""
    ka, ca, ra, pa = a
    kb, cb, rb, pb = b
    plus = (_combine_coeffs(ca, cb, 1), ra + rb, pa + pb)
    minus = (_combine_coeffs(ca, cb, -1), ra - rb, pa - pb)
    if ka == SIN and kb == SIN:
        parts = ((_HALF, COS, minus), (-_HALF, COS, plus))
    elif ka == COS and kb == COS:
        parts = ((_HALF, COS, minus), (_HALF, COS, plus))
    elif ka == SIN:
        parts = ((_HALF, SIN, plus), (_HALF, SIN, minus))
    else:
        parts = ((_HALF, SIN, plus), (-_HALF, SIN, minus))
    out = {}
    for c, kind, (coeffs, r, p) in parts:
        sign, trig = _canon_trig(kind, coeffs, r, p)
        if sign:
            out[trig] = out.get(trig, _ZERO) + c * sign
    return tuple((c, trig) for trig, c in sorted(out.items()) if c)


@lru_cache(maxsize=1 << 16)
def _merge_powers(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for i, n in b:
        d[i] = d.get(i, 0) + n
    return tuple(sorted(d.items()))


def _bump(pairs, i, delta):
    out = []
    found = False
    for j, n in pairs:
        if j == i:
            found = True
            n += delta
            if n:
                out.append((j, n))
        else:
            out.append((j, n))
    if not found and delta:
        out.append((i, delta))
        out.sort()
    return tuple(out)


def _power_of(pairs, i):
    for j, n in pairs:
        if j == i:
            return n
    return 0


def _key_product(ka, kb):
    ta, ma, ga, ra = ka
    tb, mb, gb, rb = kb
    t = ta + tb
    m = _merge_powers(ma, mb)
    g = _merge_powers(ga, gb)
    if not rb:
        return ((_ONE, (t, m, g, ra)),)
    if not ra:
        return ((_ONE, (t, m, g, rb)),)
    return tuple((c, (t, m, g, trig)) for c, trig in _trig_product(ra, rb))


def _accumulate(out, key, value):
    v = out.get(key)
    out[key] = value if v is None else v + value


def _strip(out):
    return {k: v for k, v in out.items() if v}


class Expr(object):
    """Canonical finite sum of terms over a fixed variable universe.

    Instances are immutable; every operation returns a new canonical Expr.
    """

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(self, variables, terms=None):
        self.variables = tuple(variables)
        self._terms = terms if terms is not None else {}
        self._hash = None

    # constructors

    @classmethod
    def zero(cls, variables):
        return cls(variables)

    @classmethod
    def const(cls, variables, value):
        value = _rational(value)
        if not value:
            return cls(variables)
        return cls(variables, {(0, (), (), ()): value})

    @classmethod
    def t(cls, variables, power=1):
        return cls(variables, {(int(power), (), (), ()): _ONE})

    @classmethod
    def variable(cls, variables, name, exponent=1):
        variables = tuple(variables)
        i = _index_of(variables, name)
        mono = ((i, int(exponent)),) if exponent else ()
        return cls(variables, {(0, mono, (), ()): _ONE})

    @classmethod
    def gauss(cls, variables, name, multiplicity=1):
        """``exp(-2 * name**2) ** multiplicity``."""
        variables = tuple(variables)
        i = _index_of(variables, name)
        g = ((i, int(multiplicity)),) if multiplicity else ()
        return cls(variables, {(0, (), g, ()): _ONE})

    @classmethod
    def trig(cls, variables, kind, arg):
        if kind not in TRIG_KINDS:
            raise DataError("[-] Error: unknown trig kind %r." % (kind,))
        if T in dict(arg.coeffs):
            raise DataError("[-] Error: t may not appear inside a trig argument.")
        variables = tuple(variables)
        coeffs = tuple(sorted((_index_of(variables, name), k) for name, k in arg.coeffs if k))
        sign, trig = _canon_trig(kind, coeffs, _rational(arg.phase.rational), _rational(arg.phase.pi))
        if not sign:
            return cls(variables)
        return cls(variables, {(0, (), (), trig): Fraction(sign)})

    @classmethod
    def sin(cls, variables, coeffs, rational=0, pi=0):
        return cls.trig(variables, SIN, linear_arg(coeffs, rational, pi))

    @classmethod
    def cos(cls, variables, coeffs, rational=0, pi=0):
        return cls.trig(variables, COS, linear_arg(coeffs, rational, pi))

    @classmethod
    def from_terms(cls, variables, terms):
        """Normalize an arbitrary list of Terms (names, any atom order, repeated atoms)."""
        variables = tuple(variables)
        total = cls(variables)
        for term in terms:
            factor = cls.const(variables, term.coeff) * cls.t(variables, term.t_power)
            for atom in term.atoms:
                factor = factor * _atom_expr(variables, atom)
            total = total + factor
        return total

    # inspection

    @property
    def terms(self):
        """Canonical, sorted tuple of Term namedtuples using variable names."""
        names = self.variables
        out = []
        for (t, monos, gauss, trig), c in sorted(self._terms.items()):
            atoms = [Monomial(names[i], n) for i, n in monos]
            atoms.extend(Gauss(names[i], n) for i, n in gauss)
            if trig:
                kind, coeffs, r, p = trig
                atoms.append(Trig(kind, LinearArg(tuple((names[i], k) for i, k in coeffs), Phase(r, p))))
            out.append(Term(c, t, tuple(atoms)))
        return tuple(out)

    def items(self):
        return sorted(self._terms.items())

    def max_t_power(self):
        return max((k[0] for k in self._terms), default=0)

    def is_t_free(self):
        return all(k[0] == 0 for k in self._terms)

    def used_variables(self):
        used = set()
        for _, monos, gauss, trig in self._terms:
            used.update(i for i, _ in monos)
            used.update(i for i, _ in gauss)
            if trig:
                used.update(i for i, _ in trig[1])
        return tuple(self.variables[i] for i in sorted(used))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return symbolic_equal(self, other)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return "Expr(%s)" % self

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for key, c in sorted(self._terms.items()):
            factors = self._format_key(key)
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = "%s*%s" % (abs(c), "*".join(factors))
            if not pieces:
                pieces.append(body if c > 0 else "-" + body)
            else:
                pieces.append(("+ " if c > 0 else "- ") + body)
        return " ".join(pieces)

    def _format_key(self, key):
        t, monos, gauss, trig = key
        names = self.variables
        factors = []
        if t:
            factors.append("t" if t == 1 else "t^%d" % t)
        for i, n in monos:
            factors.append(names[i] if n == 1 else "%s^%d" % (names[i], n))
        for i, n in gauss:
            factors.append("exp(-2*%s^2)" % names[i] + ("" if n == 1 else "^%d" % n))
        if trig:
            kind, coeffs, r, p = trig
            parts = ["%s%s" % ("" if k == 1 else "%d*" % k, names[i]) for i, k in coeffs]
            if r:
                parts.append(str(r))
            if p:
                parts.append("%s*pi" % p)
            factors.append("%s(%s)" % (kind, " + ".join(parts) or "0"))
        return factors

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Expr):
            _check_universe(self, other)
            return other
        return Expr.const(self.variables, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            _accumulate(out, k, v)
        return Expr(self.variables, _strip(out))

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.variables, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Expr):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c):
        c = _rational(c)
        if not c:
            return Expr(self.variables)
        if c == 1:
            return self
        return Expr(self.variables, {k: v * c for k, v in self._terms.items()})

    def diff(self, v, times=1):
        e = self
        for _ in range(times):
            e = differentiate(e, v)
        return e

    def integrate_t(self, anchor):
        return integrate_t(self, anchor)

    def substitute_t(self, value):
        return substitute_t(self, value)

    def evaluate(self, point, t_value=0, precision_bits=256):
        return evaluate(self, point, t_value, precision_bits)


def _index_of(variables, name):
    try:
        return variables.index(name)
    except ValueError:
        raise VariableMismatchError(
            "[-] Error: variable %r is not declared in %s." % (name, variables)
        )


def _atom_expr(variables, atom):
    if isinstance(atom, Monomial):
        return Expr.variable(variables, atom.var, atom.exponent)
    if isinstance(atom, Gauss):
        return Expr.gauss(variables, atom.var, atom.multiplicity)
    if isinstance(atom, Trig):
        return Expr.trig(variables, atom.kind, atom.arg)
    raise DataError("[-] Error: unknown atom %r." % (atom,))


def _check_universe(a, b):
    if a.variables != b.variables:
        raise VariableMismatchError(
            "[-] Error: variable universes differ: %s vs %s." % (a.variables, b.variables)
        )


def normalize(e):
    """Re-canonicalize ``e`` from its public term list."""
    return Expr.from_terms(e.variables, e.terms)


def linear_combine(pairs):
    """
    Canonical sum of c_i * e_i.
    arguments:
    @pairs: iterable of (rational, Expr)
    @return Expr
    """
    pairs = list(pairs)
    if not pairs:
        raise DataError("[-] Error: linear_combine needs at least one pair.")
    variables = pairs[0][1].variables
    out = {}
    for c, e in pairs:
        if e.variables != variables:
            raise VariableMismatchError(
                "[-] Error: variable universes differ: %s vs %s." % (variables, e.variables)
            )
        c = _rational(c)
        if not c:
            continue
        for k, v in e._terms.items():
            _accumulate(out, k, v * c)
    return Expr(variables, _strip(out))


def multiply(a, b):
    """Exact product with eager product-to-sum linearization."""
    _check_universe(a, b)
    if len(a._terms) < len(b._terms):
        a, b = b, a
    out = {}
    if len(b._terms) == 1:
        ((kb, cb),) = b._terms.items()
        if not kb[3]:
            tb, mb, gb, _ = kb
            for (ta, ma, ga, ra), ca in a._terms.items():
                _accumulate(out, (ta + tb, _merge_powers(ma, mb), _merge_powers(ga, gb), ra), ca * cb)
            return Expr(a.variables, _strip(out))
    for ka, ca in a._terms.items():
        for kb, cb in b._terms.items():
            c = ca * cb
            for f, key in _key_product(ka, kb):
                _accumulate(out, key, c if f == 1 else c * f)
    return Expr(a.variables, _strip(out))


def differentiate(e, v):
    """
    Exact partial derivative.
    arguments:
    @e: Expr
    @v: "t" or a declared variable name
    @return Expr
    """
    out = {}
    if v == T:
        for (t, m, g, r), c in e._terms.items():
            if t:
                _accumulate(out, (t - 1, m, g, r), c * t)
        return Expr(e.variables, _strip(out))
    i = _index_of(e.variables, v)
    for key, c in e._terms.items():
        t, m, g, r = key
        a = _power_of(m, i)
        if a:
            _accumulate(out, (t, _bump(m, i, -1), g, r), c * a)
        n = _power_of(g, i)
        if n:
            _accumulate(out, (t, _bump(m, i, 1), g, r), c * (-4 * n))
        if r:
            kind, coeffs, rat, pi = r
            k = _power_of(coeffs, i)
            if k:
                sign, trig = _canon_trig(kind, coeffs, rat, pi + _HALF)
                _accumulate(out, (t, m, g, trig), c * (k * sign))
    return Expr(e.variables, _strip(out))


def integrate_t(e, anchor):
    """F with dF/dt = e and F(t=anchor) = 0."""
    anchor = _rational(anchor)
    out = {}
    for (t, m, g, r), c in e._terms.items():
        nc = c / (t + 1)
        _accumulate(out, (t + 1, m, g, r), nc)
        if anchor:
            _accumulate(out, (0, m, g, r), -nc * anchor ** (t + 1))
    return Expr(e.variables, _strip(out))


def substitute_t(e, value):
    """Exact restriction of ``e`` to t = value (a t-free Expr)."""
    value = _rational(value)
    out = {}
    for (t, m, g, r), c in e._terms.items():
        if t and not value:
            continue
        _accumulate(out, (0, m, g, r), c * value ** t if t else c)
    return Expr(e.variables, _strip(out))


def symbolic_equal(a, b):
    return a.variables == b.variables and a._terms == b._terms


def degree_summary(e):
    kinds = set()
    for _, m, g, r in e._terms:
        if m:
            kinds.add("monomial")
        if g:
            kinds.add("gauss")
        if r:
            kinds.add("trig")
    return {"terms": len(e), "max_t_power": e.max_t_power(), "atoms": sorted(kinds)}


class Evaluator(object):
    """Big-float evaluation of one Expr on many points.

    Terms are grouped by their t-free part, so a point costs one pass over
    distinct spatial factors plus a Horner sweep in t.
    """

    def __init__(self, expr, ctx):
        self.ctx = ctx
        self.variables = expr.variables
        self.used = tuple(sorted(set(expr.variables.index(n) for n in expr.used_variables())))
        groups = {}
        for (t, m, g, r), c in expr._terms.items():
            groups.setdefault((m, g, r), {})[t] = c
        self.degree = expr.max_t_power()
        self._groups = []
        for key in sorted(groups):
            coeffs = [ctx.zero] * (self.degree + 1)
            for t, c in groups[key].items():
                coeffs[t] = to_mpf(ctx, c)
            self._groups.append((key, coeffs))

    def _bind(self, point):
        xs = {}
        for i in self.used:
            name = self.variables[i]
            try:
                value = point[name]
            except KeyError:
                raise UnboundVariableError("[-] Error: variable %s is not bound." % name)
            xs[i] = to_mpf(self.ctx, value)
        return xs

    def t_coefficients(self, point):
        """Values of the t**k coefficient functions at a spatial point."""
        ctx = self.ctx
        xs = self._bind(point)
        cache = {}
        out = [ctx.zero] * (self.degree + 1)
        for (m, g, r), coeffs in self._groups:
            v = ctx.one
            for i, n in m:
                v *= _cached(cache, ("m", i, n), lambda: xs[i] ** n)
            for i, n in g:
                v *= _cached(cache, ("g", i, n), lambda: ctx.exp(-2 * n * xs[i] ** 2))
            if r:
                v *= _cached(cache, r, lambda: _trig_value(ctx, r, xs))
            for k, c in enumerate(coeffs):
                if c:
                    out[k] += c * v
        return out

    def __call__(self, point, t_value=0):
        coeffs = self.t_coefficients(point)
        return horner(coeffs, to_mpf(self.ctx, t_value), self.ctx.zero)


def _cached(cache, key, compute):
    try:
        return cache[key]
    except KeyError:
        value = cache[key] = compute()
        return value


def _trig_value(ctx, trig, xs):
    kind, coeffs, r, p = trig
    arg = to_mpf(ctx, r) + to_mpf(ctx, p) * ctx.pi
    for i, k in coeffs:
        arg += k * xs[i]
    return ctx.sin(arg) if kind == SIN else ctx.cos(arg)


def horner(coeffs, x, zero):
    acc = zero
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def compile_evaluator(e, ctx):
    return Evaluator(e, ctx)


def evaluate(e, point, t_value=0, precision_bits=256):
    """
    Big-float value of ``e`` at a point.
    arguments:
    @e: Expr
    @point: dict, variable name -> number (int, Fraction, str or mpf)
    @t_value: number
    @precision_bits: int, >= 64
    @return mpf of the cached context at ``precision_bits``
    """
    ctx = mp_context(precision_bits)
    return Evaluator(e, ctx)(point, t_value)


def evaluate_array(e, arrays, t_values):
    """Vectorized float64 evaluation; ``arrays`` maps variable name -> ndarray."""
    t_values = np.asarray(t_values, dtype=np.float64)
    total = np.zeros(np.broadcast(t_values, *arrays.values()).shape if arrays else t_values.shape)
    names = e.variables
    xs = {}
    for name in e.used_variables():
        try:
            xs[names.index(name)] = np.asarray(arrays[name], dtype=np.float64)
        except KeyError:
            raise UnboundVariableError("[-] Error: variable %s is not bound." % name)
    groups = {}
    for (t, m, g, r), c in e._terms.items():
        groups.setdefault((m, g, r), {})[t] = float(c)
    cache = {}
    for (m, g, r), coeffs in sorted(groups.items()):
        v = 1.0
        for i, n in m:
            v = v * _cached(cache, ("m", i, n), lambda: xs[i] ** n)
        for i, n in g:
            v = v * _cached(cache, ("g", i, n), lambda: np.exp(-2.0 * n * xs[i] ** 2))
        if r:
            v = v * _cached(cache, r, lambda: _trig_array(r, xs))
        poly = 0.0
        for k in range(max(coeffs), -1, -1):
            poly = poly * t_values + coeffs.get(k, 0.0)
        total = total + v * poly
    return total


def _trig_array(trig, xs):
    kind, coeffs, r, p = trig
    arg = float(r) + float(p) * np.pi
    for i, k in coeffs:
        arg = arg + k * xs[i]
    return np.sin(arg) if kind == SIN else np.cos(arg)
