#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: problems.py

"""
Problem library.

A problem supplies what the recursion needs (initial guess, delta formula,
boundary rule, integration anchor) and, optionally, what diagnostics need
(the q=1 operator pointwise, the exact solution, the observable extractors).
"""
import logging
import re
from collections import OrderedDict, namedtuple
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from ham_bsde.algebra import COS, SIN, T, Expr, compile_evaluator, linear_arg, linear_combine
from ham_bsde.engine import DEFAULT_TERM_CAP, chi
from ham_bsde.exceptions import ConfigError, DataError, HistoryError, UnsupportedError
from ham_bsde.series import EmbeddedTrigSeries, HistorySeries
from ham_bsde.utils import Bound, mp_context

logger = logging.getLogger(__name__)

DomainAxis = namedtuple("DomainAxis", "name lo hi normalized")

_HALF = Fraction(1, 2)
_NEG_PI = Bound(Fraction(0), Fraction(-1))
_POS_PI = Bound(Fraction(0), Fraction(1))


def _bound(value):
    return Bound(Fraction(value), Fraction(0))


@dataclass(frozen=True)
class ObservableSet(object):
    """Initial values (y0, z0, Gamma0, A0) read off an approximation.

    ``values`` keeps (label, value) pairs in table column order; coupled
    problems use labels like ``y0[2]``, vector z uses ``z0[i]``.
    """

    values: tuple

    def get(self, label, default=None):
        for name, value in self.values:
            if name == label:
                return value
        return default

    def _pick(self, prefix):
        return tuple(v for name, v in self.values if name == prefix or name.startswith(prefix + "["))

    @property
    def labels(self):
        return tuple(name for name, _ in self.values)

    @property
    def y0(self):
        values = self._pick("y0")
        return values[0] if len(values) == 1 else values

    @property
    def z0(self):
        return self._pick("z0")

    @property
    def gamma0(self):
        return self.get("gamma0")

    @property
    def a0(self):
        return self.get("a0")

    def as_dict(self):
        return OrderedDict(self.values)


class Workspace(object):
    """Live view of the histories with memoized homotopy derivatives."""

    def __init__(self, problem, histories):
        self.problem = problem
        self.histories = histories
        self.phi = [HistorySeries(h, problem.variables) for h in histories]
        problem.prepare(self)

    def delta(self, component, n):
        if not 0 <= component < self.problem.n_components:
            raise DataError(
                "[-] Error: component %s out of range for %s." % (component, self.problem.name)
            )
        if n >= len(self.histories[component]):
            raise HistoryError("[-] Error: delta_%d needs phi_0..phi_%d." % (n, n))
        return self.problem.delta_term(self, component, n)


def _jet(expr, prefix, derivatives):
    out = OrderedDict([(prefix, expr)])
    for suffix, variables in derivatives:
        e = expr
        for v in variables:
            e = e.diff(v)
        out["%s_%s" % (prefix, suffix)] = e
    return out


class ProblemSpec(object):
    """Contract of a problem.

    Required: ``initial_guess``, ``prepare``/``delta_term``, ``boundary_rule``,
    ``anchor``.  Exact solutions and observables are optional; the defaults
    raise UnsupportedError.
    """

    id = None
    variables = ()
    terminal_time = Fraction(1)
    anchor = Fraction(1)
    n_components = 1
    brownian_dim = 1
    has_exact_solution = False
    default_quadrature = None
    term_cap = DEFAULT_TERM_CAP

    @property
    def name(self):
        return self.id

    def __repr__(self):
        return "<%s %s>" % (self.__class__.__name__, self.name)

    def __eq__(self, other):
        return type(self) is type(other) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def _x(self, name):
        return Expr.variable(self.variables, name)

    # recursion

    def initial_guess(self):
        raise NotImplementedError

    def boundary_rule(self, m, component=0):
        if m == 0:
            return self.initial_guess()[component].substitute_t(self.terminal_time)
        return Expr.zero(self.variables)

    def terminal_condition(self, M, component=0):
        """Value of phi~_M at t = T implied by the boundary rules."""
        return linear_combine([(1, self.boundary_rule(m, component)) for m in range(M + 1)])

    def workspace(self, histories):
        return Workspace(self, histories)

    def prepare(self, ws):
        pass

    def delta_term(self, ws, component, n):
        raise NotImplementedError

    # diagnostics hooks

    def evaluation_point(self, ctx):
        raise NotImplementedError

    def default_domain(self):
        return tuple(DomainAxis(v, _NEG_PI, _POS_PI, True) for v in self.variables)

    def t_interval(self):
        return (_bound(0), Bound(self.terminal_time, Fraction(0)))

    def residual_jets(self, approx):
        raise UnsupportedError("[-] Error: %s exposes no operator." % self.name)

    def residual_at(self, values, t, point, lib):
        raise UnsupportedError("[-] Error: %s exposes no operator." % self.name)

    def operator_expr(self, approx):
        return None

    def exact_values(self, t, point, lib):
        raise UnsupportedError("[-] Error: %s has no exact solution." % self.name)

    def exact_solution_exprs(self):
        return None

    def exact_jets(self, t, point, ctx):
        exprs = self.exact_solution_exprs()
        if exprs is None:
            raise UnsupportedError("[-] Error: %s has no exact jets." % self.name)
        return OrderedDict(
            (name, compile_evaluator(e, ctx)(point, t))
            for name, e in self.residual_jets(exprs).items()
        )

    def observable_exprs(self, approx):
        raise UnsupportedError("[-] Error: %s has no observables." % self.name)

    def observable_factors(self, ctx):
        return {}

    def exact_observable_exprs(self):
        return None

    def exact_observable_values(self, ctx):
        exprs = self.exact_observable_exprs()
        if exprs is None:
            raise UnsupportedError("[-] Error: %s has no exact initial values." % self.name)
        point = self.evaluation_point(ctx)
        factors = self.observable_factors(ctx)
        return OrderedDict(
            (label, compile_evaluator(e, ctx)(point, 0) * factors.get(label, 1))
            for label, e in exprs.items()
        )


class OneDimBsde(ProblemSpec):
    """Scalar BSDE in the bounded coordinate theta = e^(x+1)/(e^(x+1)+1).

    u_t + 1/2 th(1-th)(1-2th) u_th + 1/2 th^2(1-th)^2 u_thth - u^3 + 5/2 u^2 - 3/2 u = 0,
    u(1, th) = th.
    """

    id = "bsde1d"
    variables = ("theta",)
    anchor = Fraction(1)
    has_exact_solution = True
    default_quadrature = "symbolic"

    def _coefficients(self):
        th = self._x("theta")
        one = Expr.const(self.variables, 1)
        drift = (th * (one - th) * (one - th.scale(2))).scale(_HALF)
        diffusion = (th * th * (one - th) * (one - th)).scale(_HALF)
        return drift, diffusion

    def initial_guess(self):
        return (self._x("theta"),)

    def prepare(self, ws):
        ws.drift, ws.diffusion = self._coefficients()
        phi = ws.phi[0]
        ws.square = phi * phi
        ws.cube = phi * ws.square

    def delta_term(self, ws, component, n):
        p = ws.phi[0][n]
        return linear_combine(
            [
                (1, p.diff(T)),
                (1, ws.drift * p.diff("theta")),
                (1, ws.diffusion * p.diff("theta", 2)),
                (-1, ws.cube[n]),
                (Fraction(5, 2), ws.square[n]),
                (Fraction(-3, 2), p),
            ]
        )

    def evaluation_point(self, ctx):
        return {"theta": ctx.e / (ctx.e + 1)}

    def default_domain(self):
        return (DomainAxis("theta", _bound(0), _bound(1), False),)

    def residual_jets(self, approx):
        return _jet(approx[0], "u", [("t", (T,)), ("th", ("theta",)), ("thth", ("theta", "theta"))])

    def residual_at(self, values, t, point, lib):
        th = point["theta"]
        u = values["u"]
        return [
            values["u_t"]
            + th * (1 - th) * (1 - 2 * th) * values["u_th"] / 2
            + th * th * (1 - th) * (1 - th) * values["u_thth"] / 2
            - u * u * u
            + 2.5 * u * u
            - 1.5 * u
        ]

    def operator_expr(self, approx):
        p = approx[0]
        drift, diffusion = self._coefficients()
        square = p * p
        return [
            linear_combine(
                [
                    (1, p.diff(T)),
                    (1, drift * p.diff("theta")),
                    (1, diffusion * p.diff("theta", 2)),
                    (-1, square * p),
                    (Fraction(5, 2), square),
                    (Fraction(-3, 2), p),
                ]
            )
        ]

    def exact_values(self, t, point, lib):
        th = point["theta"]
        grow = th * lib.exp(t)
        return [grow / (grow + (1 - th) * lib.e)]

    def exact_jets(self, t, point, lib):
        th = point["theta"]
        et = lib.exp(t)
        den = th * et + (1 - th) * lib.e
        u = th * et / den
        scale = et * lib.e
        return OrderedDict(
            [
                ("u", u),
                ("u_t", u - u * u),
                ("u_th", scale / (den * den)),
                ("u_thth", -2 * scale * (et - lib.e) / (den * den * den)),
            ]
        )

    def observable_exprs(self, approx):
        p = approx[0].substitute_t(0)
        th = self._x("theta")
        return OrderedDict([("y0", p), ("z0", th * (1 - th) * p.diff("theta"))])

    def exact_observable_values(self, ctx):
        return OrderedDict([("y0", ctx.mpf(1) / 2), ("z0", ctx.mpf(1) / 4)])


def theta_of_x(x, lib):
    """Bounded coordinate of the scalar BSDE."""
    g = lib.exp(x + 1)
    return g / (g + 1)


def exact_in_x(t, x, lib):
    """Exact scalar BSDE solution in the original coordinate."""
    g = lib.exp(x + t)
    return g / (g + 1)


class CoupledBsde(ProblemSpec):
    """Two-component BSDE with terminal values sin(x+1), cos(x+1).

    u1_t + 1/2 u1_xx + (1/2 u1 - u2)(u1^2 + u2^2) = 0
    u2_t + 1/2 u2_xx + (u1 + 1/2 u2)(u1^2 + u2^2) = 0
    """

    id = "bsde2d"
    variables = ("x",)
    anchor = Fraction(1)
    n_components = 2
    has_exact_solution = True

    def initial_guess(self):
        v = self.variables
        return (Expr.sin(v, {"x": 1}, 1), Expr.cos(v, {"x": 1}, 1))

    def prepare(self, ws):
        phi, s = ws.phi
        modulus = phi * phi + s * s
        ws.nonlinear = (
            (phi.scale(_HALF) - s) * modulus,
            (phi + s.scale(_HALF)) * modulus,
        )

    def delta_term(self, ws, component, n):
        p = ws.phi[component][n]
        return linear_combine(
            [(1, p.diff(T)), (_HALF, p.diff("x", 2)), (1, ws.nonlinear[component][n])]
        )

    def evaluation_point(self, ctx):
        return {"x": ctx.zero}

    def residual_jets(self, approx):
        jets = OrderedDict()
        for i, e in enumerate(approx):
            jets.update(_jet(e, "u%d" % (i + 1), [("t", (T,)), ("xx", ("x", "x"))]))
        return jets

    def residual_at(self, values, t, point, lib):
        u1, u2 = values["u1"], values["u2"]
        modulus = u1 * u1 + u2 * u2
        return [
            values["u1_t"] + values["u1_xx"] / 2 + (u1 / 2 - u2) * modulus,
            values["u2_t"] + values["u2_xx"] / 2 + (u1 + u2 / 2) * modulus,
        ]

    def operator_expr(self, approx):
        u1, u2 = approx
        modulus = u1 * u1 + u2 * u2
        return [
            u1.diff(T) + u1.diff("x", 2).scale(_HALF) + (u1.scale(_HALF) - u2) * modulus,
            u2.diff(T) + u2.diff("x", 2).scale(_HALF) + (u1 + u2.scale(_HALF)) * modulus,
        ]

    def exact_values(self, t, point, lib):
        arg = point["x"] + t
        return [lib.sin(arg), lib.cos(arg)]

    def exact_jets(self, t, point, lib):
        arg = point["x"] + t
        s, c = lib.sin(arg), lib.cos(arg)
        return OrderedDict(
            [("u1", s), ("u1_t", c), ("u1_xx", -s), ("u2", c), ("u2_t", -s), ("u2_xx", -c)]
        )

    def observable_exprs(self, approx):
        p, s = [e.substitute_t(0) for e in approx]
        return OrderedDict(
            [("y0[1]", p), ("y0[2]", s), ("z0[1]", p.diff("x")), ("z0[2]", s.diff("x"))]
        )

    def exact_observable_values(self, ctx):
        return OrderedDict(
            [("y0[1]", ctx.zero), ("y0[2]", ctx.one), ("z0[1]", ctx.one), ("z0[2]", ctx.zero)]
        )


class TwoBrownianBsde(ProblemSpec):
    """Linear BSDE driven by two Brownian motions.

    u_t + 1/2 (u_11 + u_22) + u - 1/2 (u_1 + u_2) = 0,  u(1, x) = sin(x1 + x2 + 1).
    """

    id = "bsde2w"
    variables = ("x1", "x2")
    anchor = Fraction(1)
    brownian_dim = 2
    has_exact_solution = True

    def initial_guess(self):
        return (Expr.sin(self.variables, {"x1": 1, "x2": 1}, 1),)

    def linear_part(self, p):
        return linear_combine(
            [
                (1, p.diff(T)),
                (_HALF, p.diff("x1", 2)),
                (_HALF, p.diff("x2", 2)),
                (1, p),
                (-_HALF, p.diff("x1")),
                (-_HALF, p.diff("x2")),
            ]
        )

    def delta_term(self, ws, component, n):
        return self.linear_part(ws.phi[0][n])

    def evaluation_point(self, ctx):
        return {"x1": ctx.zero, "x2": ctx.zero}

    def residual_jets(self, approx):
        return _jet(
            approx[0],
            "u",
            [("t", (T,)), ("1", ("x1",)), ("2", ("x2",)), ("11", ("x1", "x1")), ("22", ("x2", "x2"))],
        )

    def residual_at(self, values, t, point, lib):
        return [
            values["u_t"]
            + (values["u_11"] + values["u_22"]) / 2
            + values["u"]
            - (values["u_1"] + values["u_2"]) / 2
        ]

    def operator_expr(self, approx):
        return [self.linear_part(approx[0])]

    def exact_values(self, t, point, lib):
        return [lib.sin(point["x1"] + point["x2"] + t)]

    def exact_jets(self, t, point, lib):
        arg = point["x1"] + point["x2"] + t
        s, c = lib.sin(arg), lib.cos(arg)
        return OrderedDict(
            [("u", s), ("u_t", c), ("u_1", c), ("u_2", c), ("u_11", -s), ("u_22", -s)]
        )

    def observable_exprs(self, approx):
        p = approx[0].substitute_t(0)
        return OrderedDict([("y0", p), ("z0[1]", p.diff("x1")), ("z0[2]", p.diff("x2"))])

    def exact_observable_values(self, ctx):
        return OrderedDict([("y0", ctx.zero), ("z0[1]", ctx.one), ("z0[2]", ctx.one)])


class _EmbeddedFbsde(ProblemSpec):
    """Shared layout of the q-embedded forward-backward problems.

    Anchored at t = 0; the order-m boundary value is sin(x + m pi/2)/m!, the
    q-coefficient of the terminal value sin(q + x).
    """

    variables = ("x",)
    anchor = Fraction(0)
    has_exact_solution = True

    def initial_guess(self):
        return (Expr.sin(self.variables, {"x": 1}),)

    def boundary_rule(self, m, component=0):
        if m == 0:
            return ProblemSpec.boundary_rule(self, m, component)
        return Expr.sin(self.variables, {"x": 1}, 0, Fraction(m, 2)).scale(
            Fraction(1, factorial(m))
        )

    def _trig(self, kind, freq):
        return EmbeddedTrigSeries(kind, freq, linear_arg({"x": freq}), self.variables)

    def evaluation_point(self, ctx):
        return {"x": ctx.mpf(1) / 2}

    def residual_jets(self, approx):
        return _jet(approx[0], "u", [("t", (T,)), ("x", ("x",)), ("xx", ("x", "x"))])

    def exact_values(self, t, point, lib):
        return [lib.sin(t + point["x"])]

    def exact_jets(self, t, point, lib):
        arg = t + point["x"]
        s, c = lib.sin(arg), lib.cos(arg)
        return OrderedDict([("u", s), ("u_t", c), ("u_x", c), ("u_xx", -s)])

    def _sin(self, freq=1):
        return Expr.sin(self.variables, {"x": freq})

    def _cos(self, freq=1):
        return Expr.cos(self.variables, {"x": freq})


class QEmbeddedFbsde(_EmbeddedFbsde):
    """FBSDE with b = sin(t+x) y, sigma = cos(t+x) y after q-embedding.

    u_t + sin(t+x) u u_x + 1/4 cos(2t+2x) u^2 u_xx + 1/4 u^2 u_xx
        + 1/2 cos(t+x) u^3 u_x - cos(t+x)(u^2 + 1) = 0
    """

    id = "fbsde"

    def prepare(self, ws):
        phi = ws.phi[0]
        dphi = phi.diff("x")
        ddphi = phi.diff("x", 2)
        ws.cos1 = self._trig(COS, 1)
        sin1 = self._trig(SIN, 1)
        cos2 = self._trig(COS, 2)
        ws.parts = (
            phi * (sin1 * dphi),
            phi * (phi * (phi * (ws.cos1.scale(_HALF) * dphi))),
            phi * (phi * (cos2.scale(Fraction(1, 4)) * ddphi)),
            phi * (phi * (ddphi.scale(Fraction(1, 4)) - ws.cos1)),
        )

    def delta_term(self, ws, component, n):
        pairs = [(1, ws.phi[0][n].diff(T)), (-1, ws.cos1[n])]
        pairs.extend((1, part[n]) for part in ws.parts)
        return linear_combine(pairs)

    def residual_at(self, values, t, point, lib):
        x = point["x"]
        u, ux, uxx = values["u"], values["u_x"], values["u_xx"]
        s, c = lib.sin(t + x), lib.cos(t + x)
        c2 = lib.cos(2 * t + 2 * x)
        return [
            values["u_t"]
            + s * u * ux
            + c2 * u * u * uxx / 4
            + u * u * uxx / 4
            + c * u * u * u * ux / 2
            - c * (u * u + 1)
        ]

    def observable_exprs(self, approx):
        p = approx[0].substitute_t(0)
        return OrderedDict([("y0", p), ("z0", self._cos() * p * p.diff("x"))])

    def exact_observable_exprs(self):
        s, c = self._sin(), self._cos()
        return OrderedDict([("y0", s), ("z0", c * c * s)])


class SecondOrderFbsde(_EmbeddedFbsde):
    """2FBSDE with b = sin(t+x), sigma = cos(t+x); observables include Gamma0, A0.

    u_t + 1/8 [1 + cos(2t+2x)] u_xx - cos(t+x)(u^2 + u)
        + [sin(t+x) + 1/8 sin(2t+2x) - 1/2 cos(2t+2x) - 1/2] u_x = 0
    """

    id = "fbsde2nd"

    def prepare(self, ws):
        phi = ws.phi[0]
        dphi = phi.diff("x")
        ddphi = phi.diff("x", 2)
        cos1 = self._trig(COS, 1)
        sin1 = self._trig(SIN, 1)
        cos2 = self._trig(COS, 2)
        sin2 = self._trig(SIN, 2)
        ws.parts = (
            (1, sin1 * dphi),
            (1, cos2.scale(Fraction(1, 8)) * ddphi),
            (-1, cos1 * phi),
            (1, (sin2.scale(Fraction(1, 8)) - cos2.scale(_HALF)) * dphi),
            (-1, cos1 * (phi * phi)),
        )

    def delta_term(self, ws, component, n):
        p = ws.phi[0][n]
        pairs = [(1, p.diff(T)), (-_HALF, p.diff("x")), (Fraction(1, 8), p.diff("x", 2))]
        pairs.extend((c, part[n]) for c, part in ws.parts)
        return linear_combine(pairs)

    def residual_at(self, values, t, point, lib):
        x = point["x"]
        u, ux, uxx = values["u"], values["u_x"], values["u_xx"]
        c = lib.cos(t + x)
        s2, c2 = lib.sin(2 * t + 2 * x), lib.cos(2 * t + 2 * x)
        return [
            values["u_t"]
            + (1 + c2) * uxx / 8
            - c * (u * u + u)
            + (lib.sin(t + x) + s2 / 8 - c2 / 2 - 0.5) * ux
        ]

    def observable_exprs(self, approx):
        p = approx[0]
        p0 = p.substitute_t(0)
        cos_x = self._cos()
        z = cos_x * p0.diff("x")
        # order-1 q-expansion of cos(t+x) is exact for one t-derivative at t = 0
        sigma = self._trig(COS, 1)
        psi = (sigma[0] + sigma[1]) * p.diff("x")
        drift = psi.diff(T) + self._sin() * psi.diff("x") + (cos_x * cos_x).scale(_HALF) * psi.diff("x", 2)
        return OrderedDict(
            [
                ("y0", p0),
                ("z0", z),
                ("gamma0", cos_x * z.diff("x")),
                ("a0", drift.substitute_t(0)),
            ]
        )

    def exact_observable_exprs(self):
        s, c = self._sin(), self._cos()
        one = Expr.const(self.variables, 1)
        return OrderedDict(
            [
                ("y0", s),
                ("z0", c * c),
                ("gamma0", (s * c * c).scale(-2)),
                ("a0", -(self._sin(2) * (one + s)) - self._cos(2) * c * c),
            ]
        )


class HighDimFbsde(ProblemSpec):
    """d-dimensional FBSDE with Gaussian-damped diffusion.

    u_t + 1/(2d^2) sum_i e^(-2x_i^2) u_ii + u/d^2 + F(t, x) = 0 with exact solution
    u = 1/d sum_j x_j^2 prod_{k != j}(x_k + t).
    """

    id = "fbsdeNd"
    anchor = Fraction(1)
    has_exact_solution = True

    def __init__(self, d):
        d = int(d)
        if d < 1:
            raise ConfigError("[-] Error: fbsdeNd needs d >= 1, got %s." % d)
        self.d = d
        self.variables = tuple("x%d" % (i + 1) for i in range(d))
        self.brownian_dim = d
        self._cache = {}

    @property
    def name(self):
        return "fbsdeNd(%d)" % self.d

    @property
    def term_cap(self):
        """DEFAULT_TERM_CAP, doubled for every dimension above 6."""
        return DEFAULT_TERM_CAP << max(0, self.d - 6)

    def __getstate__(self):
        return {"d": self.d}

    def __setstate__(self, state):
        self.__init__(state["d"])

    def _sum_form(self, shift):
        """1/d sum_j x_j^2 prod_{k != j}(x_k + shift), shift an Expr."""
        v = self.variables
        total = Expr.zero(v)
        for j in v:
            product = self._x(j) * self._x(j)
            for k in v:
                if k != j:
                    product = product * (self._x(k) + shift)
            total = total + product
        return total.scale(Fraction(1, self.d))

    def initial_guess(self):
        if "guess" not in self._cache:
            self._cache["guess"] = (self._sum_form(Expr.const(self.variables, 1)),)
        return self._cache["guess"]

    def exact_solution_exprs(self):
        if "exact" not in self._cache:
            self._cache["exact"] = (self._sum_form(Expr.t(self.variables)),)
        return self._cache["exact"]

    def forcing(self):
        """F(t, x), expanded into the term algebra."""
        if "forcing" in self._cache:
            return self._cache["forcing"]
        v = self.variables
        shifted = dict((k, self._x(k) + Expr.t(v)) for k in v)

        def product(skip):
            out = Expr.const(v, 1)
            for k in v:
                if k not in skip:
                    out = out * shifted[k]
            return out

        first = []
        second = []
        for i in v:
            square = self._x(i) * self._x(i)
            for j in v:
                if j != i:
                    first.append((1, square * product((i, j))))
            second.append((1, (square + Expr.gauss(v, i)) * product((i,))))
        d = self.d
        parts = []
        if first:
            parts.append((Fraction(-1, d), linear_combine(first)))
        parts.append((Fraction(-1, d ** 3), linear_combine(second)))
        self._cache["forcing"] = linear_combine(parts)
        return self._cache["forcing"]

    def linear_part(self, p):
        d2 = self.d * self.d
        pairs = [(1, p.diff(T)), (Fraction(1, d2), p)]
        for name in self.variables:
            curvature = p.diff(name, 2)
            if curvature:
                pairs.append((Fraction(1, 2 * d2), Expr.gauss(self.variables, name) * curvature))
        return linear_combine(pairs)

    def prepare(self, ws):
        ws.forcing = self.forcing()

    def delta_term(self, ws, component, n):
        out = self.linear_part(ws.phi[0][n])
        if not chi(n + 1):
            out = out + ws.forcing
        return out

    def evaluation_point(self, ctx):
        return dict((name, ctx.one) for name in self.variables)

    def default_domain(self):
        return tuple(DomainAxis(v, _bound(0), _bound(2), False) for v in self.variables)

    def residual_jets(self, approx):
        return _jet(approx[0], "u", [("t", (T,))] + [(n + n, (n, n)) for n in self.variables])

    def residual_at(self, values, t, point, lib):
        d = self.d
        xs = [point[n] for n in self.variables]
        shifted = [x + t for x in xs]

        def product(skip):
            out = 1
            for k, s in enumerate(shifted):
                if k not in skip:
                    out = out * s
            return out

        diffusion = 0
        force = 0
        for i, (name, x) in enumerate(zip(self.variables, xs)):
            gauss = lib.exp(-2 * x * x)
            diffusion = diffusion + gauss * values["u_%s%s" % (name, name)]
            cross = 0
            for j in range(d):
                if j != i:
                    cross = cross + product((i, j))
            force = force - x * x * cross / d - (x * x + gauss) * product((i,)) / d ** 3
        return [values["u_t"] + diffusion / (2 * d * d) + values["u"] / (d * d) + force]

    def operator_expr(self, approx):
        return [self.linear_part(approx[0]) + self.forcing()]

    def exact_values(self, t, point, lib):
        xs = [point[n] for n in self.variables]
        total = 0
        for j, x in enumerate(xs):
            product = x * x
            for k, y in enumerate(xs):
                if k != j:
                    product = product * (y + t)
            total = total + product
        return [total / self.d]

    def observable_exprs(self, approx):
        p = approx[0].substitute_t(0)
        out = OrderedDict([("y0", p)])
        for i, name in enumerate(self.variables):
            out["z0[%d]" % (i + 1)] = p.diff(name)
        return out

    def observable_factors(self, ctx):
        point = self.evaluation_point(ctx)
        return dict(
            ("z0[%d]" % (i + 1), ctx.exp(-point[name] ** 2) / self.d)
            for i, name in enumerate(self.variables)
        )

    def exact_observable_values(self, ctx):
        d = self.d
        out = OrderedDict([("y0", ctx.one)])
        z = ctx.mpf(d + 1) / (ctx.e * d * d)
        for i in range(d):
            out["z0[%d]" % (i + 1)] = z
        return out


_REGISTRY = OrderedDict(
    [
        ("bsde1d", OneDimBsde),
        ("bsde2d", CoupledBsde),
        ("bsde2w", TwoBrownianBsde),
        ("fbsde", QEmbeddedFbsde),
        ("fbsde2nd", SecondOrderFbsde),
        ("fbsdeNd", HighDimFbsde),
    ]
)

_ND_RE = re.compile(r"^fbsdeNd\((\d+)\)$")


def problem_ids():
    return list(_REGISTRY)


def get_problem(problem_id, d=None):
    """
    Look up a problem by id.
    arguments:
    @problem_id: string, one of problem_ids() or "fbsdeNd(<d>)"
    @d: int, dimension for fbsdeNd
    @return ProblemSpec
    """
    mo = _ND_RE.match(str(problem_id))
    if mo:
        if d is not None and int(d) != int(mo.group(1)):
            raise ConfigError("[-] Error: %s conflicts with d=%s." % (problem_id, d))
        problem_id, d = "fbsdeNd", int(mo.group(1))
    cls = _REGISTRY.get(problem_id)
    if cls is None:
        raise ConfigError(
            "[-] Error: unknown problem %r, choose from %s." % (problem_id, ", ".join(_REGISTRY))
        )
    if cls is HighDimFbsde:
        if d is None:
            raise ConfigError("[-] Error: fbsdeNd needs a dimension d.")
        return cls(d)
    if d is not None:
        raise ConfigError("[-] Error: problem %s takes no dimension." % problem_id)
    return cls()


def as_components(problem, approx):
    """Normalize an approximation to a tuple with one Expr per component."""
    if isinstance(approx, Expr):
        approx = (approx,)
    approx = tuple(approx)
    if len(approx) != problem.n_components:
        raise DataError(
            "[-] Error: %s has %d components, got %d."
            % (problem.name, problem.n_components, len(approx))
        )
    return approx


def _as_histories(problem, history):
    history = list(history)
    if history and isinstance(history[0], Expr):
        history = [history]
    if len(history) != problem.n_components:
        raise DataError(
            "[-] Error: %s needs %d histories, got %d."
            % (problem.name, problem.n_components, len(history))
        )
    return [list(h) for h in history]


def delta(problem, component, n, history):
    """delta_n of one component from a history holding phi_0..phi_n."""
    return problem.workspace(_as_histories(problem, history)).delta(component, n)


def initial_guess(problem):
    guess = problem.initial_guess()
    return guess[0] if problem.n_components == 1 else guess


def boundary_rule(problem, m, component=0):
    return problem.boundary_rule(m, component)


def extract_observables(problem, approx, precision_bits=256):
    """Differentiate symbolically, then evaluate at the problem's evaluation point."""
    ctx = mp_context(precision_bits)
    approx = as_components(problem, approx)
    point = problem.evaluation_point(ctx)
    factors = problem.observable_factors(ctx)
    values = []
    for label, e in problem.observable_exprs(approx).items():
        values.append((label, compile_evaluator(e, ctx)(point, 0) * factors.get(label, 1)))
    return ObservableSet(tuple(values))


def exact_initial_values(problem, precision_bits=256):
    if not problem.has_exact_solution:
        raise UnsupportedError("[-] Error: %s has no exact solution." % problem.name)
    ctx = mp_context(precision_bits)
    return ObservableSet(tuple(problem.exact_observable_values(ctx).items()))
