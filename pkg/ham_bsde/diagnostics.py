#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: diagnostics.py

"""
Squared-error norms, observable errors, error tables and c0 sweeps.

Two norms are available for an approximation phi~ of a problem:

    exact_error        int int (phi~ - u)^2       (needs the exact solution u)
    operator_residual  int int N[phi~]^2          (needs the q = 1 operator N)

Both are taken over the NormSpec domain; axes flagged ``normalized`` divide by
their length.
"""
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product

import numpy as np

from ham_bsde.algebra import compile_evaluator, evaluate_array, horner, linear_combine, multiply
from ham_bsde.engine import extend_series, initial_state, partial_sums, run_series
from ham_bsde.exceptions import (
    ConfigError,
    DataError,
    DomainError,
    HamError,
    ResourceError,
    UnsupportedError,
)
from ham_bsde.pool import CellPool
from ham_bsde.problems import as_components, extract_observables, exact_initial_values
from ham_bsde.quadrature import halton_samples, integrate_box, scale_samples, scaled_rule
from ham_bsde.utils import Bound, mp_context, parse_rational

logger = logging.getLogger(__name__)

EXACT_ERROR = "exact_error"
OPERATOR_RESIDUAL = "operator_residual"
NORM_KINDS = (EXACT_ERROR, OPERATOR_RESIDUAL)

SYMBOLIC = "symbolic"
GAUSS = "gauss"
QUASI_RANDOM = "qmc"
QUADRATURES = (SYMBOLIC, GAUSS, QUASI_RANDOM)

DEFAULT_NODES = 64
DEFAULT_SEED = 42
SAMPLES_PER_DIM = 4096
MAX_GAUSS_DIM = 3


@dataclass(frozen=True)
class NormSpec(object):
    """Which norm, over which domain, with which quadrature."""

    kind: str = EXACT_ERROR
    domain: tuple = ()
    t_interval: tuple = (Bound(Fraction(0), Fraction(0)), Bound(Fraction(1), Fraction(0)))
    quadrature: str = GAUSS
    nodes: int = DEFAULT_NODES
    samples: int = 0
    seed: int = DEFAULT_SEED
    precision_bits: int = 256

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ConfigError("[-] Error: norm kind must be one of %s." % ", ".join(NORM_KINDS))
        if self.quadrature not in QUADRATURES:
            raise ConfigError("[-] Error: quadrature must be one of %s." % ", ".join(QUADRATURES))
        if self.nodes < 1 or self.samples < 0:
            raise ConfigError("[-] Error: nodes must be >= 1 and samples >= 0.")
        bounds = [b for axis in self.domain for b in (axis.lo, axis.hi)] + list(self.t_interval)
        if not all(b.is_finite() for b in bounds):
            raise ConfigError(
                "[-] Error: %s quadrature needs finite intervals, got %s."
                % (self.quadrature, self.describe_domain())
            )

    @classmethod
    def default(cls, problem, kind=EXACT_ERROR, **overrides):
        """
        Defaults: tensor Gauss-Legendre for at most three spatial variables,
        quasi-random samples (4096 per variable) above that.
        """
        dim = len(problem.variables)
        quadrature = GAUSS if dim <= MAX_GAUSS_DIM else QUASI_RANDOM
        if kind == EXACT_ERROR and problem.default_quadrature:
            quadrature = problem.default_quadrature
        values = dict(
            kind=kind,
            domain=problem.default_domain(),
            t_interval=problem.t_interval(),
            quadrature=quadrature,
            samples=SAMPLES_PER_DIM * dim,
        )
        values.update((k, v) for k, v in overrides.items() if v is not None)
        return cls(**values)

    def with_domain(self, intervals):
        """Override axes from a parsed domain; "*" applies to every spatial axis."""
        if not intervals:
            return self
        known = set(axis.name for axis in self.domain) | set(["*", "t"])
        unknown = sorted(set(intervals) - known)
        if unknown:
            raise ConfigError("[-] Error: domain names unknown variables %s." % ", ".join(unknown))
        axes = []
        for axis in self.domain:
            lo_hi = intervals.get(axis.name, intervals.get("*"))
            axes.append(axis._replace(lo=lo_hi[0], hi=lo_hi[1]) if lo_hi else axis)
        t_interval = tuple(intervals.get("t", self.t_interval))
        return replace(self, domain=tuple(axes), t_interval=t_interval)

    def describe_domain(self):
        parts = ["%s=%s:%s" % (axis.name, axis.lo, axis.hi) for axis in self.domain]
        parts.append("t=%s:%s" % self.t_interval)
        return ",".join(parts)

    def normalization(self, ctx):
        factor = ctx.one
        for axis in self.domain:
            if axis.normalized:
                factor /= axis.hi.value(ctx) - axis.lo.value(ctx)
        return factor


@dataclass(frozen=True)
class ReportRow(object):
    order: int
    exact_error: object = None
    residual: object = None
    observables: tuple = ()
    wall_time: float = 0.0


@dataclass(frozen=True)
class DiagnosticsReport(object):
    """Rows of an error table; orders strictly increase."""

    problem_id: str
    c0: Fraction
    rows: tuple
    norm: str = ""

    def __post_init__(self):
        orders = [row.order for row in self.rows]
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise DataError("[-] Error: report orders %s are not strictly increasing." % orders)

    @property
    def orders(self):
        return tuple(row.order for row in self.rows)

    @property
    def observable_labels(self):
        return tuple(label for label, _ in self.rows[0].observables) if self.rows else ()

    @property
    def has_residual(self):
        return any(row.residual is not None for row in self.rows)

    def column(self, label):
        return tuple(dict(row.observables).get(label) for row in self.rows)


@dataclass(frozen=True)
class SweepResult(object):
    """Residual at every (order, c0) pair; ``matrix[i][j]`` is orders[i] at c0_grid[j].

    Cells that failed hold None and are listed in ``failed`` as (order, c0, message).
    """

    problem_id: str
    orders: tuple
    c0_grid: tuple
    matrix: tuple
    failed: tuple = ()
    norm: str = OPERATOR_RESIDUAL

    def __post_init__(self):
        if len(self.matrix) != len(self.orders) or any(
            len(row) != len(self.c0_grid) for row in self.matrix
        ):
            raise DataError("[-] Error: sweep matrix must be orders x grid.")

    def row(self, order):
        return self.matrix[self.orders.index(order)]

    def column(self, c0):
        j = self.c0_grid.index(parse_rational(c0))
        return tuple(row[j] for row in self.matrix)


def _sum_squares(values, zero):
    total = zero
    for v in values:
        total = total + v * v
    return total


def _tensor_gauss(spec, ctx, integrand):
    """Tensor Gauss-Legendre sum; ``integrand(point, t_nodes)`` returns one value per t node."""
    names = []
    rules = []
    for axis in spec.domain:
        nodes, weights = scaled_rule(axis.lo.value(ctx), axis.hi.value(ctx), spec.nodes, ctx)
        names.append(axis.name)
        rules.append(list(zip(nodes, weights)))
    t_lo, t_hi = [b.value(ctx) for b in spec.t_interval]
    t_nodes, t_weights = scaled_rule(t_lo, t_hi, spec.nodes, ctx)
    total = ctx.zero
    for combo in product(*rules):
        point = dict(zip(names, (x for x, _ in combo)))
        weight = ctx.one
        for _, w in combo:
            weight *= w
        values = integrand(point, t_nodes)
        total += weight * ctx.fsum(w * v for w, v in zip(t_weights, values))
    return total * spec.normalization(ctx)


def _quasi_random(spec, ctx, integrand):
    """Mean of ``integrand(point_arrays, t_array)`` over scrambled Halton points times the volume."""
    names = [axis.name for axis in spec.domain]
    lows = [float(axis.lo.value(ctx)) for axis in spec.domain]
    highs = [float(axis.hi.value(ctx)) for axis in spec.domain]
    lows.append(float(spec.t_interval[0].value(ctx)))
    highs.append(float(spec.t_interval[1].value(ctx)))
    n = spec.samples or SAMPLES_PER_DIM * max(1, len(names))
    samples = scale_samples(halton_samples(n, len(lows), spec.seed), lows, highs)
    point = dict((name, samples[:, i]) for i, name in enumerate(names))
    values = integrand(point, samples[:, -1])
    volume = float(np.prod(np.subtract(highs, lows)))
    return ctx.mpf(float(np.mean(values)) * volume) * spec.normalization(ctx)


def _box(spec, ctx):
    box = dict((axis.name, (axis.lo.value(ctx), axis.hi.value(ctx))) for axis in spec.domain)
    t_interval = tuple(b.value(ctx) for b in spec.t_interval)
    return box, t_interval


def _jet_integrand(problem, jets, ctx):
    names = list(jets)
    evaluators = [compile_evaluator(jets[name], ctx) for name in names]

    def integrand(point, t_nodes):
        coeffs = [ev.t_coefficients(point) for ev in evaluators]
        out = []
        for t in t_nodes:
            values = dict((name, horner(c, t, ctx.zero)) for name, c in zip(names, coeffs))
            out.append(_sum_squares(problem.residual_at(values, t, point, ctx), ctx.zero))
        return out

    return integrand


def _jet_array_integrand(problem, jets):
    def integrand(point, t):
        values = dict((name, evaluate_array(e, point, t)) for name, e in jets.items())
        return _sum_squares(problem.residual_at(values, t, point, np), 0.0)

    return integrand


def error_norm_exact(problem, approx, spec=None):
    """
    Squared error against the exact solution, summed over components.
    arguments:
    @problem: ProblemSpec with an exact solution
    @approx: Expr or tuple of Expr, one per component
    @spec: NormSpec, defaults to NormSpec.default(problem)
    @return mpf
    """
    if not problem.has_exact_solution:
        raise UnsupportedError("[-] Error: %s has no exact solution." % problem.name)
    approx = as_components(problem, approx)
    spec = spec or NormSpec.default(problem)
    ctx = mp_context(spec.precision_bits)

    if spec.quadrature == QUASI_RANDOM:

        def sampled(point, t):
            exact = problem.exact_values(t, point, np)
            return _sum_squares(
                [evaluate_array(a, point, t) - u for a, u in zip(approx, exact)], 0.0
            )

        return _quasi_random(spec, ctx, sampled)

    evaluators = [compile_evaluator(a, ctx) for a in approx]

    def cross_terms(point, t_nodes, include_square):
        coeffs = [ev.t_coefficients(point) for ev in evaluators]
        out = []
        for t in t_nodes:
            exact = problem.exact_values(t, point, ctx)
            total = ctx.zero
            for c, u in zip(coeffs, exact):
                value = horner(c, t, ctx.zero)
                total += (value - u) ** 2 if include_square else u * u - 2 * value * u
            out.append(total)
        return out

    if spec.quadrature == GAUSS:
        return _tensor_gauss(spec, ctx, lambda point, t_nodes: cross_terms(point, t_nodes, True))

    box, t_interval = _box(spec, ctx)
    exact_exprs = problem.exact_solution_exprs()
    if exact_exprs is not None:
        diffs = [a - u for a, u in zip(approx, exact_exprs)]
        square = linear_combine([(1, multiply(e, e)) for e in diffs])
        return integrate_box(square, box, t_interval, ctx) * spec.normalization(ctx)
    # int phi~^2 in closed form; the non-polynomial remainder by Gauss at working precision
    square = linear_combine([(1, multiply(a, a)) for a in approx])
    closed = integrate_box(square, box, t_interval, ctx) * spec.normalization(ctx)
    remainder = _tensor_gauss(spec, ctx, lambda point, t_nodes: cross_terms(point, t_nodes, False))
    return closed + remainder


def residual_norm_operator(problem, approx, spec=None):
    """
    Squared residual of the q = 1 operator applied to ``approx``.
    arguments:
    @problem: ProblemSpec exposing residual_jets/residual_at
    @approx: Expr or tuple of Expr
    @spec: NormSpec, defaults to NormSpec.default(problem, OPERATOR_RESIDUAL)
    @return mpf
    """
    approx = as_components(problem, approx)
    spec = spec or NormSpec.default(problem, OPERATOR_RESIDUAL)
    ctx = mp_context(spec.precision_bits)
    if spec.quadrature == SYMBOLIC:
        operator = problem.operator_expr(approx)
        if operator is None:
            raise ConfigError(
                "[-] Error: the operator of %s leaves the term algebra; use gauss or qmc."
                % problem.name
            )
        box, t_interval = _box(spec, ctx)
        square = linear_combine([(1, multiply(e, e)) for e in operator])
        return integrate_box(square, box, t_interval, ctx) * spec.normalization(ctx)
    jets = problem.residual_jets(approx)
    if spec.quadrature == QUASI_RANDOM:
        return _quasi_random(spec, ctx, _jet_array_integrand(problem, jets))
    return _tensor_gauss(spec, ctx, _jet_integrand(problem, jets, ctx))


def exact_residual_norm(problem, spec=None):
    """Operator residual of the exact solution itself."""
    if not problem.has_exact_solution:
        raise UnsupportedError("[-] Error: %s has no exact solution." % problem.name)
    exprs = problem.exact_solution_exprs()
    if exprs is not None:
        return residual_norm_operator(problem, exprs, spec)
    spec = spec or NormSpec.default(problem, OPERATOR_RESIDUAL)
    if spec.quadrature == SYMBOLIC:
        raise ConfigError("[-] Error: the exact solution of %s is not an Expr." % problem.name)
    ctx = mp_context(spec.precision_bits)
    if spec.quadrature == QUASI_RANDOM:

        def sampled(point, t):
            jets = problem.exact_jets(t, point, np)
            return _sum_squares(problem.residual_at(jets, t, point, np), 0.0)

        return _quasi_random(spec, ctx, sampled)

    def integrand(point, t_nodes):
        return [
            _sum_squares(
                problem.residual_at(problem.exact_jets(t, point, ctx), t, point, ctx), ctx.zero
            )
            for t in t_nodes
        ]

    return _tensor_gauss(spec, ctx, integrand)


def norm(problem, approx, spec):
    if spec.kind == EXACT_ERROR:
        return error_norm_exact(problem, approx, spec)
    return residual_norm_operator(problem, approx, spec)


def observable_errors(problem, approx, precision_bits=256):
    """
    approximate minus exact initial values, in table column order.
    Problems that give their exact observables as Exprs are compared
    symbolically first, so identical observables yield an exact zero.
    @return OrderedDict label -> mpf
    """
    approx = as_components(problem, approx)
    ctx = mp_context(precision_bits)
    exact_exprs = problem.exact_observable_exprs()
    if exact_exprs is None:
        approximate = extract_observables(problem, approx, precision_bits).as_dict()
        exact = exact_initial_values(problem, precision_bits).as_dict()
        return OrderedDict((label, approximate[label] - exact[label]) for label in approximate)
    point = problem.evaluation_point(ctx)
    factors = problem.observable_factors(ctx)
    out = OrderedDict()
    for label, e in problem.observable_exprs(approx).items():
        difference = e - exact_exprs[label]
        if not difference:
            out[label] = ctx.zero
        else:
            out[label] = compile_evaluator(difference, ctx)(point, 0) * factors.get(label, 1)
    return out


def reproduce_table(
    problem,
    orders,
    c0,
    spec=None,
    residual_spec=None,
    precision_bits=256,
    term_cap=None,
    with_residual=False,
    solution=None,
):
    """
    Error table of ``problem`` at the given orders.
    arguments:
    @problem: ProblemSpec
    @orders: iterable of int
    @c0: rational
    @spec: NormSpec of the exact-error column
    @residual_spec: NormSpec of the operator-residual column (only with ``with_residual``)
    @precision_bits: int, evaluation precision of the observable errors
    @term_cap: int, None for the problem's default
    @with_residual: bool
    @solution: optional SeriesSolution to extend instead of starting over
    @return DiagnosticsReport
    """
    orders = sorted(set(int(m) for m in orders))
    if not orders:
        raise ConfigError("[-] Error: orders list is empty.")
    c0 = parse_rational(c0)
    if solution is None:
        solution = initial_state(problem, c0)
    if solution.order < orders[-1]:
        solution = extend_series(problem, solution, orders[-1], term_cap=term_cap)
    if problem.has_exact_solution:
        spec = spec or NormSpec.default(problem, precision_bits=precision_bits)
    if with_residual:
        residual_spec = residual_spec or NormSpec.default(
            problem, OPERATOR_RESIDUAL, precision_bits=precision_bits
        )
    rows = []
    for m in orders:
        approx = partial_sums(solution, m)
        exact_error = error_norm_exact(problem, approx, spec) if problem.has_exact_solution else None
        residual = residual_norm_operator(problem, approx, residual_spec) if with_residual else None
        try:
            observables = tuple(observable_errors(problem, approx, precision_bits).items())
        except UnsupportedError:
            observables = ()
        rows.append(ReportRow(m, exact_error, residual, observables, solution.timings[m]))
        logger.debug("%s table row %d done", problem.name, m)
    return DiagnosticsReport(problem.name, c0, tuple(rows), spec.describe_domain() if spec else "")


def _sweep_cell(job):
    """One c0 column; returns ([mpf tuple or None per order], [(order, message)])."""
    problem, orders, c0, spec, term_cap = job
    reached = [initial_state(problem, c0)]

    def keep(m, state):
        reached[0] = state

    failures = []
    try:
        run_series(problem, orders[-1], c0, term_cap=term_cap, on_order=keep)
    except ResourceError as e:
        failures.append((e.order, str(e)))
    except HamError as e:
        failures.append((reached[0].order + 1, str(e)))
    state = reached[0]
    values = []
    for m in orders:
        if m > state.order:
            values.append(None)
            continue
        try:
            values.append(norm(problem, partial_sums(state, m), spec)._mpf_)
        except HamError as e:
            failures.append((m, str(e)))
            values.append(None)
    return values, failures


def sweep_c0(problem, orders, grid, spec=None, workers=1, term_cap=None):
    """
    Residual at every (order, c0) pair; c0 columns run in parallel.
    arguments:
    @problem: ProblemSpec
    @orders: iterable of int
    @grid: iterable of rationals, non-empty
    @spec: NormSpec, defaults to the operator residual
    @workers: int, worker processes
    @term_cap: int, None for the problem's default
    @return SweepResult
    """
    orders = sorted(set(int(m) for m in orders))
    grid = [parse_rational(c) for c in grid]
    if not orders or not grid:
        raise ConfigError("[-] Error: sweep needs at least one order and one c0.")
    spec = spec or NormSpec.default(problem, OPERATOR_RESIDUAL)
    ctx = mp_context(spec.precision_bits)
    jobs = [(problem, orders, c0, spec, term_cap) for c0 in grid]
    with CellPool("sweep %s" % problem.name, max_workers=workers) as pool:
        results = pool.map(_sweep_cell, jobs)
    columns = []
    failed = []
    for c0, (values, failures) in zip(grid, results):
        columns.append([None if v is None else ctx.make_mpf(v) for v in values])
        for order, message in failures:
            logger.warning("%s sweep cell c0=%s order %s failed: %s", problem.name, c0, order, message)
        for m, v in zip(orders, values):
            if v is None:
                reason = next((msg for o, msg in failures if o is not None and o <= m), "failed")
                failed.append((m, c0, reason))
        logger.debug("%s sweep cell c0=%s done", problem.name, c0)
    matrix = tuple(tuple(col[i] for col in columns) for i in range(len(orders)))
    return SweepResult(problem.name, tuple(orders), tuple(grid), matrix, tuple(failed), spec.kind)


def convergence_window(sweep, orders=None):
    """c0 values at which the residual strictly decreases across ``orders``."""
    orders = tuple(orders or sweep.orders)
    rows = [sweep.row(m) for m in orders]
    window = []
    for j, c0 in enumerate(sweep.c0_grid):
        column = [row[j] for row in rows]
        if any(v is None for v in column):
            continue
        if all(b < a for a, b in zip(column, column[1:])):
            window.append(c0)
    return window


def argmin_c0(sweep, order):
    """Grid value with the smallest residual at ``order``."""
    candidates = [(v, c0) for v, c0 in zip(sweep.row(order), sweep.c0_grid) if v is not None]
    if not candidates:
        raise DataError("[-] Error: every cell at order %d failed." % order)
    return min(candidates, key=lambda pair: pair[0])[1]


def cpu_time_models(d):
    """
    Fitted CPU-time curves of the homotopy solver and of a sparse-grid solver.
    arguments:
    @d: int >= 3, spatial dimension
    @return (t_homotopy, t_sparse_grid) in seconds
    """
    if d < 3:
        raise DomainError("[-] Error: the CPU-time models hold for d >= 3, got %s." % d)
    return math.exp(-3.2 + 0.95 * d), math.exp(-7.6 + 2.9 * d)
