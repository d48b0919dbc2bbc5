#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: verify.py

"""
Self-check suite: golden fixtures plus the structural properties of the
recursion, the problems and the term algebra.
"""
import glob
import logging
import os
import random
import time
from collections import OrderedDict
from fractions import Fraction

from ham_bsde.algebra import (
    COS,
    SIN,
    Expr,
    compile_evaluator,
    differentiate,
    linear_arg,
    linear_combine,
    multiply,
    symbolic_equal,
)
from ham_bsde.codec import expr_from_dict, expr_to_dict, load_fixture, solution_from_dict, solution_to_dict
from ham_bsde.diagnostics import GAUSS, OPERATOR_RESIDUAL, NormSpec, exact_residual_norm
from ham_bsde.engine import partial_sum, partial_sums, run_series
from ham_bsde.exceptions import ConfigError, HamError
from ham_bsde.problems import (
    OneDimBsde,
    delta,
    exact_in_x,
    extract_observables,
    get_problem,
    problem_ids,
    theta_of_x,
)
from ham_bsde.series import embedded_trig_coefficient
from ham_bsde.utils import mp_context

logger = logging.getLogger(__name__)

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

SINE_IDENTITY_ORDER = 12
BOUNDARY_ORDER = 4
VERIFY_NODES = 12
HOMOMORPHISM_POINTS = 50

CHECKS = OrderedDict()


class CheckFailed(HamError):
    pass


def check(name):
    def register(fn):
        CHECKS[name] = fn
        return fn

    return register


def _expect(condition, message):
    if not condition:
        raise CheckFailed(message)


def random_expr(rng, variables, n_terms=4, trig=True, gauss=False):
    """Random canonical Expr with small coefficients."""
    total = Expr.zero(variables)
    for _ in range(n_terms):
        term = Expr.const(variables, Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4)))
        term = term * Expr.t(variables, rng.randint(0, 3))
        name = rng.choice(variables)
        term = term * Expr.variable(variables, name, rng.randint(0, 3))
        if gauss and rng.random() < 0.5:
            term = term * Expr.gauss(variables, rng.choice(variables), rng.randint(1, 2))
        if trig and rng.random() < 0.6:
            coeffs = dict((v, rng.randint(-2, 2)) for v in variables)
            kind = rng.choice([SIN, COS])
            arg = linear_arg(coeffs, Fraction(rng.randint(-3, 3), 2), Fraction(rng.randint(0, 3), 4))
            term = term * Expr.trig(variables, kind, arg)
        total = total + term
    return total


def _random_point(rng, ctx, variables):
    return dict((v, ctx.mpf(rng.uniform(-1.5, 1.5))) for v in variables)


def _fixture_check(path):
    def run():
        try:
            problem_id, c0, sums = load_fixture(path)
        except HamError as e:
            raise CheckFailed("fixture %s unreadable: %s" % (os.path.basename(path), e))
        problem = get_problem(problem_id)
        solution = run_series(problem, max(sums), c0)
        for m in sorted(sums):
            got = partial_sums(solution, m)
            _expect(
                len(got) == len(sums[m]) and all(symbolic_equal(a, b) for a, b in zip(got, sums[m])),
                "fixture %s: order %d differs, got %s"
                % (os.path.basename(path), m, "; ".join(str(e) for e in got)),
            )

    return run


def fixture_checks(fixtures_dir=None):
    out = OrderedDict()
    for path in sorted(glob.glob(os.path.join(fixtures_dir or FIXTURES_DIR, "*.json"))):
        name = os.path.splitext(os.path.basename(path))[0]
        out["fixtures-%s" % name] = _fixture_check(path)
    return out


@check("appendix-identity")
def embedded_sine_identity():
    problem = get_problem("fbsde")
    solution = run_series(problem, SINE_IDENTITY_ORDER, -1)
    base = linear_arg({"x": 1})
    for i, phi in enumerate(solution.phis):
        expected = embedded_trig_coefficient(SIN, 1, base, i, problem.variables)
        _expect(symbolic_equal(phi, expected), "phi_%d = %s, expected %s" % (i, phi, expected))


def _boundary_problems():
    return [get_problem(name) for name in problem_ids() if name != "fbsdeNd"] + [
        get_problem("fbsdeNd", 2)
    ]


@check("boundary-exactness")
def boundary_exactness():
    for problem in _boundary_problems():
        solution = run_series(problem, BOUNDARY_ORDER, -1)
        for m in range(BOUNDARY_ORDER + 1):
            for component in range(problem.n_components):
                at_t = partial_sum(solution, m, component).substitute_t(problem.terminal_time)
                _expect(
                    symbolic_equal(at_t, problem.terminal_condition(m, component)),
                    "%s order %d component %d misses the terminal condition" % (problem.name, m, component),
                )


@check("exact-annihilation")
def exact_annihilation():
    for problem in _boundary_problems():
        spec = NormSpec.default(problem, OPERATOR_RESIDUAL, quadrature=GAUSS, nodes=VERIFY_NODES)
        ctx = mp_context(spec.precision_bits)
        value = exact_residual_norm(problem, spec)
        _expect(value < ctx.ldexp(1, -100), "%s: residual of the exact solution is %s" % (problem.name, value))


@check("forcing-gating")
def forcing_gating():
    problem = get_problem("fbsdeNd", 2)
    solution = run_series(problem, 2, -1)
    history = list(solution.phis)
    first = delta(problem, 0, 0, history)
    _expect(
        symbolic_equal(first - problem.forcing(), problem.linear_part(history[0])),
        "delta_0 does not carry the forcing exactly once",
    )
    for n in (1, 2):
        _expect(
            symbolic_equal(delta(problem, 0, n, history), problem.linear_part(history[n])),
            "delta_%d still carries forcing terms" % n,
        )


@check("z-symmetry")
def z_symmetry():
    problem = get_problem("bsde2w")
    solution = run_series(problem, 6, -1)
    for m in range(solution.order + 1):
        z = extract_observables(problem, partial_sums(solution, m)).z0
        _expect(z[0] == z[1], "order %d: z components differ" % m)


@check("feynman-kac")
def feynman_kac():
    problem = OneDimBsde()
    ctx = mp_context(256)
    rng = random.Random(11)
    for _ in range(20):
        t, x = ctx.mpf(rng.uniform(0, 1)), ctx.mpf(rng.uniform(-3, 3))
        u = problem.exact_values(t, {"theta": theta_of_x(x, ctx)}, ctx)[0]
        _expect(abs(u - exact_in_x(t, x, ctx)) < ctx.ldexp(1, -240), "mismatch at t=%s x=%s" % (t, x))


@check("algebra-homomorphism")
def algebra_homomorphism():
    rng = random.Random(7)
    ctx = mp_context(256)
    variables = ("x", "y")
    tol = ctx.ldexp(1, -100)
    fd_tol = ctx.ldexp(1, -60)
    h = ctx.ldexp(1, -30)
    for _ in range(5):
        a = random_expr(rng, variables, gauss=True)
        b = random_expr(rng, variables, gauss=True)
        ea, eb = compile_evaluator(a, ctx), compile_evaluator(b, ctx)
        product = compile_evaluator(multiply(a, b), ctx)
        combo = compile_evaluator(linear_combine([(Fraction(3, 2), a), (-2, b)]), ctx)
        da = compile_evaluator(differentiate(a, "x"), ctx)
        for _ in range(HOMOMORPHISM_POINTS):
            p = _random_point(rng, ctx, variables)
            t = ctx.mpf(rng.uniform(0, 1))
            va, vb = ea(p, t), eb(p, t)
            _expect(abs(product(p, t) - va * vb) < tol, "multiply is not a homomorphism at %s" % p)
            _expect(abs(combo(p, t) - (va * 3 / 2 - 2 * vb)) < tol, "linear_combine mismatch at %s" % p)
            stencil = []
            for k in (-2, -1, 1, 2):
                shifted = dict(p)
                shifted["x"] = p["x"] + k * h
                stencil.append(ea(shifted, t))
            numeric = (stencil[0] - 8 * stencil[1] + 8 * stencil[2] - stencil[3]) / (12 * h)
            _expect(abs(da(p, t) - numeric) < fd_tol, "differentiate mismatch at %s" % p)


@check("serialization-roundtrip")
def serialization_roundtrip():
    rng = random.Random(3)
    for _ in range(20):
        e = random_expr(rng, ("x1", "x2"), n_terms=6, gauss=True)
        _expect(symbolic_equal(expr_from_dict(expr_to_dict(e)), e), "Expr round trip failed for %s" % e)
    problem = get_problem("bsde2d")
    solution = run_series(problem, 3, Fraction(-7, 10))
    _expect(
        solution_from_dict(solution_to_dict(solution, problem.variables)) == solution,
        "SeriesSolution round trip failed",
    )


def available_checks(fixtures_dir=None):
    checks = OrderedDict(fixture_checks(fixtures_dir))
    checks.update(CHECKS)
    return checks


def run_checks(only=None, fixtures_dir=None):
    """
    Run the suite.
    arguments:
    @only: optional check name (or list of names)
    @fixtures_dir: directory of golden fixtures
    @return OrderedDict name -> {"passed", "message", "seconds"}
    """
    checks = available_checks(fixtures_dir)
    if only:
        names = [only] if isinstance(only, str) else list(only)
        unknown = [n for n in names if n not in checks]
        if unknown:
            raise ConfigError(
                "[-] Error: unknown check %s, choose from %s." % (", ".join(unknown), ", ".join(checks))
            )
        checks = OrderedDict((n, checks[n]) for n in names)
    results = OrderedDict()
    for name, fn in checks.items():
        start = time.monotonic()
        try:
            fn()
            passed, message = True, ""
        except HamError as e:
            passed, message = False, str(e)
        except Exception as e:
            passed, message = False, "%s: %s" % (e.__class__.__name__, e)
        results[name] = OrderedDict(
            [("passed", passed), ("message", message), ("seconds", round(time.monotonic() - start, 3))]
        )
        if passed:
            logger.info("check %s passed", name)
        else:
            logger.warning("check %s failed: %s", name, message)
    return results
