#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: problems_test.py

import pickle
from fractions import Fraction

import mpmath
import pytest

from ham_bsde.algebra import Expr, symbolic_equal
from ham_bsde.engine import partial_sums, run_series
from ham_bsde.exceptions import ConfigError, DataError, HistoryError, UnsupportedError
from ham_bsde.problems import (
    HighDimFbsde,
    ObservableSet,
    boundary_rule,
    delta,
    exact_in_x,
    exact_initial_values,
    extract_observables,
    get_problem,
    initial_guess,
    problem_ids,
    theta_of_x,
)


def test_registry():
    assert problem_ids() == ["bsde1d", "bsde2d", "bsde2w", "fbsde", "fbsde2nd", "fbsdeNd"]
    assert get_problem("fbsdeNd(4)") == HighDimFbsde(4)
    assert get_problem("fbsdeNd", 3).variables == ("x1", "x2", "x3")
    assert get_problem("fbsde2nd").name == "fbsde2nd"


@pytest.mark.parametrize(
    "problem_id, d",
    [("nope", None), ("fbsdeNd", None), ("bsde1d", 2), ("fbsdeNd(3)", 4), ("fbsdeNd", 0)],
)
def test_registry_rejects(problem_id, d):
    with pytest.raises(ConfigError):
        get_problem(problem_id, d)


def test_bsde2w_delta0():
    problem = get_problem("bsde2w")
    guess = initial_guess(problem)
    v = problem.variables
    # the sin terms cancel, the first derivatives leave -cos(x1 + x2 + 1)
    assert symbolic_equal(delta(problem, 0, 0, [guess]), -Expr.cos(v, {"x1": 1, "x2": 1}, 1))


def test_fbsde2nd_delta0():
    problem = get_problem("fbsde2nd")
    got = delta(problem, 0, 0, [initial_guess(problem)])
    assert symbolic_equal(got, -Expr.cos(problem.variables, {"x": 1}))


def test_delta_needs_history():
    problem = get_problem("bsde1d")
    with pytest.raises(HistoryError):
        delta(problem, 0, 1, [initial_guess(problem)])
    with pytest.raises(DataError):
        delta(problem, 3, 0, [initial_guess(problem)])


def test_coupled_guess_and_boundary():
    problem = get_problem("bsde2d")
    first, second = initial_guess(problem)
    assert symbolic_equal(boundary_rule(problem, 0, 1), second.substitute_t(1))
    assert not boundary_rule(problem, 3, 0)


def test_embedded_boundary_rule():
    problem = get_problem("fbsde")
    x = problem.variables
    assert symbolic_equal(boundary_rule(problem, 1), Expr.cos(x, {"x": 1}))
    assert symbolic_equal(boundary_rule(problem, 2), Expr.sin(x, {"x": 1}).scale(Fraction(-1, 2)))


def test_high_dim_forcing_gated():
    problem = get_problem("fbsdeNd", 2)
    solution = run_series(problem, 2, -1)
    history = list(solution.phis)
    assert symbolic_equal(delta(problem, 0, 0, history), problem.linear_part(history[0]) + problem.forcing())
    assert symbolic_equal(delta(problem, 0, 1, history), problem.linear_part(history[1]))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_high_dim_exact_solution_annihilates_operator(d):
    problem = get_problem("fbsdeNd", d)
    (residual,) = problem.operator_expr(problem.exact_solution_exprs())
    assert not residual


def test_high_dim_pickles():
    problem = get_problem("fbsdeNd", 3)
    problem.forcing()
    clone = pickle.loads(pickle.dumps(problem))
    assert clone == problem
    assert symbolic_equal(clone.forcing(), problem.forcing())


def test_theta_map(ctx):
    for x in (ctx.mpf(-2), ctx.zero, ctx.mpf("1.5")):
        th = theta_of_x(x, ctx)
        u = get_problem("bsde1d").exact_values(ctx.mpf("0.3"), {"theta": th}, ctx)[0]
        assert abs(u - exact_in_x(ctx.mpf("0.3"), x, ctx)) < ctx.ldexp(1, -240)


def test_exact_jets_bsde1d_match_numeric_derivative(ctx):
    problem = get_problem("bsde1d")
    t, th = ctx.mpf("0.4"), ctx.mpf("0.35")
    jets = problem.exact_jets(t, {"theta": th}, ctx)

    def u(tt, x):
        return problem.exact_values(tt, {"theta": x}, ctx)[0]

    assert abs(jets["u_t"] - ctx.diff(lambda s: u(s, th), t)) < ctx.ldexp(1, -100)
    assert abs(jets["u_th"] - ctx.diff(lambda s: u(t, s), th)) < ctx.ldexp(1, -100)
    assert abs(jets["u_thth"] - ctx.diff(lambda s: u(t, s), th, 2)) < ctx.ldexp(1, -80)


@pytest.mark.parametrize("problem_id", ["bsde1d", "bsde2d", "bsde2w", "fbsde", "fbsde2nd"])
def test_exact_jets_satisfy_operator(problem_id, ctx):
    problem = get_problem(problem_id)
    point = dict((v, ctx.mpf("0.3")) for v in problem.variables)
    t = ctx.mpf("0.6")
    values = problem.exact_jets(t, point, ctx)
    for r in problem.residual_at(values, t, point, ctx):
        assert abs(r) < ctx.ldexp(1, -200)


def test_observable_set():
    obs = ObservableSet((("y0[1]", 1), ("y0[2]", 2), ("z0[1]", 3), ("z0[2]", 4)))
    assert obs.y0 == (1, 2)
    assert obs.z0 == (3, 4)
    assert obs.get("gamma0") is None
    single = ObservableSet((("y0", 5), ("z0", 6)))
    assert single.y0 == 5
    assert single.labels == ("y0", "z0")


def test_order_zero_observables():
    problem = get_problem("bsde1d")
    obs = extract_observables(problem, [initial_guess(problem)])
    assert abs(obs.y0 - mpmath.e / (mpmath.e + 1)) < 1e-15


def test_bsde1d_order3_y0(one_figure):
    problem = get_problem("bsde1d")
    solution = run_series(problem, 3, -1)
    obs = extract_observables(problem, partial_sums(solution, 3))
    assert one_figure(obs.y0 - mpmath.mpf(1) / 2, -5e-3)


def test_exact_initial_values(ctx):
    values = exact_initial_values(get_problem("fbsdeNd", 6))
    assert values.y0 == 1
    assert abs(values.get("z0[3]") - ctx.mpf(7) / (36 * ctx.e)) < ctx.ldexp(1, -250)
    assert exact_initial_values(get_problem("bsde2d")).y0 == (0, 1)


def test_problem_without_exact_observables():
    class Bare(get_problem("bsde2w").__class__):
        has_exact_solution = False

    with pytest.raises(UnsupportedError):
        exact_initial_values(Bare())
