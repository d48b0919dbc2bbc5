#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: engine_test.py

from fractions import Fraction

import pytest

from ham_bsde.algebra import Expr, symbolic_equal
from ham_bsde import engine
from ham_bsde.engine import (
    DEFAULT_TERM_CAP,
    SeriesSolution,
    check_boundary,
    chi,
    deformation_step,
    extend_series,
    initial_state,
    partial_sum,
    partial_sums,
    run_series,
)
from ham_bsde.exceptions import BoundaryError, DomainError, HistoryError, ResourceError
from ham_bsde.problems import get_problem

TH = ("theta",)


def test_chi():
    assert chi(1) == 0
    assert chi(2) == 1
    assert chi(7) == 1
    with pytest.raises(DomainError):
        chi(0)


def test_order_zero_is_initial_guess():
    problem = get_problem("bsde1d")
    solution = run_series(problem, 0, -1)
    assert solution.order == 0
    assert symbolic_equal(solution.phis[0], Expr.variable(TH, "theta"))


def test_bsde1d_first_orders():
    problem = get_problem("bsde1d")
    solution = run_series(problem, 1, -1)
    th = Expr.variable(TH, "theta")
    t = Expr.t(TH)
    # phi_1 = c0 * int_1^t delta_0 with chi_1 = 0
    delta0 = (th * (1 - th) * (1 - th.scale(2))).scale(Fraction(1, 2)) - th * th * th + (
        th * th
    ).scale(Fraction(5, 2)) - th.scale(Fraction(3, 2))
    expected = -(t - 1) * delta0
    assert symbolic_equal(solution.phis[1], expected)


def test_boundary_rule_holds_each_order():
    problem = get_problem("bsde1d")
    solution = run_series(problem, 4, Fraction(-7, 10))
    for m in range(1, 5):
        assert not solution.phis[m].substitute_t(1)


def test_extend_matches_fresh_run():
    problem = get_problem("bsde2d")
    short = run_series(problem, 2, -1)
    extended = extend_series(problem, short, 4)
    assert extended == run_series(problem, 4, -1)
    assert extended.components[0][:3] == short.components[0]
    assert len(extended.timings) == 5


def test_timings_do_not_affect_equality():
    problem = get_problem("bsde1d")
    a = run_series(problem, 2, -1)
    b = SeriesSolution(a.problem_id, a.c0, a.components, tuple(t + 1 for t in a.timings))
    assert a == b


def test_partial_sums():
    problem = get_problem("bsde2d")
    solution = run_series(problem, 3, -1)
    sums = partial_sums(solution, 2)
    assert len(sums) == 2
    assert symbolic_equal(sums[1], solution.components[1][0] + solution.components[1][1] + solution.components[1][2])
    with pytest.raises(HistoryError):
        partial_sum(solution, 4)


def test_deformation_step_needs_history():
    problem = get_problem("bsde1d")
    state = initial_state(problem, -1)
    with pytest.raises(HistoryError):
        deformation_step(problem, state, 2)
    with pytest.raises(DomainError):
        deformation_step(problem, state, 0)


def test_term_cap():
    problem = get_problem("bsde1d")
    with pytest.raises(ResourceError) as info:
        run_series(problem, 4, -1, term_cap=3)
    assert info.value.order >= 1
    assert info.value.terms > 3


def test_on_order_callback():
    problem = get_problem("bsde2w")
    seen = []
    run_series(problem, 3, -1, on_order=lambda m, state: seen.append((m, state.order)))
    assert seen == [(1, 1), (2, 2), (3, 3)]


def test_c0_is_exact():
    solution = run_series(get_problem("bsde1d"), 1, "-0.95")
    assert solution.c0 == Fraction(-19, 20)


def test_problem_cap_is_the_default():
    class Tight(get_problem("bsde1d").__class__):
        term_cap = 3

    with pytest.raises(ResourceError) as info:
        run_series(Tight(), 4, -1)
    assert info.value.terms > 3
    assert get_problem("bsde2w").term_cap == DEFAULT_TERM_CAP


def test_high_dim_cap_grows_with_d():
    assert get_problem("fbsdeNd", 4).term_cap == DEFAULT_TERM_CAP
    assert get_problem("fbsdeNd", 6).term_cap == DEFAULT_TERM_CAP
    # phi_7 of d=8 holds 286296 terms, phi_2 of d=12 holds 441888
    assert get_problem("fbsdeNd", 8).term_cap > 2 * 286296
    assert get_problem("fbsdeNd", 12).term_cap > 20 * 441888


def test_boundary_check_rejects_a_wrong_phi():
    problem = get_problem("fbsde")
    solution = run_series(problem, 2, -1)
    target = problem.boundary_rule(2)
    check_boundary(problem, solution.phis[2], target, 2)
    shifted = solution.phis[2] + Expr.t(problem.variables).scale(Fraction(1, 10 ** 6))
    with pytest.raises(BoundaryError) as info:
        check_boundary(problem, shifted, target, 2)
    assert "phi_2 of fbsde" in str(info.value)


def test_boundary_check_fires_on_a_broken_restriction(monkeypatch):
    problem = get_problem("bsde1d")
    # restricting at t = 0 leaves phi_m(T) off its boundary rule
    monkeypatch.setattr(engine, "substitute_t", lambda e, value: e.substitute_t(0))
    with pytest.raises(BoundaryError):
        run_series(problem, 2, -1)
