#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: engine.py

"""
The homotopy recursion.

Order m of the deformation is solved by

    phi_m = chi_m * phi_{m-1} + c0 * int_anchor^t delta_{m-1} dz + correction

where the t-free correction makes phi_m meet the problem's boundary rule at
t = T exactly. Every phi_m is then checked against the rule numerically, at
points off any grid, through the evaluator rather than substitute_t.
"""
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction

from ham_bsde.algebra import compile_evaluator, integrate_t, linear_combine, substitute_t
from ham_bsde.exceptions import BoundaryError, DomainError, HistoryError, ResourceError
from ham_bsde.utils import mp_context, parse_rational

logger = logging.getLogger(__name__)

DEFAULT_TERM_CAP = 200000
BOUNDARY_CHECK_BITS = 192
BOUNDARY_TOLERANCE_BITS = 64


def initial_state(problem, c0):
    """SeriesSolution holding only the initial guess."""
    return SeriesSolution(
        problem.name, parse_rational(c0), tuple((g,) for g in problem.initial_guess()), (0.0,)
    )


def chi(m):
    """Unit step of the order-m equation: 0 for m <= 1, else 1."""
    if m < 1:
        raise DomainError("[-] Error: chi is defined for m >= 1, got %s." % m)
    return Fraction(0) if m <= 1 else Fraction(1)


@dataclass(frozen=True)
class SeriesSolution(object):
    """phi_0..phi_M of every component plus the c0 they were computed with.

    ``timings[m]`` is the cumulative wall time (monotonic clock) spent in the
    recursion up to order m; it takes no part in equality.
    """

    problem_id: str
    c0: Fraction
    components: tuple
    timings: tuple = field(default=(), compare=False)

    @property
    def phis(self):
        return self.components[0]

    @property
    def order(self):
        return len(self.components[0]) - 1

    def component(self, index):
        return self.components[index]


def partial_sum(s, M, component=0):
    """phi~_M = sum_{m<=M} phi_m of one component."""
    if M < 0 or M > s.order:
        raise HistoryError("[-] Error: order %d requested, solution holds 0..%d." % (M, s.order))
    return linear_combine([(1, phi) for phi in s.components[component][: M + 1]])


def partial_sums(s, M):
    return tuple(partial_sum(s, M, c) for c in range(len(s.components)))


def deformation_step(problem, state, m, component=0, workspace=None):
    """
    Solve the m-th order deformation equation of one component.
    arguments:
    @problem: ProblemSpec
    @state: SeriesSolution holding phi_0..phi_{m-1}
    @m: int >= 1
    @component: int, component index for coupled problems
    @workspace: optional live workspace of ``problem`` sharing memoized products
    @return Expr, phi_m
    """
    if m < 1:
        raise DomainError("[-] Error: deformation order must be >= 1, got %s." % m)
    history = state.components[component]
    if len(history) < m:
        raise HistoryError("[-] Error: order %d needs phi_0..phi_%d." % (m, m - 1))
    if workspace is None:
        workspace = problem.workspace([list(h[:m]) for h in state.components])
    delta = workspace.delta(component, m - 1)
    candidate = linear_combine(
        [(chi(m), history[m - 1]), (state.c0, integrate_t(delta, problem.anchor))]
    )
    target = problem.boundary_rule(m, component)
    correction = target - substitute_t(candidate, problem.terminal_time)
    phi = candidate + correction
    check_boundary(problem, phi, target, m)
    return phi


def _check_points(variables, ctx):
    return [
        dict((v, ctx.mpf(2 * i + 1) / (2 * i + 7)) for i, v in enumerate(variables)),
        dict((v, -ctx.mpf(i + 2) / (3 * i + 5)) for i, v in enumerate(variables)),
    ]


def _describe(point, ctx):
    return ",".join("%s=%s" % (k, ctx.nstr(v, 6)) for k, v in sorted(point.items()))


def check_boundary(problem, phi, target, m):
    """
    Compare phi(T, x) with the boundary rule at fixed sample points.
    arguments:
    @problem: ProblemSpec
    @phi: Expr, phi_m
    @target: t-free Expr, the boundary rule of order m
    @m: int, order (for the message)
    """
    ctx = mp_context(BOUNDARY_CHECK_BITS)
    at_terminal = compile_evaluator(phi, ctx)
    expected = compile_evaluator(target, ctx)
    tol = ctx.ldexp(1, -BOUNDARY_TOLERANCE_BITS)
    for point in _check_points(phi.variables, ctx):
        got = at_terminal(point, problem.terminal_time)
        want = expected(point, 0)
        if abs(got - want) > tol * max(ctx.one, abs(want)):
            raise BoundaryError(
                "[-] Error: phi_%d of %s misses its boundary rule: %s != %s at %s."
                % (m, problem.name, ctx.nstr(got, 15), ctx.nstr(want, 15), _describe(point, ctx))
            )


def run_series(problem, M, c0, term_cap=None, on_order=None):
    """
    Run the recursion from the initial guess through order M.
    arguments:
    @problem: ProblemSpec
    @M: int >= 0
    @c0: rational convergence-control parameter
    @term_cap: int, largest admissible term count of one phi_m; None takes
               the problem's own cap (DEFAULT_TERM_CAP unless it grows with d)
    @on_order: optional callback(m, SeriesSolution) after each order
    @return SeriesSolution
    """
    return extend_series(problem, initial_state(problem, c0), M, term_cap=term_cap, on_order=on_order)


def extend_series(problem, solution, M, term_cap=None, on_order=None):
    """Continue ``solution`` up to order M without recomputing earlier orders."""
    if M < 0:
        raise DomainError("[-] Error: order must be >= 0, got %s." % M)
    if term_cap is None:
        term_cap = getattr(problem, "term_cap", DEFAULT_TERM_CAP)
    histories = [list(h) for h in solution.components]
    timings = list(solution.timings) or [0.0] * len(histories[0])
    workspace = problem.workspace(histories)
    state = solution
    clock = time.monotonic()
    offset = timings[-1]
    for m in range(solution.order + 1, M + 1):
        new = [
            deformation_step(problem, state, m, component, workspace)
            for component in range(problem.n_components)
        ]
        for component, phi in enumerate(new):
            if len(phi) > term_cap:
                raise ResourceError(
                    "[-] Error: phi_%d of %s has %d terms, cap is %d."
                    % (m, problem.name, len(phi), term_cap),
                    order=m,
                    terms=len(phi),
                )
            histories[component].append(phi)
        timings.append(offset + time.monotonic() - clock)
        state = SeriesSolution(
            solution.problem_id,
            solution.c0,
            tuple(tuple(h) for h in histories),
            tuple(timings),
        )
        logger.debug(
            "%s order %d: %s terms, %.3fs",
            problem.name,
            m,
            "/".join(str(len(phi)) for phi in new),
            timings[-1],
        )
        if on_order is not None:
            on_order(m, state)
    if state.order > solution.order:
        logger.info(
            "%s: reached order %d with c0=%s in %.3fs", problem.name, state.order, state.c0, timings[-1]
        )
    return state
