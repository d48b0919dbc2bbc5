#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: quadrature.py

"""
Integration rules behind the squared-error norms: Gauss-Legendre at working
precision, scrambled Halton samples in float64, and closed-form integrals of
term-algebra expressions over finite boxes.
"""
import logging
from functools import lru_cache

from scipy.special import roots_legendre
from scipy.stats import qmc

from ham_bsde.algebra import SIN
from ham_bsde.exceptions import ConfigError
from ham_bsde.utils import mp_context

logger = logging.getLogger(__name__)

MAX_NEWTON_STEPS = 20


def _legendre_pair(ctx, n, x):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0, p1 = ctx.one, x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, n * (x * p1 - p0) / (x * x - 1)


@lru_cache(maxsize=64)
def gauss_legendre(n, precision_bits=256):
    """
    Gauss-Legendre rule on [-1, 1].
    Double precision roots seed a Newton iteration carried out at working precision.
    arguments:
    @n: int, number of nodes
    @precision_bits: int
    @return (nodes, weights), tuples of mpf
    """
    if n < 1:
        raise ConfigError("[-] Error: Gauss-Legendre needs at least one node, got %s." % n)
    ctx = mp_context(precision_bits)
    tol = ctx.ldexp(1, 8 - int(precision_bits))
    seeds, _ = roots_legendre(n)
    nodes = []
    weights = []
    for seed in seeds:
        x = ctx.mpf(float(seed))
        for _ in range(MAX_NEWTON_STEPS):
            p, dp = _legendre_pair(ctx, n, x)
            step = p / dp
            x -= step
            if abs(step) < tol:
                break
        _, dp = _legendre_pair(ctx, n, x)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    logger.debug("gauss-legendre rule: %d nodes at %d bits", n, precision_bits)
    return tuple(nodes), tuple(weights)


def scaled_rule(lo, hi, n, ctx):
    """Gauss-Legendre nodes and weights mapped onto [lo, hi]."""
    nodes, weights = gauss_legendre(n, ctx.prec)
    half = (hi - lo) / 2
    mid = (hi + lo) / 2
    return [mid + half * x for x in nodes], [half * w for w in weights]


def halton_samples(n, dim, seed=42):
    """
    Scrambled Halton points in the unit cube.
    arguments:
    @n: int, sample count
    @dim: int, dimension
    @seed: int, scrambling seed; equal seeds give identical points
    @return ndarray of shape (n, dim)
    """
    if n < 1 or dim < 1:
        raise ConfigError("[-] Error: need n >= 1 samples in dim >= 1, got %s, %s." % (n, dim))
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    return sampler.random(n)


def scale_samples(unit, lows, highs):
    return qmc.scale(unit, lows, highs)


def _power_integral(ctx, a, lo, hi):
    return (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)


def _oscillatory_integral(ctx, a, k, lo, hi):
    """int x^a e^{ikx} dx, by the finite antiderivative."""
    ik = ctx.mpc(0, k)

    def antiderivative(x):
        total = ctx.mpc(0)
        falling = 1
        for j in range(a + 1):
            total += (-1) ** j * falling * x ** (a - j) / ik ** (j + 1)
            falling *= a - j
        return ctx.expj(k * x) * total

    return antiderivative(hi) - antiderivative(lo)


def _gaussian_integral(ctx, a, c, lo, hi):
    """int x^a exp(-2c x^2) dx through the lower incomplete gamma function."""
    beta = 2 * c
    order = ctx.mpf(a + 1) / 2

    def from_zero(h):
        if h == 0:
            return ctx.zero
        value = ctx.gammainc(order, 0, beta * h * h) / (2 * beta ** order)
        if h < 0 and a % 2 == 0:
            return -value
        return value

    return from_zero(hi) - from_zero(lo)


def _axis_integral(ctx, cache, a, c, k, lo, hi):
    key = (a, c, k, lo, hi)
    try:
        return cache[key]
    except KeyError:
        pass
    if c and k:
        raise ConfigError("[-] Error: no closed form for a Gaussian times an oscillation.")
    if k:
        value = _oscillatory_integral(ctx, a, k, lo, hi)
    elif c:
        value = _gaussian_integral(ctx, a, c, lo, hi)
    else:
        value = _power_integral(ctx, a, lo, hi)
    cache[key] = value
    return value


def integrate_box(expr, box, t_interval, ctx):
    """
    Exact integral of ``expr`` over a finite box, rounded once per term to the
    precision of ``ctx``.
    arguments:
    @expr: Expr
    @box: dict, variable name -> (lo, hi) mpf
    @t_interval: (lo, hi) mpf
    @ctx: mpmath context
    @return mpf
    """
    names = expr.variables
    bounds = []
    for name in names:
        try:
            lo, hi = box[name]
        except KeyError:
            raise ConfigError("[-] Error: no interval given for %s." % name)
        if not (ctx.isfinite(lo) and ctx.isfinite(hi)):
            raise ConfigError("[-] Error: closed-form integration needs a finite interval for %s." % name)
        bounds.append((lo, hi))
    t_lo, t_hi = t_interval
    if not (ctx.isfinite(t_lo) and ctx.isfinite(t_hi)):
        raise ConfigError("[-] Error: closed-form integration needs a finite t-interval.")
    cache = {}
    total = ctx.zero
    for (t, monos, gauss, trig), c in expr.items():
        value = _power_integral(ctx, t, t_lo, t_hi) * c.numerator / c.denominator
        monos = dict(monos)
        gauss = dict(gauss)
        waves = {}
        phase = None
        if trig:
            kind, coeffs, rational, pi = trig
            waves = dict(coeffs)
            phase = ctx.mpf(rational.numerator) / rational.denominator
            phase += ctx.mpf(pi.numerator) / pi.denominator * ctx.pi
        spatial = ctx.mpc(1) if trig else ctx.one
        for i, (lo, hi) in enumerate(bounds):
            a, g, k = monos.get(i, 0), gauss.get(i, 0), waves.get(i, 0)
            if not (a or g or k):
                spatial *= hi - lo
            else:
                spatial *= _axis_integral(ctx, cache, a, g, k, lo, hi)
        if trig:
            spatial *= ctx.expj(phase)
            spatial = spatial.imag if kind == SIN else spatial.real
        total += value * spatial
    return total
