#!/usr/bin/env python
# -*- coding = utf-8 -*-
# filename: utils.py
import os
import re
from collections import namedtuple
from configparser import RawConfigParser, NoSectionError
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from io import StringIO

import mpmath

from ham_bsde.exceptions import ConfigError, DataError

basestring = (str, bytes)

MIN_PRECISION_BITS = 64


@lru_cache(maxsize=None)
def mp_context(precision_bits=256):
    """Private mpmath context at a fixed binary precision.

    Contexts are cached per precision so values created by repeated calls
    share one context and never touch the global ``mpmath.mp``.
    """
    if int(precision_bits) < MIN_PRECISION_BITS:
        raise DataError(
            "[-] Error: precision_bits must be at least %d, got %s."
            % (MIN_PRECISION_BITS, precision_bits)
        )
    ctx = mpmath.MPContext()
    ctx.prec = int(precision_bits)
    return ctx


def to_mpf(ctx, value):
    """Convert int, Fraction, str, float or mpf to ``ctx.mpf`` without detours."""
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if isinstance(value, int):
        return ctx.mpf(value)
    return ctx.mpf(value)


def parse_rational(text):
    """
    Parse an exact rational from a command line or config string.
    arguments:
    @text: string, "-1", "-7/10", "-0.95", "1e-1" or an int/Fraction
    @return Fraction
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if isinstance(text, float):
        # floats from JSON configs go through their shortest repr
        text = repr(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError("[-] Error: %r is not a rational number." % (text,))


def parse_orders(text):
    """Parse "4,8,12" (or a list) into a strictly increasing list of orders."""
    if isinstance(text, basestring):
        items = [s for s in str(text).split(",") if s.strip()]
    else:
        items = list(text or [])
    try:
        orders = sorted(set(int(str(s).strip()) for s in items))
    except ValueError:
        raise ConfigError("[-] Error: orders %r must be integers." % (text,))
    if not orders:
        raise ConfigError("[-] Error: orders list is empty.")
    if orders[0] < 0:
        raise ConfigError("[-] Error: orders must be non-negative.")
    return orders


def parse_grid(text):
    """
    Parse a c0 grid.
    arguments:
    @text: string, "lo:hi:step" (inclusive) or "a,b,c", or a list
    @return list of Fraction, sorted ascending
    """
    if not isinstance(text, basestring):
        grid = [parse_rational(v) for v in (text or [])]
    elif ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("[-] Error: grid %r must look like lo:hi:step." % text)
        lo, hi, step = [parse_rational(p) for p in parts]
        if step <= 0 or hi < lo:
            raise ConfigError("[-] Error: grid %r is empty or has a bad step." % text)
        grid = []
        value = lo
        while value <= hi:
            grid.append(value)
            value += step
    else:
        grid = [parse_rational(p) for p in text.split(",") if p.strip()]
    if not grid:
        raise ConfigError("[-] Error: c0 grid is empty.")
    return sorted(set(grid))


class Bound(namedtuple("Bound", "rational pi")):
    """Interval end point ``rational + pi * π``."""

    __slots__ = ()

    def value(self, ctx):
        if self.rational is None:
            return ctx.inf if self.pi > 0 else -ctx.inf
        return to_mpf(ctx, self.rational) + to_mpf(ctx, self.pi) * ctx.pi

    def is_rational(self):
        return self.rational is not None and self.pi == 0

    def is_finite(self):
        return self.rational is not None

    def __str__(self):
        if self.rational is None:
            return "inf" if self.pi > 0 else "-inf"
        if self.pi == 0:
            return str(self.rational)
        if self.rational == 0:
            return "%spi" % ("" if self.pi == 1 else "-" if self.pi == -1 else self.pi)
        return "%s+%spi" % (self.rational, self.pi)


_PI_RE = re.compile(r"^([+-]?)([0-9/.]*)\*?pi(?:/([0-9]+))?$")


def parse_bound(text):
    """Parse "-pi", "2pi", "pi/2", "1/2", "0" or "-inf" into a Bound."""
    s = str(text).strip().replace(" ", "")
    if s in ("inf", "+inf", "-inf"):
        return Bound(None, -1 if s == "-inf" else 1)
    mo = _PI_RE.match(s)
    if mo:
        sign, factor, div = mo.groups()
        coeff = parse_rational(factor) if factor else Fraction(1)
        if div:
            coeff /= int(div)
        if sign == "-":
            coeff = -coeff
        return Bound(Fraction(0), coeff)
    if "pi" in s or "inf" in s:
        raise ConfigError("[-] Error: bound %r is not rational + rational*pi." % text)
    return Bound(parse_rational(s), Fraction(0))


def parse_domain(text):
    """
    Parse "x=-pi:pi,t=0:1" or "*=0:2" into {name: (Bound, Bound)}.
    The name "*" stands for every spatial variable.
    """
    if isinstance(text, dict):
        items = text.items()
    else:
        items = []
        for part in str(text).split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise ConfigError("[-] Error: domain entry %r must be VAR=LO:HI." % part)
            name, rng = part.split("=", 1)
            items.append((name.strip(), rng))
    domain = {}
    for name, rng in items:
        if isinstance(rng, basestring):
            lo_hi = rng.split(":")
            if len(lo_hi) != 2:
                raise ConfigError("[-] Error: interval %r must be LO:HI." % rng)
        else:
            lo_hi = list(rng)
        lo, hi = parse_bound(lo_hi[0]), parse_bound(lo_hi[1])
        domain[name] = (lo, hi)
    return domain


def format_sci(value):
    """Scientific notation with 6 significant digits, e.g. '6.12345e-19'."""
    if value is None:
        return "nan"
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    elif isinstance(value, (int, float)):
        dec = Decimal(repr(value)) if isinstance(value, float) else Decimal(value)
    else:
        if mpmath.isnan(value):
            return "nan"
        dec = Decimal(mpmath.nstr(value, 30))
    if dec == 0:
        return "0.00000e+00"
    text = "{0:.5e}".format(dec)
    mantissa, exponent = text.split("e")
    return "%se%s%02d" % (mantissa, "-" if int(exponent) < 0 else "+", abs(int(exponent)))


def check_output_dir(path):
    ret = True
    errmsg = ""
    if os.path.exists(path) and not os.path.isdir(path):
        ret = False
        errmsg = "[-] Error: %s exists and is not a directory." % path
    elif os.path.isdir(path) and not os.access(path, os.W_OK):
        ret = False
        errmsg = "[-] Error: %s is not writable." % path
    return ret, errmsg


class Run_ConfigParser(RawConfigParser):
    """
    Extends RawConfigParser to allow run files without sections.

    This is done by wrapping read files and prepending them with a placeholder
    section, which defaults to '__config__'
    """

    def __init__(self, default_section=None, *args, **kwargs):
        RawConfigParser.__init__(self, *args, **kwargs)
        self._default_section = default_section or "__config__"

    def get_default_section(self):
        return self._default_section

    def read(self, filenames, encoding=None):
        if isinstance(filenames, basestring):
            filenames = [filenames]
        read_ok = []
        for filename in filenames:
            try:
                with open(filename, encoding=encoding) as fp:
                    self.read_file(fp)
            except IOError:
                continue
            else:
                read_ok.append(filename)
        return read_ok

    def read_file(self, f, source=None):
        stream = StringIO()
        stream.write("[" + self._default_section + "]\n")
        stream.write(f.read())
        stream.seek(0, 0)
        if source is None:
            source = getattr(f, "name", "<run config>")
        RawConfigParser.read_file(self, stream, source)

    def as_dict(self):
        try:
            return dict(self.items(self._default_section))
        except NoSectionError:
            return {}
