#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: utils_test.py

from fractions import Fraction

import mpmath
import pytest

from ham_bsde.exceptions import ConfigError, DataError
from ham_bsde.utils import (
    Bound,
    Run_ConfigParser,
    check_output_dir,
    format_sci,
    mp_context,
    parse_bound,
    parse_domain,
    parse_grid,
    parse_orders,
    parse_rational,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("-1", Fraction(-1)),
        ("-7/10", Fraction(-7, 10)),
        ("-0.95", Fraction(-19, 20)),
        ("1e-1", Fraction(1, 10)),
        (-0.95, Fraction(-19, 20)),
        (3, Fraction(3)),
    ],
)
def test_parse_rational(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("text", ["abc", "1/0", ""])
def test_parse_rational_rejects(text):
    with pytest.raises(ConfigError):
        parse_rational(text)


def test_parse_orders():
    assert parse_orders("4,8, 12") == [4, 8, 12]
    assert parse_orders("8,4,4") == [4, 8]
    assert parse_orders([3, 1]) == [1, 3]
    for bad in ("", "a,b", "-1,2"):
        with pytest.raises(ConfigError):
            parse_orders(bad)


def test_parse_grid():
    grid = parse_grid("-1.6:-0.2:0.05")
    assert grid[0] == Fraction(-8, 5)
    assert grid[-1] == Fraction(-1, 5)
    assert len(grid) == 29
    assert Fraction(-1) in grid
    assert parse_grid("-1") == [Fraction(-1)]
    assert parse_grid("-1/2,-1") == [Fraction(-1), Fraction(-1, 2)]
    for bad in ("1:0:0.1", "0:1:0", "0:1", ""):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_parse_bound():
    ctx = mp_context(128)
    assert parse_bound("-pi") == Bound(Fraction(0), Fraction(-1))
    assert parse_bound("2pi") == Bound(Fraction(0), Fraction(2))
    assert parse_bound("pi/2") == Bound(Fraction(0), Fraction(1, 2))
    assert parse_bound("1/2") == Bound(Fraction(1, 2), Fraction(0))
    assert parse_bound("-inf").value(ctx) == -ctx.inf
    assert not parse_bound("inf").is_finite()
    assert str(parse_bound("-pi")) == "-pi"
    with pytest.raises(ConfigError):
        parse_bound("pie")


def test_parse_domain():
    domain = parse_domain("x=-pi:pi, t=0:1")
    assert domain["x"] == (parse_bound("-pi"), parse_bound("pi"))
    assert domain["t"][1] == Bound(Fraction(1), Fraction(0))
    assert parse_domain({"*": "0:2"})["*"][1] == Bound(Fraction(2), Fraction(0))
    with pytest.raises(ConfigError):
        parse_domain("x-pi:pi")
    with pytest.raises(ConfigError):
        parse_domain("x=0:1:2")


@pytest.mark.parametrize(
    "value, expected",
    [
        (Fraction(-5, 1000), "-5.00000e-03"),
        (0, "0.00000e+00"),
        (None, "nan"),
        (1234567, "1.23457e+06"),
        (0.25, "2.50000e-01"),
    ],
)
def test_format_sci(value, expected):
    assert format_sci(value) == expected


def test_format_sci_mpf():
    ctx = mp_context(256)
    assert format_sci(ctx.mpf(6) / 10 ** 19) == "6.00000e-19"
    assert format_sci(ctx.mpf("1e-41")) == "1.00000e-41"
    assert format_sci(mpmath.nan) == "nan"


def test_mp_context_is_cached_and_private():
    before = mpmath.mp.prec
    ctx = mp_context(300)
    assert ctx is mp_context(300)
    assert ctx.prec == 300
    assert mpmath.mp.prec == before
    with pytest.raises(DataError):
        mp_context(63)


def test_check_output_dir(tmp_path):
    assert check_output_dir(str(tmp_path)) == (True, "")
    assert check_output_dir(str(tmp_path / "new")) == (True, "")
    target = tmp_path / "file"
    target.write_text("x")
    ok, errmsg = check_output_dir(str(target))
    assert not ok
    assert errmsg.startswith("[-] Error")


def test_sectionless_config(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("problem = bsde1d\norder = 3\nc0 = -7/10\n")
    cf = Run_ConfigParser()
    assert cf.read(str(path)) == [str(path)]
    assert cf.as_dict() == {"problem": "bsde1d", "order": "3", "c0": "-7/10"}
    assert Run_ConfigParser().as_dict() == {}
