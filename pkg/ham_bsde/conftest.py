#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: conftest.py

import pytest

from ham_bsde.utils import mp_context


def _one_figure(value):
    """'-5e-03' style: sign, one significant figure and the decimal exponent."""
    return "%.0e" % float(value)


@pytest.fixture
def one_figure():
    """Compare against a printed table entry: mantissa to 1 figure, exponent exact."""

    def matches(value, expected):
        return _one_figure(value) == _one_figure(expected)

    return matches


@pytest.fixture
def ctx():
    return mp_context(256)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
