#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: client_test.py

import logging
from fractions import Fraction

import pytest

from ham_bsde.client import Ham_client, RunConfig, get_run_conf
from ham_bsde.diagnostics import OPERATOR_RESIDUAL, QUASI_RANDOM
from ham_bsde.exceptions import ConfigError


def test_from_mapping():
    config = RunConfig.from_mapping(
        {"problem": "fbsdeNd", "d": "4", "c0-grid": "-1,-1/2", "orders": "4,2", "precision-bits": 128}
    )
    assert config.d == 4
    assert config.orders == (2, 4)
    assert config.c0_grid == (Fraction(-1), Fraction(-1, 2))
    assert config.precision_bits == 128
    assert config.as_dict()["c0_grid"] == ["-1", "-1/2"]


@pytest.mark.parametrize(
    "mapping",
    [
        {},
        {"problem": "bsde1d", "colour": "red"},
        {"problem": "bsde1d", "quadrature": "simpson"},
        {"problem": "bsde1d", "format": "xml"},
        {"problem": "bsde1d", "precision_bits": 32},
        {"problem": "fbsdeNd"},
        {"problem": "bsde1d", "residual": "maybe"},
    ],
)
def test_from_mapping_rejects(mapping):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(mapping)


def test_norm_spec_overrides():
    config = RunConfig.from_mapping({"problem": "bsde2w", "quadrature": "qmc", "samples": 512, "seed": 7})
    spec = config.norm_spec(config.problem_spec(), OPERATOR_RESIDUAL)
    assert spec.quadrature == QUASI_RANDOM
    assert spec.samples == 512
    assert spec.seed == 7


def test_get_run_conf(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("problem = bsde2d\norders = 4,8\n")
    assert RunConfig.from_mapping(get_run_conf(str(path))).orders == (4, 8)
    bad = tmp_path / "run.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        get_run_conf(str(bad))
    with pytest.raises(ConfigError):
        get_run_conf(str(tmp_path / "missing.conf"))


@pytest.mark.parametrize("mapping, flag", [({"debug": "true"}, False), ({}, True)])
def test_debug_lowers_package_log_level(tmp_path, mapping, flag):
    logger = logging.getLogger("ham_bsde")
    level = logger.level
    try:
        logger.setLevel(logging.WARNING)
        config = RunConfig.from_mapping(dict(mapping, problem="bsde1d", out=str(tmp_path)))
        client = Ham_client(config, debug=flag)
        assert client.debug
        assert logger.level == logging.DEBUG
    finally:
        logger.setLevel(level)


def test_no_debug_keeps_log_level(tmp_path):
    logger = logging.getLogger("ham_bsde")
    level = logger.level
    try:
        logger.setLevel(logging.WARNING)
        Ham_client(RunConfig.from_mapping({"problem": "bsde1d", "out": str(tmp_path)}))
        assert logger.level == logging.WARNING
    finally:
        logger.setLevel(level)
