#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: verify_test.py

import shutil

import pytest

from ham_bsde.exceptions import ConfigError
from ham_bsde.verify import CHECKS, FIXTURES_DIR, available_checks, run_checks


def test_registry_lists_fixtures_and_checks():
    names = list(available_checks())
    for problem_id in ("bsde1d", "bsde2d", "bsde2w", "fbsde", "fbsde2nd"):
        assert "fixtures-%s" % problem_id in names
    assert set(CHECKS) <= set(names)
    assert "appendix-identity" in names


@pytest.mark.parametrize(
    "name",
    [
        "appendix-identity",
        "boundary-exactness",
        "forcing-gating",
        "z-symmetry",
        "feynman-kac",
        "algebra-homomorphism",
        "serialization-roundtrip",
        "exact-annihilation",
    ],
)
def test_check_passes(name):
    results = run_checks(name)
    assert list(results) == [name]
    assert results[name]["passed"], results[name]["message"]


def test_fixture_checks_pass():
    names = [n for n in available_checks() if n.startswith("fixtures-")]
    results = run_checks(names)
    failed = dict((n, r["message"]) for n, r in results.items() if not r["passed"])
    assert not failed


def test_corrupted_fixture_fails(tmp_path):
    for name in ("bsde1d.json", "fbsde.json"):
        shutil.copy("%s/%s" % (FIXTURES_DIR, name), str(tmp_path / name))
    text = (tmp_path / "fbsde.json").read_text()
    (tmp_path / "fbsde.json").write_text(text[: len(text) // 2])
    results = run_checks(fixtures_dir=str(tmp_path), only=["fixtures-bsde1d", "fixtures-fbsde"])
    assert results["fixtures-bsde1d"]["passed"]
    assert not results["fixtures-fbsde"]["passed"]
    assert "fbsde.json" in results["fixtures-fbsde"]["message"]


def test_wrong_fixture_value_fails(tmp_path):
    text = open("%s/bsde2w.json" % FIXTURES_DIR).read()
    # flips the sign of the first coefficient that reads "-1"
    assert '"-1"' in text.split('"partial_sums"')[1]
    head, tail = text.split('"partial_sums"')
    (tmp_path / "bsde2w.json").write_text(head + '"partial_sums"' + tail.replace('"-1"', '"1"', 1))
    results = run_checks("fixtures-bsde2w", fixtures_dir=str(tmp_path))
    assert not results["fixtures-bsde2w"]["passed"]
    assert "order" in results["fixtures-bsde2w"]["message"]


def test_unknown_check():
    with pytest.raises(ConfigError):
        run_checks("no-such-check")
