"""Acceptance gate: every certified claim, one pass/fail line each.

The suite is executed once per test session; each test reports one
criterion so the pytest output carries a visible verdict per claim.
Budgets are wall-clock seconds on a single core; a criterion that
exceeds its budget fails even if its bounds hold.
"""

import pytest

from paraconvex import CRITERIA, run_verification_suite

KEYS = [c[0] for c in CRITERIA]


@pytest.fixture(scope="module")
def suite():
    results = run_verification_suite(seed=0, echo=print)
    return {r.key: r for r in results}


def _assert_criterion(suite, key):
    result = suite[key]
    print(result.line())
    assert result.passed, f"{result.line()} detail={result.detail!r}"
    assert result.elapsed <= result.budget


def test_suite_covers_every_criterion(suite):
    assert sorted(suite) == sorted(KEYS)
    assert len(suite) == 10


def test_upgrade_constants(suite):
    _assert_criterion(suite, "upgrade-constants")


def test_threshold_root(suite):
    _assert_criterion(suite, "threshold-root")


def test_gamma_recursion(suite):
    _assert_criterion(suite, "gamma-recursion")


def test_convex_flatness(suite):
    _assert_criterion(suite, "convex-flatness")


def test_retraction_certificates(suite):
    _assert_criterion(suite, "retraction-certificates")


def test_upgrade_campaign(suite):
    _assert_criterion(suite, "upgrade-campaign")


def test_function_balls(suite):
    _assert_criterion(suite, "function-balls")


def test_family_modulus(suite):
    _assert_criterion(suite, "family-modulus")


def test_set_averaging(suite):
    _assert_criterion(suite, "set-averaging")


def test_deterministic_artifacts(suite):
    _assert_criterion(suite, "deterministic-artifacts")
