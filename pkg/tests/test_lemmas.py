import numpy as np
import pytest

from wml.common.errors import ArgumentError
from wml.common.tensor_utils import configure
from wml.engine.lemmas import (
    SUITES,
    cyclic_shift_lemma,
    encoding_distance,
    first_order_single_jump,
    verify_lemmas,
)


def test_all_suites_pass():
    report = verify_lemmas(seed=0, trials=5)
    assert report.passed
    assert [s.name for s in report.suites] == list(SUITES)
    assert all(s.max_residual <= s.tol for s in report.suites)


def test_report_is_deterministic():
    first = verify_lemmas(seed=7, trials=3).to_dict()
    second = verify_lemmas(seed=7, trials=3).to_dict()
    assert first == second


def test_corrupted_interaction_is_caught():
    report = verify_lemmas(seed=0, trials=3, corrupt_m=True)
    assert not report.passed
    failed = [s.name for s in report.suites if not s.passed]
    assert failed == ["cyclic_shift_lemma_corrupted"]


def test_cyclic_shift_single_case():
    result = cyclic_shift_lemma(np.random.default_rng(1), 4, cases=((2, 2),))
    assert result.trials == 4
    assert result.passed
    assert result.to_dict()["cases"] == [[2, 2]]


@pytest.mark.parametrize("suite", [first_order_single_jump, encoding_distance])
def test_suite_residuals_recorded(suite):
    result = suite(np.random.default_rng(2), 3)
    assert result.failures == 0
    assert 0.0 <= result.max_residual <= result.tol


@pytest.mark.parametrize("trials", [0, -1])
def test_trials_must_be_positive(trials):
    with pytest.raises(ArgumentError, match="trials"):
        verify_lemmas(seed=0, trials=trials)


def test_configured_tolerance_applies_to_suites():
    configure(invariant_tol=1e-6)
    result = encoding_distance(np.random.default_rng(3), 2)
    assert result.tol == 1e-6
    assert result.to_dict()["tol"] == 1e-6
