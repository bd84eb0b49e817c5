import numpy as np
import pytest

from wml.common.errors import ArgumentError
from wml.engine.tomography import (
    CONVENTIONS,
    compare_tomography,
    perturbation_bound_check,
    tomography_lower_bound,
)


def test_lower_bound_value():
    # 4 * 0.81 / (0.01 * ln 40)
    assert tomography_lower_bound(2, 0.1) == pytest.approx(87.83, abs=0.01)


@pytest.mark.parametrize("delta", [0.0, 1.0, 1.5, -0.1])
def test_lower_bound_delta_range(delta):
    with pytest.raises(ArgumentError, match="delta"):
        tomography_lower_bound(2, delta)


def test_lower_bound_dimension():
    with pytest.raises(ArgumentError, match="dimension"):
        tomography_lower_bound(1, 0.1)


def test_comparison_table():
    table = compare_tomography([2, 4, 8, 16], eps=0.1)
    assert [row.d for row in table.rows] == [2, 4, 8, 16]
    assert {row.wml for row in table.rows} == {10}
    ratios = [row.ratio for row in table.rows]
    assert ratios == sorted(ratios)
    assert ratios[-1] > 20 * ratios[0]
    assert table.metadata == {"eps": 0.1, "t": 1.0, **CONVENTIONS}


def test_comparison_uses_eps_over_t():
    table = compare_tomography([4], eps=0.1, t=2.0)
    row = table.rows[0]
    assert row.delta == pytest.approx(0.05)
    assert row.wml == 40
    assert row.tomography == pytest.approx(tomography_lower_bound(4, 0.05))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"d_values": [], "eps": 0.1},
        {"d_values": [2], "eps": 0.0},
        {"d_values": [2], "eps": 0.1, "t": 0.0},
    ],
)
def test_comparison_rejects_bad_input(kwargs):
    with pytest.raises(ArgumentError):
        compare_tomography(**kwargs)


def test_perturbation_bound_holds():
    rows = perturbation_bound_check(np.random.default_rng(5), instances=5)
    assert len(rows) == 6
    for row in rows:
        assert row.passed, (row.delta, row.t, row.max_distance)
        assert row.bound == pytest.approx(2 * row.delta * row.t)
