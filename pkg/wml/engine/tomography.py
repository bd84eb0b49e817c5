"""
Tomography-versus-WML sample comparison and the perturbation bound check.

Conventions: every big-O / big-Omega constant is 1 and the logarithm in the
tomography bound is natural. Only the d-dependence of the two columns is
meaningful.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from wml.common.channel_utils import LindbladSpec, channel_distance, exact_channel
from wml.common.errors import ArgumentError
from wml.common.program_utils import perturb_unit_operator
from wml.common.random_utils import random_unit_operator

from .algorithms import copies_needed

CONVENTIONS = {
    "constant": 1,
    "log": "natural",
    "delta": "eps / t",
    "wml_c": 1,
}


def tomography_lower_bound(d: int, delta: float) -> float:
    """d^2 (1 - delta)^2 / (delta^2 ln(d^2 / delta))."""
    if d < 2:
        raise ArgumentError(f"dimension must be at least 2, got {d}")
    if not 0 < delta < 1:
        raise ArgumentError(f"delta = eps / t must lie in (0, 1), got {delta}")
    return d * d * (1 - delta) ** 2 / (delta**2 * math.log(d * d / delta))


@dataclass(frozen=True)
class ComparisonRow:
    d: int
    delta: float
    tomography: float
    wml: int

    @property
    def ratio(self) -> float:
        return self.tomography / self.wml


@dataclass
class ComparisonTable:
    eps: float
    t: float
    rows: list[ComparisonRow] = field(default_factory=list)

    @property
    def metadata(self) -> dict[str, Any]:
        return {"eps": self.eps, "t": self.t, **CONVENTIONS}

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.metadata,
            "rows": [
                {
                    "d": r.d,
                    "delta": r.delta,
                    "tomography": r.tomography,
                    "wml": r.wml,
                    "ratio": r.ratio,
                }
                for r in self.rows
            ],
        }


def compare_tomography(d_values: Sequence[int], eps: float, t: float = 1.0) -> ComparisonTable:
    """
    Per dimension: the tomography lower bound at delta = eps / t against the
    dimension-free WML copy count ceil(t^2 / eps) (unit-norm single jump, c = 1).
    """
    if not d_values:
        raise ArgumentError("need at least one dimension to compare")
    if not 0 < eps < 1:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    if not t > 0:
        raise ArgumentError(f"t must be positive, got {t}")
    delta = eps / t
    wml = copies_needed(1.0, t, eps).n
    table = ComparisonTable(eps=eps, t=t)
    for d in d_values:
        bound = tomography_lower_bound(d, delta)
        table.rows.append(ComparisonRow(d=int(d), delta=delta, tomography=bound, wml=wml))
    return table


@dataclass(frozen=True)
class PerturbationRow:
    delta: float
    t: float
    instances: int
    max_distance: float

    @property
    def bound(self) -> float:
        return 2.0 * self.delta * self.t

    @property
    def passed(self) -> bool:
        return self.max_distance <= self.bound


def perturbation_bound_check(
    rng: np.random.Generator,
    deltas: Sequence[float] = (0.02, 0.05, 0.1),
    times: Sequence[float] = (0.5, 1.0),
    instances: int = 20,
    d: int = 2,
) -> list[PerturbationRow]:
    """
    Distance between e^{L t} and e^{L~ t} for unit jumps at HS distance delta.

    The Choi trace distance must stay below 2 delta t for every instance.
    """
    rows = []
    for delta in deltas:
        for t in times:
            worst = 0.0
            for _ in range(instances):
                op = random_unit_operator(d, rng)
                other = perturb_unit_operator(op, delta, rng)
                exact = exact_channel(LindbladSpec(jump_ops=(op,)), t)
                approx = exact_channel(LindbladSpec(jump_ops=(other,)), t)
                worst = max(worst, channel_distance(exact, approx))
            rows.append(
                PerturbationRow(
                    delta=float(delta), t=float(t), instances=instances, max_distance=worst
                )
            )
    return rows
