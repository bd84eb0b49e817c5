"""
Convergence sweeps over step counts, slope fits and Monte-Carlo consistency.

Sweep points run in a thread pool keyed by (ordering, n); results are sorted
before assembly so output does not depend on completion order.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.stats

from wml.common.channel_utils import DensityMatrix, LindbladSpec, choi_trace_distance, exact_channel
from wml.common.errors import ArgumentError, ConfigError
from wml.common.program_utils import omega_branches, sample_omega_many

from .algorithms import alg1_branch_channels, alg1_run, run_algorithm, system_dim, target_spec_of
from .config import ExperimentConfig
from .specs import RunConfig

logger = logging.getLogger(__name__)

MIN_SWEEP_POINTS = 4


@dataclass(frozen=True)
class SweepRow:
    """One measured point of error versus step count."""

    n: int
    ordering: str
    choi_proxy_error: float
    wall_ms: float
    consumed: dict[str, int] = field(default_factory=dict)

    @property
    def total_consumed(self) -> int:
        return sum(self.consumed.values())


@dataclass
class SweepResult:
    algorithm: int
    t: float
    mode: str
    rows: list[SweepRow] = field(default_factory=list)
    slopes: dict[str, float | None] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "t": self.t,
            "mode": self.mode,
            "slopes": self.slopes,
            "rows": [
                {
                    "n": r.n,
                    "ordering": r.ordering,
                    "choi_proxy_error": r.choi_proxy_error,
                    "wall_ms": r.wall_ms,
                    "consumed": r.consumed,
                }
                for r in self.rows
            ],
            **self.metadata,
        }


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """
    Least-squares slope of log(y) against log(x).

    Returns None with fewer than two points or any nonpositive value.
    """
    if len(xs) != len(ys):
        raise ArgumentError("slope fit needs equally many x and y values")
    if len(xs) < 2 or any(v <= 0 for v in list(xs) + list(ys)):
        return None
    slope, _ = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope)


def _mean_state_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    eigs = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(eigs)))


class SweepRunner:
    """
    Runs one algorithm over the configured step counts.

    Expectation mode measures the Choi trace distance to the exact channel.
    Monte-Carlo mode (Algorithm 1) averages 'trajectories' sampled runs and
    measures the state trace distance to the exact output.
    """

    def __init__(self, config: ExperimentConfig, threads: int | None = None):
        self.config = config
        self.threads = threads or int(config.experiment["threads"])
        self.inputs = config.build_spec()
        self.rho = config.build_rho(system_dim(self.inputs))

    def _orderings(self) -> list[str]:
        if self.config.algorithm == 2:
            return list(self.config.experiment["orderings"])
        return [""]

    def _run_kwargs(self) -> dict[str, Any]:
        if self.config.algorithm in (3, 4):
            return {"prepare": self.config.experiment["prepare"]}
        return {}

    def _point(self, n: int, ordering: str, oracle: Any) -> SweepRow:
        overrides = {"ordering": ordering} if ordering else {}
        cfg = self.config.run_config(n, **overrides)
        start = time.perf_counter()
        if cfg.monte_carlo:
            error, consumed = self._monte_carlo_point(cfg, oracle)
        else:
            report = run_algorithm(
                self.config.algorithm,
                self.rho,
                self.inputs,
                cfg,
                with_oracle=False,
                **self._run_kwargs(),
            )
            assert report.channel is not None
            error = choi_trace_distance(report.channel.choi(), oracle)
            consumed = report.consumed
        wall_ms = (time.perf_counter() - start) * 1000.0
        logger.debug("sweep point n=%d ordering=%s error=%.3e", n, ordering or "-", error)
        return SweepRow(
            n=n, ordering=ordering, choi_proxy_error=error, wall_ms=wall_ms, consumed=consumed
        )

    def _monte_carlo_point(
        self, cfg: RunConfig, oracle_state: np.ndarray
    ) -> tuple[float, dict[str, int]]:
        if self.config.algorithm != 1 or not isinstance(self.inputs, LindbladSpec):
            raise ConfigError("monte_carlo mode is only available for algorithm 1")
        trajectories = int(self.config.experiment["trajectories"])
        base_seed = cfg.seed or 0
        total = np.zeros_like(self.rho.mat)
        consumed: dict[str, int] = {}
        for i in range(trajectories):
            run_cfg = dataclasses.replace(cfg, seed=base_seed + i)
            report = alg1_run(self.rho, self.inputs, run_cfg, with_oracle=False)
            assert report.final is not None
            total += report.final.mat
            for label, count in report.consumed.items():
                consumed[label] = consumed.get(label, 0) + count
        return _mean_state_distance(total / trajectories, oracle_state), consumed

    def run(self) -> SweepResult:
        """
        Execute every (ordering, n) point and fit one slope per ordering.

        Raises:
            ConfigError: fewer than MIN_SWEEP_POINTS step counts
        """
        exp = self.config.experiment
        n_values = list(exp["n_values"])
        if len(n_values) < MIN_SWEEP_POINTS:
            raise ConfigError(
                f"a sweep needs at least {MIN_SWEEP_POINTS} n_values, got {len(n_values)}"
            )

        target = target_spec_of(self.inputs)
        exact = exact_channel(target, float(exp["t"]), exp["tol"])
        oracle: Any = exact.apply(self.rho.mat) if exp["mode"] == "monte_carlo" else exact.choi()

        tasks = [(ordering, n) for ordering in self._orderings() for n in n_values]
        rows: list[SweepRow] = []
        if self.threads > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.threads) as ex:
                futures = [ex.submit(self._point, n, ordering, oracle) for ordering, n in tasks]
                for f in concurrent.futures.as_completed(futures):
                    rows.append(f.result())
        else:
            rows = [self._point(n, ordering, oracle) for ordering, n in tasks]

        rows.sort(key=lambda r: (r.ordering, r.n))
        result = SweepResult(
            algorithm=self.config.algorithm, t=float(exp["t"]), mode=exp["mode"], rows=rows
        )
        for ordering in self._orderings():
            subset = [r for r in rows if r.ordering == ordering]
            result.slopes[ordering or "all"] = fit_slope(
                [r.n for r in subset], [r.choi_proxy_error for r in subset]
            )
        result.metadata = {
            "error_kind": (
                "state_trace_distance" if exp["mode"] == "monte_carlo" else "choi_trace_distance"
            ),
            "seed": exp["seed"],
            "tol": exp["tol"],
            "channel_mode": exp["channel_mode"],
        }
        return result


@dataclass
class ConsistencyResult:
    """Trajectory-mean distance to the expectation output for each trajectory count."""

    counts: list[int]
    distances: list[float]
    slope: float | None

    def to_dict(self) -> dict[str, Any]:
        return {"counts": self.counts, "distances": self.distances, "slope": self.slope}


def monte_carlo_consistency(
    rho: DensityMatrix,
    spec: LindbladSpec,
    cfg: RunConfig,
    counts: Sequence[int] = (25, 100, 400, 1600),
    repeats: int = 5,
    seed: int = 0,
) -> ConsistencyResult:
    """
    Distance between the mean of T sampled runs and the expectation output.

    Each distance is averaged over ``repeats`` independent blocks of T runs;
    the fitted slope in T should sit near -1/2.
    """
    delta = spec.c * cfg.t / cfg.n
    channels = {s: ch for s, _, ch in alg1_branch_channels(spec, delta, cfg)}
    exact_cfg = RunConfig(t=cfg.t, n=cfg.n, tol=cfg.tol)
    expected = alg1_run(rho, spec, exact_cfg, with_oracle=False).final
    assert expected is not None
    rng = np.random.default_rng(seed)

    def trajectory() -> np.ndarray:
        state = rho.mat
        for sample in sample_omega_many(spec, rng, cfg.n):
            state = channels[sample].apply(state)
        return state

    distances = []
    for count in counts:
        block = [
            _mean_state_distance(sum(trajectory() for _ in range(count)) / count, expected.mat)
            for _ in range(repeats)
        ]
        distances.append(float(np.mean(block)))
    return ConsistencyResult(list(counts), distances, fit_slope(list(counts), distances))


@dataclass
class FrequencyCheck:
    labels: list[str]
    observed: list[int]
    expected: list[float]
    p_value: float
    max_sigma: float

    def to_dict(self) -> dict[str, Any]:
        return self.__dict__.copy()


def branch_frequency_check(
    spec: LindbladSpec, draws: int = 100_000, seed: int = 0
) -> FrequencyCheck:
    """Chi-square test of sampled omega branches against |c_j| / c and ||L_k||^2 / c."""
    branches = omega_branches(spec)
    rng = np.random.default_rng(seed)
    samples = sample_omega_many(spec, rng, draws)
    index = {s: i for i, (s, _) in enumerate(branches)}
    observed = np.zeros(len(branches), dtype=int)
    for s in samples:
        observed[index[s]] += 1
    probs = np.array([p for _, p in branches])
    expected = probs * draws
    if len(branches) > 1:
        p_value = float(scipy.stats.chisquare(observed, expected).pvalue)
    else:
        p_value = 1.0
    sigma = np.sqrt(draws * probs * (1 - probs))
    z = np.where(sigma > 0, np.abs(observed - expected) / np.where(sigma > 0, sigma, 1.0), 0.0)
    return FrequencyCheck(
        labels=[s.label for s, _ in branches],
        observed=[int(x) for x in observed],
        expected=[float(x) for x in expected],
        p_value=p_value,
        max_sigma=float(np.max(z)) if z.size else 0.0,
    )


def trotter_error_ratio(result: SweepResult) -> dict[int, float]:
    """Palindromic over forward error at every n present for both orderings."""
    by_key = {(r.ordering, r.n): r.choi_proxy_error for r in result.rows}
    ratios: dict[int, float] = {}
    for (ordering, n), err in sorted(by_key.items()):
        if ordering == "palindromic" and ("forward", n) in by_key and by_key[("forward", n)] > 0:
            ratios[n] = err / by_key[("forward", n)]
    return ratios


def doubling_ratio(config: ExperimentConfig, n: int) -> float:
    """Error at 2t over error at t for a fixed n (expect about 4)."""
    base_t = float(config.experiment["t"])
    if not base_t > 0 or not math.isfinite(base_t):
        raise ConfigError("doubling check needs t > 0")
    errors = []
    try:
        for t in (base_t, 2 * base_t):
            config.experiment["t"] = t
            runner = SweepRunner(config, threads=1)
            oracle = exact_channel(target_spec_of(runner.inputs), t).choi()
            errors.append(runner._point(n, runner._orderings()[0], oracle).choi_proxy_error)
    finally:
        config.experiment["t"] = base_t
    return errors[1] / errors[0]
