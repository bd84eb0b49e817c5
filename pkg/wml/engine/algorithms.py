"""
The four wave-matrix Lindbladization algorithms and their resource accounting.

- Algorithm 1: sample one term of omega per step (Hamiltonian or jump)
- Algorithm 2: Trotter-like sweep over single-term channels
- Algorithm 3: one jump that is a positive linear combination of encoded operators
- Algorithm 4: one jump that is a polynomial in encoded operators

In expectation mode every step is a fixed reduced channel on the system, so a
run is that channel raised to the n-th power. Monte-Carlo mode (Algorithm 1)
samples a branch per step and applies only the sampled branch channel.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from wml.common.channel_utils import (
    APPLY_TOL,
    DensityMatrix,
    LindbladSpec,
    SuperOperator,
    apply_superop,
    channel_distance,
    exact_channel,
    superop_from_action,
)
from wml.common.errors import ArgumentError, ModeError, SpecError
from wml.common.program_utils import (
    BRANCH_JUMP,
    OmegaSample,
    encode_operator,
    omega_branches,
    sample_omega_many,
)
from wml.common.tensor_utils import Operator, invariant_tol

from .generators import (
    build_M,
    build_M_poly,
    hamiltonian_step_channel,
    jump_step_channel,
    to_canonical,
)
from .lcu import lcu_prepare_from_spec, lcu_prepare_poly
from .specs import LinearSpec, PolySpec, RunConfig, RunReport

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Algorithm 1
# ---------------------------------------------------------------------------


def _branch_channel(
    spec: LindbladSpec, sample: OmegaSample, delta: float, cfg: RunConfig | None
) -> SuperOperator:
    if sample.branch == BRANCH_JUMP:
        program = encode_operator(spec.jump_ops[sample.index]).vec
        return jump_step_channel(build_M(spec.dim), program, spec.dim, delta, cfg)
    coeff, sigma = spec.hamiltonian_terms[sample.index]
    return hamiltonian_step_channel(sigma, coeff, delta, cfg.tol if cfg else None)


def alg1_branch_channels(
    spec: LindbladSpec, delta: float, cfg: RunConfig | None = None
) -> list[tuple[OmegaSample, float, SuperOperator]]:
    """Every omega branch with its probability and reduced step channel."""
    return [(s, p, _branch_channel(spec, s, delta, cfg)) for s, p in omega_branches(spec)]


def alg1_step_channel(
    spec: LindbladSpec, delta: float, cfg: RunConfig | None = None
) -> SuperOperator:
    """Probability-weighted mixture of the branch channels for one step."""
    d = spec.dim
    mat = np.zeros((d * d, d * d), dtype=np.complex128)
    for _, p, channel in alg1_branch_channels(spec, delta, cfg):
        mat += p * channel.mat
    return SuperOperator(d, mat)


def alg1_step_expectation(
    rho: DensityMatrix,
    spec: LindbladSpec,
    delta: float,
    channel_mode: str = "auto",
    tol: float | None = None,
) -> DensityMatrix:
    """
    One averaged step of Algorithm 1 on rho.

    Equals e^{(L / c) delta}(rho) up to O(delta^2).
    """
    if delta < 0:
        raise ArgumentError(f"delta must be nonnegative, got {delta}")
    if rho.d != spec.dim:
        raise SpecError(f"state has d={rho.d} but the spec acts on d={spec.dim}")
    cfg = RunConfig(t=0.0, n=1, channel_mode=channel_mode, tol=tol)
    return apply_superop(alg1_step_channel(spec, delta, cfg), rho)


def _apportion(n: int, weights: Sequence[float]) -> list[int]:
    """Split n into integers proportional to weights (largest remainder)."""
    total = float(sum(weights))
    raw = [n * w / total for w in weights]
    counts = [math.floor(x) for x in raw]
    order = sorted(range(len(raw)), key=lambda i: (counts[i] - raw[i], i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def _oracle_error(
    report: RunReport, rho: DensityMatrix, target: LindbladSpec, cfg: RunConfig
) -> None:
    oracle = exact_channel(target, cfg.t, cfg.tol)
    if report.channel is not None:
        report.error_vs_oracle = channel_distance(report.channel, oracle)
        report.extras["error_kind"] = "choi_trace_distance"
    elif report.final is not None:
        diff = report.final.mat - oracle.apply(rho.mat)
        eigs = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
        report.error_vs_oracle = float(0.5 * np.sum(np.abs(eigs)))
        report.extras["error_kind"] = "state_trace_distance"


def _alg1_channel(spec: LindbladSpec, cfg: RunConfig) -> SuperOperator:
    delta = spec.c * cfg.t / cfg.n
    return alg1_step_channel(spec, delta, cfg).power(cfg.n)


def alg1_run(
    rho: DensityMatrix, spec: LindbladSpec, cfg: RunConfig, with_oracle: bool = True
) -> RunReport:
    """
    Algorithm 1 with step length delta = c t / n.

    Expectation mode applies the averaged step n times and records the
    expected per-state consumption rounded to integers summing to n.
    Monte-Carlo mode draws n branches from a generator seeded by cfg.seed.
    """
    if spec.c <= 0:
        raise SpecError("spec has no terms (c = 0); nothing to simulate")
    start = time.perf_counter()
    delta = spec.c * cfg.t / cfg.n
    report = RunReport(algorithm=1, t=cfg.t, n=cfg.n, mode=cfg.mode)
    report.extras["delta"] = delta
    report.extras["c"] = spec.c

    branches = alg1_branch_channels(spec, delta, cfg)
    if cfg.monte_carlo:
        rng = np.random.default_rng(cfg.seed)
        draws = sample_omega_many(spec, rng, cfg.n)
        by_sample = {s: ch for s, _, ch in branches}
        state = rho.mat
        for sample in draws:
            state = by_sample[sample].apply(state)
        report.final = DensityMatrix(state, tol=invariant_tol(APPLY_TOL))
        counts = Counter(s.label for s in draws)
        report.consumed = {s.label: counts.get(s.label, 0) for s, _, _ in branches}
        report.extras["seed"] = cfg.seed
    else:
        d = spec.dim
        step = SuperOperator(d, sum(p * ch.mat for _, p, ch in branches))
        report.channel = step.power(cfg.n)
        report.final = apply_superop(report.channel, rho)
        split = _apportion(cfg.n, [p for _, p, _ in branches])
        report.consumed = {s.label: k for (s, _, _), k in zip(branches, split, strict=True)}

    if with_oracle:
        _oracle_error(report, rho, spec, cfg)
    report.wall_time = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Algorithm 2
# ---------------------------------------------------------------------------


def _alg2_sequence(spec: LindbladSpec, ordering: str) -> list[tuple[str, int]]:
    """One sweep: jumps K..1 then Hamiltonians J..1, mirrored when palindromic."""
    forward = [("psi", k) for k in reversed(range(spec.K))]
    forward += [("sigma", j) for j in reversed(range(spec.J))]
    if ordering == "palindromic":
        return forward + list(reversed(forward))
    return forward


def _alg2_channel(spec: LindbladSpec, cfg: RunConfig) -> SuperOperator:
    # Step lengths use the rescaled time ||L||_max t, so term k runs for
    # ||L_k||^2 t / n and term j for |c_j| t / n; palindromic sweeps halve both.
    if spec.J + spec.K == 0:
        raise SpecError("Algorithm 2 needs at least one Hamiltonian or jump term")
    scale = 0.5 if cfg.ordering == "palindromic" else 1.0
    base = scale * cfg.t / cfg.n
    m = build_M(spec.dim)
    channels: dict[tuple[str, int], SuperOperator] = {}
    for k, norm_sq in enumerate(spec.jump_norms_sq):
        program = encode_operator(spec.jump_ops[k]).vec
        channels[("psi", k)] = jump_step_channel(m, program, spec.dim, norm_sq * base, cfg)
    for j, (coeff, sigma) in enumerate(spec.hamiltonian_terms):
        channels[("sigma", j)] = hamiltonian_step_channel(sigma, coeff, abs(coeff) * base, cfg.tol)

    sweep = SuperOperator.identity(spec.dim)
    for key in _alg2_sequence(spec, cfg.ordering):
        sweep = sweep.then(channels[key])
    return sweep.power(cfg.n)


def alg2_run(
    rho: DensityMatrix, spec: LindbladSpec, cfg: RunConfig, with_oracle: bool = True
) -> RunReport:
    """
    Algorithm 2: n sweeps of single-term channels in forward or palindromic order.

    Forward uses n copies of every program state; palindromic uses 2n.
    """
    if cfg.monte_carlo:
        raise ModeError("Algorithm 2 is deterministic; run it in expectation mode")
    start = time.perf_counter()
    report = RunReport(algorithm=2, t=cfg.t, n=cfg.n, mode=cfg.mode)
    report.channel = _alg2_channel(spec, cfg)
    report.final = apply_superop(report.channel, rho)
    per_state = cfg.n * (2 if cfg.ordering == "palindromic" else 1)
    report.consumed = {f"sigma_{j + 1}": per_state for j in range(spec.J)}
    report.consumed.update({f"psi_{k + 1}": per_state for k in range(spec.K)})
    report.extras.update({"ordering": cfg.ordering, "norm_max": spec.norm_max})
    if with_oracle:
        _oracle_error(report, rho, spec, cfg)
    report.wall_time = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Algorithms 3 and 4
# ---------------------------------------------------------------------------


def _single_jump_channel(
    m: Operator, program: np.ndarray, d: int, c: float, cfg: RunConfig
) -> SuperOperator:
    delta = c * cfg.t / cfg.n
    return jump_step_channel(m, program, d, delta, cfg).power(cfg.n)


def _linear_program(spec: LinearSpec, prepare: str) -> tuple[np.ndarray, dict[str, Any]]:
    if prepare == "direct":
        return encode_operator(spec.operator).vec, {}
    if prepare == "lcu":
        lcu = lcu_prepare_from_spec(spec)
        return lcu.prepared.amps, {"lcu": lcu.to_dict()}
    raise ArgumentError(f"prepare must be 'direct' or 'lcu', got {prepare!r}")


def _alg3_channel(spec: LinearSpec, cfg: RunConfig, prepare: str = "direct") -> SuperOperator:
    program, _ = _linear_program(spec, prepare)
    return _single_jump_channel(build_M(spec.d), program, spec.d, spec.c, cfg)


def alg3_run(
    rho: DensityMatrix,
    spec: LinearSpec,
    cfg: RunConfig,
    prepare: str = "direct",
    with_oracle: bool = True,
) -> RunReport:
    """
    Algorithm 3: simulate the single jump L = sum_k c_k L_k with delta = c t / n.

    Args:
        prepare: 'direct' encodes L exactly; 'lcu' uses the LCU-prepared state
    """
    if cfg.monte_carlo:
        raise ModeError("Algorithm 3 is deterministic; run it in expectation mode")
    start = time.perf_counter()
    program, extras = _linear_program(spec, prepare)
    report = RunReport(algorithm=3, t=cfg.t, n=cfg.n, mode=cfg.mode, extras=extras)
    report.channel = _single_jump_channel(build_M(spec.d), program, spec.d, spec.c, cfg)
    report.final = apply_superop(report.channel, rho)
    report.consumed = {"phi": cfg.n}
    report.extras["c"] = spec.c
    if with_oracle:
        _oracle_error(report, rho, spec.target_spec(), cfg)
    report.wall_time = time.perf_counter() - start
    return report


def _poly_program(poly: PolySpec, prepare: str) -> tuple[np.ndarray, dict[str, Any]]:
    if prepare == "direct":
        vec = poly.program_vector()
        vec = vec / np.linalg.norm(vec)
        extras: dict[str, Any] = {}
    elif prepare == "lcu":
        lcu = lcu_prepare_poly(poly)
        vec = lcu.prepared.amps
        extras = {"lcu": lcu.to_dict()}
    else:
        raise ArgumentError(f"prepare must be 'direct' or 'lcu', got {prepare!r}")
    return to_canonical(vec, poly.d, poly.D), extras


def _alg4_channel(poly: PolySpec, cfg: RunConfig, prepare: str = "direct") -> SuperOperator:
    program, _ = _poly_program(poly, prepare)
    return _single_jump_channel(build_M_poly(poly.d, poly.D), program, poly.d, poly.c, cfg)


def alg4_run(
    rho: DensityMatrix,
    poly: PolySpec,
    cfg: RunConfig,
    prepare: str = "direct",
    with_oracle: bool = True,
) -> RunReport:
    """
    Algorithm 4: simulate the polynomial jump with the cyclic-shift interaction.

    The oracle is the single-jump Lindbladian of poly.effective_operator().
    """
    if cfg.monte_carlo:
        raise ModeError("Algorithm 4 is deterministic; run it in expectation mode")
    start = time.perf_counter()
    program, extras = _poly_program(poly, prepare)
    report = RunReport(algorithm=4, t=cfg.t, n=cfg.n, mode=cfg.mode, extras=extras)
    m = build_M_poly(poly.d, poly.D)
    report.channel = _single_jump_channel(m, program, poly.d, poly.c, cfg)
    report.final = apply_superop(report.channel, rho)
    report.consumed = {"phi": cfg.n}
    report.extras.update({"c": poly.c, "degree": poly.D})
    if with_oracle:
        _oracle_error(report, rho, poly.target_spec(), cfg)
    report.wall_time = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Dispatch and channel assembly
# ---------------------------------------------------------------------------

Inputs = LindbladSpec | LinearSpec | PolySpec

_SPEC_TYPES: dict[int, type] = {1: LindbladSpec, 2: LindbladSpec, 3: LinearSpec, 4: PolySpec}


def _check_inputs(alg: int, inputs: Inputs) -> None:
    if alg not in _SPEC_TYPES:
        raise ArgumentError(f"algorithm must be 1, 2, 3 or 4, got {alg}")
    expected = _SPEC_TYPES[alg]
    if not isinstance(inputs, expected):
        raise SpecError(f"Algorithm {alg} needs a {expected.__name__}, got {type(inputs).__name__}")


def run_algorithm(
    alg: int, rho: DensityMatrix, inputs: Inputs, cfg: RunConfig, **kwargs: Any
) -> RunReport:
    """Run algorithm 1-4 on rho."""
    _check_inputs(alg, inputs)
    runners = {1: alg1_run, 2: alg2_run, 3: alg3_run, 4: alg4_run}
    return runners[alg](rho, inputs, cfg, **kwargs)  # type: ignore[operator]


def target_spec_of(inputs: Inputs) -> LindbladSpec:
    """Lindbladian the algorithm is meant to reproduce."""
    if isinstance(inputs, LindbladSpec):
        return inputs
    return inputs.target_spec()


def system_dim(inputs: Inputs) -> int:
    return inputs.dim if isinstance(inputs, LindbladSpec) else inputs.d


def channel_of_algorithm(alg: int, inputs: Inputs, cfg: RunConfig) -> SuperOperator:
    """
    Superoperator of the whole run, assembled on the d**2 matrix units.

    Raises:
        ModeError: cfg is in monte_carlo mode
    """
    if cfg.monte_carlo:
        raise ModeError(
            "Monte-Carlo runs produce sampled states, not channels; use expectation mode"
        )
    _check_inputs(alg, inputs)
    if alg == 1:
        return _alg1_channel(inputs, cfg)  # type: ignore[arg-type]
    if alg == 2:
        return _alg2_channel(inputs, cfg)  # type: ignore[arg-type]
    if alg == 3:
        return _alg3_channel(inputs, cfg)  # type: ignore[arg-type]
    return _alg4_channel(inputs, cfg)  # type: ignore[arg-type]


def apply_on_reference(channel: SuperOperator, x: Operator, d_ref: int) -> Operator:
    """(I_R kron N)(x) for an operator x on R kron S with dim R = d_ref."""
    d = channel.d
    if x.shape != (d_ref * d, d_ref * d):
        raise ArgumentError(f"input must be {d_ref * d}x{d_ref * d}, got {x.shape}")
    blocks = x.reshape(d_ref, d, d_ref, d)
    out = np.empty_like(blocks)
    for r in range(d_ref):
        for s in range(d_ref):
            out[r, :, s, :] = channel.apply(blocks[r, :, s, :])
    return out.reshape(d_ref * d, d_ref * d)


def extend_with_reference(channel: SuperOperator, d_ref: int) -> SuperOperator:
    """I_R kron N as a superoperator on the joint system."""
    return superop_from_action(lambda x: apply_on_reference(channel, x, d_ref), d_ref * channel.d)


# ---------------------------------------------------------------------------
# Resource estimates
# ---------------------------------------------------------------------------


@dataclass
class CopyEstimate:
    """Copies of program states needed for target accuracy (big-O constants set to 1)."""

    n: int
    per_state: dict[str, float] = field(default_factory=dict)
    total: int | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        data = {"n": self.n, "per_state": self.per_state, "total": self.total}
        data.update(self.extras)
        return data


def _check_budget(c: float, t: float, eps: float) -> None:
    if not 0 < eps < 1:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    if not c > 0:
        raise ArgumentError(f"c must be positive, got {c}")
    if not t > 0:
        raise ArgumentError(f"t must be positive, got {t}")


def _ceil(x: float) -> int:
    # round first so 1 / 0.01 style products do not tip over an integer
    return math.ceil(round(x, 9))


def copies_needed(c: float, t: float, eps: float, spec: LindbladSpec | None = None) -> CopyEstimate:
    """
    n = ceil(c^2 t^2 / eps); with a spec, also the expected per-state split
    n_j = |c_j| n / c and m_k = ||L_k||^2 n / c.
    """
    _check_budget(c, t, eps)
    n = _ceil(c * c * t * t / eps)
    estimate = CopyEstimate(n=n, total=n)
    if spec is not None:
        for j, coeff in enumerate(spec.coefficients):
            estimate.per_state[f"sigma_{j + 1}"] = abs(coeff) / spec.c * n
        for k, norm_sq in enumerate(spec.jump_norms_sq):
            estimate.per_state[f"psi_{k + 1}"] = norm_sq / spec.c * n
    return estimate


def copies_needed_trotter(
    spec: LindbladSpec, t: float, eps: float, ordering: str = "palindromic"
) -> CopyEstimate:
    """
    Algorithm 2 copies per program state and in total.

    Palindromic: n = ceil((J+K) ||L||_max^2 t^2 / eps), total (J+K) n.
    Forward: n = ceil((J+K)^2 ||L||_max^2 t^2 / eps), total (J+K) n.
    """
    r = spec.J + spec.K
    if r == 0:
        raise SpecError("spec has no terms; nothing to simulate")
    _check_budget(spec.norm_max, t, eps)
    if ordering not in ("forward", "palindromic"):
        raise ArgumentError(f"ordering must be forward or palindromic, got {ordering!r}")
    power = 1 if ordering == "palindromic" else 2
    n = _ceil(r**power * spec.norm_max**2 * t * t / eps)
    labels = [f"sigma_{j + 1}" for j in range(spec.J)] + [f"psi_{k + 1}" for k in range(spec.K)]
    return CopyEstimate(
        n=n,
        per_state={label: float(n) for label in labels},
        total=r * n,
        extras={
            "ordering": ordering,
            "c": spec.c,
            "c_bound": r * spec.norm_max,
            "c_within_bound": spec.c <= r * spec.norm_max + 1e-12,
        },
    )


def queries_needed(lam: float, c: float, t: float, eps: float) -> int:
    """ceil((lambda / sqrt(c)) * ceil(c^2 t^2 / eps)) queries for Algorithms 3 and 4."""
    if not lam > 0:
        raise ArgumentError(f"lambda must be positive, got {lam}")
    n = copies_needed(c, t, eps).n
    return _ceil(lam / math.sqrt(c) * n)
