"""
Randomized verification suites for the identities the algorithms rely on.

Each suite draws random inputs from a seeded generator, evaluates both sides
of an identity by dense linear algebra and records the worst residual.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from wml.common.channel_utils import LindbladSpec, apply_lindbladian, is_cptp, lindblad_action
from wml.common.errors import ArgumentError
from wml.common.program_utils import encode_operator, perturb_unit_operator, psi_distance
from wml.common.random_utils import (
    random_density_matrix,
    random_operator,
    random_unit_operator,
)
from wml.common.tensor_utils import (
    Operator,
    SystemDims,
    outer,
    invariant_tol,
    partial_trace,
    schatten_norm,
    swap_operator,
)

from .algorithms import channel_of_algorithm
from .generators import build_M, build_M_poly, first_order_reduction, to_canonical
from .specs import LinearSpec, PolySpec, RunConfig

logger = logging.getLogger(__name__)

SuiteFn = Callable[[np.random.Generator, int], "SuiteResult"]


@dataclass
class SuiteResult:
    """Outcome of one identity suite."""

    name: str
    trials: int
    tol: float
    max_residual: float = 0.0
    failures: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.tol = invariant_tol(self.tol)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, residual: float) -> None:
        self.max_residual = max(self.max_residual, float(residual))
        if not residual <= self.tol:
            self.failures += 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "trials": self.trials,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "failures": self.failures,
            **self.details,
        }


@dataclass
class LemmaReport:
    seed: int | None
    suites: list[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "suites": [s.to_dict() for s in self.suites],
        }


def first_order_single_jump(
    rng: np.random.Generator, trials: int, dims: tuple[int, ...] = (2, 3)
) -> SuiteResult:
    """Tr_PQ[M(rho kron psi)] = L rho L^dag - 1/2 {L^dag L, rho} for unit L."""
    result = SuiteResult("first_order_single_jump", trials * len(dims), 1e-10)
    for d in dims:
        m = build_M(d)
        for _ in range(trials):
            op = random_unit_operator(d, rng)
            rho = random_density_matrix(d, rng)
            lhs = first_order_reduction(m, rho, encode_operator(op).vec)
            result.record(schatten_norm(lhs - lindblad_action(rho, op), 2))
    return result


def hamiltonian_partial_swap(
    rng: np.random.Generator, trials: int, dims: tuple[int, ...] = (2, 3)
) -> SuiteResult:
    """Tr_2[-i[SWAP, rho kron sigma]] = -i[sigma, rho]."""
    result = SuiteResult("hamiltonian_partial_swap", trials * len(dims), 1e-12)
    for d in dims:
        swap = swap_operator(d)
        for _ in range(trials):
            rho = random_density_matrix(d, rng)
            sigma = random_density_matrix(d, rng)
            joint = np.kron(rho, sigma)
            lhs = partial_trace(-1j * (swap @ joint - joint @ swap), SystemDims((d, d)), keep=[0])
            result.record(schatten_norm(lhs + 1j * (sigma @ rho - rho @ sigma), 2))
    return result


def _pair_input(rho: Operator, lefts: list[Operator], rights: list[Operator]) -> Operator:
    """rho kron prod_l (L_l kron I)|Gamma><Gamma|(L'_l kron I) in canonical order."""
    d = rho.shape[0]
    D = len(lefts)
    gamma = np.eye(d, dtype=np.complex128).reshape(d * d)
    eye = np.eye(d, dtype=np.complex128)
    ket = np.ones(1, dtype=np.complex128)
    bra = np.ones(1, dtype=np.complex128)
    for left, right in zip(lefts, rights, strict=True):
        ket = np.kron(ket, np.kron(left, eye) @ gamma)
        bra = np.kron(bra, np.kron(right.conj().T, eye) @ gamma)
    pairs = outer(to_canonical(ket, d, D), to_canonical(bra, d, D))
    return np.kron(rho, pairs)


def cyclic_shift_lemma(
    rng: np.random.Generator,
    trials: int,
    cases: tuple[tuple[int, int], ...] = ((2, 2), (3, 2), (2, 3)),
    corrupt: bool = False,
) -> SuiteResult:
    """
    For T = L_1 ... L_D and T' = L'_D ... L'_1:
        Tr_rest[M X M^dag] = T rho T'
        Tr_rest[M^dag M X] = T' T rho
        Tr_rest[X M^dag M] = rho T' T
    with X the rho-and-pairs input of _pair_input.

    Args:
        corrupt: Drop the d^{-D/2} normalization of M (negative control)
    """
    name = "cyclic_shift_lemma_corrupted" if corrupt else "cyclic_shift_lemma"
    result = SuiteResult(name, trials * len(cases), 1e-9)
    result.details["cases"] = [list(c) for c in cases]
    for d, D in cases:
        m = build_M_poly(d, D, scale=not corrupt)
        gram = m.conj().T @ m
        dims = SystemDims((d, d ** (2 * D)))
        for _ in range(trials):
            rho = random_operator(d, rng)
            lefts = [random_operator(d, rng) for _ in range(D)]
            rights = [random_operator(d, rng) for _ in range(D)]
            x = _pair_input(rho, lefts, rights)
            t_left = np.eye(d, dtype=np.complex128)
            for op in lefts:
                t_left = t_left @ op
            t_right = np.eye(d, dtype=np.complex128)
            for op in reversed(rights):
                t_right = t_right @ op
            norms = schatten_norm(t_left, 2) * schatten_norm(t_right, 2) * schatten_norm(rho, 2)
            scale = max(1.0, norms)
            checks = (
                (m @ x @ m.conj().T, t_left @ rho @ t_right),
                (gram @ x, t_right @ t_left @ rho),
                (x @ gram, rho @ t_right @ t_left),
            )
            for joint, expected in checks:
                lhs = partial_trace(joint, dims, keep=[0])
                result.record(schatten_norm(lhs - expected, 2) / scale)
    return result


def encoding_distance(
    rng: np.random.Generator, trials: int, dims: tuple[int, ...] = (2, 3)
) -> SuiteResult:
    """
    Trace distance of encodings equals sqrt(1 - |Tr[L~^dag L]|^2) and is at
    most ||L~ - L||_2.
    """
    result = SuiteResult("encoding_distance", trials * len(dims), 1e-10)
    bound_violations = 0
    for d in dims:
        for i in range(trials):
            op = random_unit_operator(d, rng)
            if i % 2:
                other = perturb_unit_operator(op, float(rng.uniform(0.01, 1.4)), rng)
            else:
                other = random_unit_operator(d, rng)
            dist = psi_distance(op, other)
            result.record(dist.residual)
            if not dist.bound_ok:
                bound_violations += 1
    result.failures += bound_violations
    result.details["bound_violations"] = bound_violations
    return result


def _random_spec(rng: np.random.Generator, d: int) -> LindbladSpec:
    coeffs = rng.uniform(0.2, 1.0, size=2) * rng.choice([-1.0, 1.0], size=2)
    terms = tuple((float(c), random_density_matrix(d, rng)) for c in coeffs)
    jumps = tuple(random_operator(d, rng) * float(rng.uniform(0.3, 1.0)) for _ in range(2))
    return LindbladSpec(hamiltonian_terms=terms, jump_ops=jumps)


def first_order_mixture(
    rng: np.random.Generator, trials: int, dims: tuple[int, ...] = (2, 3)
) -> SuiteResult:
    """Omega-weighted generators reproduce L(rho) / c (the sampling algorithm's first order)."""
    result = SuiteResult("first_order_mixture", trials * len(dims), 1e-10)
    for d in dims:
        m = build_M(d)
        swap = swap_operator(d)
        for _ in range(trials):
            spec = _random_spec(rng, d)
            rho = random_density_matrix(d, rng)
            total = np.zeros((d, d), dtype=np.complex128)
            for coeff, sigma in spec.hamiltonian_terms:
                joint = np.kron(rho, sigma)
                gen = -1j * np.sign(coeff) * (swap @ joint - joint @ swap)
                total += abs(coeff) * partial_trace(gen, SystemDims((d, d)), keep=[0])
            for op, norm_sq in zip(spec.jump_ops, spec.jump_norms_sq, strict=True):
                total += norm_sq * first_order_reduction(m, rho, encode_operator(op).vec)
            expected = apply_lindbladian(spec, rho)
            result.record(schatten_norm(total / spec.c - expected / spec.c, 2))
    return result


def first_order_linear(
    rng: np.random.Generator, trials: int, dims: tuple[int, ...] = (2, 3)
) -> SuiteResult:
    """Tr_PQ[M(rho kron phi)] = L(rho) / c for L = sum_k c_k L_k."""
    result = SuiteResult("first_order_linear", trials * len(dims), 1e-10)
    for d in dims:
        m = build_M(d)
        for _ in range(trials):
            terms = tuple(
                (float(rng.uniform(0.2, 1.5)), random_unit_operator(d, rng)) for _ in range(2)
            )
            spec = LinearSpec(terms)
            rho = random_density_matrix(d, rng)
            lhs = first_order_reduction(m, rho, encode_operator(spec.operator).vec)
            expected = apply_lindbladian(spec.target_spec(), rho) / spec.c
            result.record(schatten_norm(lhs - expected, 2))
    return result


def first_order_poly(
    rng: np.random.Generator, trials: int, cases: tuple[tuple[int, int], ...] = ((2, 2), (3, 2))
) -> SuiteResult:
    """Polynomial interaction reproduces L_eff(rho) / c with strings '12' and '1'."""
    result = SuiteResult("first_order_poly", trials * len(cases), 1e-9)
    for d, D in cases:
        m = build_M_poly(d, D)
        for _ in range(trials):
            ops = tuple(random_unit_operator(d, rng) for _ in range(2))
            strings = (
                ((1, 2) + (1,) * (D - 2), float(rng.uniform(0.5, 1.5))),
                ((1,), float(rng.uniform(0.5, 1.5))),
            )
            poly = PolySpec(ops, strings)
            vec = poly.program_vector()
            program = to_canonical(vec / np.linalg.norm(vec), d, D)
            rho = random_density_matrix(d, rng)
            lhs = first_order_reduction(m, rho, program)
            expected = apply_lindbladian(poly.target_spec(), rho) / poly.c
            result.record(schatten_norm(lhs - expected, 2))
    return result


def cptp_channels(rng: np.random.Generator, trials: int) -> SuiteResult:
    """Every expectation-mode algorithm channel is CPTP at 1e-8 (or the configured tolerance)."""
    result = SuiteResult("cptp_channels", 0, 1e-8)
    cfg = RunConfig(t=1.0, n=8)
    for _ in range(max(1, trials // 10)):
        spec = _random_spec(rng, 2)
        lin = LinearSpec(
            tuple((float(rng.uniform(0.2, 1.5)), random_unit_operator(2, rng)) for _ in range(2))
        )
        poly = PolySpec(
            tuple(random_unit_operator(2, rng) for _ in range(2)),
            (((1, 2), 1.0), ((1,), 0.5)),
        )
        for alg, inputs in ((1, spec), (2, spec), (3, lin), (4, poly)):
            diag = is_cptp(channel_of_algorithm(alg, inputs, cfg), tol=result.tol)
            result.trials += 1
            result.record(max(-diag.min_eigenvalue, diag.tp_deviation, 0.0))
    return result


SUITES: dict[str, SuiteFn] = {
    "first_order_single_jump": first_order_single_jump,
    "hamiltonian_partial_swap": hamiltonian_partial_swap,
    "cyclic_shift_lemma": cyclic_shift_lemma,
    "encoding_distance": encoding_distance,
    "first_order_mixture": first_order_mixture,
    "first_order_linear": first_order_linear,
    "first_order_poly": first_order_poly,
    "cptp_channels": cptp_channels,
}


def verify_lemmas(seed: int | None = 0, trials: int = 50, corrupt_m: bool = False) -> LemmaReport:
    """
    Run every suite with ``trials`` random instances each.

    Args:
        seed: Generator seed
        trials: Random instances per suite (and per dimension)
        corrupt_m: Replace the cyclic-shift suite with its corrupted negative control
    """
    if trials < 1:
        raise ArgumentError(f"trials must be at least 1, got {trials}")
    rng = np.random.default_rng(seed)
    report = LemmaReport(seed=seed)
    for name, suite in SUITES.items():
        if name == "cyclic_shift_lemma":
            result = cyclic_shift_lemma(rng, min(trials, 20), corrupt=corrupt_m)
        else:
            result = suite(rng, trials)
        status = "ok" if result.passed else "FAIL"
        logger.info("suite %s: max residual %.3e (%s)", result.name, result.max_residual, status)
        report.suites.append(result)
    return report
