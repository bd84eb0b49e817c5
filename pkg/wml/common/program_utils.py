"""
Program states: pure states that carry an operator in their amplitudes.

An operator L on C^d is encoded as (L kron I)|Gamma> / ||L||_2, a unit vector
of length d**2. Its amplitude at index (a, j) is L[a, j] / ||L||_2, so the
encoding is a normalized row-major flatten and decoding is a reshape.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .channel_utils import LindbladSpec
from .errors import ArgumentError, NumericalIntegrityError, ShapeError, SpecError
from .random_utils import random_operator
from .tensor_utils import Operator, as_operator, hs_inner, outer, schatten_norm

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10

BRANCH_POSITIVE = 0
BRANCH_NEGATIVE = 1
BRANCH_JUMP = 2


@dataclass(frozen=True)
class ProgramState:
    """Unit vector of length d**2, optionally remembering the operator it encodes."""

    d: int
    vec: np.ndarray
    source: Operator | None = None

    def __post_init__(self) -> None:
        vec = np.asarray(self.vec, dtype=np.complex128).reshape(-1)
        if vec.shape[0] != self.d * self.d:
            raise ShapeError(
                f"program state for d={self.d} needs length {self.d**2}, got {vec.shape[0]}"
            )
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericalIntegrityError(f"program state norm is {norm:.12f}, expected 1")
        object.__setattr__(self, "vec", vec)

    def density(self) -> Operator:
        """|psi><psi| on the two registers."""
        return outer(self.vec)

    def overlap(self, other: ProgramState) -> complex:
        return complex(np.vdot(self.vec, other.vec))


@dataclass(frozen=True)
class OmegaSample:
    """Sampled branch of the classical register: x = 0/1 Hamiltonian sign, x = 2 jump."""

    branch: int
    index: int

    def __post_init__(self) -> None:
        if self.branch not in (BRANCH_POSITIVE, BRANCH_NEGATIVE, BRANCH_JUMP):
            raise ArgumentError(f"branch must be 0, 1 or 2, got {self.branch}")
        if self.index < 0:
            raise ArgumentError(f"index must be nonnegative, got {self.index}")

    def check(self, J: int, K: int) -> None:
        limit = K if self.branch == BRANCH_JUMP else J
        if self.index >= limit:
            raise ArgumentError(
                f"branch {self.branch} index {self.index} out of range (limit {limit})"
            )

    @property
    def label(self) -> str:
        """Program-state label consumed by this branch: sigma_j or psi_k (1-based)."""
        if self.branch == BRANCH_JUMP:
            return f"psi_{self.index + 1}"
        return f"sigma_{self.index + 1}"


def encode_operator(op: Operator) -> ProgramState:
    """
    Encode a square operator as (L kron I)|Gamma> / ||L||_2.

    Raises:
        ArgumentError: op is (numerically) zero
    """
    op = as_operator(op, "encoded operator")
    if op.shape[0] != op.shape[1]:
        raise ShapeError(f"encoded operator must be square, got {op.shape}")
    norm = schatten_norm(op, 2)
    if norm <= 1e-12:
        raise ArgumentError("cannot encode the zero operator; its program state is undefined")
    d = op.shape[0]
    return ProgramState(d, (op / norm).reshape(d * d), source=op)


def decode_operator(psi: ProgramState) -> Operator:
    """Unit Hilbert-Schmidt norm operator whose encoding is psi."""
    return psi.vec.reshape(psi.d, psi.d).copy()


def maximally_entangled_state(d: int) -> ProgramState:
    """|Phi> = |Gamma> / sqrt(d), the encoding of the identity."""
    return encode_operator(np.eye(d, dtype=np.complex128))


def omega_branches(spec: LindbladSpec) -> list[tuple[OmegaSample, float]]:
    """Every branch of omega with its probability |c_j|/c or ||L_k||_2^2/c."""
    c = spec.c
    if c <= 0:
        raise SpecError("spec has no terms (c = 0); nothing to simulate")
    branches: list[tuple[OmegaSample, float]] = []
    for j, coeff in enumerate(spec.coefficients):
        branch = BRANCH_POSITIVE if coeff > 0 else BRANCH_NEGATIVE
        branches.append((OmegaSample(branch, j), abs(coeff) / c))
    for k, norm_sq in enumerate(spec.jump_norms_sq):
        branches.append((OmegaSample(BRANCH_JUMP, k), norm_sq / c))
    return branches


def sample_omega(spec: LindbladSpec, rng: np.random.Generator) -> OmegaSample:
    """Draw one branch of omega; deterministic for a seeded generator."""
    branches = omega_branches(spec)
    probs = np.array([p for _, p in branches])
    pick = int(rng.choice(len(branches), p=probs / probs.sum()))
    return branches[pick][0]


def sample_omega_many(spec: LindbladSpec, rng: np.random.Generator, size: int) -> list[OmegaSample]:
    """Draw ``size`` independent branches in one call."""
    branches = omega_branches(spec)
    probs = np.array([p for _, p in branches])
    picks = rng.choice(len(branches), size=size, p=probs / probs.sum())
    return [branches[int(i)][0] for i in picks]


def _require_unit(op: Operator, name: str) -> None:
    norm = schatten_norm(op, 2)
    if abs(norm - 1.0) > NORM_TOL:
        raise ArgumentError(f"{name} must have unit Hilbert-Schmidt norm, got {norm:.12f}")


def perturb_unit_operator(op: Operator, delta: float, rng: np.random.Generator) -> Operator:
    """
    Unit-norm operator at Hilbert-Schmidt distance delta from op.

    The direction is a Gaussian matrix orthogonalized against op; the mixing
    weight eta in normalize(op + eta * G) is found by root bracketing.

    Raises:
        ArgumentError: delta outside (0, sqrt(2)] or op not unit norm
    """
    op = as_operator(op, "operator")
    _require_unit(op, "operator")
    if not 0 < delta <= math.sqrt(2):
        raise ArgumentError(f"delta must lie in (0, sqrt(2)], got {delta}")

    direction = random_operator(op.shape[0], rng)
    direction = direction - hs_inner(op, direction) * op
    direction = direction / schatten_norm(direction, 2)
    if math.isclose(delta, math.sqrt(2)):
        return direction

    def perturbed(eta: float) -> Operator:
        mixed = op + eta * direction
        return mixed / schatten_norm(mixed, 2)

    def gap(eta: float) -> float:
        return schatten_norm(perturbed(eta) - op, 2) - delta

    upper = 1.0
    while gap(upper) < 0:
        upper *= 2.0
    eta = scipy.optimize.brentq(gap, 0.0, upper, xtol=1e-15, rtol=1e-14)
    logger.debug("perturbation delta=%.3e solved with eta=%.6e", delta, eta)
    return perturbed(eta)


@dataclass(frozen=True)
class PsiDistance:
    """Distance record between two encoded unit operators."""

    trace_dist: float
    hs_dist: float
    overlap: complex

    @property
    def formula_dist(self) -> float:
        """sqrt(1 - |Tr[L~^dag L]|^2)."""
        return math.sqrt(max(0.0, 1.0 - abs(self.overlap) ** 2))

    @property
    def residual(self) -> float:
        return abs(self.trace_dist - self.formula_dist)

    @property
    def bound_ok(self) -> bool:
        return self.trace_dist <= self.hs_dist + 1e-12


def psi_distance(op: Operator, perturbed: Operator) -> PsiDistance:
    """Trace distance between the encodings of two unit operators, plus the overlap."""
    op = as_operator(op, "operator")
    perturbed = as_operator(perturbed, "perturbed operator")
    _require_unit(op, "operator")
    _require_unit(perturbed, "perturbed operator")
    psi = encode_operator(op).density()
    psi_t = encode_operator(perturbed).density()
    diff = psi_t - psi
    eigs = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return PsiDistance(
        trace_dist=float(0.5 * np.sum(np.abs(eigs))),
        hs_dist=schatten_norm(perturbed - op, 2),
        overlap=hs_inner(perturbed, op),
    )
