"""
Channel representations and the exact Lindblad oracle.

Vectorization is column-stacking: vec(A X B) = (B^T kron A) vec(X). Every
superoperator in the package acts on vectors produced by ``vectorize``.

Choi states use the reference system as the LEFT factor:
    choi(N) = (I kron N)(Phi) = (1/d) sum_ij E_ij kron N(E_ij)

The Choi trace distance stands in for the diamond distance everywhere; it is
a lower bound attained at the maximally entangled input.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg

from .errors import ArgumentError, NumericalIntegrityError, ShapeError, SpecError, StepSizeError
from .tensor_utils import (
    LIMITS,
    Operator,
    SystemDims,
    as_operator,
    check_size,
    dagger,
    invariant_tol,
    mat_exp,
    partial_trace,
    schatten_norm,
)

logger = logging.getLogger(__name__)

# Largest total dimension evolved through a dense superoperator exponential
DENSE_DIM_LIMIT = 64
DEFAULT_ACTION_ORDER = 8

# Per-check defaults; tensor_utils.configure(invariant_tol=...) replaces all three
DENSITY_TOL = 1e-10
APPLY_TOL = 1e-8
CPTP_TOL = 1e-9

ChannelAction = Callable[[Operator], Operator]


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


def check_density(mat: Operator, tol: float | None = None, name: str = "state") -> None:
    """
    Raise NumericalIntegrityError unless mat is Hermitian, unit trace and PSD.
    """
    if tol is None:
        tol = invariant_tol(DENSITY_TOL)
    herm_dev = float(np.max(np.abs(mat - dagger(mat)), initial=0.0))
    if herm_dev > tol:
        raise NumericalIntegrityError(
            f"{name} is not Hermitian (deviation {herm_dev:.2e} > {tol:.0e})"
        )
    trace_dev = abs(complex(np.trace(mat)) - 1.0)
    if trace_dev > tol:
        raise NumericalIntegrityError(f"{name} trace deviates from 1 by {trace_dev:.2e}")
    min_eig = float(np.min(scipy.linalg.eigvalsh((mat + dagger(mat)) / 2)))
    if min_eig < -tol:
        raise NumericalIntegrityError(f"{name} has negative eigenvalue {min_eig:.2e}")


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix."""

    mat: Operator
    tol: float | None = None

    def __post_init__(self) -> None:
        mat = as_operator(self.mat, "density matrix")
        if mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"density matrix must be square, got {mat.shape}")
        tol = invariant_tol(DENSITY_TOL) if self.tol is None else self.tol
        check_density(mat, tol, "density matrix")
        object.__setattr__(self, "tol", tol)
        object.__setattr__(self, "mat", mat)

    @property
    def d(self) -> int:
        return int(self.mat.shape[0])


@dataclass(frozen=True)
class SuperOperator:
    """Linear map on d x d matrices as a d**2 x d**2 matrix on vec(X)."""

    d: int
    mat: Operator

    def __post_init__(self) -> None:
        mat = as_operator(self.mat, "superoperator")
        if mat.shape != (self.d * self.d, self.d * self.d):
            raise ShapeError(
                f"superoperator for d={self.d} must be {self.d**2}x{self.d**2}, got {mat.shape}"
            )
        object.__setattr__(self, "mat", mat)

    @classmethod
    def identity(cls, d: int) -> SuperOperator:
        return cls(d, np.eye(d * d, dtype=np.complex128))

    def apply(self, x: Operator) -> Operator:
        """Apply to any d x d operator (no density validation)."""
        return devectorize(self.mat @ vectorize(x), self.d)

    def then(self, other: SuperOperator) -> SuperOperator:
        """Channel that applies self first and other second."""
        if other.d != self.d:
            raise ShapeError(f"cannot compose channels on d={self.d} and d={other.d}")
        return SuperOperator(self.d, other.mat @ self.mat)

    def power(self, n: int) -> SuperOperator:
        if n < 0:
            raise ArgumentError(f"power must be nonnegative, got {n}")
        return SuperOperator(self.d, np.linalg.matrix_power(self.mat, n))

    def choi(self) -> ChoiState:
        return choi_of(self.apply, self.d)


@dataclass(frozen=True)
class ChoiState:
    """Normalized Choi state on (reference, output)."""

    d_in: int
    d_out: int
    mat: Operator

    def __post_init__(self) -> None:
        mat = as_operator(self.mat, "Choi state")
        size = self.d_in * self.d_out
        if mat.shape != (size, size):
            raise ShapeError(f"Choi state for ({self.d_in}, {self.d_out}) must be {size}x{size}")
        object.__setattr__(self, "mat", mat)


@dataclass(frozen=True)
class CptpDiagnostic:
    """Outcome of is_cptp."""

    min_eigenvalue: float
    tp_deviation: float
    tol: float
    cp_ok: bool = field(init=False)
    tp_ok: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cp_ok", self.min_eigenvalue >= -self.tol)
        object.__setattr__(self, "tp_ok", self.tp_deviation <= self.tol)

    @property
    def passed(self) -> bool:
        return self.cp_ok and self.tp_ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "tp_deviation": self.tp_deviation,
            "tol": self.tol,
            "cp_ok": self.cp_ok,
            "tp_ok": self.tp_ok,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LindbladSpec:
    """
    Lindbladian with Hamiltonian H = sum_j c_j sigma_j and jump operators L_k.

    Terms with c_j == 0 are dropped with a warning. Every sigma_j must be a
    density matrix and every L_k nonzero.
    """

    hamiltonian_terms: tuple[tuple[float, Operator], ...] = ()
    jump_ops: tuple[Operator, ...] = ()
    d: int | None = None

    def __post_init__(self) -> None:
        d = self.d
        terms: list[tuple[float, Operator]] = []
        for j, (coeff, sigma) in enumerate(self.hamiltonian_terms):
            coeff = float(np.real(coeff))
            sigma = as_operator(sigma, f"sigma_{j}")
            d = self._check_dim(sigma, d, f"sigma_{j}")
            if coeff == 0.0:
                logger.warning("Dropping Hamiltonian term %d with zero coefficient", j)
                continue
            try:
                check_density(sigma, name=f"sigma_{j}")
            except NumericalIntegrityError as e:
                raise SpecError(f"{e}; Hamiltonian program states must be density matrices") from e
            terms.append((coeff, sigma))

        jumps: list[Operator] = []
        for k, op in enumerate(self.jump_ops):
            op = as_operator(op, f"L_{k}")
            d = self._check_dim(op, d, f"L_{k}")
            if schatten_norm(op, 2) <= 1e-12:
                raise SpecError(f"jump operator L_{k} is zero; remove it from the spec")
            jumps.append(op)

        if d is None:
            raise SpecError("empty spec needs an explicit dimension d")
        if d < 2:
            raise SpecError(f"system dimension must be at least 2, got {d}")
        object.__setattr__(self, "hamiltonian_terms", tuple(terms))
        object.__setattr__(self, "jump_ops", tuple(jumps))
        object.__setattr__(self, "d", int(d))

    @staticmethod
    def _check_dim(op: Operator, d: int | None, name: str) -> int:
        if op.shape[0] != op.shape[1]:
            raise SpecError(f"{name} must be square, got {op.shape}")
        if d is not None and op.shape[0] != d:
            raise SpecError(f"{name} is {op.shape[0]}x{op.shape[0]} but the spec dimension is {d}")
        return int(op.shape[0])

    @property
    def dim(self) -> int:
        assert self.d is not None
        return self.d

    @property
    def J(self) -> int:
        return len(self.hamiltonian_terms)

    @property
    def K(self) -> int:
        return len(self.jump_ops)

    @property
    def coefficients(self) -> list[float]:
        return [c for c, _ in self.hamiltonian_terms]

    @property
    def jump_norms_sq(self) -> list[float]:
        return [schatten_norm(op, 2) ** 2 for op in self.jump_ops]

    @property
    def c(self) -> float:
        """Normalization sum_j |c_j| + sum_k ||L_k||_2^2."""
        return float(sum(abs(x) for x in self.coefficients) + sum(self.jump_norms_sq))

    @property
    def norm_max(self) -> float:
        """max(|c_1|, ..., |c_J|, ||L_1||_2^2, ..., ||L_K||_2^2); 0 for an empty spec."""
        values = [abs(x) for x in self.coefficients] + self.jump_norms_sq
        return float(max(values, default=0.0))

    @property
    def hamiltonian(self) -> Operator:
        h = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for coeff, sigma in self.hamiltonian_terms:
            h += coeff * sigma
        return h


# ---------------------------------------------------------------------------
# Vectorization and generators
# ---------------------------------------------------------------------------


def vectorize(a: Operator) -> np.ndarray:
    """Column-stacked vec(a)."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"vectorize expects a square matrix, got shape {a.shape}")
    return a.reshape(-1, order="F")


def devectorize(v: np.ndarray, d: int | None = None) -> Operator:
    """Inverse of vectorize; d is inferred when omitted."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if d is None:
        d = math.isqrt(v.shape[0])
    if d * d != v.shape[0]:
        raise ShapeError(f"vector length {v.shape[0]} is not a perfect square d**2")
    return v.reshape(d, d, order="F")


def left_mult(a: Operator) -> Operator:
    """Superoperator of X -> a X."""
    n = a.shape[0]
    check_size(n * n, n * n, "superoperator")
    return np.kron(np.eye(n, dtype=np.complex128), a)


def right_mult(b: Operator) -> Operator:
    """Superoperator of X -> X b."""
    n = b.shape[0]
    check_size(n * n, n * n, "superoperator")
    return np.kron(b.T, np.eye(n, dtype=np.complex128))


def lindblad_superop(hamiltonian: Operator | None, jumps: Sequence[Operator], d: int) -> Operator:
    """Matrix of X -> -i[H, X] + sum_k (L X L^dag - 1/2 {L^dag L, X})."""
    check_size(d * d, d * d, "superoperator")
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    if hamiltonian is not None:
        out += -1j * (left_mult(hamiltonian) - right_mult(hamiltonian))
    for op in jumps:
        gram = dagger(op) @ op
        out += np.kron(op.conj(), op) - 0.5 * (left_mult(gram) + right_mult(gram))
    return out


def liouvillian(spec: LindbladSpec) -> SuperOperator:
    """Superoperator of the full Lindbladian of spec."""
    h = spec.hamiltonian if spec.J else None
    return SuperOperator(spec.dim, lindblad_superop(h, spec.jump_ops, spec.dim))


def lindblad_generator(jump: Operator) -> SuperOperator:
    """Superoperator of the single-jump map X -> M X M^dag - 1/2 {M^dag M, X}."""
    jump = as_operator(jump, "jump operator")
    return SuperOperator(jump.shape[0], lindblad_superop(None, [jump], jump.shape[0]))


def lindblad_action(x: Operator, jump: Operator) -> Operator:
    """M X M^dag - 1/2 {M^dag M, X} without forming a superoperator."""
    gram = dagger(jump) @ jump
    return jump @ x @ dagger(jump) - 0.5 * (gram @ x + x @ gram)


def apply_lindbladian(spec: LindbladSpec, x: Operator) -> Operator:
    """Direct evaluation of L(x) from the defining formula."""
    out = np.zeros_like(np.asarray(x, dtype=np.complex128))
    if spec.J:
        h = spec.hamiltonian
        out += -1j * (h @ x - x @ h)
    for op in spec.jump_ops:
        out += lindblad_action(x, op)
    return out


def exact_channel(spec: LindbladSpec, t: float, tol: float | None = None) -> SuperOperator:
    """e^{L t}, the oracle every algorithm is compared against."""
    if t < 0:
        raise ArgumentError(f"evolution time must be nonnegative, got {t}")
    gen = liouvillian(spec)
    return SuperOperator(spec.dim, mat_exp(gen.mat * t, tol))


def apply_superop(
    superop: SuperOperator, rho: DensityMatrix, tol: float | None = None
) -> DensityMatrix:
    """
    Apply a channel to a density matrix and re-validate the result.

    Raises:
        ShapeError: dimensions differ
        NumericalIntegrityError: output is not a density matrix within tol
            (default APPLY_TOL, or the configured invariant tolerance)
    """
    if superop.d != rho.d:
        raise ShapeError(f"channel acts on d={superop.d} but the state has d={rho.d}")
    if tol is None:
        tol = invariant_tol(APPLY_TOL)
    return DensityMatrix(superop.apply(rho.mat), tol=tol)


# ---------------------------------------------------------------------------
# Action-based evolution for large registers
# ---------------------------------------------------------------------------


def default_substeps(delta: float, jump: Operator) -> int:
    """ceil(10 * delta * ||M||_2^2) + 1."""
    return math.ceil(10.0 * delta * schatten_norm(jump, 2) ** 2) + 1


def apply_lindblad_action(
    rho: Operator,
    jump: Operator,
    delta: float,
    substeps: int | None = None,
    order: int = DEFAULT_ACTION_ORDER,
) -> Operator:
    """
    e^{M delta}(rho) by a truncated Taylor series per substep.

    Args:
        rho: Operator on the same space as the jump operator
        jump: Lindblad operator M
        delta: Evolution time
        substeps: Number of equal substeps (default from default_substeps)
        order: Series order per substep

    Raises:
        StepSizeError: series terms grow, so the substep is too long
    """
    rho = as_operator(rho, "state")
    jump = as_operator(jump, "jump operator")
    if rho.shape != jump.shape:
        raise ShapeError(f"state shape {rho.shape} does not match jump shape {jump.shape}")
    if delta < 0:
        raise ArgumentError(f"delta must be nonnegative, got {delta}")
    if delta == 0:
        return rho.copy()
    if substeps is None:
        substeps = default_substeps(delta, jump)
    if substeps < 1 or order < 1:
        raise ArgumentError(f"substeps and order must be positive, got {substeps}, {order}")

    h = delta / substeps
    out = rho
    for _ in range(substeps):
        term = out
        acc = out.copy()
        prev_norm = float(np.linalg.norm(term))
        for k in range(1, order + 1):
            term = lindblad_action(term, jump) * (h / k)
            acc += term
            norm = float(np.linalg.norm(term))
            if k > 1 and norm > prev_norm > 0:
                raise StepSizeError(
                    f"series term {k} grew from {prev_norm:.2e} to {norm:.2e} at substep "
                    f"length {h:.3e}; increase substeps (currently {substeps})"
                )
            prev_norm = norm
        out = acc
    return out


def resolve_channel_mode(total_dim: int, requested: str = "auto") -> str:
    """
    Pick 'dense' or 'action' for evolving a register of total_dim.

    'auto' is dense when total_dim <= DENSE_DIM_LIMIT and the superoperator
    fits under the entry limit.
    """
    if requested in ("dense", "action"):
        return requested
    if requested != "auto":
        raise ArgumentError(f"channel_mode must be auto, dense or action, got {requested!r}")
    fits = total_dim**4 <= LIMITS.max_entries
    mode = "dense" if total_dim <= DENSE_DIM_LIMIT and fits else "action"
    logger.debug("channel mode for total dim %d: %s", total_dim, mode)
    return mode


class JumpEvolution:
    """
    Callable X -> e^{M delta}(X) on the full register.

    Dense mode exponentiates the superoperator once; action mode applies the
    substepped series on each call.
    """

    def __init__(
        self,
        jump: Operator,
        delta: float,
        channel_mode: str = "auto",
        substeps: int | None = None,
        order: int = DEFAULT_ACTION_ORDER,
        tol: float | None = None,
    ):
        self.jump = as_operator(jump, "jump operator")
        self.delta = float(delta)
        self.dim = self.jump.shape[0]
        self.mode = resolve_channel_mode(self.dim, channel_mode)
        self.substeps = substeps
        self.order = order
        self._propagator: Operator | None = None
        if self.mode == "dense":
            gen = lindblad_generator(self.jump)
            self._propagator = mat_exp(gen.mat * self.delta, tol)

    def __call__(self, x: Operator) -> Operator:
        if self._propagator is not None:
            return devectorize(self._propagator @ vectorize(x), self.dim)
        return apply_lindblad_action(x, self.jump, self.delta, self.substeps, self.order)


# ---------------------------------------------------------------------------
# Channel assembly and distances
# ---------------------------------------------------------------------------


def matrix_unit(d: int, i: int, j: int) -> Operator:
    e = np.zeros((d, d), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def superop_from_action(apply: ChannelAction, d: int) -> SuperOperator:
    """Assemble a linear map from its action on the d**2 matrix units."""
    check_size(d * d, d * d, "superoperator")
    mat = np.zeros((d * d, d * d), dtype=np.complex128)
    for j in range(d):
        for i in range(d):
            mat[:, j * d + i] = vectorize(apply(matrix_unit(d, i, j)))
    return SuperOperator(d, mat)


def choi_of(apply: ChannelAction, d: int) -> ChoiState:
    """(I kron N)(Phi) from the action of N on matrix units."""
    blocks = [[apply(matrix_unit(d, i, j)) / d for j in range(d)] for i in range(d)]
    d_out = blocks[0][0].shape[0]
    return ChoiState(d, d_out, np.block(blocks))


def choi_trace_distance(a: ChoiState, b: ChoiState) -> float:
    """1/2 ||a - b||_1, the diamond-distance lower bound at Phi."""
    if a.mat.shape != b.mat.shape:
        raise ShapeError(f"Choi shapes differ: {a.mat.shape} vs {b.mat.shape}")
    diff = a.mat - b.mat
    diff = (diff + dagger(diff)) / 2
    return float(0.5 * np.sum(np.abs(scipy.linalg.eigvalsh(diff))))


def channel_distance(a: SuperOperator, b: SuperOperator) -> float:
    """Choi trace distance between two superoperators."""
    return choi_trace_distance(a.choi(), b.choi())


def is_cptp(superop: SuperOperator, tol: float | None = None) -> CptpDiagnostic:
    """
    Check complete positivity and trace preservation via the Choi state.

    Reports the minimum Choi eigenvalue and ||d * Tr_out[Choi] - I||_2.
    """
    choi = superop.choi()
    d = superop.d
    herm = (choi.mat + dagger(choi.mat)) / 2
    min_eig = float(np.min(scipy.linalg.eigvalsh(herm)))
    reduced = partial_trace(choi.mat, SystemDims((d, d)), keep=[0]) * d
    tp_dev = schatten_norm(reduced - np.eye(d), 2)
    if tol is None:
        tol = invariant_tol(CPTP_TOL)
    return CptpDiagnostic(min_eigenvalue=min_eig, tp_deviation=tp_dev, tol=tol)
