"""
Dense complex linear algebra shared by every other module.

Operators are plain ``numpy.ndarray`` values of dtype complex128, stored
row-major. Subsystem index 0 is the leftmost tensor factor, so a register
layout (S, P, Q) is ``SystemDims((d, d, d))``.

Size guard: any constructed dense object is checked against
``LIMITS.max_entries`` (default 2**20 entries) before allocation.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, NumericalIntegrityError, ShapeError, SizeError

logger = logging.getLogger(__name__)

Operator = np.ndarray


@dataclass
class Limits:
    """Process-wide numerical knobs."""

    max_entries: int = 2**20
    default_tol: float = 1e-12
    # None keeps each check's own tolerance
    invariant_tol: float | None = None


LIMITS = Limits()


def configure(
    max_entries: int | None = None,
    default_tol: float | None = None,
    invariant_tol: float | None = None,
) -> Limits:
    """
    Adjust the global size guard and default tolerances.

    Args:
        max_entries: Largest number of matrix entries any dense object may hold
        default_tol: Tolerance used by mat_exp when none is passed
        invariant_tol: Tolerance for density, CPTP and identity checks, replacing
                       the per-check defaults

    Returns:
        The updated Limits instance
    """
    if max_entries is not None:
        if max_entries < 1:
            raise ArgumentError(f"max_entries must be positive, got {max_entries}")
        LIMITS.max_entries = int(max_entries)
    if default_tol is not None:
        if not default_tol > 0:
            raise ArgumentError(f"default_tol must be positive, got {default_tol}")
        LIMITS.default_tol = float(default_tol)
    if invariant_tol is not None:
        if not invariant_tol > 0:
            raise ArgumentError(f"invariant_tol must be positive, got {invariant_tol}")
        LIMITS.invariant_tol = float(invariant_tol)
    return LIMITS


def invariant_tol(fallback: float) -> float:
    """The configured invariant tolerance, or ``fallback`` when none is set."""
    return fallback if LIMITS.invariant_tol is None else LIMITS.invariant_tol


def check_size(rows: int, cols: int, what: str = "operator") -> None:
    """Raise SizeError if a rows x cols dense object exceeds the entry limit."""
    entries = rows * cols
    if entries > LIMITS.max_entries:
        raise SizeError(
            f"{what} of shape {rows}x{cols} has {entries} entries, above the limit "
            f"{LIMITS.max_entries}. Lower the dimension or raise it with "
            "tensor_utils.configure(max_entries=...)"
        )


@dataclass(frozen=True)
class SystemDims:
    """Ordered subsystem dimensions of a composite register."""

    dims: tuple[int, ...]
    total: int = field(init=False)

    def __post_init__(self) -> None:
        dims = tuple(int(x) for x in self.dims)
        if not dims:
            raise ShapeError("SystemDims needs at least one subsystem")
        if any(x < 1 for x in dims):
            raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "total", math.prod(dims))

    def __len__(self) -> int:
        return len(self.dims)

    def permuted(self, perm: Sequence[int]) -> SystemDims:
        """Dims after reordering subsystems so that new[i] = old[perm[i]]."""
        return SystemDims(tuple(self.dims[p] for p in perm))

    @classmethod
    def uniform(cls, d: int, count: int) -> SystemDims:
        """``count`` subsystems of equal dimension ``d``."""
        return cls((d,) * count)


def as_operator(a: object, name: str = "operator") -> Operator:
    """
    Coerce input to a finite complex128 matrix.

    Raises:
        ShapeError: input is not two-dimensional
        NumericalIntegrityError: input holds NaN or Inf
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalIntegrityError(f"{name} contains NaN or Inf entries")
    return arr


def dagger(a: Operator) -> Operator:
    """Hermitian conjugate."""
    return a.conj().T


def _require_square(a: Operator, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")


def kron(a: Operator, b: Operator) -> Operator:
    """Kronecker product with the size guard applied before allocation."""
    a = as_operator(a, "left factor")
    b = as_operator(b, "right factor")
    check_size(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], "Kronecker product")
    return np.kron(a, b)


def kron_all(factors: Sequence[Operator]) -> Operator:
    """Left-to-right Kronecker product of a non-empty sequence."""
    if not factors:
        raise ShapeError("kron_all needs at least one factor")
    out = as_operator(factors[0])
    for f in factors[1:]:
        out = kron(out, f)
    return out


def _check_dims(m: Operator, dims: SystemDims, name: str) -> None:
    _require_square(m, name)
    if m.shape[0] != dims.total:
        raise ShapeError(
            f"{name} has dimension {m.shape[0]} but subsystem dims {dims.dims} "
            f"multiply to {dims.total}"
        )


def partial_trace(m: Operator, dims: SystemDims, keep: Sequence[int]) -> Operator:
    """
    Trace out every subsystem not listed in ``keep``.

    Args:
        m: Square operator on dims.total
        dims: Subsystem dimensions
        keep: Indices of subsystems to retain (order is normalized ascending)

    Returns:
        Operator on the kept subsystems; 1x1 [Tr m] when keep is empty
    """
    m = as_operator(m)
    _check_dims(m, dims, "partial_trace input")
    n = len(dims)
    kept = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in kept):
        raise ShapeError(f"keep indices {list(keep)} out of range for {n} subsystems")
    if len(kept) == n:
        return m.copy()

    tensor = m.reshape(dims.dims + dims.dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ShapeError(f"partial_trace supports at most {len(letters) // 2} subsystems")
    rows = [letters[i] for i in range(n)]
    cols = [letters[i] if i not in kept else letters[n + i] for i in range(n)]
    out = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, tensor)
    size = math.prod(dims.dims[i] for i in kept) if kept else 1
    return reduced.reshape(size, size)


def _check_perm(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ArgumentError(f"{perm} is not a permutation of 0..{n - 1}")
    return perm


def permute_subsystems(m: Operator, dims: SystemDims, perm: Sequence[int]) -> Operator:
    """
    Reorder tensor factors so that new subsystem i is old subsystem perm[i].

    Equivalent to conjugating m by the subsystem-permutation unitary.
    """
    m = as_operator(m)
    _check_dims(m, dims, "permute_subsystems input")
    n = len(dims)
    perm = _check_perm(perm, n)
    tensor = m.reshape(dims.dims + dims.dims)
    axes = list(perm) + [n + p for p in perm]
    return tensor.transpose(axes).reshape(dims.total, dims.total)


def permute_vector(v: np.ndarray, dims: SystemDims, perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a state vector (same convention as permute_subsystems)."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != dims.total:
        raise ShapeError(f"vector length {v.shape[0]} does not match dims {dims.dims}")
    perm = _check_perm(perm, len(dims))
    return v.reshape(dims.dims).transpose(perm).reshape(dims.total)


def compose_permutations(first: Sequence[int], second: Sequence[int]) -> tuple[int, ...]:
    """Single permutation equal to applying ``first`` then ``second``."""
    return tuple(first[s] for s in second)


def invert_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inverse = [0] * len(perm)
    for i, p in enumerate(perm):
        inverse[p] = i
    return tuple(inverse)


def gamma_vector(d: int) -> np.ndarray:
    """Unnormalized maximally entangled vector sum_j |j>|j>, length d**2."""
    if d < 2:
        raise ArgumentError(f"dimension must be at least 2, got {d}")
    return np.eye(d, dtype=np.complex128).reshape(d * d)


def swap_operator(d: int) -> Operator:
    """SWAP on two d-dimensional factors: |i, j> -> |j, i>."""
    if d < 2:
        raise ArgumentError(f"dimension must be at least 2, got {d}")
    check_size(d * d, d * d, "SWAP")
    idx = np.arange(d * d)
    i, j = np.divmod(idx, d)
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    out[j * d + i, idx] = 1.0
    return out


def cycswap_operator(d: int, m: int) -> Operator:
    """
    Cyclic shift of m equal factors: |a1, a2, ..., am> -> |am, a1, ..., a(m-1)>.

    For m = 2 this is swap_operator(d).
    """
    if d < 2:
        raise ArgumentError(f"dimension must be at least 2, got {d}")
    if m < 2:
        raise ArgumentError(f"party count must be at least 2, got {m}")
    total = d**m
    check_size(total, total, "CYCSWAP")
    idx = np.arange(total)
    digits = np.unravel_index(idx, (d,) * m)
    shifted = (digits[-1],) + tuple(digits[:-1])
    target = np.ravel_multi_index(shifted, (d,) * m)
    out = np.zeros((total, total), dtype=np.complex128)
    out[target, idx] = 1.0
    return out


def mat_exp(a: Operator, tol: float | None = None) -> Operator:
    """
    Matrix exponential by scaling and squaring with a truncated Taylor series.

    Works for non-Hermitian input (Liouvillians). The matrix is scaled by
    2**-s until its 1-norm is at most 1/2, the series is summed until the
    next term falls below the tolerance, and the result is squared s times.

    Args:
        a: Square matrix
        tol: Relative accuracy target (defaults to LIMITS.default_tol)

    Returns:
        e**a
    """
    a = as_operator(a, "mat_exp input")
    _require_square(a, "mat_exp input")
    tol = LIMITS.default_tol if tol is None else tol
    if not tol > 0:
        raise ArgumentError(f"tol must be positive, got {tol}")

    n = a.shape[0]
    norm = float(np.linalg.norm(a, 1))
    squarings = 0
    if norm > 0.5:
        squarings = math.ceil(math.log2(norm / 0.5))
    scaled = a / (2.0**squarings)

    # squaring amplifies the truncation error roughly by 2**squarings
    threshold = tol * 2.0 ** (-squarings)
    result = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for k in range(1, 64):
        term = term @ scaled / k
        result += term
        term_norm = float(np.linalg.norm(term, 1))
        if term_norm <= threshold * float(np.linalg.norm(result, 1)) or term_norm == 0.0:
            break
    logger.debug("mat_exp n=%d norm=%.3e squarings=%d terms=%d", n, norm, squarings, k)

    for _ in range(squarings):
        result = result @ result
    return result


def schatten_norm(a: Operator, p: int = 2) -> float:
    """Schatten p-norm for p in {1, 2}: trace norm or Hilbert-Schmidt norm."""
    a = as_operator(a)
    if p == 2:
        return float(np.linalg.norm(a, "fro"))
    if p == 1:
        return float(np.sum(np.linalg.svd(a, compute_uv=False)))
    raise ArgumentError(f"only Schatten p in {{1, 2}} is supported, got {p}")


def hs_inner(a: Operator, b: Operator) -> complex:
    """Hilbert-Schmidt inner product Tr[a^dagger b]."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise ShapeError(f"hs_inner shapes differ: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def is_hermitian(a: Operator, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def outer(v: np.ndarray, w: np.ndarray | None = None) -> Operator:
    """|v><w| (|v><v| when w is omitted)."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    w = v if w is None else np.asarray(w, dtype=np.complex128).reshape(-1)
    check_size(v.shape[0], w.shape[0], "outer product")
    return np.outer(v, w.conj())
