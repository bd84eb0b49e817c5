"""
Run configuration, run reports and the linear / polynomial jump specs.

Also holds the JSON codec for complex matrices: complex numbers are [re, im]
pairs, matrices are row-major nested lists.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from wml.common.channel_utils import DensityMatrix, LindbladSpec, SuperOperator
from wml.common.errors import ArgumentError, ConfigError, SpecError
from wml.common.program_utils import encode_operator, maximally_entangled_state
from wml.common.tensor_utils import Operator, as_operator, check_size, schatten_norm

MODES = ("expectation", "monte_carlo")
ORDERINGS = ("forward", "palindromic")
CHANNEL_MODES = ("auto", "dense", "action")


# ---------------------------------------------------------------------------
# JSON codec
# ---------------------------------------------------------------------------


def complex_from_json(value: Any) -> complex:
    """Accept a real number or an [re, im] pair."""
    if isinstance(value, int | float):
        return complex(value)
    if isinstance(value, list | tuple) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"expected a number or [re, im] pair, got {value!r}")


def complex_to_json(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def matrix_from_json(rows: Any, name: str = "matrix") -> Operator:
    """Row-major nested list of complex entries to an operator."""
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{name} must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError(f"{name} rows have unequal lengths")
    return np.array([[complex_from_json(x) for x in r] for r in rows], dtype=np.complex128)


def matrix_to_json(mat: Operator) -> list[list[list[float]]]:
    return [[complex_to_json(complex(x)) for x in row] for row in np.asarray(mat)]


# ---------------------------------------------------------------------------
# Run configuration and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """
    Settings for a single algorithm run.

    Attributes:
        t: Evolution time (>= 0)
        n: Number of steps / program-state rounds (>= 1)
        mode: 'expectation' (averaged channel) or 'monte_carlo' (sampled branches)
        seed: Seed for monte_carlo mode
        ordering: 'forward' or 'palindromic' (Algorithm 2 only)
        channel_mode: 'auto', 'dense' or 'action' for the e^{M delta} subroutine
        substeps: Action-mode substeps (None picks ceil(10 delta ||M||^2) + 1)
        order: Action-mode series order
        tol: mat_exp tolerance (None uses the global default)
    """

    t: float
    n: int
    mode: str = "expectation"
    seed: int | None = None
    ordering: str = "palindromic"
    channel_mode: str = "auto"
    substeps: int | None = None
    order: int = 8
    tol: float | None = None

    def __post_init__(self) -> None:
        if not self.t >= 0:
            raise ArgumentError(f"t must be nonnegative, got {self.t}")
        if self.n < 1:
            raise ArgumentError(f"n must be at least 1, got {self.n}")
        if self.mode not in MODES:
            raise ArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.ordering not in ORDERINGS:
            raise ArgumentError(f"ordering must be one of {ORDERINGS}, got {self.ordering!r}")
        if self.channel_mode not in CHANNEL_MODES:
            raise ArgumentError(
                f"channel_mode must be one of {CHANNEL_MODES}, got {self.channel_mode!r}"
            )
        if self.substeps is not None and self.substeps < 1:
            raise ArgumentError(f"substeps must be positive, got {self.substeps}")
        if self.order < 1:
            raise ArgumentError(f"order must be positive, got {self.order}")

    @property
    def monte_carlo(self) -> bool:
        return self.mode == "monte_carlo"


@dataclass
class RunReport:
    """Output of an algorithm run plus resource accounting."""

    algorithm: int
    t: float
    n: int
    mode: str
    final: DensityMatrix | None = None
    channel: SuperOperator | None = None
    consumed: dict[str, int] = field(default_factory=dict)
    error_vs_oracle: float | None = None
    wall_time: float = 0.0
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def total_consumed(self) -> int:
        return sum(self.consumed.values())

    def to_dict(self, include_state: bool = True) -> dict[str, Any]:
        data: dict[str, Any] = {
            "algorithm": self.algorithm,
            "t": self.t,
            "n": self.n,
            "mode": self.mode,
            "consumed": dict(sorted(self.consumed.items())),
            "total_consumed": self.total_consumed,
            "error_vs_oracle": self.error_vs_oracle,
            "wall_time": self.wall_time,
        }
        data.update(self.extras)
        if include_state and self.final is not None:
            data["final"] = matrix_to_json(self.final.mat)
        return data


# ---------------------------------------------------------------------------
# Linear combination spec
# ---------------------------------------------------------------------------


def _require_unit(op: Operator, name: str) -> None:
    norm = schatten_norm(op, 2)
    if abs(norm - 1.0) > 1e-10:
        raise ArgumentError(
            f"{name} must have unit Hilbert-Schmidt norm, got {norm:.12f}; normalize it first"
        )


@dataclass(frozen=True)
class LinearSpec:
    """Single jump L = sum_k c_k L_k with c_k > 0 and unit-norm L_k."""

    terms: tuple[tuple[float, Operator], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise SpecError("linear spec needs at least one (c_k, L_k) term")
        terms = []
        d = None
        for k, (coeff, op) in enumerate(self.terms):
            coeff = float(np.real(coeff))
            if coeff <= 0:
                raise ArgumentError(f"coefficient c_{k + 1} = {coeff} must be positive")
            op = as_operator(op, f"L_{k + 1}")
            if d is not None and op.shape[0] != d:
                raise SpecError(f"L_{k + 1} has dimension {op.shape[0]}, expected {d}")
            d = op.shape[0]
            _require_unit(op, f"L_{k + 1}")
            terms.append((coeff, op))
        object.__setattr__(self, "terms", tuple(terms))
        if schatten_norm(self.operator, 2) <= 1e-12:
            raise ArgumentError("linear combination cancels to zero; nothing to simulate")

    @property
    def d(self) -> int:
        return int(self.terms[0][1].shape[0])

    @property
    def K(self) -> int:
        return len(self.terms)

    @property
    def coefficients(self) -> list[float]:
        return [c for c, _ in self.terms]

    @property
    def lam(self) -> float:
        """Sum of coefficients."""
        return float(sum(self.coefficients))

    @property
    def operator(self) -> Operator:
        zero = np.zeros((self.d, self.d), dtype=np.complex128)
        return sum((c * op for c, op in self.terms), zero)

    @property
    def c(self) -> float:
        """||sum_k c_k L_k||_2^2."""
        return schatten_norm(self.operator, 2) ** 2

    def target_spec(self) -> LindbladSpec:
        return LindbladSpec(jump_ops=(self.operator,))


# ---------------------------------------------------------------------------
# Polynomial spec
# ---------------------------------------------------------------------------


def parse_string(s: str | Sequence[int]) -> tuple[int, ...]:
    """'12' or [1, 2] to (1, 2); characters are 1-based operator indices."""
    if isinstance(s, str):
        if not s or not s.isdigit():
            raise SpecError(f"string {s!r} must be a non-empty run of digits")
        return tuple(int(ch) for ch in s)
    out = tuple(int(x) for x in s)
    if not out:
        raise SpecError("polynomial strings must be non-empty")
    return out


@dataclass(frozen=True)
class PolySpec:
    """
    Single jump L = sum_s c_s T_s with T_s = L_{s[1]} ... L_{s[|s|]}.

    Strings shorter than the degree D are padded with |Phi>, which encodes
    I / sqrt(d); the simulated jump is therefore
    sum_s c_s d^{-(D - |s|)/2} T_s (see effective_operator).
    """

    operators: tuple[Operator, ...]
    strings: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self) -> None:
        if not self.operators:
            raise SpecError("polynomial spec needs at least one operator L_k")
        if not self.strings:
            raise SpecError("polynomial spec needs at least one string; the string set is empty")
        ops = []
        d = None
        for k, op in enumerate(self.operators):
            op = as_operator(op, f"L_{k + 1}")
            if d is not None and op.shape[0] != d:
                raise SpecError(f"L_{k + 1} has dimension {op.shape[0]}, expected {d}")
            d = op.shape[0]
            _require_unit(op, f"L_{k + 1}")
            ops.append(op)
        strings = []
        for s, coeff in self.strings:
            s = parse_string(s)
            coeff = float(np.real(coeff))
            if coeff <= 0:
                raise SpecError(f"coefficient of string {s} must be positive, got {coeff}")
            if any(ch < 1 or ch > len(ops) for ch in s):
                raise SpecError(f"string {s} uses characters outside 1..{len(ops)}")
            strings.append((s, coeff))
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "strings", tuple(strings))

    @property
    def d(self) -> int:
        return int(self.operators[0].shape[0])

    @property
    def K(self) -> int:
        return len(self.operators)

    @property
    def D(self) -> int:
        return max(len(s) for s, _ in self.strings)

    @property
    def lam(self) -> float:
        return float(sum(c for _, c in self.strings))

    def string_product(self, s: Sequence[int]) -> Operator:
        """T_s = L_{s[1]} ... L_{s[|s|]}."""
        out = np.eye(self.d, dtype=np.complex128)
        for ch in s:
            out = out @ self.operators[ch - 1]
        return out

    def component_vector(self, s: Sequence[int]) -> np.ndarray:
        """phi_s in interleaved order (P1 Q1 ... PD QD), padded with |Phi>."""
        check_size(self.d ** (2 * self.D), 1, "polynomial program state")
        vec = np.ones(1, dtype=np.complex128)
        for ch in s:
            vec = np.kron(vec, encode_operator(self.operators[ch - 1]).vec)
        phi = maximally_entangled_state(self.d).vec
        for _ in range(self.D - len(s)):
            vec = np.kron(vec, phi)
        return vec

    def program_vector(self) -> np.ndarray:
        """Unnormalized sum_s c_s phi_s (interleaved order)."""
        return sum(c * self.component_vector(s) for s, c in self.strings)

    @property
    def c(self) -> float:
        """||sum_s c_s phi_s||^2."""
        return float(np.linalg.norm(self.program_vector()) ** 2)

    def effective_operator(self) -> Operator:
        """sum_s c_s d^{-(D - |s|)/2} T_s, the jump the algorithm simulates."""
        out = np.zeros((self.d, self.d), dtype=np.complex128)
        for s, coeff in self.strings:
            out += coeff * self.d ** (-(self.D - len(s)) / 2) * self.string_product(s)
        return out

    def target_spec(self) -> LindbladSpec:
        return LindbladSpec(jump_ops=(self.effective_operator(),))

    @property
    def log_d_ratio(self) -> float:
        """|S| / log2(d); the construction assumes this stays O(polylog d)."""
        return len(self.strings) / math.log2(self.d)
