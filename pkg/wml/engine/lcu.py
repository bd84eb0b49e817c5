"""
Statevector simulation of the linear-combination-of-unitaries preparation of
program states, with amplitude amplification and query accounting.

The ancilla has one level per term (no binary encoding). The circuit is
    A = (U_A^dag kron I) SELECT (U_A kron I)
applied to |0>_anc |anchor>; the ancilla-|0> block of the result is
(1 / lambda) sum_k c_k U_k |anchor>.

Query convention: the base preparation costs one U_A and one select-U; every
amplification round costs one each of select-U, select-U^dag, U_A and U_A^dag.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from wml.common.errors import ArgumentError, NumericalIntegrityError, ShapeError, SpecError
from wml.common.program_utils import ProgramState, encode_operator, maximally_entangled_state
from wml.common.tensor_utils import Operator, SystemDims, check_size, kron_all, outer

from .specs import LinearSpec, PolySpec

logger = logging.getLogger(__name__)

# Success probability treated as already amplified
AA_TARGET = 0.999


@dataclass(frozen=True)
class StateVector:
    """Unit vector on a composite register."""

    dims: SystemDims
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.dims.total:
            raise ShapeError(f"state length {amps.shape[0]} does not match dims {self.dims.dims}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-10:
            raise NumericalIntegrityError(f"state vector norm is {norm:.12f}, expected 1")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, dims: SystemDims, index: int = 0) -> StateVector:
        amps = np.zeros(dims.total, dtype=np.complex128)
        amps[index] = 1.0
        return cls(dims, amps)

    def fidelity(self, other: StateVector | np.ndarray) -> float:
        vec = other.amps if isinstance(other, StateVector) else np.asarray(other).reshape(-1)
        return float(abs(np.vdot(self.amps, vec)) ** 2)


@dataclass
class LcuReport:
    """Result of an LCU preparation."""

    prepared: StateVector
    success_prob: float
    aa_rounds: int
    amplified_success_prob: float
    lam: float
    c: float
    queries: dict[str, int] = field(default_factory=dict)
    fidelity: float | None = None

    @property
    def total_queries(self) -> int:
        return sum(self.queries.values())

    @property
    def residual_infidelity(self) -> float:
        """Failure probability left after the chosen number of AA rounds."""
        return 1.0 - self.amplified_success_prob

    def to_dict(self) -> dict[str, Any]:
        return {
            "success_prob": self.success_prob,
            "expected_success_prob": self.c / self.lam**2,
            "aa_rounds": self.aa_rounds,
            "amplified_success_prob": self.amplified_success_prob,
            "residual_infidelity": self.residual_infidelity,
            "lambda": self.lam,
            "c": self.c,
            "queries": dict(sorted(self.queries.items())),
            "total_queries": self.total_queries,
            "fidelity": self.fidelity,
        }


def complete_unitary(
    target: StateVector | np.ndarray, anchor: StateVector | np.ndarray
) -> Operator:
    """
    Unitary U with U |anchor> = |target> and <target|U|anchor> real positive.

    Built from two Householder reflections (the first flips the anchor, the
    second maps the flipped anchor onto the phase-aligned target) and a global
    phase.
    """
    a = anchor.amps if isinstance(anchor, StateVector) else np.asarray(anchor, dtype=np.complex128)
    b = target.amps if isinstance(target, StateVector) else np.asarray(target, dtype=np.complex128)
    a = a.reshape(-1)
    b = b.reshape(-1)
    if a.shape != b.shape:
        raise ShapeError(f"target length {b.shape[0]} differs from anchor length {a.shape[0]}")
    for name, v in (("anchor", a), ("target", b)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ArgumentError(f"{name} must be a unit vector")

    inner = complex(np.vdot(a, b))
    phase = inner / abs(inner) if abs(inner) > 1e-15 else 1.0
    aligned = b / phase
    n = a.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    flip = eye - 2.0 * outer(a)
    w = -a - aligned
    reflect = eye - 2.0 * outer(w) / float(np.vdot(w, w).real)
    return phase * (reflect @ flip)


def _ancilla_unitary(coeffs: Sequence[float]) -> Operator:
    alpha = np.sqrt(np.asarray(coeffs, dtype=float) / float(np.sum(coeffs))).astype(np.complex128)
    anchor = np.zeros(len(coeffs), dtype=np.complex128)
    anchor[0] = 1.0
    return complete_unitary(alpha, anchor)


def _select(unitaries: Sequence[Operator]) -> Operator:
    """sum_k |k><k| kron U_k."""
    m = len(unitaries)
    n = unitaries[0].shape[0]
    out = np.zeros((m * n, m * n), dtype=np.complex128)
    for k, u in enumerate(unitaries):
        out[k * n : (k + 1) * n, k * n : (k + 1) * n] = u
    return out


def best_aa_rounds(success_prob: float) -> tuple[int, float]:
    """
    Round count maximizing sin^2((2r + 1) theta), sin(theta)^2 = success_prob.

    Returns (rounds, amplified probability); zero rounds when the probability
    already reaches AA_TARGET.
    """
    if not 0 < success_prob <= 1:
        raise ArgumentError(f"success probability must lie in (0, 1], got {success_prob}")
    if success_prob >= AA_TARGET:
        return 0, success_prob
    theta = math.asin(math.sqrt(success_prob))
    nominal = max(0, round(math.pi / (4 * theta) - 0.5))
    best_r, best_p = 0, success_prob
    for r in range(max(0, nominal - 1), nominal + 2):
        p = math.sin((2 * r + 1) * theta) ** 2
        if p > best_p + 1e-15:
            best_r, best_p = r, p
    return best_r, best_p


def _simulate(
    coeffs: Sequence[float],
    unitaries: Sequence[Operator],
    anchor: np.ndarray,
    sys_dims: SystemDims,
) -> LcuReport:
    m = len(coeffs)
    n = sys_dims.total
    check_size(m * n, m * n, "LCU circuit")
    u_a = np.kron(_ancilla_unitary(coeffs), np.eye(n, dtype=np.complex128))
    circuit = u_a.conj().T @ _select(unitaries) @ u_a

    initial = np.zeros(m * n, dtype=np.complex128)
    initial[:n] = anchor
    out = circuit @ initial
    block = out[:n]
    success_prob = float(np.vdot(block, block).real)
    lam = float(np.sum(coeffs))
    c = success_prob * lam**2

    rounds, expected = best_aa_rounds(success_prob)
    good = np.zeros(m * n)
    good[:n] = 1.0
    state = out
    for _ in range(rounds):
        state = state - 2.0 * good * state
        state = circuit.conj().T @ state
        state = state - 2.0 * initial * np.vdot(initial, state)
        state = -(circuit @ state)
    amplified = float(np.vdot(state[:n], state[:n]).real)
    if abs(amplified - expected) > 1e-8:
        raise NumericalIntegrityError(
            f"amplitude amplification reached {amplified:.10f}, expected {expected:.10f}"
        )
    if amplified < AA_TARGET:
        logger.warning("AA residual infidelity %.3e after %d rounds", 1 - amplified, rounds)

    queries = {
        "select_u": 1 + rounds,
        "select_u_dag": rounds,
        "u_a": 1 + rounds,
        "u_a_dag": rounds,
    }
    prepared = StateVector(sys_dims, block / math.sqrt(success_prob))
    return LcuReport(
        prepared=prepared,
        success_prob=success_prob,
        aa_rounds=rounds,
        amplified_success_prob=amplified,
        lam=lam,
        c=c,
        queries=queries,
    )


def lcu_prepare_linear(terms: Sequence[tuple[float, ProgramState]]) -> LcuReport:
    """
    Prepare (1 / sqrt(c)) sum_k c_k |psi_k> with U_k |0> = |psi_k>.

    Raises:
        SpecError: no terms
        ArgumentError: a coefficient is not positive
    """
    if not terms:
        raise SpecError("LCU preparation needs at least one term")
    coeffs = []
    for k, (coeff, _) in enumerate(terms):
        if coeff <= 0:
            raise ArgumentError(f"coefficient c_{k + 1} = {coeff} must be positive")
        coeffs.append(float(coeff))
    d = terms[0][1].d
    if any(psi.d != d for _, psi in terms):
        raise ShapeError("all program states must share one dimension")
    anchor = np.zeros(d * d, dtype=np.complex128)
    anchor[0] = 1.0
    unitaries = [complete_unitary(psi.vec, anchor) for _, psi in terms]
    report = _simulate(coeffs, unitaries, anchor, SystemDims((d, d)))

    direct = sum(c * psi.vec for c, psi in zip(coeffs, (p for _, p in terms), strict=True))
    report.fidelity = report.prepared.fidelity(direct / np.linalg.norm(direct))
    return report


def lcu_prepare_from_spec(spec: LinearSpec) -> LcuReport:
    """lcu_prepare_linear on the encodings of a LinearSpec."""
    return lcu_prepare_linear([(c, encode_operator(op)) for c, op in spec.terms])


def lcu_prepare_poly(poly: PolySpec) -> LcuReport:
    """
    Prepare (1 / sqrt(c)) sum_s c_s |phi_s> in interleaved register order.

    Each W_s applies U_{s[1]} ... U_{s[|s|]} to the first |s| pairs of
    |Phi>^{D} and the identity to the rest, with U_k |Phi> = |psi_k>.
    """
    d, D = poly.d, poly.D
    pair = d * d
    check_size(len(poly.strings) * pair**D, len(poly.strings) * pair**D, "polynomial LCU circuit")
    phi = maximally_entangled_state(d).vec
    per_operator = [complete_unitary(encode_operator(op).vec, phi) for op in poly.operators]
    eye = np.eye(pair, dtype=np.complex128)

    unitaries = []
    for s, _ in poly.strings:
        factors = [per_operator[ch - 1] for ch in s] + [eye] * (D - len(s))
        unitaries.append(kron_all(factors))
    anchor = np.ones(1, dtype=np.complex128)
    for _ in range(D):
        anchor = np.kron(anchor, phi)

    coeffs = [c for _, c in poly.strings]
    report = _simulate(coeffs, unitaries, anchor, SystemDims.uniform(d, 2 * D))
    direct = poly.program_vector()
    report.fidelity = report.prepared.fidelity(direct / np.linalg.norm(direct))
    return report
