"""
Interaction operators and per-step reduced channels.

Register layout for jump steps is (S, P1 ... PD, Q1 ... QD): the system,
then the "operator" halves of the program-state pairs, then their partners.
Program states are built pair by pair (P1 Q1 P2 Q2 ...) and permuted into
that layout with interleaved_to_canonical before use.
"""

from __future__ import annotations

import logging

import numpy as np

from wml.common.channel_utils import JumpEvolution, SuperOperator, superop_from_action
from wml.common.errors import ArgumentError
from wml.common.tensor_utils import (
    Operator,
    SystemDims,
    check_size,
    cycswap_operator,
    gamma_vector,
    kron,
    mat_exp,
    outer,
    partial_trace,
    permute_vector,
    swap_operator,
)

from .specs import RunConfig

logger = logging.getLogger(__name__)


def build_M(d: int) -> Operator:
    """
    M = d^{-1/2} (I kron |Gamma><Gamma|)(SWAP kron I) on (S, P, Q), dimension d**3.
    """
    check_size(d**3, d**3, "interaction operator M")
    gamma = outer(gamma_vector(d))
    eye = np.eye(d, dtype=np.complex128)
    return kron(eye, gamma) @ kron(swap_operator(d), eye) / np.sqrt(d)


def interleaved_to_canonical(D: int) -> tuple[int, ...]:
    """Permutation taking (P1 Q1 ... PD QD) to (P1 ... PD Q1 ... QD)."""
    if D < 1:
        raise ArgumentError(f"degree must be at least 1, got {D}")
    return tuple(2 * i for i in range(D)) + tuple(2 * i + 1 for i in range(D))


def to_canonical(vec: np.ndarray, d: int, D: int) -> np.ndarray:
    """Reorder a program-state vector on D pairs into canonical register order."""
    return permute_vector(vec, SystemDims.uniform(d, 2 * D), interleaved_to_canonical(D))


def build_M_poly(d: int, D: int, scale: bool = True) -> Operator:
    """
    Polynomial interaction operator on (S, P1..PD, Q1..QD), dimension d**(2D+1).

    M = d^{-D/2} (I_S kron prod_l |Gamma><Gamma|_{Pl Ql}) (C kron I_Q) with C the
    cyclic shift |a0, a1, ..., aD> -> |a1, ..., aD, a0> on (S, P1..PD). This
    orientation makes the reduced action on pure inputs equal to
    L_1 L_2 ... L_D rho (...)^dag.

    Args:
        d: System dimension
        D: Degree (number of program-state pairs)
        scale: Apply the d^{-D/2} normalization (False only for negative controls)
    """
    if D < 1:
        raise ArgumentError(f"degree must be at least 1, got {D}")
    total = d ** (2 * D + 1)
    check_size(total, total, "interaction operator M")
    shift = cycswap_operator(d, D + 1).conj().T
    pairs = np.ones(1, dtype=np.complex128)
    for _ in range(D):
        pairs = np.kron(pairs, gamma_vector(d))
    projector = outer(to_canonical(pairs, d, D))
    eye_d = np.eye(d, dtype=np.complex128)
    m = kron(eye_d, projector) @ kron(shift, np.eye(d**D, dtype=np.complex128))
    if scale:
        m = m / d ** (D / 2)
    return m


def hamiltonian_unitary(d: int, sign: float, delta: float, tol: float | None = None) -> Operator:
    """e^{-i sign SWAP delta} on (S, P)."""
    return mat_exp(-1j * np.sign(sign) * delta * swap_operator(d), tol)


def hamiltonian_step_channel(
    sigma: Operator, sign: float, delta: float, tol: float | None = None
) -> SuperOperator:
    """X -> Tr_P[U (X kron sigma) U^dag] with U = e^{-i sign SWAP delta}."""
    d = sigma.shape[0]
    unitary = hamiltonian_unitary(d, sign, delta, tol)
    dims = SystemDims((d, d))

    def action(x: Operator) -> Operator:
        joint = unitary @ np.kron(x, sigma) @ unitary.conj().T
        return partial_trace(joint, dims, keep=[0])

    return superop_from_action(action, d)


def jump_step_channel(
    m: Operator, program: np.ndarray, d: int, delta: float, cfg: RunConfig | None = None
) -> SuperOperator:
    """
    X -> Tr_{P,Q}[e^{M delta}(X kron |phi><phi|)] assembled on matrix units.

    Args:
        m: Interaction operator on (S, registers)
        program: Unit program-state vector already in canonical register order
        d: System dimension
        delta: Evolution time of the interaction Lindbladian
        cfg: Supplies channel_mode, substeps, order and tol
    """
    rest = program.shape[0]
    if m.shape[0] != d * rest:
        raise ArgumentError(f"M has dimension {m.shape[0]}, expected {d} x {rest}")
    channel_mode = cfg.channel_mode if cfg else "auto"
    evolve = JumpEvolution(
        m,
        delta,
        channel_mode=channel_mode,
        substeps=cfg.substeps if cfg else None,
        order=cfg.order if cfg else 8,
        tol=cfg.tol if cfg else None,
    )
    logger.debug("jump step: total dim %d, delta %.3e, mode %s", m.shape[0], delta, evolve.mode)
    program_density = outer(program)
    dims = SystemDims((d, rest))

    def action(x: Operator) -> Operator:
        return partial_trace(evolve(np.kron(x, program_density)), dims, keep=[0])

    return superop_from_action(action, d)


def first_order_reduction(m: Operator, rho: Operator, program: np.ndarray) -> Operator:
    """Tr_{P,Q}[M(rho kron |phi><phi|)], the generator seen by the system."""
    d = rho.shape[0]
    joint = np.kron(rho, outer(program))
    gram = m.conj().T @ m
    generated = m @ joint @ m.conj().T - 0.5 * (gram @ joint + joint @ gram)
    return partial_trace(generated, SystemDims((d, program.shape[0])), keep=[0])
