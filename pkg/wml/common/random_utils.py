"""
Seeded random operators and states for identity checks and benchmark specs.

Every helper takes an explicit ``numpy.random.Generator``; callers own its state.
"""

from __future__ import annotations

import numpy as np

from .tensor_utils import Operator, schatten_norm


def make_rng(seed: int | None) -> np.random.Generator:
    """Generator from a seed (fresh entropy when seed is None)."""
    return np.random.default_rng(seed)


def crandn(size: int | tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Standard complex normal samples."""
    return (rng.normal(size=size) + 1j * rng.normal(size=size)) / np.sqrt(2)


def random_operator(d: int, rng: np.random.Generator) -> Operator:
    """Gaussian d x d complex matrix."""
    return crandn((d, d), rng)


def random_unit_operator(d: int, rng: np.random.Generator) -> Operator:
    """Gaussian d x d matrix normalized to unit Hilbert-Schmidt norm."""
    op = random_operator(d, rng)
    return op / schatten_norm(op, 2)


def random_density_matrix(d: int, rng: np.random.Generator) -> Operator:
    """Full-rank random density matrix (Ginibre ensemble)."""
    g = random_operator(d, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = crandn(d, rng)
    return v / np.linalg.norm(v)
