import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from wml.common.channel_utils import LindbladSpec
from wml.common.errors import ArgumentError, NumericalIntegrityError, ShapeError, SpecError
from wml.common.program_utils import (
    BRANCH_JUMP,
    BRANCH_NEGATIVE,
    BRANCH_POSITIVE,
    OmegaSample,
    ProgramState,
    decode_operator,
    encode_operator,
    maximally_entangled_state,
    omega_branches,
    perturb_unit_operator,
    psi_distance,
    sample_omega,
    sample_omega_many,
)
from wml.common.random_utils import random_operator, random_unit_operator
from wml.common.tensor_utils import gamma_vector, hs_inner, schatten_norm
from wml.engine.config import LOWER, PLUS, SIGMA_Z


class TestEncoding:
    def test_matches_gamma_construction(self, rng):
        op = random_operator(3, rng)
        expected = np.kron(op, np.eye(3)) @ gamma_vector(3) / schatten_norm(op, 2)
        assert_allclose(encode_operator(op).vec, expected, atol=1e-14)

    def test_decode_inverts_encode(self, rng):
        op = random_operator(2, rng)
        assert_allclose(decode_operator(encode_operator(op)), op / schatten_norm(op, 2), atol=1e-14)

    def test_identity_encodes_phi(self):
        assert_allclose(maximally_entangled_state(2).vec, np.array([1, 0, 0, 1]) / math.sqrt(2))

    def test_zero_operator(self):
        with pytest.raises(ArgumentError, match="zero"):
            encode_operator(np.zeros((2, 2)))

    def test_program_state_validation(self):
        with pytest.raises(ShapeError):
            ProgramState(2, np.ones(3))
        with pytest.raises(NumericalIntegrityError, match="norm"):
            ProgramState(2, np.ones(4))

    def test_density_is_projector(self, rng):
        psi = encode_operator(random_operator(2, rng))
        rho = psi.density()
        assert_allclose(rho @ rho, rho, atol=1e-14)
        assert psi.overlap(psi) == pytest.approx(1.0)


class TestOmega:
    @pytest.fixture
    def spec(self):
        return LindbladSpec(
            hamiltonian_terms=((0.5, PLUS), (-0.25, np.eye(2) / 2)),
            jump_ops=(0.7 * LOWER, 0.5 * SIGMA_Z),
        )

    def test_branch_probabilities(self, spec):
        branches = omega_branches(spec)
        c = 0.5 + 0.25 + 0.49 + 0.5
        assert [s.branch for s, _ in branches] == [
            BRANCH_POSITIVE,
            BRANCH_NEGATIVE,
            BRANCH_JUMP,
            BRANCH_JUMP,
        ]
        assert_allclose([p for _, p in branches], [0.5 / c, 0.25 / c, 0.49 / c, 0.5 / c])
        assert sum(p for _, p in branches) == pytest.approx(1.0)

    def test_labels(self, spec):
        labels = [s.label for s, _ in omega_branches(spec)]
        assert labels == ["sigma_1", "sigma_2", "psi_1", "psi_2"]

    def test_seeded_sampling_is_deterministic(self, spec):
        first = sample_omega_many(spec, np.random.default_rng(5), 50)
        second = sample_omega_many(spec, np.random.default_rng(5), 50)
        assert first == second
        first = sample_omega(spec, np.random.default_rng(9))
        assert first == sample_omega(spec, np.random.default_rng(9))

    def test_empty_spec(self):
        with pytest.raises(SpecError, match="c = 0"):
            omega_branches(LindbladSpec(d=2))

    def test_sample_validation(self):
        with pytest.raises(ArgumentError):
            OmegaSample(3, 0)
        with pytest.raises(ArgumentError, match="out of range"):
            OmegaSample(BRANCH_JUMP, 2).check(J=1, K=2)
        OmegaSample(BRANCH_POSITIVE, 0).check(J=1, K=0)


class TestPerturbation:
    @pytest.mark.parametrize("delta", [0.01, 0.1, 0.5, 1.2])
    def test_distance_is_delta(self, rng, delta):
        op = random_unit_operator(3, rng)
        other = perturb_unit_operator(op, delta, rng)
        assert schatten_norm(other, 2) == pytest.approx(1.0, abs=1e-12)
        assert schatten_norm(other - op, 2) == pytest.approx(delta, abs=1e-10)

    def test_sqrt_two_is_orthogonal(self, rng):
        op = random_unit_operator(2, rng)
        other = perturb_unit_operator(op, math.sqrt(2), rng)
        assert abs(hs_inner(op, other)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("delta", [0.0, -0.1, 1.5])
    def test_rejects_out_of_range(self, rng, delta):
        with pytest.raises(ArgumentError, match="delta"):
            perturb_unit_operator(random_unit_operator(2, rng), delta, rng)

    def test_requires_unit_norm(self, rng):
        with pytest.raises(ArgumentError, match="unit"):
            perturb_unit_operator(2 * random_unit_operator(2, rng), 0.1, rng)


class TestPsiDistance:
    def test_identical(self, rng):
        op = random_unit_operator(2, rng)
        dist = psi_distance(op, op)
        assert dist.trace_dist == pytest.approx(0.0, abs=1e-7)
        assert dist.formula_dist == pytest.approx(0.0, abs=1e-7)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.floats(0.01, 1.4))
    def test_formula_and_bound(self, seed, d, delta):
        gen = np.random.default_rng(seed)
        op = random_unit_operator(d, gen)
        dist = psi_distance(op, perturb_unit_operator(op, delta, gen))
        assert dist.residual < 1e-10
        assert dist.bound_ok
