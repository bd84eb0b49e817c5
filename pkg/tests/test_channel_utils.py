import logging

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from wml.common.channel_utils import (
    DensityMatrix,
    JumpEvolution,
    LindbladSpec,
    SuperOperator,
    apply_lindblad_action,
    apply_lindbladian,
    apply_superop,
    channel_distance,
    choi_of,
    choi_trace_distance,
    devectorize,
    exact_channel,
    is_cptp,
    left_mult,
    liouvillian,
    resolve_channel_mode,
    right_mult,
    superop_from_action,
    vectorize,
)
from wml.common.errors import (
    ArgumentError,
    NumericalIntegrityError,
    ShapeError,
    SpecError,
    StepSizeError,
)
from wml.common.random_utils import random_density_matrix, random_operator, random_unit_operator
from wml.common.tensor_utils import configure
from wml.engine.config import LOWER, PLUS, SIGMA_Z


@pytest.fixture
def two_jump() -> LindbladSpec:
    return LindbladSpec(hamiltonian_terms=((0.5, PLUS),), jump_ops=(0.7 * LOWER, 0.5 * SIGMA_Z))


class TestVectorization:
    def test_column_stacking_identity(self, rng):
        a, x, b = (random_operator(3, rng) for _ in range(3))
        assert_allclose(np.kron(b.T, a) @ vectorize(x), vectorize(a @ x @ b), atol=1e-13)

    def test_left_right_mult(self, rng):
        a, x = random_operator(2, rng), random_operator(2, rng)
        assert_allclose(devectorize(left_mult(a) @ vectorize(x)), a @ x, atol=1e-14)
        assert_allclose(devectorize(right_mult(a) @ vectorize(x)), x @ a, atol=1e-14)

    def test_devectorize_rejects_non_square_length(self):
        with pytest.raises(ShapeError, match="perfect square"):
            devectorize(np.zeros(5))


class TestLindbladSpec:
    def test_normalization(self, two_jump):
        assert two_jump.J == 1
        assert two_jump.K == 2
        assert two_jump.c == pytest.approx(0.5 + 0.49 + 0.5)
        assert two_jump.norm_max == pytest.approx(0.5)

    def test_drops_zero_coefficient(self, caplog):
        with caplog.at_level(logging.WARNING):
            spec = LindbladSpec(hamiltonian_terms=((0.0, PLUS),), jump_ops=(LOWER,))
        assert spec.J == 0
        assert "zero coefficient" in caplog.text

    def test_sigma_must_be_density(self):
        with pytest.raises(SpecError, match="density"):
            LindbladSpec(hamiltonian_terms=((1.0, SIGMA_Z),))

    def test_zero_jump_rejected(self):
        with pytest.raises(SpecError, match="zero"):
            LindbladSpec(jump_ops=(np.zeros((2, 2)),))

    def test_empty_spec_needs_dimension(self):
        with pytest.raises(SpecError, match="dimension"):
            LindbladSpec()
        assert LindbladSpec(d=3).c == 0.0

    def test_mixed_dimensions(self):
        with pytest.raises(SpecError, match="dimension"):
            LindbladSpec(jump_ops=(LOWER, np.eye(3)))


class TestGenerators:
    def test_superop_matches_formula(self, rng, two_jump):
        x = random_operator(2, rng)
        assert_allclose(liouvillian(two_jump).apply(x), apply_lindbladian(two_jump, x), atol=1e-13)

    def test_exact_channel_matches_scipy(self, two_jump):
        expected = scipy.linalg.expm(liouvillian(two_jump).mat * 1.3)
        assert_allclose(exact_channel(two_jump, 1.3).mat, expected, atol=1e-11)

    def test_amplitude_damping_population(self):
        spec = LindbladSpec(jump_ops=(LOWER,))
        excited = DensityMatrix(np.diag([0.0, 1.0]).astype(complex))
        out = apply_superop(exact_channel(spec, 0.7), excited)
        assert out.mat[1, 1].real == pytest.approx(np.exp(-0.7))

    def test_zero_time_is_identity(self, two_jump):
        assert_allclose(exact_channel(two_jump, 0.0).mat, np.eye(4))
        with pytest.raises(ArgumentError):
            exact_channel(two_jump, -1.0)


class TestChannels:
    def test_exact_channel_is_cptp(self, two_jump):
        diag = is_cptp(exact_channel(two_jump, 2.0))
        assert diag.passed
        assert diag.to_dict()["passed"] is True

    def test_transpose_is_not_cp(self):
        transpose = superop_from_action(lambda x: x.T, 2)
        diag = is_cptp(transpose)
        assert diag.tp_ok
        assert not diag.cp_ok
        assert diag.min_eigenvalue == pytest.approx(-0.5)

    def test_choi_of_identity_is_maximally_entangled(self):
        choi = SuperOperator.identity(2).choi()
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert_allclose(choi.mat, np.outer(phi, phi), atol=1e-15)

    def test_choi_of_action_matches_superop(self, two_jump):
        ch = exact_channel(two_jump, 0.7)
        choi = choi_of(ch.apply, 2)
        assert_allclose(choi.mat, ch.choi().mat, atol=1e-12)
        assert np.trace(choi.mat).real == pytest.approx(1.0)

    def test_distance_identity_vs_depolarizing(self):
        depolarize = superop_from_action(lambda x: np.trace(x) * np.eye(2) / 2, 2)
        # Phi vs I/4: eigenvalues 3/4 and three times -1/4
        assert channel_distance(SuperOperator.identity(2), depolarize) == pytest.approx(0.75)

    def test_distance_zero_for_equal(self, two_jump):
        ch = exact_channel(two_jump, 0.4)
        assert choi_trace_distance(ch.choi(), ch.choi()) == pytest.approx(0.0, abs=1e-14)

    def test_then_order(self, rng):
        a = superop_from_action(lambda x: LOWER @ x, 2)
        b = superop_from_action(lambda x: x @ SIGMA_Z, 2)
        x = random_operator(2, rng)
        assert_allclose(a.then(b).apply(x), LOWER @ x @ SIGMA_Z)

    def test_apply_superop_validates(self):
        not_tp = superop_from_action(lambda x: 2 * x, 2)
        with pytest.raises(NumericalIntegrityError, match="trace"):
            apply_superop(not_tp, DensityMatrix(np.eye(2) / 2))


class TestDensityMatrix:
    def test_valid(self, rng):
        assert DensityMatrix(random_density_matrix(3, rng)).d == 3

    @pytest.mark.parametrize(
        "mat, message",
        [
            (np.array([[1, 1], [0, 0]]), "Hermitian"),
            (np.eye(2), "trace"),
            (np.diag([1.5, -0.5]), "negative"),
        ],
    )
    def test_invalid(self, mat, message):
        with pytest.raises(NumericalIntegrityError, match=message):
            DensityMatrix(mat)


class TestActionMode:
    def test_action_matches_dense(self, rng):
        jump = random_operator(2, rng)
        x = random_density_matrix(2, rng)
        dense = JumpEvolution(jump, 0.3, channel_mode="dense")
        action = JumpEvolution(jump, 0.3, channel_mode="action")
        assert dense.mode == "dense"
        assert action.mode == "action"
        assert_allclose(action(x), dense(x), atol=1e-10)

    def test_zero_delta(self, rng):
        x = random_operator(2, rng)
        assert_allclose(apply_lindblad_action(x, random_unit_operator(2, rng), 0.0), x)

    def test_long_substep_raises(self, rng):
        jump = 10 * random_unit_operator(2, rng)
        with pytest.raises(StepSizeError, match="substeps"):
            apply_lindblad_action(random_density_matrix(2, rng), jump, 1.0, substeps=1)

    @pytest.mark.parametrize(
        "dim, expected",
        [(8, "dense"), (32, "dense"), (64, "action"), (128, "action")],
    )
    def test_auto_mode(self, dim, expected):
        assert resolve_channel_mode(dim) == expected

    def test_explicit_mode_and_bad_name(self):
        assert resolve_channel_mode(1000, "dense") == "dense"
        with pytest.raises(ArgumentError):
            resolve_channel_mode(8, "sparse")


class TestInvariantTolerance:
    def test_configured_tolerance_loosens_apply(self):
        scaled = superop_from_action(lambda x: (1 + 1e-6) * x, 2)
        rho = DensityMatrix(np.eye(2) / 2)
        with pytest.raises(NumericalIntegrityError, match="trace"):
            apply_superop(scaled, rho)
        configure(invariant_tol=1e-3)
        out = apply_superop(scaled, rho)
        assert out.tol == 1e-3
        assert np.trace(out.mat).real == pytest.approx(1 + 1e-6)

    def test_configured_tolerance_reaches_density_and_cptp(self):
        nearly = np.diag([0.5 + 1e-7, 0.5])
        with pytest.raises(NumericalIntegrityError):
            DensityMatrix(nearly)
        leaky = superop_from_action(lambda x: (1 - 1e-6) * x, 2)
        assert not is_cptp(leaky).passed
        configure(invariant_tol=1e-5)
        assert DensityMatrix(nearly).tol == 1e-5
        assert is_cptp(leaky).passed

    def test_explicit_tolerance_wins(self):
        configure(invariant_tol=1e-3)
        with pytest.raises(NumericalIntegrityError):
            DensityMatrix(np.diag([0.5 + 1e-7, 0.5]), tol=1e-10)
