"""Spectral radius, eigenvalue multisets, Gelfand norms, Frobenius constants."""

import numpy as np
import pytest

from mcergo import (
    build_v_hat,
    eigenvalues,
    frobenius_constant,
    gelfand_sequence,
    spectral_radius,
)
from mcergo.errors import DimensionError, InvalidMatrixError
from mcergo.reference import (
    EXAMPLE1_EIGENVALUES,
    EXAMPLE1_RADIUS,
    EXAMPLE2_FROBENIUS_CONSTANT,
    EXAMPLE2_RADIUS,
    EXAMPLE2_RADIUS_TOL,
    example1_base,
    example2_base,
)
from mcergo.spectral import METHOD_DENSE, METHOD_POWER


def random_nonnegative(rng, n):
    return rng.random((n, n)) * rng.choice([0.1, 1.0, 5.0])


def test_radius_of_identity():
    result = spectral_radius(np.eye(3))
    assert result.radius == pytest.approx(1.0, abs=1e-12)
    assert result.method == METHOD_POWER


def test_radius_of_zero_matrix():
    assert spectral_radius(np.zeros((4, 4))).radius == 0.0


def test_radius_of_nilpotent_matrix():
    # power iteration hits an exactly zero product and reports radius 0
    result = spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert result.radius == 0.0


def test_radius_of_diagonal():
    assert spectral_radius(np.diag([0.5, 0.25, 0.1])).radius == pytest.approx(0.5, abs=1e-12)


def test_negative_entries_use_dense_route():
    rotation = np.array([[0.0, 1.0], [-1.0, 0.0]])
    result = spectral_radius(rotation)
    assert result.method == METHOD_DENSE
    assert result.radius == pytest.approx(1.0, abs=1e-12)
    assert result.eigenvalues is not None


def test_radius_of_example1_operator():
    op = build_v_hat(example1_base())
    result = spectral_radius(op.v_hat, tol=1e-12)
    assert result.method == METHOD_POWER
    assert result.radius == pytest.approx(EXAMPLE1_RADIUS, abs=1e-9)
    assert result.residual <= 1e-9


def test_radius_of_example2_operator():
    op = build_v_hat(example2_base())
    result = spectral_radius(op.v_hat)
    assert result.radius == pytest.approx(EXAMPLE2_RADIUS, abs=EXAMPLE2_RADIUS_TOL)


def test_eigenvalue_multiset_of_example1_operator():
    op = build_v_hat(example1_base())
    spectrum = eigenvalues(np.asarray(op.v_hat, dtype=float))
    got = np.sort_complex(spectrum.eigenvalues)
    np.testing.assert_allclose(got, np.array(EXAMPLE1_EIGENVALUES), atol=1e-9)
    assert spectrum.radius == pytest.approx(EXAMPLE1_RADIUS, abs=1e-12)


def test_power_and_dense_agree_on_random_nonnegative_matrices():
    rng = np.random.default_rng(101)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        arr = random_nonnegative(rng, n)
        power = spectral_radius(arr, tol=1e-12)
        dense = eigenvalues(arr)
        assert power.radius == pytest.approx(dense.radius, abs=1e-9)
        # any induced norm bounds the radius
        assert power.radius <= np.abs(arr).sum(axis=1).max() + 1e-9


def test_stochastic_matrices_have_radius_one():
    rng = np.random.default_rng(55)
    for _ in range(20):
        arr = rng.random((5, 5)) + 1e-3
        arr /= arr.sum(axis=1, keepdims=True)
        assert spectral_radius(arr).radius == pytest.approx(1.0, abs=1e-9)


def test_gelfand_sequence_brackets_the_radius():
    for base in (example1_base(), example2_base()):
        op = build_v_hat(base)
        arr = np.asarray(op.v_hat, dtype=float)
        radius = spectral_radius(arr).radius
        seq = gelfand_sequence(arr, 64)
        assert len(seq) == 64
        assert all(term >= radius - 1e-12 for term in seq)
        assert seq[-1] - radius < 0.02


def test_gelfand_sequence_starts_at_the_norm():
    arr = np.asarray(build_v_hat(example1_base()).v_hat, dtype=float)
    assert gelfand_sequence(arr, 1)[0] == pytest.approx(arr.sum(axis=1).max(), abs=1e-15)


def test_gelfand_sequence_overflow_is_reported():
    with pytest.raises(OverflowError):
        gelfand_sequence(np.array([[1e200]]), 8)


def test_frobenius_constant_not_applicable_for_example1():
    # the dominant eigenvector of this operator is not strictly positive
    op = build_v_hat(example1_base())
    result = frobenius_constant(np.asarray(op.v_hat, dtype=float))
    assert not result.applicable
    assert result.constant is None
    assert result.reason


def test_frobenius_constant_for_example2():
    op = build_v_hat(example2_base())
    result = frobenius_constant(np.asarray(op.v_hat, dtype=float))
    assert result.applicable
    assert result.constant == pytest.approx(EXAMPLE2_FROBENIUS_CONSTANT, abs=1e-6)
    assert result.e.max() == pytest.approx(1.0, abs=1e-12)
    assert result.e.min() > 0


def test_frobenius_constant_of_positive_stochastic_matrix_is_one():
    arr = np.array([[0.5, 0.5], [0.25, 0.75]])
    result = frobenius_constant(arr)
    assert result.applicable
    assert result.constant == pytest.approx(1.0, abs=1e-9)


def test_frobenius_constant_rejects_negative_entries():
    with pytest.raises(InvalidMatrixError):
        frobenius_constant(np.array([[0.5, -0.5], [0.5, 0.5]]))


def test_shape_and_finiteness_are_validated():
    with pytest.raises(DimensionError):
        spectral_radius(np.ones((2, 3)))
    with pytest.raises(InvalidMatrixError):
        spectral_radius(np.array([[np.nan, 0.0], [0.0, 0.0]]))


def test_empty_operator_has_zero_radius():
    result = spectral_radius(np.zeros((0, 0)))
    assert result.radius == 0.0
    assert not frobenius_constant(np.zeros((0, 0))).applicable
