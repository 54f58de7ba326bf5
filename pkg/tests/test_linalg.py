"""Hand-rolled Cholesky and Jacobi kernels against numpy oracles."""

import numpy as np
import pytest

from sigforge import (
    CorrelationMatrix,
    EigenFailure,
    Signature,
    SignatureSet,
    SingularMatrix,
    cholesky,
    correlation_matrix,
    hadamard_set,
    min_eigenpair,
    quadratic_metric,
    quantize_sign,
)
from sigforge.linalg import CholeskyFactor, EigenPair

RECON_TOL = 1e-8


def random_matrix(rng, length, k_lo=None, k_hi=None):
    k_lo = k_lo or length
    k_hi = k_hi or 3 * length
    k = int(rng.integers(k_lo, k_hi + 1))
    rows = rng.choice([-1, 1], size=(k, length)).tolist()
    return correlation_matrix(SignatureSet.from_rows(rows))


class TestCholesky:
    def test_identity_scaled(self):
        m = correlation_matrix(hadamard_set(8))  # 8I
        factor = cholesky(m)
        assert factor.jitter == 0.0
        expected = np.sqrt(8.0) * np.eye(8)
        assert np.allclose(factor.entries, expected)

    def test_hand_two_by_two(self):
        # R = [[2, 0], [0, 2]] with one +- pair: columns orthogonal.
        m = correlation_matrix(SignatureSet.from_rows([[1, 1], [1, -1]]))
        factor = cholesky(m)
        assert np.allclose(factor.entries, np.sqrt(2.0) * np.eye(2))

    def test_reconstruction_random_family(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            m = random_matrix(rng, int(rng.integers(2, 13)))
            factor = cholesky(m)
            rebuilt = factor.entries.T @ factor.entries - factor.jitter * np.eye(m.dim)
            err = np.abs(rebuilt - m.entries).max()
            assert err <= RECON_TOL * max(1.0, np.abs(m.entries).max())

    def test_singular_input_gets_jitter(self):
        # Duplicated signature: rank-1 R, first pass must fail, jitter pass
        # must succeed and record the shift.
        m = correlation_matrix(SignatureSet.from_rows([[1, 1], [1, 1]]))
        factor = cholesky(m)
        assert factor.jitter == pytest.approx(1e-9 * 2)
        rebuilt = factor.entries.T @ factor.entries
        assert np.allclose(rebuilt, m.entries + factor.jitter * np.eye(2), atol=1e-12)

    def test_indefinite_matrix_rejected(self):
        # Symmetric, constant diagonal, integer: passes type validation but
        # is not PSD (eigenvalues 4 and -2), so no R of any set equals it.
        bad = CorrelationMatrix(entries=np.array([[1, 3], [3, 1]], dtype=np.int64))
        with pytest.raises(SingularMatrix):
            cholesky(bad)

    def test_factor_validation(self):
        with pytest.raises(ValueError):
            CholeskyFactor(entries=np.array([[1.0, 0.0], [2.0, 1.0]]))  # lower junk
        with pytest.raises(ValueError):
            CholeskyFactor(entries=np.array([[1.0, 0.0], [0.0, -1.0]]))  # bad diag


class TestMinEigenpair:
    def test_scaled_identity(self):
        m = correlation_matrix(hadamard_set(16))
        pair = min_eigenpair(m)
        assert pair.value == pytest.approx(16.0, rel=1e-12)
        assert np.linalg.norm(pair.vector) == pytest.approx(1.0, rel=1e-12)

    def test_rank_one_matrix(self):
        m = correlation_matrix(SignatureSet.from_rows([[1, 1]]))
        pair = min_eigenpair(m)
        assert pair.value == pytest.approx(0.0, abs=1e-12)

    def test_against_numpy_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(60):
            m = random_matrix(rng, int(rng.integers(2, 13)))
            pair = min_eigenpair(m)
            reference = np.linalg.eigvalsh(m.entries.astype(float))[0]
            assert pair.value == pytest.approx(reference, rel=1e-9, abs=1e-9)

    def test_residual_within_contract(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            m = random_matrix(rng, int(rng.integers(2, 13)))
            pair = min_eigenpair(m)
            residual = np.linalg.norm(m.entries @ pair.vector - pair.value * pair.vector)
            assert residual <= 1e-8 * np.abs(m.entries).max() * m.dim

    def test_rayleigh_floor_under_cube_minimum(self):
        # lambda_min * L never exceeds any antipodal metric.
        rng = np.random.default_rng(24)
        for _ in range(20):
            length = int(rng.integers(2, 9))
            m = random_matrix(rng, length)
            pair = min_eigenpair(m)
            floor = pair.value * length
            for bits in range(1 << (length - 1)):
                chips = tuple(
                    1 if (bits >> (length - 1 - i)) & 1 == 0 else -1
                    for i in range(length - 1)
                ) + (1,)
                metric = quadratic_metric(m, Signature(chips))
                assert floor <= metric + 1e-6

    def test_eigen_failure_carries_residual(self):
        err = EigenFailure("nope", residual=0.25)
        assert err.residual == 0.25

    def test_vector_read_only(self):
        pair = min_eigenpair(correlation_matrix(hadamard_set(4)))
        with pytest.raises(ValueError):
            pair.vector[0] = 5.0


class TestQuantizeSign:
    def test_zero_maps_to_plus_one(self):
        sig = quantize_sign(np.array([0.0, -0.0, -3.0, 2.0]))
        assert tuple(sig) == (1, 1, -1, 1)

    def test_length_preserved(self):
        assert len(quantize_sign(np.ones(7))) == 7

    def test_quantized_eigenvector_is_valid_radius_point(self):
        rng = np.random.default_rng(25)
        for _ in range(20):
            m = random_matrix(rng, int(rng.integers(2, 10)))
            sig = quantize_sign(min_eigenpair(m).vector)
            assert quadratic_metric(m, sig) >= 0
