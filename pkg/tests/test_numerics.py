import math

import numpy as np
import pytest

from isacsim.numerics import (RngStream, db_to_linear, dft_matrix, fro_norm_sq,
                              linear_to_db, pack_complex, pinv_square,
                              randn_complex, unpack_complex, unvec, vec)


class TestDftMatrix:
    def test_trivial_size_one(self):
        assert dft_matrix(1, normalized=False) == pytest.approx(np.array([[1.0]]))

    def test_size_two_unnormalized(self):
        W = dft_matrix(2, normalized=False)
        np.testing.assert_allclose(W, [[1, 1], [1, -1]], atol=1e-15)

    def test_positive_exponent_convention(self):
        # entry (1,1) of the 4-point matrix is e^{j 2 pi / 4} = +j
        W = dft_matrix(4, normalized=False)
        assert W[1, 1] == pytest.approx(1j)

    def test_scaled_unitary(self):
        W = dft_matrix(5, normalized=False)
        np.testing.assert_allclose(W @ W.conj().T, 5 * np.eye(5), atol=1e-12)

    def test_normalized_unitary(self):
        W = dft_matrix(6)
        np.testing.assert_allclose(W @ W.conj().T, np.eye(6), atol=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            dft_matrix(0)


class TestPinvSquare:
    def test_inverts_scaled_unitary(self):
        X = 3.0 * dft_matrix(4, normalized=False)
        Xd = pinv_square(X)
        np.testing.assert_allclose(Xd @ X, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(X @ Xd, np.eye(4), atol=1e-12)

    def test_matches_hermitian_transpose_for_unitary(self):
        W = dft_matrix(8)
        np.testing.assert_allclose(pinv_square(W), W.conj().T, atol=1e-12)

    def test_singular_raises(self):
        with pytest.raises(np.linalg.LinAlgError):
            pinv_square(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_near_singular_raises(self):
        X = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]])
        with pytest.raises(np.linalg.LinAlgError):
            pinv_square(X)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            pinv_square(np.ones((2, 3)))


class TestVecPack:
    def test_vec_is_column_major(self):
        M = np.array([[1, 2], [3, 4]])
        np.testing.assert_array_equal(vec(M), [1, 3, 2, 4])

    def test_unvec_inverse(self, rng):
        M = randn_complex(3, 5, 1.0, rng)
        np.testing.assert_array_equal(unvec(vec(M), 3, 5), M)

    def test_pack_splits_re_im(self):
        np.testing.assert_array_equal(pack_complex(np.array([3 + 4j])), [3.0, 4.0])
        np.testing.assert_array_equal(pack_complex(np.array([2 - 1j])), [2.0, -1.0])

    def test_pack_unpack_roundtrip(self, rng):
        z = randn_complex(1, 7, 2.0, rng).ravel()
        np.testing.assert_array_equal(unpack_complex(pack_complex(z)), z)

    def test_fro_norm_matches_vec_bitwise(self, rng):
        # the sum is order-invariant, so flattening cannot change it
        M = randn_complex(4, 6, 3.0, rng)
        assert fro_norm_sq(M) == fro_norm_sq(vec(M))

    def test_fro_norm_simple_value(self):
        assert fro_norm_sq(np.array([[3 + 4j]])) == pytest.approx(25.0)


class TestRandnComplex:
    def test_per_entry_variance(self, rng):
        z = randn_complex(200, 200, 4.0, rng)
        assert np.mean(np.abs(z) ** 2) == pytest.approx(4.0, rel=0.02)
        # circular symmetry: real and imaginary parts split the power
        assert np.var(z.real) == pytest.approx(2.0, rel=0.03)
        assert np.var(z.imag) == pytest.approx(2.0, rel=0.03)

    def test_zero_variance_gives_zeros(self, rng):
        assert not randn_complex(3, 3, 0.0, rng).any()


class TestRngStream:
    def test_same_seed_same_draws(self):
        a = RngStream(7).generator.standard_normal(5)
        b = RngStream(7).generator.standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_children_independent_of_sibling_consumption(self):
        root1 = RngStream(7)
        root1.child(0).generator.standard_normal(1000)
        x = root1.child(1).generator.standard_normal(3)
        y = RngStream(7).child(1).generator.standard_normal(3)
        np.testing.assert_array_equal(x, y)

    def test_distinct_paths_differ(self):
        a = RngStream(7).child(1).generator.standard_normal(4)
        b = RngStream(7).child(2).generator.standard_normal(4)
        assert not np.allclose(a, b)

    def test_nested_paths(self):
        a = RngStream(7).child(1, 2).generator.standard_normal(2)
        b = RngStream(7).child(1).child(2).generator.standard_normal(2)
        np.testing.assert_array_equal(a, b)

    def test_rejects_bad_ids(self):
        with pytest.raises(ValueError):
            RngStream(7).child(-1)
        with pytest.raises(ValueError):
            RngStream(7).child(2 ** 32)


class TestRoundTripProperties:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @given(rows=st.integers(1, 6), cols=st.integers(1, 6), seed=st.integers(0, 2 ** 16))
    @settings(max_examples=40, deadline=None)
    def test_vec_pack_roundtrip_any_shape(self, rows, cols, seed):
        z = randn_complex(rows, cols, 1.0, RngStream(seed))
        np.testing.assert_array_equal(
            unvec(unpack_complex(pack_complex(vec(z))), rows, cols), z)

    @given(n=st.integers(1, 16))
    @settings(max_examples=16, deadline=None)
    def test_dft_always_scaled_unitary(self, n):
        W = dft_matrix(n, normalized=False)
        np.testing.assert_allclose(W @ W.conj().T, n * np.eye(n), atol=1e-10)


class TestDbConversion:
    def test_round_numbers(self):
        assert db_to_linear(0.0) == 1.0
        assert db_to_linear(10.0) == pytest.approx(10.0)
        assert db_to_linear(-30.0) == pytest.approx(1e-3)

    def test_inverse(self):
        assert linear_to_db(db_to_linear(-94.384)) == pytest.approx(-94.384)

    def test_extremes_saturate(self):
        assert db_to_linear(1e9) == math.inf
        assert db_to_linear(-1e9) == 0.0
