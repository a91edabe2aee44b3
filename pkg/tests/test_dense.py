import numpy as np
import pytest

from flsolve.dense import (
    DenseMatrix,
    RankDeficientError,
    RngStream,
    WeightedSampler,
    householder_qr,
    least_squares_solve,
    load_matrix,
    load_vector,
    matvec,
    min_norm_solve,
    null_space_basis,
    row_dot,
    sample_index,
    save_matrix,
    save_vector,
    sigma_min,
)

from conftest import FixedUniformRng


class TestDenseMatrix:
    def test_cached_norms_consistent(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((7, 5)))
        assert M.row_norms_sq.sum() == pytest.approx(M.frob_sq, rel=1e-12)
        assert M.col_norms_sq.sum() == pytest.approx(M.frob_sq, rel=1e-12)
        assert np.all(M.row_norms_sq >= 0) and np.all(M.col_norms_sq >= 0)

    def test_column_major_storage(self):
        M = DenseMatrix([[1.0, 2.0], [3.0, 4.0]])
        assert M.arr.flags["F_CONTIGUOUS"]
        assert M.shape == (2, 2)

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            DenseMatrix([1.0, 2.0])


class TestMatvec:
    def test_identity(self):
        assert np.allclose(matvec(DenseMatrix(np.eye(2)), [3.0, 4.0]), [3, 4])

    def test_hand_sum(self):
        M = DenseMatrix([[1.0, 2.0], [3.0, 4.0]])
        assert np.allclose(matvec(M, [1.0, 1.0]), [3, 7])

    def test_zero(self):
        assert np.allclose(matvec(DenseMatrix(np.zeros((2, 2))), [5.0, 5.0]), 0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            matvec(DenseMatrix(np.eye(2)), [1.0, 2.0, 3.0])


class TestRowDot:
    def test_identity_row(self):
        assert row_dot(DenseMatrix(np.eye(3)), 1, [7.0, 8.0, 9.0]) == 8.0

    def test_scalar(self):
        assert row_dot(DenseMatrix([[2.0]]), 0, [3.0]) == 6.0

    def test_against_matvec_oracle(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((5, 4)))
        v = np_rng.standard_normal(4)
        full = matvec(M, v)
        for i in range(5):
            assert row_dot(M, i, v) == pytest.approx(full[i], abs=1e-14)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            row_dot(DenseMatrix(np.eye(2)), 5, [1.0, 1.0])


class TestWeightedSampler:
    def test_cumulative_invariant(self):
        s = WeightedSampler([1.0, 2.0, 3.0])
        assert np.all(np.diff(s.cumulative) >= 0)
        assert s.total == pytest.approx(6.0, rel=1e-12)

    def test_quartile_draw(self):
        # u = 0.6 * total lands in the third quarter (0-based index 2).
        s = WeightedSampler([1.0, 1.0, 1.0, 1.0])
        assert sample_index(s, FixedUniformRng(0.6)) == 2

    def test_degenerate_mass(self):
        s = WeightedSampler([0.0, 0.0, 5.0])
        for u in (0.0, 0.3, 0.999):
            assert sample_index(s, FixedUniformRng(u)) == 2

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            WeightedSampler([0.0, 0.0])

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            WeightedSampler([1.0, -1.0])

    def test_law_of_large_numbers(self):
        s = WeightedSampler([1.0, 3.0])
        rng = RngStream(99)
        n = 10 ** 6
        hits = sum(s.sample(rng) for _ in range(n))
        assert hits / n == pytest.approx(0.75, abs=0.01)

    def test_reproducible(self):
        s = WeightedSampler([1.0, 2.0, 4.0])
        rng1, rng2 = RngStream(5), RngStream(5)
        assert [s.sample(rng1) for _ in range(200)] == \
               [s.sample(rng2) for _ in range(200)]


class TestHouseholderQR:
    def test_identity(self):
        Q, R = householder_qr(DenseMatrix(np.eye(3)))
        assert np.allclose(Q, np.eye(3)) and np.allclose(R, np.eye(3))

    def test_pythagorean_column(self):
        Q, R = householder_qr(DenseMatrix([[3.0], [4.0]]))
        assert R[0, 0] == pytest.approx(5.0, rel=1e-14)
        assert np.max(np.abs(Q.T @ Q - np.eye(1))) < 1e-14

    def test_reconstruction(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((20, 5)))
        Q, R = householder_qr(M)
        frob = np.linalg.norm(M.arr)
        assert np.linalg.norm(Q @ R - M.arr) / frob < 1e-13
        assert np.max(np.abs(Q.T @ Q - np.eye(5))) < 1e-12

    def test_complete_null_space(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((8, 3)))
        N = null_space_basis(M)
        assert N.shape == (8, 5)
        assert np.max(np.abs(M.arr.T @ N)) < 1e-12
        assert np.max(np.abs(N.T @ N - np.eye(5))) < 1e-12

    def test_rank_deficiency_detected(self):
        col = np.arange(1.0, 6.0)
        M = DenseMatrix(np.column_stack([col, 2 * col]))
        with pytest.raises(RankDeficientError):
            householder_qr(M)

    def test_wide_rejected(self):
        with pytest.raises(ValueError):
            householder_qr(DenseMatrix(np.ones((2, 3))))


class TestLeastSquares:
    def test_identity(self):
        y = least_squares_solve(DenseMatrix(np.eye(2)), [1.0, 2.0])
        assert np.allclose(y, [1, 2])

    def test_mean_of_residuals(self):
        y = least_squares_solve(DenseMatrix([[1.0], [1.0]]), [0.0, 2.0])
        assert y[0] == pytest.approx(1.0, rel=1e-14)

    def test_consistent_recovery(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((12, 6)))
        y0 = np_rng.standard_normal(6)
        y = least_squares_solve(M, M.matvec(y0))
        assert np.linalg.norm(y - y0) < 1e-10

    def test_min_norm_solve(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((4, 9)))
        rhs = np_rng.standard_normal(4)
        x = min_norm_solve(M, rhs)
        assert np.linalg.norm(M.matvec(x) - rhs) < 1e-10
        x_lstsq = np.linalg.lstsq(M.arr, rhs, rcond=None)[0]
        assert np.linalg.norm(x - x_lstsq) < 1e-10


class TestSigmaMin:
    def test_diag(self):
        assert sigma_min(DenseMatrix(np.diag([3.0, 4.0]))) == pytest.approx(3.0, abs=1e-12)

    def test_identity(self):
        assert sigma_min(DenseMatrix(np.eye(5))) == pytest.approx(1.0, abs=1e-12)

    def test_variational_bound(self, np_rng):
        M = DenseMatrix(np_rng.standard_normal((30, 10)))
        smin2 = sigma_min(M) ** 2
        for _ in range(100):
            v = np_rng.standard_normal(10)
            v /= np.linalg.norm(v)
            Mv = M.matvec(v)
            assert smin2 <= Mv @ Mv + 1e-10


class TestRngStream:
    def test_determinism(self):
        a = RngStream(42).standard_normal(16)
        b = RngStream(42).standard_normal(16)
        assert np.array_equal(a, b)

    def test_trial_derivation(self):
        s = RngStream.for_trial(100, 3)
        assert s.seed == 103


class TestCsvIO:
    def test_matrix_round_trip(self, tmp_path, np_rng):
        M = DenseMatrix(np_rng.standard_normal((6, 4)))
        path = tmp_path / "M.csv"
        save_matrix(M, path)
        M2 = load_matrix(path)
        assert np.array_equal(M.arr, M2.arr)  # 17 sig digits is lossless

    def test_vector_round_trip(self, tmp_path, np_rng):
        v = np_rng.standard_normal(9)
        path = tmp_path / "v.csv"
        save_vector(v, path)
        assert np.array_equal(load_vector(path), v)
