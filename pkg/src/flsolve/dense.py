"""Dense column-major matrices, weighted index sampling, and small-scale
factorization oracles (QR, least squares, smallest singular value).

Everything here is construct-then-freeze: a DenseMatrix never mutates after
construction and can be shared freely between trials.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

RANK_TOL = 1e-12


class RankDeficientError(RuntimeError):
    """Raised when a matrix violates the full-rank assumption."""


class RngStream:
    """A seedable PCG64 random stream owned by exactly one trial.

    Identical seeds give bit-identical draw sequences. Independent trials
    use seeds derived as ``base_seed + trial_index``.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    @classmethod
    def for_trial(cls, base_seed, trial_index):
        return cls(int(base_seed) + int(trial_index))

    def random(self):
        """One uniform draw in [0, 1)."""
        return self._gen.random()

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n):
        return self._gen.permutation(n)


class WeightedSampler:
    """Samples indices with probability proportional to fixed non-negative
    weights, via cumulative sums and binary search.

    A draw picks u uniform in [0, total) and returns the first index whose
    cumulative weight strictly exceeds u, so zero-weight indices are
    unreachable. Indices are 0-based internally (logs report 1-based).
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        self.cumulative = np.cumsum(w)
        self.total = float(self.cumulative[-1])
        if self.total <= 0:
            raise ValueError("all weights are zero; cannot sample")

    def __len__(self):
        return self.cumulative.size

    def sample(self, rng: RngStream) -> int:
        u = rng.random() * self.total
        return int(np.searchsorted(self.cumulative, u, side="right"))


class DenseMatrix:
    """Column-major dense real matrix with cached squared row/column norms.

    Rows are strided views (O(cols) access), columns are contiguous.
    """

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64, order="F")
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got ndim={arr.ndim}")
        self.arr = arr
        self.rows, self.cols = arr.shape
        self.row_norms_sq = np.einsum("ij,ij->i", arr, arr)
        self.col_norms_sq = np.einsum("ij,ij->j", arr, arr)
        self.frob_sq = float(self.row_norms_sq.sum())
        self._row_sampler = None
        self._col_sampler = None

    @property
    def shape(self):
        return (self.rows, self.cols)

    def row(self, i):
        return self.arr[i, :]

    def col(self, j):
        return self.arr[:, j]

    def matvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.cols,):
            raise ValueError(
                f"dimension mismatch: matrix has {self.cols} columns, "
                f"vector has shape {v.shape}"
            )
        return self.arr @ v

    def rmatvec(self, v):
        """Transpose matvec, M^T v."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.rows,):
            raise ValueError(
                f"dimension mismatch: matrix has {self.rows} rows, "
                f"vector has shape {v.shape}"
            )
        return self.arr.T @ v

    def transpose(self):
        return DenseMatrix(self.arr.T)

    def row_sampler(self):
        if self._row_sampler is None:
            self._row_sampler = WeightedSampler(self.row_norms_sq)
        return self._row_sampler

    def col_sampler(self):
        if self._col_sampler is None:
            self._col_sampler = WeightedSampler(self.col_norms_sq)
        return self._col_sampler


def matvec(M: DenseMatrix, v):
    return M.matvec(v)


def row_dot(M: DenseMatrix, i, v):
    """<M_{i,:}, v> without touching any other row."""
    if not 0 <= i < M.rows:
        raise IndexError(f"row index {i} out of range for {M.rows} rows")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (M.cols,):
        raise ValueError(
            f"dimension mismatch: matrix has {M.cols} columns, "
            f"vector has shape {v.shape}"
        )
    return float(M.arr[i, :] @ v)


def sample_index(sampler: WeightedSampler, rng: RngStream) -> int:
    return sampler.sample(rng)


def householder_qr(M: DenseMatrix, complete=False):
    """QR factorization of M (rows >= cols required).

    Returns (Q, R) as ndarrays; thin by default. With ``complete=True`` the
    full square Q is returned, whose trailing rows-cols columns form an
    orthonormal basis of null(M^T) when M has full column rank.

    Raises RankDeficientError when some |R_ii| < 1e-12 * ||M||_F.
    """
    if M.rows < M.cols:
        raise ValueError(f"need rows >= cols, got shape {M.shape}")
    Q, R = np.linalg.qr(M.arr, mode="complete" if complete else "reduced")
    frob = np.sqrt(M.frob_sq)
    diag = np.diag(R[: M.cols, :])
    if np.min(np.abs(diag)) < RANK_TOL * frob:
        raise RankDeficientError(
            f"matrix of shape {M.shape} is numerically rank deficient"
        )
    # Normalize to a positive R diagonal (the factorization is then unique).
    signs = np.where(diag < 0, -1.0, 1.0)
    R = R.copy()
    R[: M.cols, :] *= signs[:, None]
    Q = Q.copy()
    Q[:, : M.cols] *= signs
    return Q, R


def null_space_basis(M: DenseMatrix):
    """Orthonormal basis of null(M^T): trailing columns of the full Q."""
    Q, _ = householder_qr(M, complete=True)
    return Q[:, M.cols:]


def least_squares_solve(M: DenseMatrix, rhs):
    """argmin_y ||rhs - M y||_2 for full-column-rank M, via QR."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (M.rows,):
        raise ValueError(
            f"dimension mismatch: matrix has {M.rows} rows, "
            f"rhs has shape {rhs.shape}"
        )
    Q, R = householder_qr(M)
    return solve_triangular(R, Q.T @ rhs, lower=False)


def min_norm_solve(M: DenseMatrix, rhs):
    """Minimum-norm solution of M x = rhs for full-row-rank M.

    Uses QR of M^T: with M^T = Q R, the solution is Q R^{-T} rhs.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (M.rows,):
        raise ValueError(
            f"dimension mismatch: matrix has {M.rows} rows, "
            f"rhs has shape {rhs.shape}"
        )
    Q, R = householder_qr(M.transpose())
    return Q @ solve_triangular(R.T, rhs, lower=True)


def sigma_min(M: DenseMatrix) -> float:
    """Smallest singular value of M (intended for desk-scale sizes)."""
    s = np.linalg.svd(M.arr, compute_uv=False)
    smin = float(s[-1])
    if smin < RANK_TOL * np.sqrt(M.frob_sq):
        raise RankDeficientError(
            f"matrix of shape {M.shape} is numerically rank deficient"
        )
    return smin


# CSV I/O: plain rows of comma-separated decimal floats, no header.
# 17 significant digits round-trip float64 exactly.

_FMT = "%.17g"


def save_matrix(M: DenseMatrix, path, delimiter=","):
    np.savetxt(path, M.arr, fmt=_FMT, delimiter=delimiter)


def load_matrix(path, delimiter=",") -> DenseMatrix:
    arr = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    return DenseMatrix(arr)


def save_vector(v, path):
    np.savetxt(path, np.asarray(v, dtype=np.float64), fmt=_FMT)


def load_vector(path):
    return np.atleast_1d(np.loadtxt(path))
