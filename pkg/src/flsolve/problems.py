"""Test-problem construction: synthetic Gaussian factorized systems with a
sparse ground truth, and the CSV + NMF pipeline for real data.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .dense import (
    DenseMatrix,
    RankDeficientError,
    RngStream,
    householder_qr,
    load_matrix,
    load_vector,
    null_space_basis,
    save_matrix,
    save_vector,
)

# The explicit null(A^T) basis needed for inconsistent right-hand sides
# requires a full m x m QR of A; keep that to desk scale.
QR_CEILING = 2000


@dataclass
class FactorizedProblem:
    """A factorized system (A, B, b) with optional ground truth.

    A is m x l, B is l x n, both of rank l. ``consistent`` records whether
    b lies in ran(A B) by construction.
    """

    A: DenseMatrix
    B: DenseMatrix
    b: np.ndarray
    x_star: np.ndarray | None = None
    consistent: bool = True
    meta: dict = field(default_factory=dict)
    _C: DenseMatrix | None = field(default=None, repr=False)

    @property
    def m(self):
        return self.A.rows

    @property
    def l(self):
        return self.A.cols

    @property
    def n(self):
        return self.B.cols

    def full_matrix(self) -> DenseMatrix:
        """The materialized product C = A B (cached). Only the full-system
        baseline algorithms need it."""
        if self._C is None:
            self._C = DenseMatrix(self.A.arr @ self.B.arr)
        return self._C

    def validate(self):
        """Check shapes and the rank(A) = rank(B) = l assumption."""
        if self.A.cols != self.B.rows:
            raise ValueError(
                f"inner dimensions disagree: A is {self.A.shape}, B is {self.B.shape}"
            )
        if self.b.shape != (self.A.rows,):
            raise ValueError(
                f"b has shape {self.b.shape}, expected ({self.A.rows},)"
            )
        if self.x_star is not None and self.x_star.shape != (self.B.cols,):
            raise ValueError(
                f"x_star has shape {self.x_star.shape}, expected ({self.B.cols},)"
            )
        try:
            householder_qr(self.A)
            householder_qr(self.B.transpose())
        except RankDeficientError as exc:
            raise RankDeficientError(
                f"rank(A) = rank(B) = {self.l} assumption violated: {exc}"
            ) from exc
        return self


def gen_gaussian(m, l, n, s, consistent, rng: RngStream,
                 validate=True) -> FactorizedProblem:
    """Random Gaussian A (m x l), B (l x n), and an s-sparse ground truth
    x_star with standard-normal nonzeros on a random support.

    Consistent: b = A B x_star. Inconsistent: b = bh + bperp where
    bperp = N v * ||bh|| / ||N v|| lies in null(A^T), N an orthonormal
    basis of null(A^T) from the full QR of A, v Gaussian of length m - l.
    """
    if not (m >= l and n >= l):
        raise ValueError(f"need m >= l and n >= l, got m={m}, l={l}, n={n}")
    if not 1 <= s <= n:
        raise ValueError(f"sparsity s={s} out of range [1, {n}]")
    if not consistent and m > QR_CEILING:
        raise ValueError(
            f"inconsistent construction needs a full QR of A; m={m} exceeds "
            f"the ceiling {QR_CEILING} (use desk scale or a precomputed input)"
        )
    A = DenseMatrix(rng.standard_normal((m, l)))
    B = DenseMatrix(rng.standard_normal((l, n)))
    x_star = np.zeros(n)
    support = rng.permutation(n)[:s]
    x_star[support] = rng.standard_normal(s)

    bh = A.matvec(B.matvec(x_star))
    if consistent:
        b = bh
    else:
        N = null_space_basis(A)
        v = rng.standard_normal(m - l)
        Nv = N @ v
        bperp = Nv * (np.linalg.norm(bh) / np.linalg.norm(Nv))
        b = bh + bperp
    p = FactorizedProblem(
        A, B, b, x_star=x_star, consistent=bool(consistent),
        meta={"m": m, "l": l, "n": n, "s": s, "seed": rng.seed,
              "consistent": bool(consistent)},
    )
    return p.validate() if validate else p


def load_csv_dataset(path, delimiter=",", columns=None) -> DenseMatrix:
    """Numeric CSV ingestion with header auto-detection.

    A non-numeric first row is treated as a header and skipped. ``columns``
    selects a subset of 0-based column indices (e.g. to drop a label
    column). Ragged rows or non-numeric data cells are fatal, with the
    offending line number in the message.
    """
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = [c.strip().strip('"') for c in line.split(delimiter)]
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(
                    f"{path}:{lineno}: non-numeric cell in data region"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{path}:{lineno}: ragged row ({len(values)} cells, "
                    f"expected {width})"
                )
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no numeric rows found")
    arr = np.array(rows, dtype=np.float64)
    if columns is not None:
        arr = arr[:, list(columns)]
    return DenseMatrix(arr)


def nmf(X: DenseMatrix, rank, iterations=200, rng: RngStream | None = None):
    """Nonnegative matrix factorization X ~ A B by multiplicative updates.

    Entries of X must be >= 0. Factors are initialized uniform-random
    positive; reconstruction error is non-increasing across sweeps. A
    1e-12 denominator floor guards against division by zero.
    """
    if np.any(X.arr < 0):
        raise ValueError("NMF input must be entrywise non-negative")
    m, n = X.shape
    if not 1 <= rank <= min(m, n):
        raise ValueError(f"rank {rank} out of range [1, {min(m, n)}]")
    if rng is None:
        rng = RngStream(0)
    eps = 1e-12
    Xa = X.arr
    scale = np.sqrt(max(Xa.mean(), eps) / rank)
    W = scale * rng.uniform(0.0, 1.0, (m, rank)) + eps
    H = scale * rng.uniform(0.0, 1.0, (rank, n)) + eps
    for _ in range(iterations):
        W *= (Xa @ H.T) / np.maximum(W @ (H @ H.T), eps)
        H *= (W.T @ Xa) / np.maximum((W.T @ W) @ H, eps)
    return DenseMatrix(W), DenseMatrix(H)


def nmf_reconstruction_error(X: DenseMatrix, A: DenseMatrix, B: DenseMatrix):
    return float(np.linalg.norm(X.arr - A.arr @ B.arr))


def wine_target():
    """The 3-sparse length-11 target: ones at positions 1, 6, 11 (1-based)."""
    x = np.zeros(11)
    x[[0, 5, 10]] = 1.0
    return x


def build_factorized(A: DenseMatrix, B: DenseMatrix, x_star, consistent,
                     rng: RngStream, meta=None) -> FactorizedProblem:
    """Assemble a problem around given factors and ground truth, using the
    same right-hand-side recipe as gen_gaussian."""
    m = A.rows
    bh = A.matvec(B.matvec(x_star))
    if consistent:
        b = bh
    else:
        if m > QR_CEILING:
            raise ValueError(
                f"inconsistent construction needs a full QR of A; m={m} "
                f"exceeds the ceiling {QR_CEILING}"
            )
        N = null_space_basis(A)
        v = rng.standard_normal(m - A.cols)
        Nv = N @ v
        b = bh + Nv * (np.linalg.norm(bh) / np.linalg.norm(Nv))
    base = {"m": m, "l": A.cols, "n": B.cols, "s": int(np.count_nonzero(x_star)),
            "seed": rng.seed, "consistent": bool(consistent)}
    if meta:
        base.update(meta)
    return FactorizedProblem(A, B, b, x_star=np.asarray(x_star, float),
                             consistent=bool(consistent), meta=base).validate()


# Column means of the UCI red-wine features (fixed acidity, volatile
# acidity, citric acid, residual sugar, chlorides, free SO2, total SO2,
# density, pH, sulphates, alcohol), used to scale the synthetic stand-in.
WINE_FEATURE_MEANS = np.array([8.32, 0.53, 0.27, 2.54, 0.087, 15.9, 46.5,
                               0.9967, 3.31, 0.66, 10.4])


def synthetic_wine_like(m=1599, n=11, rank=5, seed=0) -> DenseMatrix:
    """A reproducible non-negative stand-in with the red-wine shape, used
    when the real CSV is not available: a positive low-rank product plus
    positive noise, with column means matched to the real features."""
    rng = RngStream(seed)
    W = np.abs(rng.standard_normal((m, rank))) + 0.1
    H = np.abs(rng.standard_normal((rank, n))) + 0.1
    X = W @ H + 0.3 * np.abs(rng.standard_normal((m, n)))
    X *= np.resize(WINE_FEATURE_MEANS, n) / X.mean(axis=0)
    return DenseMatrix(X)


# Problem directory layout: A.csv, B.csv, b.csv, optional xstar.csv, and a
# meta file of key=value lines.

_META_FILE = "meta"


def save_problem(p: FactorizedProblem, directory):
    os.makedirs(directory, exist_ok=True)
    save_matrix(p.A, os.path.join(directory, "A.csv"))
    save_matrix(p.B, os.path.join(directory, "B.csv"))
    save_vector(p.b, os.path.join(directory, "b.csv"))
    if p.x_star is not None:
        save_vector(p.x_star, os.path.join(directory, "xstar.csv"))
    meta = dict(p.meta)
    meta.setdefault("m", p.m)
    meta.setdefault("l", p.l)
    meta.setdefault("n", p.n)
    meta["consistent"] = p.consistent
    with open(os.path.join(directory, _META_FILE), "w", encoding="utf-8") as fh:
        for key, value in sorted(meta.items()):
            fh.write(f"{key}={value}\n")


def _parse_meta_value(text):
    if text in ("True", "False"):
        return text == "True"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_problem(directory) -> FactorizedProblem:
    for name in ("A.csv", "B.csv", "b.csv", _META_FILE):
        if not os.path.exists(os.path.join(directory, name)):
            raise FileNotFoundError(
                f"problem directory {directory} is missing {name}"
            )
    A = load_matrix(os.path.join(directory, "A.csv"))
    B = load_matrix(os.path.join(directory, "B.csv"))
    b = load_vector(os.path.join(directory, "b.csv"))
    xstar_path = os.path.join(directory, "xstar.csv")
    x_star = load_vector(xstar_path) if os.path.exists(xstar_path) else None
    meta = {}
    with open(os.path.join(directory, _META_FILE), "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition("=")
                meta[key] = _parse_meta_value(value)
    p = FactorizedProblem(A, B, b, x_star=x_star,
                          consistent=bool(meta.get("consistent", True)),
                          meta=meta)
    return p.validate()
