"""Randomized iterative solver steps and the run driver.

Step kernels (all sampling row/column indices with probability proportional
to squared norms):

* rk_step       row projection for A y = b
* rgs_step      coordinate descent for min ||b - A y||, with residual cache
* rrk_step      dual row projection for min f(x) s.t. B x = y
* rk_rrk_step   one rk_step on (A, b) then one rrk_step on (B, y)
* rgs_rrk_step  one rgs_step on (A, b) then one rrk_step on (B, y)
* gerk_step     full-system sparse extended Kaczmarz on C x = b
* rsegs_step    full-system sparse extended Gauss-Seidel on C x = b

With a quadratic objective, rrk_step performs bit-for-bit the rk_step
arithmetic, so rk-rk / rgs-rk are exact specializations of rk-rrk /
rgs-rrk. Each combined step consumes its RngStream in a fixed order
(draw for A first, then the draw for B).

Updates are in place; a SolverState is confined to one trial.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dense import DenseMatrix, RngStream
from .metrics import IterationHistory, rel_error, rel_residual
from .problems import FactorizedProblem
from .regularizers import Regularizer, bregman_distance, soft_shrinkage

FACTORIZED_TAGS = ("rk-rk", "rk-rsk", "rk-rrk", "rgs-rk", "rgs-rsk", "rgs-rrk")
FULL_TAGS = ("rk", "rgs", "rrk", "gerk", "rsegs")
ALGORITHM_TAGS = FULL_TAGS + FACTORIZED_TAGS


@dataclass
class SolverState:
    """Live iterate bundle shared by the step functions.

    y is the auxiliary iterate (length l, or n for rgs/rsegs), r the cached
    residual b - A y for the Gauss-Seidel family, z the dual iterate, and
    x = grad f*(z) the primal. For a quadratic objective x aliases z.
    """

    y: np.ndarray | None = None
    r: np.ndarray | None = None
    z: np.ndarray | None = None
    x: np.ndarray | None = None
    k: int = 0


@dataclass
class SolverConfig:
    algorithm: str
    regularizer: Regularizer = field(default_factory=Regularizer.quadratic)
    maxit: int = 1000
    seed: int = 0
    log_every: int = 1
    residual_refresh_every: int = 10000
    tol: float | None = None  # optional residual stop; off by default

    def __post_init__(self):
        if self.algorithm not in ALGORITHM_TAGS:
            raise ValueError(f"unknown algorithm tag {self.algorithm!r}; "
                             f"choose from {ALGORITHM_TAGS}")
        if self.maxit < 0:
            raise ValueError("maxit must be >= 0")
        if self.log_every < 1 or self.residual_refresh_every < 1:
            raise ValueError("strides must be >= 1")


def rk_step(A: DenseMatrix, b, y, rng: RngStream, sampler=None):
    """Project y onto the hyperplane of one sampled row of A y = b."""
    if sampler is None:
        sampler = A.row_sampler()
    j = sampler.sample(rng)
    row = A.arr[j, :]
    y -= ((row @ y) - b[j]) / A.row_norms_sq[j] * row
    return y


def rgs_step(A: DenseMatrix, b, y, r, rng: RngStream, sampler=None):
    """Adjust one coordinate of y to zero <A_{:,j}, r>; r tracks b - A y."""
    if sampler is None:
        sampler = A.col_sampler()
    j = sampler.sample(rng)
    col = A.arr[:, j]
    d = (col @ r) / A.col_norms_sq[j]
    y[j] += d
    r -= d * col
    return y, r


def rrk_step(B: DenseMatrix, y_target, z, x, reg: Regularizer,
             rng: RngStream, sampler=None):
    """Dual projection step for min f(x) s.t. B x = y_target."""
    if sampler is None:
        sampler = B.row_sampler()
    i = sampler.sample(rng)
    row = B.arr[i, :]
    z -= reg.gamma * ((row @ x) - y_target[i]) / B.row_norms_sq[i] * row
    return z, reg.grad_conjugate(z)


def rk_rrk_step(A: DenseMatrix, B: DenseMatrix, b, state: SolverState,
                reg: Regularizer, rng: RngStream):
    """One combined step for the consistent factorized system (Algorithm
    "RK then RRK"); rng draw order: row of A, then row of B."""
    rk_step(A, b, state.y, rng)
    state.z, state.x = rrk_step(B, state.y, state.z, state.x, reg, rng)
    state.k += 1
    return state


def rgs_rrk_step(A: DenseMatrix, B: DenseMatrix, b, state: SolverState,
                 reg: Regularizer, rng: RngStream):
    """One combined step for the inconsistent factorized system; rng draw
    order: column of A, then row of B."""
    rgs_step(A, b, state.y, state.r, rng)
    state.z, state.x = rrk_step(B, state.y, state.z, state.x, reg, rng)
    state.k += 1
    return state


def gerk_step(C: DenseMatrix, b, state: SolverState, lam, rng: RngStream):
    """Sparse extended Kaczmarz step on the full system C x = b.

    y (initialized to b) runs RK on C^T y = 0; the z-update mixes in the
    current y to target the least-squares right-hand side."""
    j = C.col_sampler().sample(rng)
    col = C.arr[:, j]
    y = state.y
    y -= ((col @ y) / C.col_norms_sq[j]) * col
    i = C.row_sampler().sample(rng)
    row = C.arr[i, :]
    state.z -= ((row @ state.x) - b[i] + y[i]) / C.row_norms_sq[i] * row
    state.x = soft_shrinkage(state.z, lam)
    state.k += 1
    return state


def rsegs_step(C: DenseMatrix, b, state: SolverState, lam, rng: RngStream):
    """Sparse extended Gauss-Seidel step on the full system C x = b.

    y runs RGS on min ||b - C y||; the z-update projects x toward y."""
    rgs_step(C, b, state.y, state.r, rng)
    i = C.row_sampler().sample(rng)
    row = C.arr[i, :]
    state.z -= (row @ (state.x - state.y)) / C.row_norms_sq[i] * row
    state.x = soft_shrinkage(state.z, lam)
    state.k += 1
    return state


def effective_regularizer(tag, reg: Regularizer) -> Regularizer:
    """Resolve the specialization tags: *-rk forces quadratic, *-rsk
    requires elastic-net; generic tags take the regularizer as given."""
    if tag in ("rk", "rk-rk", "rgs-rk", "rgs"):
        return Regularizer.quadratic()
    if tag in ("rk-rsk", "rgs-rsk"):
        if reg.is_quadratic:
            raise ValueError(f"{tag} requires an elastic-net regularizer "
                             "(--reg l1 --lambda <value>)")
        return reg
    return reg


def _make_stepper(problem: FactorizedProblem, tag, reg, rng, config):
    """Build (step closure, state, has_dual) for one run."""
    refresh = config.residual_refresh_every
    if tag in ("rk-rk", "rk-rsk", "rk-rrk"):
        A, B, b = problem.A, problem.B, problem.b
        state = SolverState(y=np.zeros(problem.l), z=np.zeros(problem.n))
        state.x = reg.grad_conjugate(state.z)
        a_sampler, b_sampler = A.row_sampler(), B.row_sampler()
        Aa, Ba = A.arr, B.arr
        a_nrm, b_nrm = A.row_norms_sq, B.row_norms_sq
        gamma = reg.gamma
        grad_conj = reg.grad_conjugate

        def step():
            j = a_sampler.sample(rng)
            arow = Aa[j, :]
            y = state.y
            y -= ((arow @ y) - b[j]) / a_nrm[j] * arow
            i = b_sampler.sample(rng)
            brow = Ba[i, :]
            z = state.z
            z -= gamma * ((brow @ state.x) - y[i]) / b_nrm[i] * brow
            state.x = grad_conj(z)

        return step, state, True

    if tag in ("rgs-rk", "rgs-rsk", "rgs-rrk"):
        A, B, b = problem.A, problem.B, problem.b
        state = SolverState(y=np.zeros(problem.l), r=b.copy(),
                            z=np.zeros(problem.n))
        state.x = reg.grad_conjugate(state.z)
        a_sampler, b_sampler = A.col_sampler(), B.row_sampler()
        Aa, Ba = A.arr, B.arr
        a_nrm, b_nrm = A.col_norms_sq, B.row_norms_sq
        gamma = reg.gamma
        grad_conj = reg.grad_conjugate
        count = [0]

        def step():
            j = a_sampler.sample(rng)
            col = Aa[:, j]
            d = (col @ state.r) / a_nrm[j]
            state.y[j] += d
            state.r -= d * col
            count[0] += 1
            if count[0] % refresh == 0:
                state.r = b - Aa @ state.y
            i = b_sampler.sample(rng)
            brow = Ba[i, :]
            z = state.z
            z -= gamma * ((brow @ state.x) - state.y[i]) / b_nrm[i] * brow
            state.x = grad_conj(z)

        return step, state, True

    # Full-system families operate on the materialized product C.
    C = problem.full_matrix()
    b = problem.b
    n = C.cols

    if tag in ("rk", "rrk"):
        state = SolverState(z=np.zeros(n))
        state.x = reg.grad_conjugate(state.z)
        sampler = C.row_sampler()
        Ca, nrm = C.arr, C.row_norms_sq
        gamma = reg.gamma
        grad_conj = reg.grad_conjugate

        def step():
            i = sampler.sample(rng)
            row = Ca[i, :]
            z = state.z
            z -= gamma * ((row @ state.x) - b[i]) / nrm[i] * row
            state.x = grad_conj(z)

        return step, state, True

    if tag == "rgs":
        state = SolverState(y=np.zeros(n), r=b.copy())
        state.x = state.y  # the iterate itself approximates the solution
        sampler = C.col_sampler()
        Ca, nrm = C.arr, C.col_norms_sq
        count = [0]

        def step():
            j = sampler.sample(rng)
            col = Ca[:, j]
            d = (col @ state.r) / nrm[j]
            state.y[j] += d
            state.r -= d * col
            count[0] += 1
            if count[0] % refresh == 0:
                state.r = b - Ca @ state.y

        return step, state, False

    lam = 0.0 if reg.is_quadratic else reg.lam
    if tag == "gerk":
        state = SolverState(y=b.copy(), z=np.zeros(n))
        state.x = soft_shrinkage(state.z, lam)

        def step():
            gerk_step(C, b, state, lam, rng)

        return step, state, True

    if tag == "rsegs":
        state = SolverState(y=np.zeros(n), r=b.copy(), z=np.zeros(n))
        state.x = soft_shrinkage(state.z, lam)
        count = [0]

        def step():
            rsegs_step(C, b, state, lam, rng)
            count[0] += 1
            if count[0] % refresh == 0:
                state.r = b - C.arr @ state.y

        return step, state, True

    raise ValueError(f"unknown algorithm tag {tag!r}")


def run(problem: FactorizedProblem, config: SolverConfig) -> IterationHistory:
    """Execute maxit steps, logging metrics every log_every iterations
    (plus the initial point and the final iterate). Deterministic given the
    seed. Metric computation is excluded from the elapsed-time column.
    """
    tag = config.algorithm
    reg = effective_regularizer(tag, config.regularizer)
    rng = RngStream(config.seed)
    step, state, has_dual = _make_stepper(problem, tag, reg, rng, config)

    hist = IterationHistory(
        algorithm=tag, seed=config.seed,
        meta={"maxit": config.maxit, "log_every": config.log_every,
              "regularizer": reg.kind, "lambda": reg.lam,
              "problem": dict(problem.meta)},
    )
    x_star = problem.x_star
    elapsed = 0.0

    def log(k):
        x = state.x
        rres = rel_residual(problem, x)
        rerr = rel_error(x, x_star) if x_star is not None else None
        breg = None
        if x_star is not None and has_dual and state.z is not None:
            breg = bregman_distance(reg, state.z, x_star)
        hist.append(k, rres, rerr, breg, elapsed)
        return rres

    rres = log(0)
    k = 0
    try:
        while k < config.maxit:
            if config.tol is not None and rres <= config.tol:
                break
            batch = min(config.log_every, config.maxit - k)
            t0 = time.perf_counter()
            for _ in range(batch):
                step()
            elapsed += time.perf_counter() - t0
            k += batch
            state.k = k
            rres = log(k)
    except Exception as exc:
        raise RuntimeError(f"{tag} failed at iteration {k}: {exc}") from exc
    hist.final_x = np.array(state.x, dtype=np.float64, copy=True)
    return hist
