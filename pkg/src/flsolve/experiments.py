"""Multi-trial averaging and the desk-scale reproductions of the two
numerical examples (Gaussian factorized systems; wine-data NMF pipeline).
"""

from __future__ import annotations

import dataclasses
import os
import warnings

import numpy as np

from .dense import RngStream, least_squares_solve, save_vector, sigma_min
from .metrics import AveragedHistory, average_histories
from .problems import (
    FactorizedProblem,
    build_factorized,
    gen_gaussian,
    load_csv_dataset,
    nmf,
    synthetic_wine_like,
    wine_target,
)
from .regularizers import Regularizer
from .solvers import SolverConfig, run
from .theory import (
    RateConstants,
    alpha_of,
    beta_of,
    default_delta,
    nu_quadratic,
    simplified_bound,
    theorem_bound,
)

EXAMPLES = ("example1-consistent", "example1-inconsistent",
            "example2-consistent", "example2-inconsistent")

# Desk-scale defaults preserve the 4:1:2 aspect ratio and the maxit = 20m
# budget rule of the synthetic experiment while finishing in seconds.
DESK_EXAMPLE1 = {"m": 200, "l": 50, "n": 100, "s": 5}
PAPER_EXAMPLE1 = {"m": 10000, "l": 2500, "n": 5000, "s": 20}


def run_trials(problem: FactorizedProblem, config: SolverConfig,
               trials) -> AveragedHistory:
    """Average per-k metrics over ``trials`` independent runs with seeds
    config.seed + 0 .. trials - 1. Deterministic given the base seed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    histories = []
    for t in range(trials):
        cfg = dataclasses.replace(config, seed=config.seed + t)
        try:
            histories.append(run(problem, cfg))
        except Exception as exc:
            raise RuntimeError(f"trial {t} (seed {cfg.seed}) failed: {exc}") from exc
    return average_histories(histories)


def bound_inputs(problem: FactorizedProblem, reg: Regularizer,
                 consistent=None):
    """(D0, lhs_norm_sq) for the expectation bounds, at the default start
    z0 = 0. D0 uses the minimum-norm (least squares) solution for the
    quadratic objective, else the problem's stored ground truth. The
    consistent-case bound uses lhs = ||A^+ b||^2, the inconsistent one
    ||A^+||^2 ||A A^+ b||^2."""
    from .dense import min_norm_solve

    if consistent is None:
        consistent = problem.consistent
    yls = least_squares_solve(problem.A, problem.b)
    if reg.is_quadratic:
        x_star = min_norm_solve(problem.B, yls)
    elif problem.x_star is not None:
        x_star = problem.x_star
    else:
        raise ValueError("need a ground truth to evaluate D0 for a "
                         "non-quadratic objective")
    D0 = reg.value(x_star)  # f(x*) + f*(0) - <0, x*>
    if consistent:
        lhs = float(yls @ yls)
    else:
        Ay = problem.A.matvec(yls)
        lhs = float(Ay @ Ay) / sigma_min(problem.A) ** 2
    return D0, lhs


def rate_constants_for(problem: FactorizedProblem, reg: Regularizer,
                       delta=None, nu=None):
    """RateConstants for a problem, or None when nu is unknown (elastic-net
    without a user-supplied nu)."""
    alpha = alpha_of(problem.A)
    if nu is None:
        if not reg.is_quadratic:
            return None
        nu = nu_quadratic(problem.B)
    beta = beta_of(problem.B.frob_sq, reg.gamma, nu)
    if delta is None:
        delta = default_delta(reg.gamma, max(alpha, beta))
    return RateConstants(alpha=alpha, beta=beta, delta=delta, nu=nu)


def bound_table(problem: FactorizedProblem, reg: Regularizer, ks,
                delta=None, nu=None, consistent=None):
    """Rows (k, theorem_bound, simplified_bound or nan) for the given
    iteration grid."""
    consts = rate_constants_for(problem, reg, delta=delta, nu=nu)
    if consts is None:
        raise ValueError("nu is not derivable for this objective; pass --nu")
    D0, lhs = bound_inputs(problem, reg, consistent=consistent)
    Bf = problem.B.frob_sq
    admissible = (1.0 + consts.delta / reg.gamma) * consts.rho < 1.0
    rows = []
    for k in ks:
        exact = theorem_bound(consts, D0, lhs, Bf, reg.gamma, k)
        simple = (simplified_bound(consts, D0, lhs, Bf, reg.gamma, k)
                  if admissible else float("nan"))
        rows.append((k, exact, simple))
    return consts, rows


def _resolve_wine(wine_csv):
    """Locate the red-wine CSV; fall back to the synthetic stand-in."""
    candidates = [wine_csv, os.environ.get("FLSOLVE_WINE_CSV"),
                  os.path.join("data", "winequality-red.csv")]
    for path in candidates:
        if path and os.path.exists(path):
            # UCI file: semicolon-delimited, 12 columns, last is the
            # quality label, excluded here.
            X = load_csv_dataset(path, delimiter=";", columns=range(11))
            return X, path
    warnings.warn("wine CSV not found; using the synthetic stand-in matrix")
    return synthetic_wine_like(), "synthetic"


def _example2_problem(consistent, wine_csv=None, rank=5, nmf_iters=200,
                      seed=0):
    X, source = _resolve_wine(wine_csv)
    rng = RngStream(seed)
    A, B = nmf(X, rank, iterations=nmf_iters, rng=rng)
    p = build_factorized(A, B, wine_target(), consistent, rng,
                         meta={"source": source, "nmf_rank": rank})
    return p


def reproduce(example, scale="desk", wine_csv=None, out_dir=None,
              trials=20, seed=1, log_every=None):
    """Run the matched algorithm pair for one example variant, write
    averaged histories and final iterates as CSV, and return a summary.

    Pairs: example1-consistent -> rk-rk vs rk-rsk; example1-inconsistent ->
    rgs-rk vs rgs-rsk; example2-consistent -> rrk (l1, i.e. the sparse
    Kaczmarz baseline on C) vs rk-rsk; example2-inconsistent -> gerk vs
    rgs-rsk. lambda = 1 throughout; maxit = 20m (example 1) or 10m
    (example 2)."""
    if example not in EXAMPLES:
        raise ValueError(f"unknown example {example!r}; choose from {EXAMPLES}")
    if scale not in ("desk", "paper"):
        raise ValueError(f"unknown scale {scale!r}")

    l1 = Regularizer.elastic_net(1.0)
    rng = RngStream(seed)

    if example.startswith("example1"):
        consistent = example == "example1-consistent"
        sizes = DESK_EXAMPLE1 if scale == "desk" else PAPER_EXAMPLE1
        problem = gen_gaussian(sizes["m"], sizes["l"], sizes["n"], sizes["s"],
                               consistent, rng)
        maxit = 20 * problem.m
        algs = (["rk-rk", "rk-rsk"] if consistent else ["rgs-rk", "rgs-rsk"])
    else:
        consistent = example == "example2-consistent"
        problem = _example2_problem(consistent, wine_csv=wine_csv, seed=seed)
        maxit = 10 * problem.m
        algs = (["rrk", "rk-rsk"] if consistent else ["gerk", "rgs-rsk"])

    if log_every is None:
        log_every = max(1, maxit // 200)

    results = {}
    for tag in algs:
        cfg = SolverConfig(algorithm=tag, regularizer=l1, maxit=maxit,
                           seed=seed, log_every=log_every)
        results[tag] = run_trials(problem, cfg, trials)

    summary = {
        "example": example, "scale": scale, "trials": trials,
        "maxit": maxit, "problem": dict(problem.meta), "algorithms": {},
    }
    for tag, hist in results.items():
        summary["algorithms"][tag] = {
            "final_rel_residual": hist.final("rel_residual"),
            "final_rel_error": hist.final("rel_error"),
            "seconds_per_iteration": hist.final("elapsed_s") / max(1, maxit),
        }

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for tag, hist in results.items():
            hist.to_csv(os.path.join(out_dir, f"{tag}.csv"))
        _write_tidy(os.path.join(out_dir, "tidy.csv"), results)
        if problem.x_star is not None:
            save_vector(problem.x_star, os.path.join(out_dir, "xstar.csv"))
        for tag, hist in results.items():
            if hist.final_x is not None:
                save_vector(hist.final_x,
                            os.path.join(out_dir, f"final_{tag}.csv"))
    return summary, results, problem


def _write_tidy(path, results):
    """Long-form CSV (algorithm, k, metric, value) for plotting tools."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("algorithm,k,metric,value\n")
        for tag, hist in results.items():
            for i, k in enumerate(hist.ks):
                for metric in ("rel_residual", "rel_error", "bregman",
                               "elapsed_s"):
                    v = getattr(hist, metric)[i]
                    if not np.isnan(v):
                        fh.write(f"{tag},{k},{metric},{v:.17g}\n")
