"""Convergence metrics and per-iteration histories.

The history CSV contract:

    algorithm,trial_count,k,rel_residual,rel_error,bregman,elapsed_s

Missing metrics (no ground truth, no dual iterate) are empty fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problems import FactorizedProblem

CSV_HEADER = "algorithm,trial_count,k,rel_residual,rel_error,bregman,elapsed_s"


def rel_residual_consistent(problem: FactorizedProblem, x):
    """||b - A(Bx)|| / ||b||, via two factor-level matvecs."""
    nb = np.linalg.norm(problem.b)
    if nb == 0:
        raise ValueError("zero right-hand side")
    r = problem.b - problem.A.matvec(problem.B.matvec(x))
    return float(np.linalg.norm(r) / nb)


def rel_residual_normal(problem: FactorizedProblem, x):
    """||B^T A^T (b - A(Bx))|| / ||B^T A^T b||, the least-squares residual."""
    denom = np.linalg.norm(problem.B.rmatvec(problem.A.rmatvec(problem.b)))
    if denom == 0:
        raise ValueError("zero normal-equations right-hand side")
    r = problem.b - problem.A.matvec(problem.B.matvec(x))
    return float(np.linalg.norm(problem.B.rmatvec(problem.A.rmatvec(r))) / denom)


def rel_residual(problem: FactorizedProblem, x):
    """The residual matched to the problem: plain for consistent systems,
    normal-equations for inconsistent ones."""
    if problem.consistent:
        return rel_residual_consistent(problem, x)
    return rel_residual_normal(problem, x)


def rel_error(x, x_star):
    """||x - x_star|| / ||x_star||."""
    nx = np.linalg.norm(x_star)
    if nx == 0:
        raise ValueError("zero ground truth")
    return float(np.linalg.norm(np.asarray(x) - np.asarray(x_star)) / nx)


@dataclass
class IterationHistory:
    """Per-logged-iteration metric rows for one run (or an average)."""

    algorithm: str
    seed: int | None = None
    trial_count: int = 1
    meta: dict = field(default_factory=dict)
    ks: list = field(default_factory=list)
    rel_residual: list = field(default_factory=list)
    rel_error: list = field(default_factory=list)    # nan when no x_star
    bregman: list = field(default_factory=list)      # nan when no dual
    elapsed_s: list = field(default_factory=list)    # solver time, cumulative
    final_x: np.ndarray | None = None                # last primal iterate

    def append(self, k, rres, rerr, breg, elapsed):
        if self.ks and k <= self.ks[-1]:
            raise ValueError("history iterations must be strictly increasing")
        self.ks.append(int(k))
        self.rel_residual.append(float(rres))
        self.rel_error.append(float("nan") if rerr is None else float(rerr))
        self.bregman.append(float("nan") if breg is None else float(breg))
        self.elapsed_s.append(float(elapsed))

    def final(self, metric):
        return getattr(self, metric)[-1]

    def __len__(self):
        return len(self.ks)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for i, k in enumerate(self.ks):
                fh.write(",".join([
                    self.algorithm,
                    str(self.trial_count),
                    str(k),
                    _fmt(self.rel_residual[i]),
                    _fmt(self.rel_error[i]),
                    _fmt(self.bregman[i]),
                    _fmt(self.elapsed_s[i]),
                ]) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {header!r}")
            hist = None
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                alg, tc, k, rres, rerr, breg, el = line.split(",")
                if hist is None:
                    hist = cls(algorithm=alg, trial_count=int(tc))
                hist.append(int(k), _parse(rres), _parse(rerr),
                            _parse(breg), _parse(el))
        if hist is None:
            raise ValueError(f"{path}: empty history")
        return hist


def _fmt(v):
    return "" if v is None or math.isnan(v) else f"{v:.17g}"


def _parse(text):
    return float("nan") if text == "" else float(text)


@dataclass
class AveragedHistory(IterationHistory):
    """Arithmetic per-k means over trials, plus per-trial min/max spread
    (recorded for transparency, never asserted against)."""

    base_seed: int | None = None
    spread: dict = field(default_factory=dict)  # metric -> (min array, max array)


def average_histories(histories) -> AveragedHistory:
    if not histories:
        raise ValueError("nothing to average")
    first = histories[0]
    for h in histories[1:]:
        if h.ks != first.ks:
            raise ValueError("histories have mismatched logging grids")
    out = AveragedHistory(algorithm=first.algorithm,
                          trial_count=len(histories),
                          base_seed=first.seed, meta=dict(first.meta))
    out.ks = list(first.ks)
    for metric in ("rel_residual", "rel_error", "bregman", "elapsed_s"):
        stack = np.array([getattr(h, metric) for h in histories])
        setattr(out, metric, list(stack.mean(axis=0)))
        out.spread[metric] = (stack.min(axis=0), stack.max(axis=0))
    if all(h.final_x is not None for h in histories):
        out.final_x = np.mean([h.final_x for h in histories], axis=0)
    return out
