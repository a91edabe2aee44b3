"""Command-line interface.

Subcommands:

    gen          generate a synthetic Gaussian factorized problem directory
    ingest-wine  build a problem directory from a numeric CSV via NMF
    solve        run one algorithm (optionally multi-trial averaged)
    bounds       print rate constants and an expectation-bound table
    reproduce    rerun one of the two numerical examples at desk scale
"""

from __future__ import annotations

import argparse
import re
import sys

from .dense import RngStream, save_vector
from .experiments import EXAMPLES, bound_table, reproduce, run_trials
from .problems import (
    build_factorized,
    gen_gaussian,
    load_csv_dataset,
    load_problem,
    nmf,
    save_problem,
    wine_target,
)
from .regularizers import Regularizer
from .solvers import ALGORITHM_TAGS, SolverConfig, run


def _parse_maxit(text, m):
    """An integer, or a budget rule like '20m' (rows of A times 20)."""
    match = re.fullmatch(r"(\d+)m", text)
    if match:
        return int(match.group(1)) * m
    return int(text)


def _regularizer(args) -> Regularizer:
    if args.reg == "quadratic":
        return Regularizer.quadratic()
    return Regularizer.elastic_net(args.lam)


def _add_reg_options(p):
    p.add_argument("--reg", choices=["quadratic", "l1"], default="quadratic")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="shrinkage parameter for --reg l1")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flsolve",
        description="Randomized iterative solvers for factorized linear "
                    "systems A B x = b.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a Gaussian factorized problem")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--consistent", dest="consistent", action="store_true",
                       default=True)
    group.add_argument("--inconsistent", dest="consistent",
                       action="store_false")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ingest-wine",
                       help="CSV -> NMF factors -> problem directory")
    p.add_argument("--csv", required=True)
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--nmf-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delimiter", default=";",
                   help="CSV delimiter (the UCI wine file uses ';')")
    p.add_argument("--columns", type=int, default=11,
                   help="number of leading feature columns to keep")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--consistent", dest="consistent", action="store_true",
                       default=True)
    group.add_argument("--inconsistent", dest="consistent",
                       action="store_false")
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="run one algorithm on a problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--alg", required=True, choices=ALGORITHM_TAGS)
    _add_reg_options(p)
    p.add_argument("--maxit", default="20m",
                   help="iteration budget: an integer or e.g. '20m'")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log-every", type=int, default=None)
    p.add_argument("--tol", type=float, default=None,
                   help="optional residual stopping tolerance (off by default)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("bounds",
                       help="rate constants and expectation-bound table")
    p.add_argument("--problem", required=True)
    p.add_argument("--alg", required=True, choices=ALGORITHM_TAGS)
    _add_reg_options(p)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--nu", type=float, default=None,
                   help="admissibility constant (required for --reg l1)")
    p.add_argument("--kmax", type=int, default=200)
    p.add_argument("--kstep", type=int, default=10)
    p.add_argument("--out", default=None)

    p = sub.add_parser("reproduce", help="rerun a numerical example")
    p.add_argument("example", choices=EXAMPLES)
    p.add_argument("--scale", choices=["desk", "paper"], default="desk")
    p.add_argument("--wine-csv", default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)

    return parser


def cmd_gen(args):
    problem = gen_gaussian(args.m, args.l, args.n, args.s, args.consistent,
                           RngStream(args.seed))
    save_problem(problem, args.out)
    print(f"wrote {args.out}: m={args.m} l={args.l} n={args.n} s={args.s} "
          f"consistent={args.consistent}")
    return 0


def cmd_ingest_wine(args):
    X = load_csv_dataset(args.csv, delimiter=args.delimiter,
                         columns=range(args.columns))
    rng = RngStream(args.seed)
    A, B = nmf(X, args.rank, iterations=args.nmf_iters, rng=rng)
    problem = build_factorized(A, B, wine_target(), args.consistent, rng,
                               meta={"source": args.csv,
                                     "nmf_rank": args.rank})
    save_problem(problem, args.out)
    print(f"wrote {args.out}: X {X.shape} -> A {A.shape} B {B.shape}, "
          f"consistent={args.consistent}")
    return 0


def cmd_solve(args):
    problem = load_problem(args.problem)
    maxit = _parse_maxit(args.maxit, problem.m)
    log_every = args.log_every or max(1, maxit // 200)
    cfg = SolverConfig(algorithm=args.alg, regularizer=_regularizer(args),
                       maxit=maxit, seed=args.seed, log_every=log_every,
                       tol=args.tol)
    if args.trials > 1:
        hist = run_trials(problem, cfg, args.trials)
    else:
        hist = run(problem, cfg)
    print(f"{args.alg}: k={hist.ks[-1]} "
          f"rel_residual={hist.final('rel_residual'):.3e} "
          f"rel_error={hist.final('rel_error'):.3e} "
          f"solver_s={hist.final('elapsed_s'):.3f}")
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        hist.to_csv(os.path.join(args.out, "history.csv"))
        if hist.final_x is not None:
            save_vector(hist.final_x, os.path.join(args.out, "final_x.csv"))
        print(f"wrote {args.out}/history.csv")
    return 0


def cmd_bounds(args):
    problem = load_problem(args.problem)
    reg = _regularizer(args)
    consistent = not args.alg.startswith("rgs")
    ks = list(range(0, args.kmax + 1, args.kstep))
    consts, rows = bound_table(problem, reg, ks, delta=args.delta,
                               nu=args.nu, consistent=consistent)
    print(f"alpha={consts.alpha:.12g}")
    print(f"beta={consts.beta:.12g}")
    print(f"rho={consts.rho:.12g}")
    print(f"nu={consts.nu:.12g}")
    print(f"delta={consts.delta:.12g}")
    lines = ["k,theorem_bound,simplified_bound"]
    for k, exact, simple in rows:
        lines.append(f"{k},{exact:.17g},{simple:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_reproduce(args):
    summary, _, _ = reproduce(args.example, scale=args.scale,
                              wine_csv=args.wine_csv, out_dir=args.out,
                              trials=args.trials, seed=args.seed)
    print(f"{summary['example']} ({summary['scale']}, "
          f"{summary['trials']} trials, maxit={summary['maxit']})")
    print(f"{'algorithm':<10} {'rel_residual':>14} {'rel_error':>12} "
          f"{'s/iter':>12}")
    for tag, row in summary["algorithms"].items():
        print(f"{tag:<10} {row['final_rel_residual']:>14.3e} "
              f"{row['final_rel_error']:>12.3e} "
              f"{row['seconds_per_iteration']:>12.3e}")
    print(f"wrote {args.out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "ingest-wine": cmd_ingest_wine,
        "solve": cmd_solve,
        "bounds": cmd_bounds,
        "reproduce": cmd_reproduce,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
