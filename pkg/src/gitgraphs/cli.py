"""Command-line interface.

Exit codes: 0 success, 2 invalid parameters, 1 internal inconsistency.
Sample i of a run is drawn from ``RandomSource(seed, stream=i)``, so output
does not depend on ``--jobs``.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import counting, oracle, tuning
from .formats import FORMATS
from .sampling import (
    RandomSource,
    feasible_free_range,
    sample_boltzmann_windowed,
    sample_exact,
    sample_rejection,
)

SEED_ENV = "GITGRAPHS_SEED"
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class Inconsistency(Exception):
    pass


def _cmd_count(args, out):
    n = args.n
    ks = [args.k] if args.k is not None else list(range(n + 1))
    if any(k < 0 or k > n for k in ks):
        raise UsageError(f"need 0 <= k <= n, got n={n}, k={args.k}")
    routes = {"closed": args.closed, "recurrence": args.recurrence}
    if args.both or not any(routes.values()):
        routes = {"recurrence": True, "closed": True}
    rec = counting.count_row(n) if routes.get("recurrence") else None
    stir = counting.build_stirling_table(max(ks)) if routes.get("closed") else None
    for k in ks:
        values = []
        if rec is not None:
            values.append(rec[k])
        if stir is not None:
            values.append(counting.count_closed_form(n, k, stir))
        if len(set(values)) > 1:
            raise Inconsistency(f"counting routes disagree at n={n}, k={k}: {values}")
        for v in values:
            out.write(f"{v}\n" if args.k is not None else f"{k},{v}\n")


def _sample_one(job):
    method, seed, i, kw = job
    rng = RandomSource(seed, stream=i)
    if method == "rejection":
        return sample_rejection(kw["n"], kw["k"], rng)
    if method == "exact":
        return sample_exact(kw["n"], kw["k"], rng, f=kw["f"], stirling=kw["stirling"])
    return sample_boltzmann_windowed(kw["params"], rng, kw["min_size"], kw["max_size"])


def _resolve_seed(args, err):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
        err.write(f"using seed {seed} from {SEED_ENV}\n")
        return seed
    return DEFAULT_SEED


def _cmd_sample(args, out, err):
    seed = _resolve_seed(args, err)
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    kw = {}
    if args.method in ("rejection", "exact"):
        if args.n is None or args.k is None:
            raise UsageError(f"--method {args.method} needs --n and --k")
        if not 0 <= args.k <= args.n:
            raise UsageError(f"need 0 <= k <= n, got n={args.n}, k={args.k}")
        if args.method == "rejection" and args.f is not None:
            raise UsageError("--f is only supported by --method exact")
        kw.update(n=args.n, k=args.k, f=args.f)
        if args.method == "exact":
            lo, hi = sampling_range(args.n, args.k)
            if lo > hi or (args.f is not None and not lo <= args.f <= hi):
                raise UsageError(f"no Git graph with n={args.n}, k={args.k}, f={args.f}")
            # exact tables are cheap below this size; larger k use the table-free route
            kw["stirling"] = counting.build_stirling_table(args.k) if args.k <= 2000 else None
        elif args.k == 1 and args.n > 1 or args.k == 0 and args.n > 0:
            raise UsageError(f"no Git graph with n={args.n}, k={args.k}")
    else:
        if args.alpha is None or args.size is None:
            raise UsageError("--method boltzmann needs --alpha and --size")
        try:
            res = tuning.tune(args.alpha, args.size)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        kw.update(params=res.params, min_size=args.min_size or 0, max_size=args.max_size)
    jobs = [(args.method, seed, i, kw) for i in range(args.count)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            graphs = pool.map(_sample_one, jobs, chunksize=max(1, args.count // (4 * args.jobs)))
            for g in graphs:
                out.write(FORMATS[args.format](g))
    else:
        for job in jobs:
            out.write(FORMATS[args.format](_sample_one(job)))


def sampling_range(n, k):
    if k == 0:
        return (0, 0) if n == 0 else (1, 0)
    return feasible_free_range(n, k)


def _cmd_enumerate(args, out):
    try:
        res = oracle.enumerate_git_graphs(args.n, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for g in res.items:
        out.write(FORMATS[args.format](g))


def _cmd_tune(args, out):
    try:
        res = tuning.tune(args.alpha, args.size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"u={res.u!r}\nrho={res.rho!r}\nz={res.z!r}\n")
    out.write(f"expected_size={res.expected_size!r}\nexpected_black={res.expected_black!r}\n")


def _cmd_stats(args, out):
    if args.dist == "k":
        try:
            u = None if args.u is None else Fraction(args.u)
        except ValueError:
            raise UsageError(f"--u {args.u!r} is not a number") from None
        if u is not None and u <= 0:
            raise UsageError("--u must be positive")
        dist = counting.k_distribution(args.n, u=u)
        out.write("k,weight,probability\n")
        for k, (w, p) in enumerate(zip(dist.weights, dist.probabilities)):
            out.write(f"{k},{w},{p}\n")
    else:
        if args.k is None or not 1 <= args.k <= args.n:
            raise UsageError("--dist f needs --k with 1 <= k <= n")
        if args.k == 1 and args.n > 1:
            raise UsageError(f"no Git graph with n={args.n}, k=1")
        stir = counting.build_stirling_table(args.k)
        weights = counting.free_vertex_distribution(args.n, args.k, stir)
        total = sum(weights.values())
        out.write("f,weight,probability\n")
        for f, w in weights.items():
            out.write(f"{f},{w},{Fraction(w, total)}\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gitgraphs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="exact number of Git graphs")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int)
    route = c.add_mutually_exclusive_group()
    route.add_argument("--closed", action="store_true")
    route.add_argument("--recurrence", action="store_true")
    route.add_argument("--both", action="store_true")

    s = sub.add_parser("sample", help="draw random Git graphs")
    s.add_argument("--method", choices=("rejection", "exact", "boltzmann"), required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--f", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--size", type=float)
    s.add_argument("--min-size", type=int)
    s.add_argument("--max-size", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--format", choices=sorted(FORMATS), default="json")

    e = sub.add_parser("enumerate", help="list every Git graph with n vertices, k black")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--format", choices=sorted(FORMATS), default="json")

    t = sub.add_parser("tune", help="Boltzmann parameters for a target ratio and size")
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--size", type=float, required=True)

    st = sub.add_parser("stats", help="exact distributions as CSV")
    st.add_argument("--dist", choices=("k", "f"), required=True)
    st.add_argument("--n", type=int, required=True)
    st.add_argument("--k", type=int)
    st.add_argument("--u", type=str, help="labeled-main weight, e.g. 2 or 3/2")
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if getattr(args, "n", None) is not None and args.n < 0:
            raise UsageError("--n must be >= 0")
        if args.command == "count":
            _cmd_count(args, out)
        elif args.command == "sample":
            if args.count < 0 or args.jobs < 1:
                raise UsageError("--count must be >= 0 and --jobs >= 1")
            if args.min_size is not None or args.max_size is not None:
                if args.method != "boltzmann":
                    raise UsageError("--min-size/--max-size apply only to --method boltzmann")
            _cmd_sample(args, out, err)
        elif args.command == "enumerate":
            _cmd_enumerate(args, out)
        elif args.command == "tune":
            _cmd_tune(args, out)
        elif args.command == "stats":
            _cmd_stats(args, out)
    except UsageError as exc:
        err.write(f"gitgraphs: error: {exc}\n")
        return 2
    except Inconsistency as exc:
        err.write(f"gitgraphs: internal inconsistency: {exc}\n")
        return 1
    except BrokenPipeError:
        # reader went away (e.g. `| head`); silence the flush at exit
        if out is sys.stdout:
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
