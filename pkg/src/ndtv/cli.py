"""Command-line surface: data generation, partitioning, verification, benchmarks.

Exit codes: 0 success, 2 certificate verification failure, 3 domain or
precondition error (including bad usage), 4 I/O or parse error.

All randomized commands require an explicit --seed; streams are PCG64
(``numpy.random.default_rng``), so identical seeds reproduce identical
output across platforms.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time

import numpy as np

from .core import DomainError, PointSet
from .fileio import ParseError, load_certificate, load_points, save_certificate, save_points
from .halving import derand_halving, halving_tree_partition
from .sampling import derand_sample_by_halving, derand_sample_fast, derand_sample_slow
from .tverberg import tverberg_fast, tverberg_partition, verify_certificate

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

GENERATOR_KINDS = ("uniform-cube", "gaussian", "basis", "simplex-clusters")
PARTITION_ALGOS = ("random", "fast", "det")
BENCH_ALGOS = PARTITION_ALGOS + ("halving", "sample-slow", "sample-fast", "sample-halving")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, which collides with the verification
    # failure code; route usage problems to the domain-error exit instead
    def error(self, message):
        raise _UsageError(message)


def generate_points(kind: str, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Deterministic-per-seed test distributions."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if d < 1:
        raise DomainError(f"d must be at least 1, got {d}")
    if kind == "uniform-cube":
        return rng.random((n, d))
    if kind == "gaussian":
        return rng.standard_normal((n, d))
    if kind == "basis":
        if n != d:
            raise DomainError(f"kind 'basis' requires n == d, got n={n}, d={d}")
        return np.eye(d)
    if kind == "simplex-clusters":
        # d+1 clusters hugging the vertices of the simplex conv(0, e_1..e_d)
        verts = np.vstack([np.zeros(d), np.eye(d)])
        assign = np.arange(n) % (d + 1)
        return verts[assign] + 0.01 * rng.standard_normal((n, d))
    raise DomainError(f"unknown generator kind {kind!r} (expected one of {', '.join(GENERATOR_KINDS)})")


def _cmd_generate(args) -> int:
    if args.seed is None:
        raise DomainError("--seed is required: generation is seeded and reproducible")
    pts = generate_points(args.kind, args.n, args.d, np.random.default_rng(args.seed))
    PointSet(pts)  # enforce the point-set invariants before writing
    save_points(args.out, pts, fmt=args.format)
    print(f"wrote {args.n} points of dimension {args.d} ({args.kind}) to {args.out}")
    return EXIT_OK


def _run_partition(P: PointSet, algo: str, eps: float, seed):
    if algo in ("random", "fast") and seed is None:
        raise DomainError("--seed is required for randomized algorithms")
    if algo == "random":
        cert = tverberg_partition(P, eps, np.random.default_rng(seed))
    elif algo == "fast":
        cert = tverberg_fast(P, eps, np.random.default_rng(seed))
    elif algo == "det":
        cert, _ = halving_tree_partition(P, eps)
    else:
        raise DomainError(f"unknown partition algorithm {algo!r} (expected one of {', '.join(PARTITION_ALGOS)})")
    cert.seed = seed if algo != "det" else None
    return cert


def _cmd_partition(args) -> int:
    P = load_points(args.input)
    t0 = time.perf_counter()
    cert = _run_partition(P, args.algo, args.eps, args.seed)
    elapsed = time.perf_counter() - t0
    if args.out:
        save_certificate(args.out, cert)
    report = verify_certificate(P, cert)
    max_wd = float(cert.witness_distances(P.points).max())
    status = "PASS" if report.ok else "FAIL"
    print(
        f"k={cert.num_groups} max_group={cert.max_group_size} "
        f"max_witness_dist={max_wd:.6g} rounds={cert.rounds} "
        f"radius={cert.ball.radius:.6g} time={elapsed:.3f}s verify={status}"
    )
    if not report.ok:
        print(f"first failing check: {report.first_failure}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_verify(args) -> int:
    P = load_points(args.points)
    cert = load_certificate(args.certificate)
    report = verify_certificate(P, cert, tol=args.tol)
    for c in report.checks:
        print(f"check {c.name}: {'PASS' if c.ok else 'FAIL'} ({c.detail})")
    if report.ok:
        print("VERIFY PASS")
        return EXIT_OK
    print(f"VERIFY FAIL: {report.first_failure}")
    return EXIT_VERIFY


def _bench_once(data: np.ndarray, algo: str, eps: float, rng) -> tuple[int, int]:
    # fresh PointSet per repetition so cached statistics are re-earned
    P = PointSet(data)
    if algo in PARTITION_ALGOS:
        cert = _run_partition_bench(P, algo, eps, rng)
        return cert.num_groups, cert.max_group_size
    if algo == "halving":
        p_sel, _ = derand_halving(P)
        return 2, len(p_sel)
    r = min(P.n, math.ceil(2.0 / (eps * eps)))
    if algo == "sample-slow":
        res = derand_sample_slow(P, r)
    elif algo == "sample-fast":
        res = derand_sample_fast(P, r)
    elif algo == "sample-halving":
        res = derand_sample_by_halving(P, r)
    else:
        raise DomainError(f"unknown bench algorithm {algo!r} (expected one of {', '.join(BENCH_ALGOS)})")
    return len(res.indices), len(res.indices)


def _run_partition_bench(P, algo, eps, rng):
    if algo == "random":
        return tverberg_partition(P, eps, rng)
    if algo == "fast":
        return tverberg_fast(P, eps, rng)
    cert, _ = halving_tree_partition(P, eps)
    return cert


def _cmd_bench(args) -> int:
    try:
        ns = [int(v) for v in args.n.split(",") if v.strip()]
    except ValueError as exc:
        raise DomainError(f"--n must be a comma-separated list of integers: {exc}")
    if not ns:
        raise DomainError("--n lists no sizes")
    if args.repeats < 1:
        raise DomainError(f"--repeats must be at least 1, got {args.repeats}")
    if args.algo not in BENCH_ALGOS:
        raise DomainError(f"unknown bench algorithm {args.algo!r} (expected one of {', '.join(BENCH_ALGOS)})")
    print("n,d,algo,median_seconds,k,max_size")
    for n in ns:
        if n % 2 == 1 and args.algo == "halving":
            raise DomainError("algo 'halving' needs even n")
        data = generate_points("uniform-cube", n, args.d, np.random.default_rng([args.seed, n]))
        times = []
        k = size = 0
        for rep in range(args.repeats):
            rng = np.random.default_rng([args.seed, n, rep])
            t0 = time.perf_counter()
            k, size = _bench_once(data, args.algo, args.eps, rng)
            times.append(time.perf_counter() - t0)
        print(f"{n},{args.d},{args.algo},{statistics.median(times):.6f},{k},{size}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="ndtv", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded test point set")
    g.add_argument("--kind", required=True, help="|".join(GENERATOR_KINDS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=("csv", "bin"), default="csv")
    g.set_defaults(func=_cmd_generate)

    p = sub.add_parser("partition", help="partition a point set and emit a certificate")
    p.add_argument("--in", dest="input", required=True, help="points file (csv or NDTV binary)")
    p.add_argument("--algo", default="random", help="|".join(PARTITION_ALGOS))
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="certificate output path")
    p.set_defaults(func=_cmd_partition)

    v = sub.add_parser("verify", help="re-check a certificate against its points")
    v.add_argument("--points", required=True)
    v.add_argument("--certificate", required=True)
    v.add_argument("--tol", type=float, default=1e-7)
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="time an algorithm over a size sweep (CSV to stdout)")
    b.add_argument("--n", required=True, help="comma-separated sizes, e.g. 100000,200000")
    b.add_argument("--d", type=int, default=32)
    b.add_argument("--eps", type=float, default=0.2)
    b.add_argument("--algo", default="sample-fast", help="|".join(BENCH_ALGOS))
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ParseError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
