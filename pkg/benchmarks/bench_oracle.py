"""Compare the compiled and pure-Python oracle kernels.

    python benchmarks/bench_oracle.py [--range N] [--repeat K]

Each workload is one exhaustive equivalence check; the table lists the best
of K wall-clock times per backend and the speedup.
"""

from __future__ import annotations

import argparse
import time

from castnorm.oracle import check_equiv_exhaustive, kernel
from castnorm.syntax import parse_expr
from castnorm.terms import TypeEnv

WORKLOADS = [
    ("cast_add, 2 nat vars", "cast(int, m + n)", "cast(int, m) + cast(int, n)", []),
    ("cast_sub under n <= m", "cast(int, m - n)", "cast(int, m) - cast(int, n)", ["n <= m"]),
    ("int ring identity, 3 vars", "(z + w) * (z - w) + w * u", "z * z - w * w + w * u", []),
    ("rat splitting, 3 vars", "cast(rat, n) + cast(rat, z) = q", "cast(rat, cast(int, n) + z) = q", []),
    ("rat mixed, 4 vars", "cast(rat, m) * q - r < cast(rat, z)", "cast(rat, m) * q < cast(rat, z) + r", []),
]


def make_env() -> TypeEnv:
    env = TypeEnv.standard()
    for names, ty in (("m n", "nat"), ("z w u", "int"), ("q r", "rat")):
        for name in names.split():
            env.declare_var(name, ty)
    return env


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--range", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernel.BACKEND != "cython":
        print("compiled kernel not built; only the Python backend is available")
    env = make_env()
    print(f"{'workload':<30} {'assignments':>11} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for title, a, b, ctx in WORKLOADS:
        ea, eb = parse_expr(a, env), parse_expr(b, env)
        hyps = [parse_expr(h, env) for h in ctx]
        verdict = check_equiv_exhaustive(ea, eb, hyps, args.range, "python")
        tp = best_of(lambda: check_equiv_exhaustive(ea, eb, hyps, args.range, "python"), args.repeat)
        if kernel.BACKEND == "cython":
            vc = check_equiv_exhaustive(ea, eb, hyps, args.range, "cython")
            assert vc == verdict, (title, vc, verdict)
            tc = best_of(lambda: check_equiv_exhaustive(ea, eb, hyps, args.range, "cython"), args.repeat)
            print(f"{title:<30} {verdict.checked:>11} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x")
        else:
            print(f"{title:<30} {verdict.checked:>11} {tp:>10.4f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
