"""Time the hot kernels with numba and with the plain numpy/Python fallback.

    python3 benchmarks/bench_kernels.py            # both backends, side by side
    python3 benchmarks/bench_kernels.py --worker   # current backend only, JSON on stdout

Each backend runs in its own interpreter because the switch is read at import.
Numba timings exclude compilation (one warm-up call per workload).
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker(n_count, repeat):
    import numpy as np

    from syscovar import _kernels as K
    from syscovar._accel import backend_name
    from syscovar.backtest import count_exceedances, run_table
    from syscovar.copulas import Copula, cond_equal_quantile, cond_exceed_quantile, copula_cdf
    from syscovar.measures import Levels, coes_geq, student_t_model

    cops = [Copula.gaussian(0.7), Copula.student_t(0.7, 3.0), Copula.gumbel(2.0)]
    grid = np.linspace(0.02, 0.98, 20)

    def quantiles():
        for c in cops:
            for b in grid:
                cond_exceed_quantile(c, 0.95, b)
                cond_equal_quantile(c, 0.95, b)

    def cdf_grid():
        for c in cops:
            for u in grid:
                for v in grid:
                    copula_cdf(c, u, v)

    rng = np.random.default_rng(0)
    x = rng.standard_normal(n_count)
    y = rng.standard_normal(n_count)
    thr = np.array([1.5, 2.0, 2.5, 3.0])

    def counting():
        count_exceedances(x, y, 1.6448536269514722, thr)

    def t_ppf():
        for p in grid:
            K.t_ppf(p, 3.0)

    m = student_t_model(0.5)

    def coes():
        coes_geq(m, Levels(0.95, 0.95))

    def table():
        run_table("gumbel_t3", [1.5, 3.0], [Levels(0.95, 0.95)], 200_000, 1)

    work = {
        "cond_quantile x120": quantiles,
        "copula_cdf 20x20x3": cdf_grid,
        f"count_exceedances n={n_count}": counting,
        "t_ppf x20": t_ppf,
        "coes_geq t3": coes,
        "run_table gumbel 2x2e5": table,
    }
    out = {"backend": backend_name(), "timings": {}}
    for name, fn in work.items():
        fn()  # warm-up / compile
        out["timings"][name] = _best_of(fn, repeat)
    json.dump(out, sys.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--worker", action="store_true")
    ap.add_argument("--n", type=int, default=5_000_000, help="sample size for the counting kernel")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if args.worker:
        worker(args.n, args.repeat)
        return

    results = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, SYSCOVAR_DISABLE_NUMBA=flag)
        cmd = [sys.executable, __file__, "--worker", "--n", str(args.n), "--repeat", str(args.repeat)]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout)["timings"]

    print(f"{'workload':<34}{'numba [s]':>12}{'fallback [s]':>14}{'speed-up':>10}")
    for name in results["numba"]:
        a, b = results["numba"][name], results["numpy"][name]
        print(f"{name:<34}{a:>12.4f}{b:>14.4f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
