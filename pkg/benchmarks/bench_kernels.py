"""Benchmark the fixed-point solver kernel: compiled extension vs numpy.

Builds realistic angular-coefficient tables from ellipsoid-sampled fields,
solves one batch of initial radii per repeat with both backends, and prints
a timing table with the speedup. The two backends must also agree on the
outputs; the benchmark refuses to report timings for disagreeing kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeats 7] [--batch 512]
"""

import argparse
import time

import numpy as np

from cycle_census.fields import polar_reduce, sample_ellipsoid, Ellipsoid
from cycle_census.kernels import (
    available_backends,
    picard_batch_compiled,
    picard_batch_python,
)
from cycle_census.returnmap import SolverConfig, admissible_budget

WORKLOADS = ((3, 0), (12, 1))  # (degree, seed)


def _workload(degree: int, seed: int, batch: int):
    ell = Ellipsoid(1.0, admissible_budget(degree), degree)
    sys = polar_reduce(sample_ellipsoid(ell, seed))
    cfg = SolverConfig()
    theta = cfg.theta_grid()
    fk, gk = sys.angular_tables(theta)
    w = np.linspace(1e-4, 0.5, batch).astype(np.complex128)
    h = theta[1] - theta[0]
    return (
        fk.astype(np.complex128),
        gk.astype(np.complex128),
        w,
        float(h),
        cfg.picard_tol,
        cfg.picard_max_iter,
    )


def _time(fn, args, repeats: int) -> tuple[float, float]:
    fn(*args)  # warmup
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return min(samples), float(np.mean(samples))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--batch", type=int, default=512, help="initial radii per solve")
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not importable; timing the numpy backend only")

    header = f"{'workload':<16}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for degree, seed in WORKLOADS:
        work = _workload(degree, seed, args.batch)
        label = f"d={degree}, B={args.batch}"
        py_best, py_mean = _time(picard_batch_python, work, args.repeats)
        if "compiled" not in backends:
            print(f"{label:<16}{py_best * 1e3:>10.2f}ms{'-':>12}{'-':>10}")
            continue
        c_best, c_mean = _time(picard_batch_compiled, work, args.repeats)

        r_py, it_py, res_py, rat_py, fl_py = picard_batch_python(*work)
        r_c, it_c, res_c, rat_c, fl_c = picard_batch_compiled(*work)
        if not (
            np.array_equal(fl_py, fl_c)
            and np.array_equal(it_py, it_c)
            and float(np.max(np.abs(r_py - r_c))) < 1e-12
        ):
            print(f"{label:<16} backends disagree; timings withheld")
            return 1
        print(
            f"{label:<16}{py_best * 1e3:>10.2f}ms{c_best * 1e3:>10.2f}ms"
            f"{py_best / c_best:>9.1f}x"
        )
        print(
            f"{'  (mean)':<16}{py_mean * 1e3:>10.2f}ms{c_mean * 1e3:>10.2f}ms"
            f"{py_mean / c_mean:>9.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
