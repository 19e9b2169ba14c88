"""Compiled vs pure-Python kernels on the workloads the library actually runs.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Both backends are imported side by side, so a single process times both.
The table reports the best of ``--repeat`` wall times and the speedup.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from logconcave import kernels
from logconcave import _pykernels as py
from logconcave.measure1d import exponential_symmetric, gaussian, realize
from logconcave.oracle import generator_matrix


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(quick: bool):
    n = 1024 if quick else 4096
    m = realize(gaussian(0.0, 1.0, n=n))
    A = generator_matrix(m).tocsr()
    d = A.diagonal().copy()
    e2 = (A.diagonal(1) * A.diagonal(-1)).copy()
    hi = float(np.max(np.abs(d)) * 4)
    yield f"tridiag_eigenvalue N={n}", lambda b: b.tridiag_eigenvalue(d, e2, 1, 0.0, hi)

    e = realize(exponential_symmetric(1.0, n=n))
    y = np.linspace(e.domain[0] - 2, e.domain[1] + 2, n)
    yield f"conv_logdensity N={n}", lambda b: b.conv_logdensity(e.nodes, e.log_density, y, 0.5)

    k = 2048 if quick else 8192
    x = np.linspace(-6, 6, k)
    rng = np.random.default_rng(0)
    pa, pb = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
    yield f"band_matched_mass k={k}", lambda b: b.band_matched_mass(x, pa, x, pb, 0.1)

    nb = 64 if quick else 128
    F = np.linspace(0, 1, nb)
    q = rng.uniform(0, 1, nb)
    u = np.linspace(0.02, 0.5, 25)
    yield f"bf_isoperimetric N={nb}", lambda b: b.bf_isoperimetric(F, q, u)
    xs = np.linspace(-3, 3, nb)
    Fm, Fp = np.clip(F - 0.05, 0, 1), np.clip(F + 0.05, 0, 1)
    yield f"bf_concentration N={nb}", lambda b: b.bf_concentration(xs, F, Fm, Fp, 0.3)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    args = ap.parse_args()
    cy = kernels.compiled_backend
    if cy is None:
        print("compiled extension unavailable; timing the Python backend only")
    print(f"{'kernel':32s} {'cython [s]':>11s} {'python [s]':>11s} {'speedup':>8s}")
    for name, fn in workloads(args.quick):
        tp = best_of(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:32s} {'-':>11s} {tp:11.4f} {'-':>8s}")
            continue
        tc = best_of(lambda: fn(cy), args.repeat)
        print(f"{name:32s} {tc:11.4f} {tp:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
