#!/usr/bin/env python3
"""Benchmark the hot kernels: numba @njit path vs pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]

The workloads mirror real call sites: RK4 parallel transport at 1024 steps
on a 4-dimensional fiber, the Jacobi eigensolver on batches of small
projectors, Bargmann-phase plaquette sums on a level-5 icosphere, and
signed solid angles for degree computation.
"""

import argparse
import time

import numpy as np

from bundlelift import _kernels
from bundlelift.manifolds import icosphere


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workload_rk4(rng):
    steps, dim = 1024, 4
    qp = 0.3 * rng.normal(size=(2 * steps + 1, dim, dim))
    qnode = np.tile(np.eye(dim), (steps + 1, 1, 1))
    x0 = np.ascontiguousarray(rng.normal(size=(dim, dim)))
    return (qp, qnode, x0)


def workload_jacobi(rng):
    a = rng.normal(size=(8, 8))
    return (np.ascontiguousarray(a + a.T),)


def workload_plaquette(rng):
    from bundlelift.manifolds import sphere_to_cp1

    verts, tris = icosphere(5)
    qv = np.stack([sphere_to_cp1(v) for v in verts])
    return (np.ascontiguousarray(qv), np.ascontiguousarray(tris))


def workload_solid_angles(rng):
    verts, tris = icosphere(5)
    return (np.ascontiguousarray(verts), np.ascontiguousarray(tris))


WORKLOADS = {
    "rk4_transport": (workload_rk4, 20),
    "jacobi_eigh": (workload_jacobi, 500),
    "plaquette_phases": (workload_plaquette, 5),
    "solid_angles": (workload_solid_angles, 5),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'kernel':<20} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, (make, inner) in WORKLOADS.items():
        data = make(rng)
        pure = _kernels.PURE_IMPLS[name]
        try:
            jit = _kernels.jit_impl(name)
            jit(*data)  # compile outside the timer
        except ImportError:
            jit = None

        def run_many(fn, data=data, inner=inner):
            for _ in range(inner):
                fn(*data)

        t_pure = _time(run_many, pure, repeats=args.repeats)
        if jit is None:
            print(f"{name:<20} {t_pure * 1e3:>10.2f}ms {'n/a':>12} {'':>9}")
            continue
        t_jit = _time(run_many, jit, repeats=args.repeats)
        print(f"{name:<20} {t_pure * 1e3:>10.2f}ms {t_jit * 1e3:>10.2f}ms "
              f"{t_pure / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
