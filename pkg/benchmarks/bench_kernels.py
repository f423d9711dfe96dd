"""Compare the compiled and pure-Python rate kernels.

    python3 benchmarks/bench_kernels.py [--points 20000] [--solve]

Times the scalar point evaluations used by the optimizer on random inputs,
checks that both backends return identical values, and optionally times one
full solve per backend.
"""

import argparse
import time

import numpy as np

from securecr.channel import Geometry, gains_from_geometry
from securecr.kernels import PyRateKernel, compiled_kernel
from securecr.optimizer import Budgets, OptProblem, Scheme, solve
from securecr.schemes import Scenario, eta1_min, rate_kernel


def random_points(n, share, p2, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.random((n, 5))
    eta2 = u[:, 0] * share
    eta3 = share - eta2
    e = u[:, 3] * p2
    p22 = e * u[:, 4] / np.maximum(eta2, 1e-12)
    p23 = e * (1 - u[:, 4]) / np.maximum(eta3, 1e-12)
    return np.column_stack([eta2, eta3, np.minimum(u[:, 1], 1 - 1e-9), u[:, 2], p22, p23])


def time_kernel(k, pts, method):
    f = getattr(k, method)
    t = time.perf_counter()
    out = [f(*row) for row in pts]
    return time.perf_counter() - t, np.array([o[0] for o in out])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--solve", action="store_true", help="also time a full solve per backend")
    args = ap.parse_args()

    ck = compiled_kernel()
    if ck is None:
        print("compiled extension not built; only the Python kernel is available")
    sc = Scenario(gains_from_geometry(Geometry(t2=(0.6, 0.0))), 10.0, 100.0)
    e1 = eta1_min(sc)
    pts = random_points(args.points, 1 - e1, sc.p2)
    backends = [("python", PyRateKernel)] + ([("cython", ck)] if ck else [])
    print(f"{'method':12s} {'backend':8s} {'seconds':>9s} {'us/call':>9s}")
    for method in ("dpc_point", "nodpc_point"):
        ref = None
        times = {}
        for name, cls in backends:
            k = rate_kernel(sc, e1, cls)
            dt, vals = time_kernel(k, pts, method)
            times[name] = dt
            print(f"{method:12s} {name:8s} {dt:9.3f} {1e6 * dt / len(pts):9.2f}")
            if ref is None:
                ref = vals
            else:
                same = np.array_equal(np.nan_to_num(ref, neginf=-1), np.nan_to_num(vals, neginf=-1))
                print(f"{'':12s} identical results: {same}")
        if len(times) == 2:
            print(f"{'':12s} speedup: {times['python'] / times['cython']:.1f}x")
    if args.solve:
        for name, cls in backends:
            t = time.perf_counter()
            r = solve(OptProblem(sc, Scheme.DPC_3PHASE, Budgets(n_starts=16)), kernel_cls=cls)
            print(f"solve dpc_3phase {name:8s} {time.perf_counter() - t:7.2f}s  r2={r.r2:.6f}")


if __name__ == "__main__":
    main()
