"""Compare the compiled and pure-Python integration kernels.

    python3 benchmarks/bench_kernel.py [--repeat N]

Times the raw kernel on one shooting sweep per lambda, checks that both
backends return bit-identical states, and times a full eigenvalue search
with each backend swapped in.
"""

import argparse
import math
import time

import numpy as np

from slt import integrate as integrate_mod
from slt import kernel
from slt.grid import StandardGrid
from slt.problem import Potential, SolverSettings, classical_dirichlet
from slt.spectral import find_eigenvalues


def time_call(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def raw_kernel(backend, lam, nodes, q, settings):
    hmax = integrate_mod.max_step(lam, q.minimum)
    return kernel.BACKENDS[backend](lam, -math.pi, 0.0, 1.0, nodes, q.breaks, q.bases, q.coefs,
                                    settings.rel_tol, settings.abs_tol, hmax, 0.0)


def search_with(backend, settings):
    saved = kernel.integrate
    kernel.integrate = kernel.BACKENDS[backend]
    try:
        return find_eigenvalues(classical_dirichlet(), settings, eigenfunctions=False)
    finally:
        kernel.integrate = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    settings = SolverSettings()
    q = Potential("polynomial", [0.5, 0.0, 1.0], [0.0]).side("left")
    nodes = np.concatenate([StandardGrid.from_settings(settings).left.nodes, [0.0]])
    backends = sorted(kernel.BACKENDS)
    print(f"backends available: {', '.join(backends)} (default: {kernel.BACKEND})")
    print(f"{'lambda':>8} " + " ".join(f"{b + ' [ms]':>14}" for b in backends) + f" {'speedup':>9} {'steps':>7}")
    for lam in (1.0, 100.0, 2500.0):
        row, outs = [], []
        for b in backends:
            t, out = time_call(lambda: raw_kernel(b, lam, nodes, q, settings), args.repeat)
            row.append(t)
            outs.append(out)
        if len(outs) == 2:
            same = np.array_equal(outs[0][0], outs[1][0]) and np.array_equal(outs[0][1], outs[1][1])
            assert same, "backends disagree"
        speed = row[backends.index("python")] / row[0] if len(row) == 2 else float("nan")
        print(f"{lam:8g} " + " ".join(f"{1e3 * t:14.2f}" for t in row) + f" {speed:9.1f} {outs[0][4]:7d}")

    small = settings.replace(max_eigenvalues=10, lambda_max=30.0)
    print("\nfull search, first 10 classical eigenvalues:")
    results = {}
    for b in backends:
        t, sp = time_call(lambda: search_with(b, small), 1)
        results[b] = sp.eigenvalues
        print(f"  {b:>7}: {t:8.3f} s")
    if len(results) == 2:
        print(f"  eigenvalues identical: {np.array_equal(*results.values())}")


if __name__ == "__main__":
    main()
