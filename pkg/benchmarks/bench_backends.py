"""Timing comparison of the compiled and pure-Python integration kernels.

Runs the Jost integration for a representative scalar and 2x2 problem on both
backends, reports wall times and the speedup, and cross-checks that the two
backends agree to tight tolerance.

Usage: python3 benchmarks/bench_backends.py [--k-count N] [--repeats R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from halfline._kernels import available_backends, integrate_jost
from halfline.direct import DirectConfig, _kernel_inputs, symmetric_k_grid
from halfline.oracles import standard_fixtures


def _run(backend_name, pot, ks, cfg):
    mode, pxs, pvals = _kernel_inputs(pot, cfg.sample_step)
    x_nodes = np.array([0.0, pot.x_max])
    t0 = time.perf_counter()
    g, gp = integrate_jost(
        np.asarray(ks, dtype=complex), x_nodes, mode, pxs, pvals,
        rtol=cfg.ode_rtol, atol=cfg.ode_atol, backend=backend_name,
    )
    return time.perf_counter() - t0, g, gp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-count", type=int, default=256)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled extension not importable; nothing to compare")
        return

    cfg = DirectConfig(k_count=args.k_count)
    ks = symmetric_k_grid(cfg)
    cases = {name: pot for name, pot, _ in standard_fixtures()}
    for name in ("scalar_exponential_robin", "matrix_step_dirichlet"):
        pot = cases[name]
        times = {}
        results = {}
        for b in backends:
            best = np.inf
            for _ in range(args.repeats):
                dt, g, gp = _run(b, pot, ks, cfg)
                best = min(best, dt)
            times[b] = best
            results[b] = (g, gp)
        g_dev = max(
            np.abs(results["python"][0] - results["cython"][0]).max(),
            np.abs(results["python"][1] - results["cython"][1]).max(),
        )
        speed = times["python"] / times["cython"]
        print(
            f"{name}: n={pot.n}, {args.k_count} k-points | "
            f"cython {times['cython']:.3f}s, python {times['python']:.3f}s "
            f"({speed:.0f}x) | max deviation {g_dev:.2e}"
        )
        if g_dev > 1e-6:
            raise SystemExit(f"backend disagreement {g_dev:.2e} exceeds 1e-6")


if __name__ == "__main__":
    main()
