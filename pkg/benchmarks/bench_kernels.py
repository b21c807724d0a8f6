#!/usr/bin/env python3
"""Benchmark the numba-accelerated hot kernels against the numpy fallback.

The oscillatory Filon transform dominates the runtime of kernel-table
construction, so it is the kernel worth comparing.  Run:

    python benchmarks/bench_kernels.py            # current backend
    LEVIKERNEL_NO_NUMBA=1 python benchmarks/bench_kernels.py

or let the script spawn both variants itself:

    python benchmarks/bench_kernels.py --both
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def bench_filon(n_panels=2400, n_u=7201, repeats=5):
    from levikernel._accel import NUMBA_ENABLED
    from levikernel.fourier import filon_transform

    edges = np.linspace(0.0, 400.0, n_panels + 1) ** 1.5 / 400.0**0.5
    nodes = np.empty(2 * edges.size - 1)
    nodes[0::2] = edges
    nodes[1::2] = 0.5 * (edges[:-1] + edges[1:])
    F = np.exp(-0.05 * nodes) * (1.0 + 0.1 * np.cos(0.2 * nodes))
    us = np.linspace(0.0, 36.0, n_u)

    filon_transform(nodes, F, us[:8])  # warm-up / compile
    t0 = time.time()
    for _ in range(repeats):
        out = filon_transform(nodes, F, us)
    dt = (time.time() - t0) / repeats
    backend = "numba" if NUMBA_ENABLED else "numpy"
    print(f"filon_transform[{backend}]: {n_panels} panels x {n_u} points: "
          f"{dt * 1e3:.1f} ms/transform (checksum {out.sum():.6f})")
    return dt


def bench_table_build():
    from levikernel._accel import NUMBA_ENABLED
    from levikernel.fourier import PsiTable, SymmetricKernel
    from levikernel.model import ModelSpec

    model = ModelSpec()
    kern = SymmetricKernel(model)
    us = np.linspace(0.0, 36.0, 1001)
    t0 = time.time()
    for eta in (1e-3, 1e-2, 1e-1):
        kern._transform(eta, us, k=0)
    dt = (time.time() - t0) / 3.0
    backend = "numba" if NUMBA_ENABLED else "numpy"
    print(f"inversion slice[{backend}]: {dt * 1e3:.1f} ms/slice")
    return dt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--both", action="store_true",
                    help="run the numba and numpy variants in subprocesses")
    ap.add_argument("--skip-table", action="store_true")
    args = ap.parse_args()
    if args.both:
        here = os.path.abspath(__file__)
        for flag in ("0", "1"):
            env = dict(os.environ, LEVIKERNEL_NO_NUMBA=flag)
            subprocess.run([sys.executable, here]
                           + (["--skip-table"] if args.skip_table else []),
                           env=env, check=True)
        return
    bench_filon()
    if not args.skip_table:
        bench_table_build()


if __name__ == "__main__":
    main()
