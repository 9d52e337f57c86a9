"""Benchmark the measurement kernel's numba and numpy backends.

Both backends are exercised in one process: the numpy path is always
importable and the jitted twin is compiled on demand, so the comparison
does not depend on the TRIQSS_NUMBA flag.  The optional --protocol mode
times full runs in subprocesses instead, once per backend, since the
protocol picks its kernel at import.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --dims 2,5,16 --reps 3000
    python3 benchmarks/bench_kernels.py --protocol --d 8 --n 64
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from triqss._kernels import NUMBA_AVAILABLE, _make_numba_kernel, _measure_slot_np
from triqss.mub import x_basis


def _random_state(rng, size):
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    return np.ascontiguousarray(amps / np.linalg.norm(amps))


def _time_kernel(kernel, cases, reps):
    start = time.perf_counter()
    for amps, left, d, right, ct, u in cases:
        for _ in range(reps):
            kernel(amps, left, d, right, ct, u)
    return (time.perf_counter() - start) / (len(cases) * reps)


def bench_kernel(dims, slots, reps, seed):
    rng = np.random.default_rng(seed)
    numba_kernel = _make_numba_kernel() if NUMBA_AVAILABLE else None

    print(f"{'d':>3} {'slots':>5} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for d in dims:
        ct = np.ascontiguousarray(x_basis(d).matrix.conj().T)
        left, right = d ** (slots // 2), d ** (slots - 1 - slots // 2)
        cases = [
            (_random_state(rng, left * d * right), left, d, right, ct, float(rng.random()))
            for _ in range(8)
        ]
        if numba_kernel is not None:
            numba_kernel(*cases[0])  # compile outside the timed loop
        np_time = _time_kernel(_measure_slot_np, cases, reps)
        if numba_kernel is None:
            print(f"{d:>3} {slots:>5} {np_time * 1e6:>10.2f} {'n/a':>10} {'n/a':>8}")
            continue
        nb_time = _time_kernel(numba_kernel, cases, reps)
        print(
            f"{d:>3} {slots:>5} {np_time * 1e6:>10.2f} {nb_time * 1e6:>10.2f}"
            f" {np_time / nb_time:>7.1f}x"
        )


def bench_protocol(d, n, runs):
    code = (
        "import time; from triqss.protocol import ProtocolConfig, run_protocol\n"
        f"cfg = ProtocolConfig(d={d}, n={n}, seed=0)\n"
        "run_protocol(cfg)  # compile and warm caches outside the timing\n"
        "start = time.perf_counter()\n"
        f"[run_protocol(cfg) for _ in range({runs})]\n"
        f"print((time.perf_counter() - start) / {runs})"
    )
    print(f"{'backend':>8} {'s/run':>10}")
    for backend, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, TRIQSS_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        print(f"{backend:>8} {float(out.stdout):>10.4f}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", default="2,3,5,8,16", help="comma-separated dimensions")
    parser.add_argument("--slots", type=int, default=3, help="register size in qudits")
    parser.add_argument("--reps", type=int, default=2000, help="kernel calls per case")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--protocol", action="store_true", help="time full runs per backend instead")
    parser.add_argument("--d", type=int, default=4, help="protocol dimension (with --protocol)")
    parser.add_argument("--n", type=int, default=32, help="protocol key length (with --protocol)")
    parser.add_argument("--runs", type=int, default=20, help="protocol runs to average (with --protocol)")
    args = parser.parse_args(argv)

    if args.protocol:
        bench_protocol(args.d, args.n, args.runs)
    else:
        dims = [int(part) for part in args.dims.split(",")]
        bench_kernel(dims, args.slots, args.reps, args.seed)


if __name__ == "__main__":
    main()
