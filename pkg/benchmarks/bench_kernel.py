#!/usr/bin/env python3
"""Compare the compiled discharge kernel against the pure-Python fallback.

Times the workloads that dominate real runs: single row simulations at the
calibration horizon, a full 6-threshold calibration, and a batch of row
matches. Run after building the extension:

    python benchmarks/bench_kernel.py
"""

import time

import numpy as np

from tcamsim import BranchParams, CircuitParams
from tcamsim import _discharge_py

try:
    from tcamsim import _discharge
except ImportError:
    _discharge = None

PARAMS = BranchParams()
CIRCUIT = CircuitParams.for_array(64, 1.0, PARAMS)


def time_rows(backend, n_rows=2000):
    """Row simulations to the sense deadline, mismatch counts 1..8."""
    rng = np.random.default_rng(1)
    n_steps = int(CIRCUIT.sense_window / CIRCUIT.dt)
    ks = rng.integers(1, 9, size=n_rows)
    t0 = time.perf_counter()
    for k in ks:
        g = np.full(int(k), 1.0 / PARAMS.r_branch)
        backend.simulate_discharge(
            g, CIRCUIT.c_ml, CIRCUIT.c_o, CIRCUIT.vdd, 0.55,
            CIRCUIT.eval_k, CIRCUIT.eval_vtn, CIRCUIT.sa_threshold,
            CIRCUIT.dt, n_steps, False,
        )
    return time.perf_counter() - t0


def time_calibration(backend):
    from tcamsim import kernel
    from tcamsim.transient import calibrate_veval

    saved = kernel._impl
    kernel._impl = backend
    try:
        t0 = time.perf_counter()
        calibrate_veval(range(6), PARAMS, CIRCUIT)
        return time.perf_counter() - t0
    finally:
        kernel._impl = saved


def main():
    backends = [("python", _discharge_py)]
    if _discharge is not None:
        backends.insert(0, ("compiled", _discharge))
    else:
        print("compiled kernel not built; timing the fallback only")

    results = {}
    for name, backend in backends:
        rows_s = time_rows(backend)
        cal_s = time_calibration(backend)
        results[name] = (rows_s, cal_s)
        print(
            f"{name:>8}: 2000 row simulations in {rows_s:8.3f} s "
            f"({2000 / rows_s:9.0f} rows/s), "
            f"6-threshold calibration in {cal_s:7.3f} s"
        )
    if len(results) == 2:
        rows_speedup = results["python"][0] / results["compiled"][0]
        cal_speedup = results["python"][1] / results["compiled"][1]
        print(
            f"speedup: {rows_speedup:.1f}x on row simulations, "
            f"{cal_speedup:.1f}x on calibration"
        )


if __name__ == "__main__":
    main()
