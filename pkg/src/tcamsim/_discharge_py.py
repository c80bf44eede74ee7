"""Pure-Python discharge kernel, the import-time fallback for _discharge.pyx.

Keep the arithmetic identical to the compiled version (same operations in the
same order): the test suite asserts the two produce bit-equal trajectories.
"""

from __future__ import annotations

import math

import numpy as np


def simulate_discharge(
    g_branches,
    c_ml: float,
    c_o: float,
    vdd: float,
    v_eval: float,
    eval_k: float,
    eval_vtn: float,
    sa_threshold: float,
    dt: float,
    n_steps: int,
    record: bool,
):
    g_tot = 0.0
    for g in g_branches:
        g_tot += g

    decay = math.exp(-dt * g_tot / c_ml) if g_tot != 0.0 else 1.0
    inv_csum = 1.0 / c_o + 1.0 / c_ml
    c_sum = c_o + c_ml
    lo_bound = -0.01
    hi_bound = vdd + 0.01

    v_ml = vdd
    v_o = vdd
    crossing = -1

    if record:
        vml_arr = np.empty(n_steps + 1, dtype=np.float64)
        vo_arr = np.empty(n_steps + 1, dtype=np.float64)
        vml_arr[0] = v_ml
        vo_arr[0] = v_o
    else:
        vml_arr = None
        vo_arr = None

    for step in range(1, n_steps + 1):
        v_ml = v_ml * decay
        if v_ml <= v_o:
            v_lo = v_ml
            v_hi = v_o
        else:
            v_lo = v_o
            v_hi = v_ml
        v_ds = v_hi - v_lo
        vov = (v_eval - v_lo) - eval_vtn
        if vov > 0.0 and v_ds > 0.0:
            if v_ds < vov:
                cur = eval_k * (vov * v_ds - 0.5 * v_ds * v_ds)
            else:
                cur = 0.5 * eval_k * vov * vov
            g_sec = cur / v_ds
            f = math.exp(-g_sec * inv_csum * dt)
            v_eq = (c_o * v_o + c_ml * v_ml) / c_sum
            v_o = v_eq + (v_o - v_eq) * f
            v_ml = v_eq + (v_ml - v_eq) * f
        if v_o < lo_bound or v_o > hi_bound or v_ml < lo_bound or v_ml > hi_bound:
            crossing = -2
            break
        if record:
            vml_arr[step] = v_ml
            vo_arr[step] = v_o
        if crossing < 0 and v_o <= sa_threshold:
            crossing = step
            if not record:
                break

    return crossing, vml_arr, vo_arr
