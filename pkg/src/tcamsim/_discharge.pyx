# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled discharge kernel: two-node matchline/sense-node integration.

Must stay arithmetically identical to _discharge_py.py (same operations in
the same order); the test suite asserts bit-equality between the two.
"""

from libc.math cimport exp

import numpy as np


def simulate_discharge(
    double[::1] g_branches,
    double c_ml,
    double c_o,
    double vdd,
    double v_eval,
    double eval_k,
    double eval_vtn,
    double sa_threshold,
    double dt,
    Py_ssize_t n_steps,
    bint record,
):
    """Integrate the discharge and report the sense-node crossing step.

    Returns (crossing_step, v_ml_trace, v_o_trace). crossing_step is the
    1-based step where v_o first reaches sa_threshold, -1 when it never does,
    -2 on a voltage excursion (step too large). Traces are None unless
    ``record``; with ``record`` the full horizon is integrated, otherwise the
    loop exits at the crossing.
    """
    cdef double g_tot = 0.0
    cdef Py_ssize_t i
    for i in range(g_branches.shape[0]):
        g_tot += g_branches[i]

    cdef double decay = exp(-dt * g_tot / c_ml) if g_tot != 0.0 else 1.0
    cdef double inv_csum = 1.0 / c_o + 1.0 / c_ml
    cdef double c_sum = c_o + c_ml
    cdef double lo_bound = -0.01
    cdef double hi_bound = vdd + 0.01

    cdef double v_ml = vdd
    cdef double v_o = vdd
    cdef double v_lo, v_hi, v_ds, vov, cur, g_sec, f, v_eq
    cdef Py_ssize_t crossing = -1
    cdef Py_ssize_t step

    vml_arr = np.empty(n_steps + 1, dtype=np.float64) if record else None
    vo_arr = np.empty(n_steps + 1, dtype=np.float64) if record else None
    cdef double[::1] vml_view
    cdef double[::1] vo_view
    if record:
        vml_view = vml_arr
        vo_view = vo_arr
        vml_view[0] = v_ml
        vo_view[0] = v_o
    else:
        vml_view = None
        vo_view = None

    with nogil:
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
                f = exp(-g_sec * inv_csum * dt)
                v_eq = (c_o * v_o + c_ml * v_ml) / c_sum
                v_o = v_eq + (v_o - v_eq) * f
                v_ml = v_eq + (v_ml - v_eq) * f
            if (
                v_o < lo_bound or v_o > hi_bound
                or v_ml < lo_bound or v_ml > hi_bound
            ):
                crossing = -2
                break
            if record:
                vml_view[step] = v_ml
                vo_view[step] = v_o
            if crossing < 0 and v_o <= sa_threshold:
                crossing = step
                if not record:
                    break

    return crossing, vml_arr, vo_arr
