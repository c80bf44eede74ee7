"""Backend selection for the discharge kernel.

Prefers the compiled extension and falls back to the pure-Python loop when it
is not built. Set TCAMSIM_PURE_PYTHON=1 to force the fallback (used by the
benchmark and the backend-equality tests).
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("TCAMSIM_PURE_PYTHON") == "1":
    from . import _discharge_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _discharge as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _discharge_py as _impl

        BACKEND = "python"

__all__ = ["BACKEND", "SimulationError", "discharge"]


class SimulationError(RuntimeError):
    """The integration produced a voltage excursion: the step is too large."""


def discharge(
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
    record: bool = False,
    backend=None,
):
    """Run the two-node discharge; see the backend modules for the scheme.

    Returns (crossing_step, v_ml_trace, v_o_trace); crossing_step is -1 when
    the sense node never reaches sa_threshold, traces are None unless
    ``record``.
    """
    g = np.ascontiguousarray(g_branches, dtype=np.float64)
    impl = backend if backend is not None else _impl
    crossing, vml, vo = impl.simulate_discharge(
        g, c_ml, c_o, vdd, v_eval, eval_k, eval_vtn,
        sa_threshold, dt, int(n_steps), bool(record),
    )
    if crossing == -2:
        raise SimulationError(
            f"voltage excursion beyond [-0.01, {vdd + 0.01}] V: dt={dt} too large"
        )
    return crossing, vml, vo
