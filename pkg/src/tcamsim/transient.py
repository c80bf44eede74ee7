"""Circuit tier: analytic RC model, numerical discharge simulation, and
evaluation-voltage calibration.

The matchline (capacitance c_ml) is precharged to vdd and discharges through
the conducting branches of mismatching cells; the sense node (capacitance
c_o) follows it through an evaluation transistor whose gate bias v_eval sets
how many mismatching bits still count as a match. A sense amp compares the
sense node against sa_threshold at the sense deadline.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .cam import ArrayState, CellState, TernaryBit, searchline_levels
from .device import BranchParams, branch_is_on
from .kernel import discharge

__all__ = [
    "CircuitParams",
    "EvalVoltageTable",
    "TransientTrace",
    "CalibrationError",
    "equivalent_resistance",
    "ml_voltage_analytic",
    "discharge_rate",
    "sense_margin",
    "optimal_sense_time",
    "eval_transistor_current",
    "conducting_resistances",
    "simulate_search",
    "calibrate_veval",
    "verify_calibration",
    "threshold_match_transient",
]

# Fixed bisection depth keeps calibration deterministic to the bit.
_BISECT_ITERS = 60


class CalibrationError(RuntimeError):
    """No evaluation voltage satisfies the guard-band conditions."""


@dataclass(frozen=True)
class CircuitParams:
    """Matchline network constants and the evaluation-transistor card."""

    c_ml: float
    c_cell: float
    c_wire: float
    c_o: float
    vdd: float
    sa_threshold: float
    sense_window: float
    dt: float
    eval_k: float
    eval_vtn: float

    def __post_init__(self) -> None:
        for name in ("c_ml", "c_cell", "c_wire", "c_o"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not (0.0 < self.sa_threshold < self.vdd):
            raise ValueError("need 0 < sa_threshold < vdd")
        if self.sense_window <= 0.0:
            raise ValueError("sense_window must be positive")
        if self.dt > self.sense_window / 1000.0:
            raise ValueError("dt must be at most sense_window / 1000")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.eval_k <= 0.0:
            raise ValueError("eval_k must be positive")
        if not (0.0 <= self.eval_vtn < self.vdd):
            raise ValueError("need 0 <= eval_vtn < vdd")

    @classmethod
    def for_array(
        cls,
        wordlength: int,
        vdd: float = 1.0,
        params: BranchParams | None = None,
        *,
        c_cell: float = 0.15e-15,
        c_wire: float = 2e-15,
        c_o: float = 0.5e-15,
        eval_k: float = 1e-3,
        eval_vtn: float = 0.3,
        sa_frac: float = 0.85,
        window_scale: float = 1.4,
        steps_per_window: int = 2400,
        sa_threshold: float | None = None,
        sense_window: float | None = None,
        dt: float | None = None,
    ) -> "CircuitParams":
        """Build a card for a given geometry and supply.

        The sense window scales with the slowest single-mismatch discharge
        the gate bias can reach (v_eval is capped at vdd), so calibration
        stays feasible across geometries and supplies; dt tracks the window.
        """
        if params is None:
            params = BranchParams()
        c_ml = wordlength * c_cell + c_wire
        if sense_window is None:
            tau1 = params.r_branch * c_ml
            sense_window = window_scale * tau1 * math.log(vdd / (vdd - eval_vtn))
        if dt is None:
            dt = sense_window / steps_per_window
        if sa_threshold is None:
            sa_threshold = sa_frac * vdd
        return cls(
            c_ml=c_ml,
            c_cell=c_cell,
            c_wire=c_wire,
            c_o=c_o,
            vdd=vdd,
            sa_threshold=sa_threshold,
            sense_window=sense_window,
            dt=dt,
            eval_k=eval_k,
            eval_vtn=eval_vtn,
        )


@dataclass
class EvalVoltageTable:
    """Calibrated gate bias per mismatch threshold, plus the sense deadline."""

    entries: dict[int, float]
    sense_deadline: float

    def __post_init__(self) -> None:
        keys = sorted(self.entries)
        values = [self.entries[k] for k in keys]
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError(f"entries must be strictly decreasing, got {self.entries}")

    def __contains__(self, threshold: int) -> bool:
        return threshold in self.entries

    def __getitem__(self, threshold: int) -> float:
        return self.entries[threshold]

    def thresholds(self) -> list[int]:
        return sorted(self.entries)

    def to_dict(self) -> dict:
        return {
            "sense_deadline_s": self.sense_deadline,
            "entries": {str(k): self.entries[k] for k in sorted(self.entries)},
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "EvalVoltageTable":
        with open(path) as fh:
            raw = json.load(fh)
        return cls(
            entries={int(k): float(v) for k, v in raw["entries"].items()},
            sense_deadline=float(raw["sense_deadline_s"]),
        )


@dataclass
class TransientTrace:
    """Sampled matchline / sense-node waveforms and the SA decision."""

    times: np.ndarray
    v_ml: np.ndarray
    v_o: np.ndarray
    sa_out: np.ndarray
    crossing_time: float | None

    def to_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh: IO[str]) -> None:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "v_ml_V", "v_o_V", "sa_out"])
        for t, vm, vo, sa in zip(self.times, self.v_ml, self.v_o, self.sa_out):
            writer.writerow([repr(float(t)), repr(float(vm)), repr(float(vo)), int(sa)])


def equivalent_resistance(n_mismatch: int, params: BranchParams) -> float:
    """Resistance of n parallel conducting branches: (r_on + r_series) / n."""
    if n_mismatch < 1:
        raise ValueError(
            "n_mismatch must be >= 1 (a full match has no discharge path)"
        )
    return params.r_branch / n_mismatch


def ml_voltage_analytic(
    t: float, n_mismatch: int, params: BranchParams, circuit: CircuitParams
) -> float:
    """Matchline voltage of the pure RC model at time t."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if n_mismatch == 0:
        return circuit.vdd
    tau = equivalent_resistance(n_mismatch, params) * circuit.c_ml
    return circuit.vdd * math.exp(-t / tau)


def discharge_rate(
    t: float, n_mismatch: int, params: BranchParams, circuit: CircuitParams
) -> float:
    """Time derivative of the analytic matchline voltage (always <= 0)."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if n_mismatch == 0:
        return 0.0
    tau = equivalent_resistance(n_mismatch, params) * circuit.c_ml
    return circuit.vdd * (-1.0 / tau) * math.exp(-t / tau)


def sense_margin(
    t: float, n: int, params: BranchParams, circuit: CircuitParams
) -> float:
    """Voltage gap at time t between the n- and (n+1)-mismatch curves."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if n < 0:
        raise ValueError("n must be >= 0")
    return ml_voltage_analytic(t, n, params, circuit) - ml_voltage_analytic(
        t, n + 1, params, circuit
    )


def optimal_sense_time(n: int, params: BranchParams, circuit: CircuitParams) -> float:
    """Time maximizing sense_margin(t, n) for n >= 1 (closed form)."""
    if n < 1:
        raise ValueError(
            "margin against a non-discharging curve grows without bound; "
            "no interior optimum for n = 0"
        )
    a = equivalent_resistance(n, params) * circuit.c_ml
    b = equivalent_resistance(n + 1, params) * circuit.c_ml
    return math.log(a / b) * a * b / (a - b)


def eval_transistor_current(
    v_gate: float, v_ds: float, circuit: CircuitParams
) -> float:
    """Square-law drain current of the evaluation transistor."""
    if v_gate < 0.0 or v_ds < 0.0:
        raise ValueError("v_gate and v_ds must be >= 0")
    vov = v_gate - circuit.eval_vtn
    if vov <= 0.0:
        return 0.0
    if v_ds < vov:
        return circuit.eval_k * (vov * v_ds - 0.5 * v_ds * v_ds)
    return 0.5 * circuit.eval_k * vov * vov


def _row_values(row: Sequence[CellState] | Sequence[TernaryBit]) -> list[TernaryBit]:
    out = []
    for c in row:
        if isinstance(c, CellState):
            out.append(c.stored_value())
        else:
            out.append(TernaryBit(c))
    return out


def conducting_resistances(
    row: Sequence[CellState] | Sequence[TernaryBit],
    query: Sequence[TernaryBit],
    params: BranchParams,
    cell_cards: Sequence[tuple[BranchParams, BranchParams]] | None = None,
) -> list[float]:
    """On-path resistances of every branch the query turns on in this row."""
    values = _row_values(row)
    if len(values) != len(query):
        raise ValueError("row and query lengths differ")
    out: list[float] = []
    for j, (v, q) in enumerate(zip(values, query)):
        p1, p2 = cell_cards[j] if cell_cards is not None else (params, params)
        cell = CellState.for_value(v)
        sl, sl_bar = searchline_levels(TernaryBit(q), p1)
        if branch_is_on(cell.m1, sl, p1):
            out.append(p1.r_branch)
        if branch_is_on(cell.m2, sl_bar, p2):
            out.append(p2.r_branch)
    return out


def _crossing_steps(
    resistances: Sequence[float],
    v_eval: float,
    circuit: CircuitParams,
    n_steps: int,
) -> int:
    g = np.array([1.0 / r for r in resistances], dtype=np.float64)
    crossing, _, _ = discharge(
        g, circuit.c_ml, circuit.c_o, circuit.vdd, v_eval,
        circuit.eval_k, circuit.eval_vtn, circuit.sa_threshold,
        circuit.dt, n_steps, record=False,
    )
    return crossing


def simulate_search(
    row: Sequence[CellState] | Sequence[TernaryBit],
    query: Sequence[TernaryBit],
    v_eval: float,
    params: BranchParams,
    circuit: CircuitParams,
    duration: float,
    cell_cards: Sequence[tuple[BranchParams, BranchParams]] | None = None,
) -> TransientTrace:
    """Integrate one row's search transient over ``duration``.

    Both nodes start precharged to vdd; the sense output is high while the
    sense node stays above sa_threshold, and crossing_time is the first
    sample at or below it (None if it never crosses).
    """
    if duration < circuit.sense_window:
        raise ValueError("duration must cover at least the sense window")
    resistances = conducting_resistances(row, query, params, cell_cards)
    n_steps = int(round(duration / circuit.dt))
    g = np.array([1.0 / r for r in resistances], dtype=np.float64)
    crossing, v_ml, v_o = discharge(
        g, circuit.c_ml, circuit.c_o, circuit.vdd, v_eval,
        circuit.eval_k, circuit.eval_vtn, circuit.sa_threshold,
        circuit.dt, n_steps, record=True,
    )
    times = np.arange(n_steps + 1, dtype=np.float64) * circuit.dt
    return TransientTrace(
        times=times,
        v_ml=v_ml,
        v_o=v_o,
        sa_out=v_o > circuit.sa_threshold,
        crossing_time=crossing * circuit.dt if crossing > 0 else None,
    )


def _nominal_crossing(
    k: int, v_eval: float, params: BranchParams, circuit: CircuitParams, n_steps: int
) -> float:
    """Crossing time of k identical mismatch branches; +inf when uncrossed."""
    if k == 0:
        return math.inf
    crossing = _crossing_steps([params.r_branch] * k, v_eval, circuit, n_steps)
    return crossing * circuit.dt if crossing > 0 else math.inf


def calibrate_veval(
    thresholds: Iterable[int],
    params: BranchParams,
    circuit: CircuitParams,
    guard_band: float = 0.05,
) -> EvalVoltageTable:
    """Find per-threshold gate biases separating n from n+1 mismatches.

    For threshold n the returned bias v makes n+1 mismatches cross the sense
    threshold by (1-guard_band)*T and keeps n mismatches uncrossed until
    (1+guard_band)*T, with T the sense window. Two bisections bracket the
    feasible bias interval; the midpoint is returned, which makes the table
    strictly decreasing whenever every requested threshold is feasible.
    """
    thresholds = sorted(set(int(n) for n in thresholds))
    if any(n < 0 for n in thresholds):
        raise ValueError("thresholds must be >= 0")
    if not (0.0 < guard_band < 1.0):
        raise ValueError("guard_band must be in (0, 1)")
    deadline = circuit.sense_window
    fast_deadline = (1.0 - guard_band) * deadline
    slow_deadline = (1.0 + guard_band) * deadline
    horizon = int(round(3.0 * deadline / circuit.dt))
    v_min = circuit.eval_vtn
    v_max = circuit.vdd

    def ct(k: int, v: float) -> float:
        return _nominal_crossing(k, v, params, circuit, horizon)

    entries: dict[int, float] = {}
    for n in thresholds:
        if ct(n + 1, v_max) > fast_deadline:
            raise CalibrationError(
                f"threshold {n}: even v_eval = vdd leaves {n + 1} mismatches "
                f"uncrossed at {fast_deadline:.3e} s; enlarge the sense window"
            )
        lo, hi = v_min, v_max
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if ct(n + 1, mid) <= fast_deadline:
                hi = mid
            else:
                lo = mid
        v_lower = hi

        if n == 0 or ct(n, v_max) >= slow_deadline:
            v_upper = v_max
        else:
            lo, hi = v_min, v_max
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                if ct(n, mid) >= slow_deadline:
                    lo = mid
                else:
                    hi = mid
            v_upper = lo

        if v_lower > v_upper:
            raise CalibrationError(
                f"threshold {n}: no gate bias separates {n} from {n + 1} "
                f"mismatches at guard band {guard_band}"
            )
        entries[n] = 0.5 * (v_lower + v_upper)

    return EvalVoltageTable(entries=entries, sense_deadline=deadline)


def verify_calibration(
    table: EvalVoltageTable,
    params: BranchParams,
    circuit: CircuitParams,
    guard_band: float = 0.05,
) -> list[dict]:
    """Replay the guard-band conditions for every table entry."""
    horizon = int(round(3.0 * table.sense_deadline / circuit.dt))
    rows = []
    for n in table.thresholds():
        v = table[n]
        ct_n = _nominal_crossing(n, v, params, circuit, horizon)
        ct_n1 = _nominal_crossing(n + 1, v, params, circuit, horizon)
        rows.append(
            {
                "threshold": n,
                "v_eval": v,
                "ct_n_s": None if math.isinf(ct_n) else ct_n,
                "ct_n1_s": None if math.isinf(ct_n1) else ct_n1,
                "ok": (
                    ct_n1 <= (1.0 - guard_band) * table.sense_deadline
                    and ct_n >= (1.0 + guard_band) * table.sense_deadline
                ),
            }
        )
    return rows


def threshold_match_transient(
    array: ArrayState,
    query: Sequence[TernaryBit],
    threshold: int,
    table: EvalVoltageTable,
    circuit: CircuitParams,
) -> set[int]:
    """Rows the sense amp reports as matches at the calibrated bias.

    A row matches when its sense node has not crossed sa_threshold by the
    sense deadline. Thresholds at or above the wordlength trivially match
    every row; other thresholds must be present in the table.
    """
    if len(query) != array.wordlength:
        raise ValueError("query length does not match the array")
    if threshold >= array.wordlength:
        return set(range(array.rows))
    if threshold not in table:
        raise KeyError(f"threshold {threshold} not calibrated")
    v_eval = table[threshold]
    n_steps = int(math.floor(table.sense_deadline / circuit.dt))
    matched = set()
    for i in range(array.rows):
        resistances = conducting_resistances(
            [TernaryBit(int(v)) for v in array.cells[i]],
            query,
            array.params,
            array.cell_params[i] if array.cell_params is not None else None,
        )
        if not resistances:
            matched.add(i)
            continue
        crossing = _crossing_steps(resistances, v_eval, circuit, n_steps)
        if crossing < 0:
            matched.add(i)
    return matched
