"""Energy/latency models, parameter sweeps, and Monte Carlo robustness runs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .device import BranchParams, VariationSpec, sample_variations
from .kernel import discharge
from .transient import (
    CalibrationError,
    CircuitParams,
    calibrate_veval,
    sense_margin,
)

__all__ = [
    "EnergyReport",
    "MonteCarloReport",
    "SweepBase",
    "SweepRow",
    "search_energy",
    "sweep",
    "monte_carlo_robustness",
]

SWEEP_PARAMETERS = ("vdd", "threshold", "rows", "wordlength")


@dataclass(frozen=True)
class EnergyReport:
    """Per-search energy breakdown for one array configuration."""

    e_precharge: float
    e_sa: float
    e_discharge: float
    e_total: float
    e_per_bit: float
    latency: float

    def __post_init__(self) -> None:
        parts = (self.e_precharge, self.e_sa, self.e_discharge)
        if any(p < 0.0 for p in parts):
            raise ValueError("energy components must be >= 0")
        if not math.isclose(self.e_total, sum(parts), rel_tol=1e-12):
            raise ValueError("e_total must equal the sum of its components")


@dataclass
class MonteCarloReport:
    """Crossing-time distributions for n vs n+1 mismatches across runs."""

    runs: int
    threshold: int
    vdd: float
    v_eval: float
    sense_deadline: float
    crossing_times_at_n: list[float | None]
    crossing_times_at_n_plus_1: list[float | None]
    separable: bool
    worst_gap: float | None

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "threshold": self.threshold,
            "vdd": self.vdd,
            "v_eval": self.v_eval,
            "sense_deadline_s": self.sense_deadline,
            "crossing_times_at_n_s": self.crossing_times_at_n,
            "crossing_times_at_n_plus_1_s": self.crossing_times_at_n_plus_1,
            "separable": self.separable,
            "worst_gap_s": self.worst_gap,
        }


def _discharge_energy_per_row(
    k: int, v_eval: float, circuit: CircuitParams, params: BranchParams
) -> float:
    """Energy dissipated in the discharge paths of one row over the window.

    Equals the drop in stored capacitor energy (no source is connected during
    the search), integrating the discharge-path power in closed form.
    """
    if k == 0:
        return 0.0
    n_steps = int(math.floor(circuit.sense_window / circuit.dt))
    g = np.full(k, 1.0 / params.r_branch, dtype=np.float64)
    _, v_ml, v_o = discharge(
        g, circuit.c_ml, circuit.c_o, circuit.vdd, v_eval,
        circuit.eval_k, circuit.eval_vtn, circuit.sa_threshold,
        circuit.dt, n_steps, record=True,
    )
    vdd2 = circuit.vdd**2
    return float(
        0.5 * circuit.c_ml * (vdd2 - v_ml[-1] ** 2)
        + 0.5 * circuit.c_o * (vdd2 - v_o[-1] ** 2)
    )


def search_energy(
    rows: int,
    wordlength: int,
    circuit: CircuitParams,
    v_eval: float,
    avg_mismatch_fraction: float = 0.5,
    e_sa_const: float = 1e-15,
    params: BranchParams | None = None,
) -> EnergyReport:
    """Energy of one parallel search over ``rows`` words.

    Precharge refills both nodes of every row from the supply; the sense amps
    cost a fixed constant each; discharge energy uses a representative row
    with round(avg_mismatch_fraction * wordlength) mismatching cells.
    """
    if not (0.0 <= avg_mismatch_fraction <= 1.0):
        raise ValueError("avg_mismatch_fraction must be in [0, 1]")
    if params is None:
        params = BranchParams()
    k = int(round(avg_mismatch_fraction * wordlength))
    e_precharge = rows * (circuit.c_ml + circuit.c_o) * circuit.vdd**2
    e_sa = rows * e_sa_const
    e_discharge = rows * _discharge_energy_per_row(k, v_eval, circuit, params)
    e_total = e_precharge + e_sa + e_discharge
    return EnergyReport(
        e_precharge=e_precharge,
        e_sa=e_sa,
        e_discharge=e_discharge,
        e_total=e_total,
        e_per_bit=e_total / (rows * wordlength),
        latency=circuit.sense_window,
    )


@dataclass
class SweepBase:
    """Operating point a sweep varies one parameter around."""

    rows: int = 16
    wordlength: int = 64
    vdd: float = 1.0
    threshold: int = 3
    avg_mismatch_fraction: float = 0.5
    e_sa_const: float = 1e-15
    guard_band: float = 0.05
    params: BranchParams = field(default_factory=BranchParams)
    circuit_overrides: dict = field(default_factory=dict)

    def circuit_for(self, wordlength: int, vdd: float) -> CircuitParams:
        return CircuitParams.for_array(
            wordlength, vdd, self.params, **self.circuit_overrides
        )


@dataclass
class SweepRow:
    value: float
    energy: float | None
    latency: float | None
    margin: float | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def sweep(parameter: str, values, base: SweepBase) -> list[SweepRow]:
    """Calibrate, simulate, and price one search per parameter value.

    Infeasible calibration marks the row failed instead of aborting the
    batch.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"parameter must be one of {SWEEP_PARAMETERS}")
    values = list(values)
    if not values:
        raise ValueError("values must be non-empty")
    out: list[SweepRow] = []
    for value in values:
        rows = base.rows
        wordlength = base.wordlength
        vdd = base.vdd
        threshold = base.threshold
        if parameter == "vdd":
            vdd = float(value)
        elif parameter == "threshold":
            threshold = int(value)
        elif parameter == "rows":
            rows = int(value)
        else:
            wordlength = int(value)
        try:
            circuit = base.circuit_for(wordlength, vdd)
            table = calibrate_veval(
                [threshold], base.params, circuit, base.guard_band
            )
            report = search_energy(
                rows,
                wordlength,
                circuit,
                table[threshold],
                base.avg_mismatch_fraction,
                base.e_sa_const,
                base.params,
            )
            margin = sense_margin(
                table.sense_deadline, threshold, base.params, circuit
            )
            out.append(
                SweepRow(
                    value=float(value),
                    energy=report.e_total,
                    latency=report.latency,
                    margin=margin,
                )
            )
        except (CalibrationError, ValueError) as exc:
            out.append(
                SweepRow(
                    value=float(value),
                    energy=None,
                    latency=None,
                    margin=None,
                    error=str(exc),
                )
            )
    return out


def _mc_single_run(
    run_seed: int,
    threshold: int,
    spec: VariationSpec,
    params: BranchParams,
    circuit: CircuitParams,
    v_eval: float,
    wordlength: int,
    horizon_steps: int,
) -> tuple[float | None, float | None]:
    """Crossing times of an exactly-n and an exactly-(n+1) mismatch row."""
    from .cam import TernaryBit
    from .transient import conducting_resistances, _crossing_steps

    run_spec = replace(spec, seed=int(run_seed))
    samples = sample_variations(params, run_spec, 4 * wordlength)
    query = [TernaryBit.ONE] * wordlength

    def row_crossing(n_mismatch: int, offset: int) -> float | None:
        stored = [TernaryBit.ZERO] * n_mismatch + [TernaryBit.ONE] * (
            wordlength - n_mismatch
        )
        cards = [
            (samples[offset + 2 * j], samples[offset + 2 * j + 1])
            for j in range(wordlength)
        ]
        resistances = conducting_resistances(stored, query, params, cards)
        if not resistances:
            return None
        crossing = _crossing_steps(resistances, v_eval, circuit, horizon_steps)
        return crossing * circuit.dt if crossing > 0 else None

    return (
        row_crossing(threshold, 0),
        row_crossing(threshold + 1, 2 * wordlength),
    )


def monte_carlo_robustness(
    threshold: int,
    runs: int,
    spec: VariationSpec,
    vdd: float,
    *,
    wordlength: int = 64,
    params: BranchParams | None = None,
    guard_band: float = 0.05,
    circuit_overrides: dict | None = None,
    threads: int = 1,
) -> MonteCarloReport:
    """Device-variation study of the n vs n+1 crossing-time windows.

    Calibrates once at nominal parameters, then resamples every device per
    run and records both rows' crossing times at the calibrated bias.
    Deterministic given spec.seed; runs may be dispatched across threads.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if params is None:
        params = BranchParams()
    circuit = CircuitParams.for_array(
        wordlength, vdd, params, **(circuit_overrides or {})
    )
    table = calibrate_veval([threshold], params, circuit, guard_band)
    v_eval = table[threshold]
    horizon_steps = int(round(3.0 * table.sense_deadline / circuit.dt))

    seed_rng = np.random.default_rng(spec.seed)
    run_seeds = seed_rng.integers(0, 2**63 - 1, size=runs)

    def job(indexed: tuple[int, int]) -> tuple[float | None, float | None]:
        index, run_seed = indexed
        try:
            return _mc_single_run(
                run_seed, threshold, spec, params, circuit, v_eval,
                wordlength, horizon_steps,
            )
        except Exception as exc:
            raise RuntimeError(f"run {index} (seed {run_seed}) failed: {exc}") from exc

    jobs = list(enumerate(int(s) for s in run_seeds))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(j) for j in jobs]

    ct_n = [r[0] for r in results]
    ct_n1 = [r[1] for r in results]
    inf = math.inf
    min_n = min((c if c is not None else inf) for c in ct_n)
    max_n1 = max((c if c is not None else inf) for c in ct_n1)
    separable = max_n1 < min_n
    gap = min_n - max_n1
    return MonteCarloReport(
        runs=runs,
        threshold=threshold,
        vdd=vdd,
        v_eval=v_eval,
        sense_deadline=table.sense_deadline,
        crossing_times_at_n=ct_n,
        crossing_times_at_n_plus_1=ct_n1,
        separable=separable,
        worst_gap=None if math.isnan(gap) or math.isinf(gap) else gap,
    )
