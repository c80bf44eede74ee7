"""Behavioral simulator of a ferroelectric ternary CAM with tunable
Hamming-distance threshold matching.

Three fidelity tiers over the same array model: bit-level match logic with a
brute-force distance oracle, closed-form RC estimates of the matchline
discharge, and a numerical two-node transient with the evaluation transistor
that realizes the tunable threshold. A KNN pipeline exercises the engine on
dataset classification.
"""

from .cam import (
    ArrayState,
    CellState,
    TernaryBit,
    WriteStep,
    WriteTrace,
    cell_conducts,
    hamming_distance,
    threshold_match_functional,
    write_cell,
)
from .device import (
    BranchParams,
    VariationSpec,
    VthState,
    branch_conductance,
    sample_variations,
)
from .kernel import BACKEND, SimulationError
from .metrics import (
    EnergyReport,
    MonteCarloReport,
    monte_carlo_robustness,
    search_energy,
    sweep,
)
from .transient import (
    CalibrationError,
    CircuitParams,
    EvalVoltageTable,
    TransientTrace,
    calibrate_veval,
    discharge_rate,
    equivalent_resistance,
    eval_transistor_current,
    ml_voltage_analytic,
    sense_margin,
    simulate_search,
    threshold_match_transient,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayState",
    "BACKEND",
    "BranchParams",
    "CalibrationError",
    "CellState",
    "CircuitParams",
    "EnergyReport",
    "EvalVoltageTable",
    "MonteCarloReport",
    "SimulationError",
    "TernaryBit",
    "TransientTrace",
    "VariationSpec",
    "VthState",
    "WriteStep",
    "WriteTrace",
    "branch_conductance",
    "calibrate_veval",
    "cell_conducts",
    "discharge_rate",
    "equivalent_resistance",
    "eval_transistor_current",
    "hamming_distance",
    "ml_voltage_analytic",
    "monte_carlo_robustness",
    "sample_variations",
    "search_energy",
    "sense_margin",
    "simulate_search",
    "sweep",
    "threshold_match_functional",
    "threshold_match_transient",
    "write_cell",
    "__version__",
]
