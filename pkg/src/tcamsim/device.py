"""Single-branch device model: a two-state FeFET in series with a resistor.

The branch is reduced to a resistor-limited switch: a low-threshold device
driven above its threshold conducts with a fixed on-path resistance
``r_on + r_series``; everything else presents ``r_off``. The series resistor
is what pins the on-current, so the on conductance does not depend on the
gate voltage once the device is on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "VthState",
    "BranchParams",
    "VariationSpec",
    "branch_conductance",
    "branch_is_on",
    "sample_variations",
]


class VthState(enum.Enum):
    """Nonvolatile threshold state of one storage transistor."""

    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class BranchParams:
    """Electrical card for one storage branch.

    Defaults: 0.3 MOhm series resistor, 4 V write pulses, 1 V search drive.
    The threshold pair (0.4 V / 1.8 V) brackets the search voltage so a LOW
    device conducts at 1 V and a HIGH device never does at read voltages.
    """

    vth_low: float = 0.4
    vth_high: float = 1.8
    r_on: float = 50e3
    r_off: float = 10e9
    r_series: float = 0.3e6
    v_write: float = 4.0
    v_search: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.vth_low < self.v_search < self.vth_high):
            raise ValueError(
                f"need 0 < vth_low < v_search < vth_high, got "
                f"{self.vth_low}, {self.v_search}, {self.vth_high}"
            )
        if self.r_series <= 0.0:
            raise ValueError("r_series must be positive")
        if self.r_off < 1000.0 * (self.r_on + self.r_series):
            raise ValueError("r_off must be >= 1000 * (r_on + r_series)")

    @property
    def r_branch(self) -> float:
        """On-path resistance of a conducting branch."""
        return self.r_on + self.r_series


@dataclass(frozen=True)
class VariationSpec:
    """Device-to-device variation: threshold sigma and relative series-R sigma."""

    sigma_vth: float = 0.054
    rel_sigma_rs: float = 0.08
    seed: int = 7

    def __post_init__(self) -> None:
        if self.sigma_vth < 0.0:
            raise ValueError("sigma_vth must be >= 0")
        if not (0.0 <= self.rel_sigma_rs < 1.0):
            raise ValueError("rel_sigma_rs must be in [0, 1)")


def branch_is_on(state: VthState, v_gate: float, params: BranchParams) -> bool:
    """True when the branch conducts: LOW state with the gate above threshold."""
    if not math.isfinite(v_gate):
        raise ValueError(f"non-finite gate voltage {v_gate!r}")
    if not (0.0 <= v_gate <= params.v_write):
        raise ValueError(f"gate voltage {v_gate} outside [0, {params.v_write}]")
    return state is VthState.LOW and v_gate > params.vth_low


def branch_conductance(state: VthState, v_gate: float, params: BranchParams) -> float:
    """Conductance of the branch at the given gate bias.

    Returns 1/(r_on + r_series) when conducting and 1/r_off otherwise. Above
    threshold the value is flat in v_gate: the series resistor fixes the
    on-current.
    """
    if branch_is_on(state, v_gate, params):
        return 1.0 / params.r_branch
    return 1.0 / params.r_off


def sample_variations(
    nominal: BranchParams, spec: VariationSpec, count: int
) -> list[BranchParams]:
    """Draw ``count`` perturbed copies of ``nominal``.

    Both thresholds get independent Normal(0, sigma_vth) shifts and the
    series resistor is scaled by (1 + Normal(0, rel_sigma_rs)). Samples that
    violate the parameter ordering are redrawn; deterministic given the seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(spec.seed)
    out: list[BranchParams] = []
    for _ in range(count):
        for attempt in range(100):
            vth_low = nominal.vth_low + rng.normal(0.0, spec.sigma_vth)
            vth_high = nominal.vth_high + rng.normal(0.0, spec.sigma_vth)
            r_series = nominal.r_series * (1.0 + rng.normal(0.0, spec.rel_sigma_rs))
            if (
                0.0 < vth_low < nominal.v_search < vth_high
                and r_series > 0.0
                and nominal.r_off >= 1000.0 * (nominal.r_on + r_series)
            ):
                out.append(
                    replace(
                        nominal,
                        vth_low=vth_low,
                        vth_high=vth_high,
                        r_series=r_series,
                    )
                )
                break
        else:
            raise RuntimeError(
                f"could not draw a valid sample in 100 attempts "
                f"(sigma_vth={spec.sigma_vth}, rel_sigma_rs={spec.rel_sigma_rs})"
            )
    return out
