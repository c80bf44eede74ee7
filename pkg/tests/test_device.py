import math

import numpy as np
import pytest

from tcamsim.device import (
    BranchParams,
    VariationSpec,
    VthState,
    branch_conductance,
    sample_variations,
)


def test_on_conductance_is_series_limited(nominal):
    g = branch_conductance(VthState.LOW, 1.0, nominal)
    assert g == 1.0 / (nominal.r_on + 0.3e6)


def test_high_state_never_conducts_at_search_voltage(nominal):
    assert branch_conductance(VthState.HIGH, 1.0, nominal) == 1.0 / nominal.r_off


def test_gate_below_threshold_is_off(nominal):
    assert branch_conductance(VthState.LOW, 0.0, nominal) == 1.0 / nominal.r_off


def test_rejects_nonfinite_gate(nominal):
    with pytest.raises(ValueError):
        branch_conductance(VthState.LOW, float("nan"), nominal)
    with pytest.raises(ValueError):
        branch_conductance(VthState.LOW, math.inf, nominal)


def test_rejects_gate_outside_write_range(nominal):
    with pytest.raises(ValueError):
        branch_conductance(VthState.LOW, -0.5, nominal)
    with pytest.raises(ValueError):
        branch_conductance(VthState.LOW, nominal.v_write + 1.0, nominal)


@pytest.mark.parametrize("state", [VthState.LOW, VthState.HIGH])
def test_conduction_monotone_in_gate_voltage(state, nominal):
    grid = np.linspace(0.0, nominal.v_write, 81)
    values = [branch_conductance(state, float(v), nominal) for v in grid]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_on_conductance_flat_above_threshold(nominal):
    expected = 1.0 / nominal.r_branch
    for v in np.linspace(nominal.vth_low + 1e-9, nominal.v_write, 40):
        assert branch_conductance(VthState.LOW, float(v), nominal) == expected


def test_params_ordering_invariant():
    with pytest.raises(ValueError):
        BranchParams(vth_low=1.2)  # above v_search
    with pytest.raises(ValueError):
        BranchParams(vth_high=0.9)  # below v_search
    with pytest.raises(ValueError):
        BranchParams(r_series=-1.0)
    with pytest.raises(ValueError):
        BranchParams(r_off=1e5)  # under 1000x the on-path


def test_zero_variance_is_identity(nominal):
    spec = VariationSpec(sigma_vth=0.0, rel_sigma_rs=0.0, seed=3)
    for sample in sample_variations(nominal, spec, 3):
        assert sample == nominal


def test_sampling_deterministic(nominal):
    spec = VariationSpec(seed=7)
    a = sample_variations(nominal, spec, 100)
    b = sample_variations(nominal, spec, 100)
    assert a == b


def test_sample_std_matches_configured_sigma(nominal):
    spec = VariationSpec(seed=11)
    samples = sample_variations(nominal, spec, 10_000)
    std = np.std([s.vth_low for s in samples])
    assert abs(std - 0.054) / 0.054 < 0.05


def test_series_resistor_scaling(nominal):
    spec = VariationSpec(seed=5)
    samples = sample_variations(nominal, spec, 10_000)
    rel = np.std([s.r_series for s in samples]) / nominal.r_series
    assert abs(rel - 0.08) / 0.08 < 0.05


def test_count_must_be_positive(nominal):
    with pytest.raises(ValueError):
        sample_variations(nominal, VariationSpec(), 0)


def test_degenerate_spec_fails_after_redraws(nominal):
    spec = VariationSpec(sigma_vth=1e6, seed=0)
    with pytest.raises(RuntimeError):
        sample_variations(nominal, spec, 1)


def test_spec_bounds():
    with pytest.raises(ValueError):
        VariationSpec(sigma_vth=-1.0)
    with pytest.raises(ValueError):
        VariationSpec(rel_sigma_rs=1.0)
