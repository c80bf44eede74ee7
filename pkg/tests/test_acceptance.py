"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its measured figure. Tolerances are fixed here, not
calibrated after the fact.
"""

import json
import time

import numpy as np

from tcamsim.cam import threshold_match_functional
from tcamsim.cli import main as cli_main
from tcamsim.datasets import ensure_dataset, load_dataset
from tcamsim.device import BranchParams, VariationSpec
from tcamsim.knn import KnnConfig, evaluate_accuracy, thermometer_encode
from tcamsim.metrics import SweepBase, monte_carlo_robustness, sweep
from tcamsim.transient import (
    CircuitParams,
    calibrate_veval,
    discharge_rate,
    ml_voltage_analytic,
    sense_margin,
    threshold_match_transient,
    verify_calibration,
)

from conftest import brute_force_distances, random_instance

NOMINAL = BranchParams()


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    assert passed, f"{criterion}: {detail}"


def test_criterion_1_functional_oracle_equivalence():
    """1,000 random instances up to 64x64 match an exhaustive scan exactly."""
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for _ in range(1000):
        array, query = random_instance(rng, max_rows=64)
        threshold = int(rng.integers(0, array.wordlength + 1))
        got = threshold_match_functional(array, query, threshold)
        distances = brute_force_distances(array, query)
        expected = {i for i, d in enumerate(distances) if d <= threshold}
        assert got == expected
    elapsed = time.perf_counter() - t0
    report(
        "criterion 1 (functional oracle equivalence)",
        elapsed < 10.0,
        f"1000/1000 instances exact, {elapsed:.2f} s (< 10 s)",
    )


def test_criterion_2_tier_equivalence():
    """200 random instances: transient tier equals functional at Th-0..5."""
    rng = np.random.default_rng(4711)
    wordlengths = (16, 32, 64)
    circuits = {
        wl: CircuitParams.for_array(wl, 1.0, NOMINAL) for wl in wordlengths
    }
    tables = {
        wl: calibrate_veval(range(6), NOMINAL, circuits[wl]) for wl in wordlengths
    }
    t0 = time.perf_counter()
    checked = 0
    for _ in range(200):
        wl = int(rng.choice(wordlengths))
        array, query = random_instance(rng, max_rows=12, wordlength=wl)
        for threshold in range(6):
            functional = threshold_match_functional(array, query, threshold)
            transient = threshold_match_transient(
                array, query, threshold, tables[wl], circuits[wl]
            )
            assert transient == functional, (wl, threshold)
            checked += 1
    elapsed = time.perf_counter() - t0
    report(
        "criterion 2 (tier equivalence)",
        elapsed < 300.0,
        f"200 instances x 6 thresholds ({checked} checks) exact, "
        f"{elapsed:.2f} s (< 5 min)",
    )


def test_criterion_3_rc_equation_checks():
    """Closed-form RC checks: exact start, derivative, margin ordering."""
    circuit = CircuitParams.for_array(64, 1.0, NOMINAL)
    # initial value is exact
    for n in range(8):
        assert ml_voltage_analytic(0.0, n, NOMINAL, circuit) == circuit.vdd
    # derivative vs centered finite differences within 0.1% at 20 points
    rng = np.random.default_rng(33)
    h = 1e-15
    worst = 0.0
    for _ in range(20):
        t = float(rng.uniform(1e-10, 5e-9))
        n = int(rng.integers(1, 9))
        fd = (
            ml_voltage_analytic(t + h, n, NOMINAL, circuit)
            - ml_voltage_analytic(t - h, n, NOMINAL, circuit)
        ) / (2 * h)
        rate = discharge_rate(t, n, NOMINAL, circuit)
        worst = max(worst, abs(rate - fd) / abs(fd))
    assert worst < 1e-3
    # margin at its grid-optimal time strictly decreases in the threshold
    tau1 = NOMINAL.r_branch * circuit.c_ml
    grid = np.linspace(0.0, 3.0 * tau1, 5001)
    peaks = []
    for n in range(6):
        values = [sense_margin(float(t), n, NOMINAL, circuit) for t in grid]
        peaks.append(max(values))
    strictly_decreasing = all(b < a for a, b in zip(peaks, peaks[1:]))
    assert strictly_decreasing
    report(
        "criterion 3 (RC equation checks)",
        True,
        f"t=0 exact, worst derivative error {worst:.2e} (< 1e-3), "
        f"margin peaks strictly decreasing over Th-0..5",
    )


def test_criterion_4_calibration_trend():
    """Calibrated bias table strictly decreasing with a clean replay check."""
    circuit = CircuitParams.for_array(64, 1.0, NOMINAL)
    table = calibrate_veval(range(6), NOMINAL, circuit, guard_band=0.05)
    values = [table[n] for n in range(6)]
    strictly_decreasing = all(b < a for a, b in zip(values, values[1:]))
    replay = verify_calibration(table, NOMINAL, circuit, guard_band=0.05)
    all_ok = all(row["ok"] for row in replay)
    report(
        "criterion 4 (calibration trend)",
        strictly_decreasing and all_ok,
        f"table {[f'{v:.3f}' for v in values]} strictly decreasing, "
        f"guard-band replay ok at every threshold",
    )


def test_criterion_5_monte_carlo_robustness():
    """Th-5: 5- vs 6-mismatch crossing windows separable at 0.6 V and 1.0 V.

    Committed card: the package defaults (r_on 50k, r_series 0.3M,
    c_cell 0.15f, c_wire 2f, c_o 0.5f, eval_k 1e-3, eval_vtn 0.3,
    sa = 0.85 vdd, window scale 1.4) with variation seed 7.
    """
    spec = VariationSpec(sigma_vth=0.054, rel_sigma_rs=0.08, seed=7)
    t0 = time.perf_counter()
    results = {}
    for vdd in (0.6, 1.0):
        rep = monte_carlo_robustness(
            5, 100, spec, vdd, wordlength=64, params=NOMINAL
        )
        results[vdd] = rep
    elapsed = time.perf_counter() - t0
    detail = ", ".join(
        f"vdd={vdd}: separable={rep.separable} "
        f"(gap {rep.worst_gap * 1e12:.0f} ps)"
        for vdd, rep in results.items()
    )
    report(
        "criterion 5 (Monte Carlo robustness)",
        all(rep.separable for rep in results.values()) and elapsed < 600.0,
        f"{detail}, {elapsed:.1f} s (< 10 min), seed 7, default card",
    )


def test_criterion_6_sweep_trends():
    """Energy/latency trends across vdd, rows, and wordlength sweeps."""
    base = SweepBase(params=NOMINAL)

    vdd_rows = sweep("vdd", [0.6, 0.8, 1.0], base)
    assert all(r.ok for r in vdd_rows)
    energies = [r.energy for r in vdd_rows]
    vdd_ok = all(b > a for a, b in zip(energies, energies[1:]))

    rows_rows = sweep("rows", [16, 64, 256], base)
    assert all(r.ok for r in rows_rows)
    per_row = [r.energy / r.value for r in rows_rows]
    linear_ok = max(per_row) / min(per_row) - 1.0 < 0.01

    wl_rows = sweep("wordlength", [16, 32, 64, 128], base)
    assert all(r.ok for r in wl_rows)
    per_bit = [r.energy / (base.rows * r.value) for r in wl_rows]
    per_bit_ok = all(b < a for a, b in zip(per_bit, per_bit[1:]))
    latencies = [r.latency for r in wl_rows]
    latency_ok = all(b >= a for a, b in zip(latencies, latencies[1:]))

    report(
        "criterion 6 (sweep trends)",
        vdd_ok and linear_ok and per_bit_ok and latency_ok,
        f"energy up in vdd {vdd_ok}, rows linear within 1% {linear_ok}, "
        f"per-bit down in wordlength {per_bit_ok}, latency non-decreasing "
        f"{latency_ok}",
    )


def test_criterion_7_knn_pipeline(tmp_path):
    """Dataset shapes exact, encoding isometry exact, Iris accuracy floor."""
    # published shape checks for all three corpora
    shapes = {}
    for name, expect in (
        ("iris", (150, 4, 3)),
        ("wine", (178, 13, 3)),
        ("digits", (5620, 64, 10)),
    ):
        ds = load_dataset(ensure_dataset(name, tmp_path / "data"), name=name)
        shapes[name] = (ds.n, ds.f, ds.n_classes)
        assert shapes[name] == expect

    # thermometer isometry on 10,000 random pairs, exact
    rng = np.random.default_rng(106)
    feats = rng.uniform(-2.0, 9.0, size=(2000, 8))
    enc = thermometer_encode(feats, levels=11)
    q = enc.quantized()
    idx = rng.integers(0, feats.shape[0], size=(10_000, 2))
    words = enc.words
    hamming = np.sum(words[idx[:, 0]] != words[idx[:, 1]], axis=1)
    l1 = np.abs(q[idx[:, 0]] - q[idx[:, 1]]).sum(axis=1)
    isometry_ok = bool(np.array_equal(hamming, l1))
    assert isometry_ok

    # Iris accuracy floor with the functional matcher
    iris = load_dataset(ensure_dataset("iris", tmp_path / "data"), name="iris")
    rows, _ = evaluate_accuracy(iris, KnnConfig(), "functional")
    best = max(r["accuracy"] for r in rows)
    report(
        "criterion 7 (KNN pipeline)",
        best >= 0.85,
        f"shapes {shapes} exact, isometry 10000/10000 exact, "
        f"Iris best-threshold accuracy {best:.3f} (>= 0.85)",
    )


def test_criterion_8_cli_determinism(tmp_path):
    """Every CLI command, run twice with one seed, is byte-identical."""
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "array": {"rows": 4, "wordlength": 16},
                "knn": {"threshold_schedule": [1, 2], "levels": 4},
            }
        )
    )
    array_file = tmp_path / "array.txt"
    array_file.write_text("1011001110110011\n1011001110110000\n0100110001001100\n")
    data = ensure_dataset("iris", tmp_path / "data")
    commands = [
        ("calibrate",),
        ("search", "--array", str(array_file), "--traces",
         "--query", "1011001110110011", "--threshold", "1"),
        ("sweep", "--param", "vdd", "--values", "0.8,1.0"),
        ("montecarlo", "--threshold", "3", "--runs", "5", "--vdd", "1.0"),
        ("knn", "--dataset", str(data), "--name", "iris", "--audit"),
    ]
    checked = []
    for command in commands:
        digests = []
        for run in ("a", "b"):
            out = tmp_path / f"{command[0]}_{run}"
            code = cli_main(
                ["--config", str(config), "--out", str(out), "--seed", "7",
                 *command]
            )
            assert code == 0, command
            digests.append(
                {
                    p.relative_to(out).as_posix(): p.read_bytes()
                    for p in sorted(out.rglob("*"))
                    if p.is_file()
                }
            )
        assert digests[0] == digests[1], f"{command[0]} output differs"
        checked.append(command[0])
    report(
        "criterion 8 (CLI determinism)",
        True,
        f"byte-identical reruns for {checked}",
    )
