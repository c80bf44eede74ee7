import numpy as np
import pytest

from tcamsim.cam import (
    ArrayState,
    CellState,
    TernaryBit,
    cell_conducts,
    format_word,
    hamming_distance,
    mismatch_counts,
    parse_word,
    threshold_match_functional,
    write_cell,
)
from tcamsim.device import VthState, branch_conductance

from conftest import brute_force_distances, random_instance

ZERO, ONE, X = TernaryBit.ZERO, TernaryBit.ONE, TernaryBit.DONT_CARE


class TestWriteCell:
    def test_write_one(self, nominal):
        state, trace = write_cell(ONE, nominal)
        assert state == CellState(VthState.HIGH, VthState.LOW)
        assert len(trace.steps) == 2
        s1, s2 = trace.steps
        assert (s1.bl, s1.bl_bar, s1.scl) == (nominal.v_write, 0.0, 0.0)
        assert s1.writes == {"m1": VthState.HIGH}
        assert (s2.bl, s2.bl_bar, s2.scl) == (nominal.v_write, 0.0, nominal.v_write)
        assert s2.writes == {"m2": VthState.LOW}

    def test_write_zero(self, nominal):
        state, trace = write_cell(ZERO, nominal)
        assert state == CellState(VthState.LOW, VthState.HIGH)
        assert len(trace.steps) == 2
        s1, s2 = trace.steps
        assert (s1.bl, s1.bl_bar, s1.scl) == (0.0, nominal.v_write, nominal.v_write)
        assert (s2.bl, s2.bl_bar, s2.scl) == (0.0, nominal.v_write, 0.0)

    def test_write_dont_care_single_step(self, nominal):
        state, trace = write_cell(X, nominal)
        assert state == CellState(VthState.HIGH, VthState.HIGH)
        assert len(trace.steps) == 1
        step = trace.steps[0]
        assert step.bl == step.bl_bar == nominal.v_write
        assert step.scl == 0.0
        assert step.writes == {"m1": VthState.HIGH, "m2": VthState.HIGH}

    def test_matchline_grounded_throughout(self, nominal):
        for value in (ZERO, ONE, X):
            _, trace = write_cell(value, nominal)
            assert all(s.ml == 0.0 for s in trace.steps)

    def test_write_energy_counts_steps(self, nominal):
        _, t_one = write_cell(ONE, nominal)
        _, t_x = write_cell(X, nominal)
        c_gate = 1e-16
        assert t_one.energy(c_gate, nominal) == 2 * c_gate * nominal.v_write**2
        assert t_x.energy(c_gate, nominal) == 1 * c_gate * nominal.v_write**2


class TestCellConducts:
    def test_match_does_not_conduct(self, nominal):
        cell, _ = write_cell(ONE, nominal)
        assert cell_conducts(cell, ONE, nominal) is False

    def test_mismatch_conducts(self, nominal):
        cell, _ = write_cell(ONE, nominal)
        assert cell_conducts(cell, ZERO, nominal) is True

    def test_stored_wildcard_matches_everything(self, nominal):
        cell, _ = write_cell(X, nominal)
        for q in (ZERO, ONE, X):
            assert cell_conducts(cell, q, nominal) is False

    def test_query_wildcard_masks(self, nominal):
        for v in (ZERO, ONE, X):
            cell, _ = write_cell(v, nominal)
            assert cell_conducts(cell, X, nominal) is False

    def test_invalid_state_rejected(self, nominal):
        with pytest.raises(ValueError):
            cell_conducts(CellState(VthState.LOW, VthState.LOW), ONE, nominal)

    def test_round_trip_written_value_matches(self, nominal):
        for v in (ZERO, ONE):
            cell, _ = write_cell(v, nominal)
            assert cell_conducts(cell, v, nominal) is False

    def test_symmetric_mismatch(self, nominal):
        for a in (ZERO, ONE):
            for b in (ZERO, ONE):
                cell_a, _ = write_cell(a, nominal)
                cell_b, _ = write_cell(b, nominal)
                assert cell_conducts(cell_a, b, nominal) == cell_conducts(
                    cell_b, a, nominal
                )


class TestHammingDistance:
    def test_identity(self, nominal):
        row = [write_cell(b, nominal)[0] for b in (ONE, ZERO, ONE, ONE)]
        assert hamming_distance(row, [ONE, ZERO, ONE, ONE], nominal) == 0

    def test_wildcard_masked(self, nominal):
        row = [write_cell(b, nominal)[0] for b in (ONE, ZERO, X, ONE)]
        assert hamming_distance(row, [ZERO, ONE, ZERO, ONE], nominal) == 2

    def test_length_mismatch(self, nominal):
        row = [write_cell(ONE, nominal)[0]]
        with pytest.raises(ValueError):
            hamming_distance(row, [ONE, ZERO], nominal)

    def test_matches_per_branch_enumeration(self, nominal):
        # oracle: count cells where either branch shows the on-conductance,
        # going through branch_conductance directly
        rng = np.random.default_rng(42)
        g_on = 1.0 / nominal.r_branch
        for _ in range(25):
            stored = [TernaryBit(int(v)) for v in rng.integers(0, 3, size=64)]
            query = [TernaryBit(int(v)) for v in rng.integers(0, 3, size=64)]
            row = [write_cell(b, nominal)[0] for b in stored]
            expected = 0
            for cell, q in zip(row, query):
                sl = nominal.v_search if q == ONE else 0.0
                sl_bar = nominal.v_search if q == ZERO else 0.0
                g1 = branch_conductance(cell.m1, sl, nominal)
                g2 = branch_conductance(cell.m2, sl_bar, nominal)
                if g1 == g_on or g2 == g_on:
                    expected += 1
            assert hamming_distance(row, query, nominal) == expected

    def test_distance_bounds(self, nominal):
        rng = np.random.default_rng(9)
        for _ in range(20):
            stored = [TernaryBit(int(v)) for v in rng.integers(0, 3, size=32)]
            query = [TernaryBit(int(v)) for v in rng.integers(0, 3, size=32)]
            row = [write_cell(b, nominal)[0] for b in stored]
            d = hamming_distance(row, query, nominal)
            definite = sum(1 for s, q in zip(stored, query) if s != X and q != X)
            assert 0 <= d <= definite


class TestThresholdMatch:
    def test_full_threshold_matches_all(self):
        rng = np.random.default_rng(1)
        array, query = random_instance(rng, max_rows=8, wordlength=16)
        assert threshold_match_functional(array, query, 16) == set(range(array.rows))

    def test_zero_threshold_is_exact_match(self, nominal):
        array = ArrayState.from_words(["10X1", "1011", "0011"], nominal)
        query = parse_word("1011")
        # rows 0 and 1 equal the query modulo the wildcard
        assert threshold_match_functional(array, query, 0) == {0, 1}

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(7)
        array, query = random_instance(rng, max_rows=16, wordlength=8)
        dist = brute_force_distances(array, query)
        expected = {i for i, d in enumerate(dist) if d <= 2}
        assert threshold_match_functional(array, query, 2) == expected

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(11)
        array, query = random_instance(rng, max_rows=12, wordlength=24)
        previous = set()
        for n in range(array.wordlength + 1):
            current = threshold_match_functional(array, query, n)
            assert previous <= current
            previous = current

    def test_dont_care_absorption(self):
        rng = np.random.default_rng(13)
        array, query = random_instance(rng, max_rows=10, wordlength=20)
        padded = ArrayState(
            np.hstack(
                [array.cells, np.full((array.rows, 4), 2, dtype=np.int8)]
            ),
            array.params,
        )
        padded_query = list(query) + [X] * 4
        for n in range(5):
            assert threshold_match_functional(
                array, query, n
            ) == threshold_match_functional(padded, padded_query, n)

    def test_threshold_out_of_range(self):
        array = ArrayState.from_words(["1010"])
        with pytest.raises(ValueError):
            threshold_match_functional(array, parse_word("1010"), 5)
        with pytest.raises(ValueError):
            threshold_match_functional(array, parse_word("1010"), -1)


class TestArrayState:
    def test_text_round_trip(self, nominal):
        array = ArrayState.from_words(["10X1", "0110", "XXXX"], nominal)
        again = ArrayState.from_text(array.to_text(), nominal)
        assert np.array_equal(array.cells, again.cells)

    def test_parse_error_position(self):
        with pytest.raises(ValueError, match="position 2"):
            parse_word("10Z1")

    def test_format_word(self):
        assert format_word([ONE, ZERO, X]) == "10X"

    def test_wordlength_cap(self):
        with pytest.raises(ValueError):
            ArrayState(np.zeros((1, 257), dtype=np.int8))

    def test_bad_cell_codes(self):
        with pytest.raises(ValueError):
            ArrayState(np.full((1, 4), 7, dtype=np.int8))

    def test_store_updates_row(self, nominal):
        array = ArrayState.from_words(["0000"], nominal)
        traces = array.store(0, "1X01")
        assert array.to_text() == "1X01\n"
        assert [len(t.steps) for t in traces] == [2, 1, 2, 2]

    def test_mismatch_counts_agrees_with_brute_force(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            array, query = random_instance(rng, max_rows=12)
            assert mismatch_counts(array, query).tolist() == brute_force_distances(
                array, query
            )
