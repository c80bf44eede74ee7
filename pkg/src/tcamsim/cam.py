"""Ternary cell write/match logic, array storage, and the functional matcher.

A cell stores one ternary value in two complementary branches (m1, m2).
Legal states after a write:

    stored one        -> (HIGH, LOW)
    stored zero       -> (LOW, HIGH)
    stored don't-care -> (HIGH, HIGH)

(LOW, LOW) is unreachable through write_cell and is rejected wherever a cell
is evaluated. Searching drives the query bit onto the two searchlines
(one-hot at v_search); a cell discharges the matchline exactly when it holds
a definite value that differs from a definite query bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .device import BranchParams, VthState, branch_is_on

__all__ = [
    "TernaryBit",
    "CellState",
    "WriteStep",
    "WriteTrace",
    "ArrayState",
    "write_cell",
    "cell_conducts",
    "hamming_distance",
    "threshold_match_functional",
    "mismatch_counts",
    "parse_word",
    "format_word",
]

MAX_WORDLENGTH = 256


class TernaryBit(enum.IntEnum):
    ZERO = 0
    ONE = 1
    DONT_CARE = 2


_BIT_CHARS = {TernaryBit.ZERO: "0", TernaryBit.ONE: "1", TernaryBit.DONT_CARE: "X"}
_CHAR_BITS = {"0": TernaryBit.ZERO, "1": TernaryBit.ONE, "X": TernaryBit.DONT_CARE,
              "x": TernaryBit.DONT_CARE}


@dataclass(frozen=True)
class CellState:
    """Threshold states of the two branches of one cell."""

    m1: VthState
    m2: VthState

    def stored_value(self) -> TernaryBit:
        if self.m1 is VthState.HIGH and self.m2 is VthState.LOW:
            return TernaryBit.ONE
        if self.m1 is VthState.LOW and self.m2 is VthState.HIGH:
            return TernaryBit.ZERO
        if self.m1 is VthState.HIGH and self.m2 is VthState.HIGH:
            return TernaryBit.DONT_CARE
        raise ValueError("invalid cell state (LOW, LOW): unreachable via write_cell")

    @classmethod
    def for_value(cls, value: TernaryBit) -> "CellState":
        if value == TernaryBit.ONE:
            return cls(VthState.HIGH, VthState.LOW)
        if value == TernaryBit.ZERO:
            return cls(VthState.LOW, VthState.HIGH)
        return cls(VthState.HIGH, VthState.HIGH)


@dataclass(frozen=True)
class WriteStep:
    """Line levels for one write step and the device states it sets."""

    bl: float
    bl_bar: float
    scl: float
    ml: float
    writes: dict[str, VthState]


@dataclass(frozen=True)
class WriteTrace:
    steps: tuple[WriteStep, ...]

    def energy(self, c_gate: float, params: BranchParams) -> float:
        """Write energy: one gate charge per step, c_gate * v_write^2."""
        return len(self.steps) * c_gate * params.v_write**2


def write_cell(value: TernaryBit, params: BranchParams) -> tuple[CellState, WriteTrace]:
    """Program a cell to ``value``, returning the state and the line-level trace.

    Definite bits take two steps (one per device); don't-care programs both
    devices high in a single step. The matchline stays grounded throughout.
    """
    vw = params.v_write
    if value == TernaryBit.ONE:
        steps = (
            WriteStep(bl=vw, bl_bar=0.0, scl=0.0, ml=0.0, writes={"m1": VthState.HIGH}),
            WriteStep(bl=vw, bl_bar=0.0, scl=vw, ml=0.0, writes={"m2": VthState.LOW}),
        )
    elif value == TernaryBit.ZERO:
        steps = (
            WriteStep(bl=0.0, bl_bar=vw, scl=vw, ml=0.0, writes={"m1": VthState.LOW}),
            WriteStep(bl=0.0, bl_bar=vw, scl=0.0, ml=0.0, writes={"m2": VthState.HIGH}),
        )
    else:
        steps = (
            WriteStep(
                bl=vw, bl_bar=vw, scl=0.0, ml=0.0,
                writes={"m1": VthState.HIGH, "m2": VthState.HIGH},
            ),
        )
    return CellState.for_value(value), WriteTrace(steps)


def searchline_levels(query: TernaryBit, params: BranchParams) -> tuple[float, float]:
    """(SL, SL_bar) gate drives for a query bit; a wildcard grounds both."""
    sl = params.v_search if query == TernaryBit.ONE else 0.0
    sl_bar = params.v_search if query == TernaryBit.ZERO else 0.0
    return sl, sl_bar


def cell_conducts(
    cell: CellState,
    query: TernaryBit,
    params: BranchParams,
    params_m2: BranchParams | None = None,
) -> bool:
    """True when at least one branch of the cell discharges the matchline.

    For legal cell states this reduces to: both sides definite and unequal.
    ``params_m2`` gives the second branch its own card when devices vary.
    """
    cell.stored_value()  # rejects the invalid (LOW, LOW) state
    sl, sl_bar = searchline_levels(query, params)
    return branch_is_on(cell.m1, sl, params) or branch_is_on(
        cell.m2, sl_bar, params_m2 if params_m2 is not None else params
    )


def hamming_distance(
    row: Sequence[CellState], query: Sequence[TernaryBit], params: BranchParams
) -> int:
    """Number of conducting cells; don't-care on either side contributes zero."""
    if len(row) != len(query):
        raise ValueError(f"length mismatch: row {len(row)} vs query {len(query)}")
    return sum(cell_conducts(c, q, params) for c, q in zip(row, query))


def parse_word(text: str) -> list[TernaryBit]:
    """Parse a word from its text form, characters {0, 1, X}."""
    bits = []
    for pos, ch in enumerate(text.strip()):
        if ch not in _CHAR_BITS:
            raise ValueError(f"invalid character {ch!r} at position {pos}")
        bits.append(_CHAR_BITS[ch])
    return bits


def format_word(bits: Iterable[TernaryBit]) -> str:
    return "".join(_BIT_CHARS[TernaryBit(b)] for b in bits)


@dataclass
class ArrayState:
    """Stored words plus the device card(s) backing them.

    ``cells`` holds TernaryBit codes, one row per stored word. ``cell_params``
    optionally carries per-cell (m1, m2) device cards for variation studies;
    when absent every branch uses the nominal ``params``.
    """

    cells: np.ndarray
    params: BranchParams = field(default_factory=BranchParams)
    cell_params: list[list[tuple[BranchParams, BranchParams]]] | None = None

    def __post_init__(self) -> None:
        self.cells = np.asarray(self.cells, dtype=np.int8)
        if self.cells.ndim != 2:
            raise ValueError("cells must be a 2-D grid")
        rows, wordlength = self.cells.shape
        if rows < 1:
            raise ValueError("need at least one row")
        if not (1 <= wordlength <= MAX_WORDLENGTH):
            raise ValueError(f"wordlength must be in [1, {MAX_WORDLENGTH}]")
        if not np.isin(self.cells, (0, 1, 2)).all():
            raise ValueError("cells must hold ternary codes 0/1/2")
        if self.cell_params is not None:
            if len(self.cell_params) != rows or any(
                len(r) != wordlength for r in self.cell_params
            ):
                raise ValueError("cell_params shape must match the cell grid")

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def wordlength(self) -> int:
        return self.cells.shape[1]

    @classmethod
    def from_words(
        cls,
        words: Sequence[Sequence[TernaryBit]] | Sequence[str],
        params: BranchParams | None = None,
    ) -> "ArrayState":
        rows = [parse_word(w) if isinstance(w, str) else list(w) for w in words]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("all words must have the same length")
        grid = np.array([[int(b) for b in r] for r in rows], dtype=np.int8)
        return cls(grid, params if params is not None else BranchParams())

    def store(self, row: int, word: Sequence[TernaryBit] | str) -> list[WriteTrace]:
        """Write a full word into one row, returning the per-cell write traces."""
        bits = parse_word(word) if isinstance(word, str) else list(word)
        if len(bits) != self.wordlength:
            raise ValueError("word length does not match the array")
        traces = []
        for j, b in enumerate(bits):
            state, trace = write_cell(TernaryBit(b), self.params)
            self.cells[row, j] = int(state.stored_value())
            traces.append(trace)
        return traces

    def row_states(self, row: int) -> list[CellState]:
        return [CellState.for_value(TernaryBit(int(v))) for v in self.cells[row]]

    def branch_cards(self, row: int) -> list[tuple[BranchParams, BranchParams]]:
        if self.cell_params is not None:
            return self.cell_params[row]
        return [(self.params, self.params)] * self.wordlength

    def to_text(self) -> str:
        return "\n".join(format_word(r) for r in self.cells) + "\n"

    @classmethod
    def from_text(cls, text: str, params: BranchParams | None = None) -> "ArrayState":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty array file")
        return cls.from_words(lines, params)


def mismatch_counts(array: ArrayState, query: Sequence[TernaryBit]) -> np.ndarray:
    """Per-row definite-bit disagreement counts (vectorized)."""
    q = np.asarray([int(b) for b in query], dtype=np.int8)
    if q.shape[0] != array.wordlength:
        raise ValueError("query length does not match the array")
    cells = array.cells
    definite = (cells != int(TernaryBit.DONT_CARE)) & (q != int(TernaryBit.DONT_CARE))
    return (definite & (cells != q)).sum(axis=1)


def threshold_match_functional(
    array: ArrayState, query: Sequence[TernaryBit], threshold: int
) -> set[int]:
    """Rows whose distance to the query is at most ``threshold``.

    This is the golden reference the circuit tier is checked against.
    """
    if not (0 <= threshold <= array.wordlength):
        raise ValueError(f"threshold {threshold} outside [0, {array.wordlength}]")
    counts = mismatch_counts(array, query)
    return set(np.flatnonzero(counts <= threshold).tolist())
