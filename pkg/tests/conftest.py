import numpy as np
import pytest

from tcamsim import BranchParams, CircuitParams, calibrate_veval
from tcamsim.cam import ArrayState, TernaryBit


@pytest.fixture(scope="session")
def nominal():
    return BranchParams()


@pytest.fixture(scope="session")
def circuit64(nominal):
    return CircuitParams.for_array(64, 1.0, nominal)


@pytest.fixture(scope="session")
def table64(nominal, circuit64):
    return calibrate_veval(range(6), nominal, circuit64)


def random_instance(rng, max_rows=16, wordlength=None, params=None):
    """Random ternary array + query, don't-care bits included on both sides."""
    rows = int(rng.integers(1, max_rows + 1))
    wl = wordlength if wordlength is not None else int(rng.integers(1, 65))
    cells = rng.choice(
        [0, 1, 2], size=(rows, wl), p=[0.4, 0.4, 0.2]
    ).astype(np.int8)
    query = [TernaryBit(int(v)) for v in rng.choice([0, 1, 2], size=wl, p=[0.45, 0.45, 0.1])]
    array = ArrayState(cells, params if params is not None else BranchParams())
    return array, query


def brute_force_distances(array, query):
    """Independent per-row distance scan (no shared code with the matchers)."""
    out = []
    for i in range(array.rows):
        d = 0
        for j in range(array.wordlength):
            c = int(array.cells[i, j])
            q = int(query[j])
            if c != 2 and q != 2 and c != q:
                d += 1
        out.append(d)
    return out
