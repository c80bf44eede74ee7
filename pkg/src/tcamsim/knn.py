"""Nearest-neighbor classification on top of threshold matching.

Features are thermometer-encoded so that word-level Hamming distance equals
the L1 distance of the quantized feature vectors; a stored array then answers
"all training words within distance t" in one search, and the query's label
is the majority class of the matched set.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cam import ArrayState, TernaryBit, threshold_match_functional
from .datasets import Dataset, load_dataset  # noqa: F401  (re-exported)
from .device import BranchParams
from .transient import CircuitParams, EvalVoltageTable, threshold_match_transient

__all__ = [
    "EncodedDataset",
    "KnnConfig",
    "thermometer_encode",
    "knn_classify",
    "evaluate_accuracy",
    "software_knn_labels",
    "baseline_timing",
]

MAX_WORDLENGTH = 256


@dataclass
class EncodedDataset:
    """Thermometer-coded words: level q maps to q ones then L-q zeros."""

    words: np.ndarray
    labels: np.ndarray
    levels: int
    feature_min: np.ndarray
    feature_max: np.ndarray

    @property
    def wordlength(self) -> int:
        return self.words.shape[1]

    def quantized(self) -> np.ndarray:
        """Per-feature quantization levels recovered from the codes."""
        n, width = self.words.shape
        return self.words.reshape(n, width // self.levels, self.levels).sum(axis=2)


@dataclass
class KnnConfig:
    threshold_schedule: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    escalation: str = "step_up"  # or "fail"
    tie_break: str = "lowest_class_id"  # or "random_seeded"
    split_ratio: float = 0.8
    split_seed: int = 1234
    levels: int | None = None
    tie_seed: int = 0

    def __post_init__(self) -> None:
        if self.escalation not in ("step_up", "fail"):
            raise ValueError("escalation must be 'step_up' or 'fail'")
        if self.tie_break not in ("lowest_class_id", "random_seeded"):
            raise ValueError("tie_break must be 'lowest_class_id' or 'random_seeded'")
        if not (0.0 < self.split_ratio < 1.0):
            raise ValueError("split_ratio must be in (0, 1)")


def default_levels(n_features: int) -> int:
    """Levels per feature: fill the word budget, capped at 16."""
    return max(1, min(16, MAX_WORDLENGTH // n_features))


def thermometer_encode(
    features: np.ndarray,
    levels: int,
    feature_min: np.ndarray | None = None,
    feature_max: np.ndarray | None = None,
    labels: np.ndarray | None = None,
) -> EncodedDataset:
    """Min-max quantize each feature to [0, levels] and emit unary codes.

    Scaling statistics are fitted on ``features`` unless given (pass the
    training split's statistics when encoding test data). A constant feature
    encodes as all zeros with a warning.
    """
    features = np.asarray(features, dtype=np.float64)
    n, f = features.shape
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if f * levels > MAX_WORDLENGTH:
        raise ValueError(
            f"word length {f * levels} exceeds the {MAX_WORDLENGTH}-bit limit"
        )
    if feature_min is None:
        feature_min = features.min(axis=0)
    if feature_max is None:
        feature_max = features.max(axis=0)
    span = feature_max - feature_min
    constant = span <= 0.0
    if constant.any():
        warnings.warn(
            f"{int(constant.sum())} constant feature(s) encode as all zeros",
            stacklevel=2,
        )
    safe_span = np.where(constant, 1.0, span)
    q = np.floor((features - feature_min) / safe_span * levels)
    q = np.clip(q, 0, levels).astype(np.int64)
    q[:, constant] = 0
    words = (np.arange(levels) < q[..., None]).astype(np.int8).reshape(n, f * levels)
    return EncodedDataset(
        words=words,
        labels=(
            np.asarray(labels, dtype=np.int64)
            if labels is not None
            else np.zeros(n, dtype=np.int64)
        ),
        levels=levels,
        feature_min=np.asarray(feature_min, dtype=np.float64),
        feature_max=np.asarray(feature_max, dtype=np.float64),
    )


Matcher = Callable[[ArrayState, Sequence[TernaryBit], int], set[int]]


def functional_matcher() -> Matcher:
    return threshold_match_functional


def transient_matcher(
    table: EvalVoltageTable,
    circuit: CircuitParams,
    params: BranchParams | None = None,
    guard_band: float = 0.05,
) -> Matcher:
    """Circuit-tier matcher; escalated thresholds calibrate lazily.

    Threshold escalation can step past the supplied table, so missing
    entries are calibrated on first use and cached. A threshold too deep to
    separate at the guard band propagates as a calibration error.
    """
    from .transient import calibrate_veval

    entries = dict(table.entries)
    deadline = table.sense_deadline
    device = params if params is not None else BranchParams()

    def match(array: ArrayState, query: Sequence[TernaryBit], threshold: int):
        if threshold < array.wordlength and threshold not in entries:
            extra = calibrate_veval([threshold], device, circuit, guard_band)
            entries[threshold] = extra[threshold]
        current = EvalVoltageTable(entries=dict(entries), sense_deadline=deadline)
        return threshold_match_transient(array, query, threshold, current, circuit)

    return match


def _vote(
    matched_labels: np.ndarray, n_classes: int, cfg: KnnConfig, rng
) -> int:
    counts = np.bincount(matched_labels, minlength=n_classes)
    top = counts.max()
    winners = np.flatnonzero(counts == top)
    if len(winners) == 1 or cfg.tie_break == "lowest_class_id":
        return int(winners[0])
    return int(rng.choice(winners))


def knn_classify(
    array: ArrayState,
    train_labels: np.ndarray,
    query: Sequence[TernaryBit],
    threshold: int,
    cfg: KnnConfig,
    matcher: Matcher,
    n_classes: int | None = None,
    rng=None,
) -> tuple[int | None, int]:
    """Label a query by majority vote over the threshold-matched set.

    An empty matched set either escalates the threshold until some row
    matches (step_up; bounded by the wordlength, where every row matches) or
    reports an explicit no-match as (None, 0).
    """
    if not (0 <= threshold <= array.wordlength):
        raise ValueError("threshold outside the wordlength")
    if n_classes is None:
        n_classes = int(train_labels.max()) + 1
    if rng is None:
        rng = np.random.default_rng(cfg.tie_seed)
    t = threshold
    matched = matcher(array, query, t)
    if cfg.escalation == "step_up":
        while not matched and t < array.wordlength:
            t += 1
            matched = matcher(array, query, t)
    if not matched:
        return None, 0
    idx = np.fromiter(matched, dtype=np.int64)
    label = _vote(train_labels[idx], n_classes, cfg, rng)
    return label, len(matched)


def split_indices(n: int, cfg: KnnConfig) -> tuple[np.ndarray, np.ndarray]:
    """Seeded train/test permutation split at cfg.split_ratio."""
    rng = np.random.default_rng(cfg.split_seed)
    order = rng.permutation(n)
    n_train = int(round(cfg.split_ratio * n))
    return order[:n_train], order[n_train:]


def evaluate_accuracy(
    ds: Dataset,
    cfg: KnnConfig,
    matcher: str | Matcher = "functional",
    *,
    params: BranchParams | None = None,
    table: EvalVoltageTable | None = None,
    circuit: CircuitParams | None = None,
    collect_audit: bool = False,
) -> tuple[list[dict], list[dict]]:
    """Test accuracy per scheduled threshold on a seeded 80/20 split.

    Scaling statistics come from the training split only. Returns

        (rows, audit) with rows = [{threshold, accuracy, mean_matched_count}]

    audit is per-query detail, filled when ``collect_audit``.
    """
    if ds.n < 5:
        raise ValueError("dataset too small (need at least 5 instances)")
    if params is None:
        params = BranchParams()
    levels = cfg.levels if cfg.levels is not None else default_levels(ds.f)
    train_idx, test_idx = split_indices(ds.n, cfg)
    train = thermometer_encode(
        ds.features[train_idx], levels, labels=ds.labels[train_idx]
    )
    test = thermometer_encode(
        ds.features[test_idx],
        levels,
        feature_min=train.feature_min,
        feature_max=train.feature_max,
        labels=ds.labels[test_idx],
    )
    array = ArrayState(train.words, params)
    if matcher == "functional":
        match = functional_matcher()
    elif matcher == "transient":
        if table is None or circuit is None:
            raise ValueError("transient matcher needs a table and circuit card")
        match = transient_matcher(table, circuit)
    else:
        match = matcher

    n_classes = int(ds.labels.max()) + 1
    rows = []
    audit = []
    for threshold in cfg.threshold_schedule:
        rng = np.random.default_rng(cfg.tie_seed)
        hits = 0
        labelled = 0
        matched_total = 0
        for i in range(test.words.shape[0]):
            query = [TernaryBit(int(b)) for b in test.words[i]]
            label, count = knn_classify(
                array, train.labels, query, threshold, cfg, match,
                n_classes=n_classes, rng=rng,
            )
            matched_total += count
            if label is not None:
                labelled += 1
                hits += int(label == int(test.labels[i]))
            if collect_audit:
                audit.append(
                    {
                        "threshold": threshold,
                        "query_index": int(test_idx[i]),
                        "label": label,
                        "truth": int(test.labels[i]),
                        "matched_count": count,
                    }
                )
        n_test = test.words.shape[0]
        rows.append(
            {
                "threshold": threshold,
                "accuracy": hits / n_test,
                "mean_matched_count": matched_total / n_test,
            }
        )
    return rows, audit


def software_knn_labels(
    train_levels: np.ndarray,
    train_labels: np.ndarray,
    test_levels: np.ndarray,
    k: int,
    n_classes: int | None = None,
) -> np.ndarray:
    """Plain k-nearest-neighbor on L1 distance over quantized levels.

    Reference implementation used as the oracle and timing baseline for the
    threshold matcher.
    """
    if n_classes is None:
        n_classes = int(train_labels.max()) + 1
    k = max(1, min(k, train_levels.shape[0]))
    out = np.empty(test_levels.shape[0], dtype=np.int64)
    for i, q in enumerate(test_levels):
        d = np.abs(train_levels - q).sum(axis=1)
        nearest = np.argpartition(d, k - 1)[:k]
        counts = np.bincount(train_labels[nearest], minlength=n_classes)
        out[i] = int(np.argmax(counts))
    return out


def baseline_timing(ds: Dataset, cfg: KnnConfig, threshold: int) -> dict:
    """Wall-clock comparison: threshold matcher vs the software scan."""
    levels = cfg.levels if cfg.levels is not None else default_levels(ds.f)
    train_idx, test_idx = split_indices(ds.n, cfg)
    train = thermometer_encode(
        ds.features[train_idx], levels, labels=ds.labels[train_idx]
    )
    test = thermometer_encode(
        ds.features[test_idx], levels,
        feature_min=train.feature_min, feature_max=train.feature_max,
        labels=ds.labels[test_idx],
    )
    array = ArrayState(train.words, BranchParams())
    match = functional_matcher()
    queries = [[TernaryBit(int(b)) for b in w] for w in test.words]

    t0 = time.perf_counter()
    for q in queries:
        knn_classify(array, train.labels, q, threshold, cfg, match)
    cam_s = time.perf_counter() - t0

    tq, tl = train.quantized(), test.quantized()
    t0 = time.perf_counter()
    software_knn_labels(tq, train.labels, tl, k=max(1, threshold))
    sw_s = time.perf_counter() - t0
    return {
        "queries": len(queries),
        "threshold_matcher_s": cam_s,
        "software_knn_s": sw_s,
    }
