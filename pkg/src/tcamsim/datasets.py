"""Dataset loading and the bundled benchmark corpora.

CSV schema: one instance per line, feature columns followed by an integer
class label. Iris and Wine are the real UCI tables (via scikit-learn).
The bundled digits corpus is a deterministic synthetic stand-in with the
published shape (5620 instances, 64 features, 10 classes, 0..16 pixel
range); the original full corpus is not redistributable here.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "KNOWN_SHAPES",
    "load_dataset",
    "write_iris_csv",
    "write_wine_csv",
    "write_digits_csv",
    "ensure_dataset",
]

# name -> (instances, features, classes)
KNOWN_SHAPES: dict[str, tuple[int, int, int]] = {
    "iris": (150, 4, 3),
    "wine": (178, 13, 3),
    "digits": (5620, 64, 10),
}


class DataError(ValueError):
    """Malformed dataset file or shape mismatch."""


@dataclass
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def f(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0


def load_dataset(path, name: str | None = None) -> Dataset:
    """Parse a dataset CSV; cross-check counts when a known name is declared."""
    path = Path(path)
    features: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split(",")
            if len(cols) < 2:
                raise DataError(f"{path}:{lineno}: need features plus a label")
            if width is None:
                width = len(cols)
            elif len(cols) != width:
                raise DataError(
                    f"{path}:{lineno}: expected {width - 1} features, "
                    f"got {len(cols) - 1}"
                )
            try:
                row = [float(c) for c in cols[:-1]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad feature value ({exc})") from exc
            label_text = cols[-1].strip()
            try:
                label = int(label_text)
            except ValueError as exc:
                raise DataError(
                    f"{path}:{lineno}: label must be an integer, got {label_text!r}"
                ) from exc
            if label < 0:
                raise DataError(f"{path}:{lineno}: label must be >= 0")
            features.append(row)
            labels.append(label)
    if not features:
        raise DataError(f"{path}: no instances")
    ds = Dataset(
        name=name or path.stem,
        features=np.asarray(features, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
    )
    if name is not None and name in KNOWN_SHAPES:
        expect = KNOWN_SHAPES[name]
        got = (ds.n, ds.f, ds.n_classes)
        if got != expect:
            raise DataError(
                f"{path}: declared {name!r} must have (n, f, classes) = "
                f"{expect}, got {got}"
            )
        if ds.labels.max() >= expect[2]:
            raise DataError(f"{path}: label out of range for {name!r}")
    return ds


def _write_csv(path, features: np.ndarray, labels: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row, label in zip(features, labels):
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write(f",{int(label)}\n")


def write_iris_csv(path) -> None:
    from sklearn.datasets import load_iris

    raw = load_iris()
    _write_csv(path, raw.data, raw.target)


def write_wine_csv(path) -> None:
    from sklearn.datasets import load_wine

    raw = load_wine()
    _write_csv(path, raw.data, raw.target)


def write_digits_csv(path, seed: int = 20240501) -> None:
    """Synthetic digit-shaped corpus: 5620 x 64, 10 classes, 0..16 values."""
    n, f, classes = KNOWN_SHAPES["digits"]
    per_class = n // classes
    rng = np.random.default_rng(seed)
    prototypes = rng.uniform(0.0, 16.0, size=(classes, f))
    feats = np.empty((n, f), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for c in range(classes):
        block = slice(c * per_class, (c + 1) * per_class)
        noisy = prototypes[c] + rng.normal(0.0, 3.0, size=(per_class, f))
        feats[block] = np.clip(np.round(noisy), 0.0, 16.0)
        labels[block] = c
    order = rng.permutation(n)
    _write_csv(path, feats[order], labels[order])


_WRITERS = {
    "iris": write_iris_csv,
    "wine": write_wine_csv,
    "digits": write_digits_csv,
}


def ensure_dataset(name: str, directory) -> Path:
    """Write the named bundled corpus into ``directory`` if not present."""
    if name not in _WRITERS:
        raise DataError(f"unknown bundled dataset {name!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.csv"
    if not path.exists():
        _WRITERS[name](path)
    return path
