"""Datasets: CSV ingestion, z-score standardization and synthetic generation.

The synthetic generator draws binary feature vectors and labels from a
logistic latent model, so every generated example carries a known
ground-truth conditional probability.  That is what makes calibration
claims testable without access to any real clinical data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

__all__ = [
    "CsvFormatError",
    "Dataset",
    "Example",
    "Standardizer",
    "SyntheticSpec",
    "generate_synthetic",
    "load_csv",
]


class CsvFormatError(ValueError):
    """Raised when an input CSV violates the expected layout."""


class Example(NamedTuple):
    features: np.ndarray
    label: int | None


class Dataset:
    """An ordered collection of feature vectors with optional binary labels.

    Immutable after construction; instances can be shared freely across
    parallel workers.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray | None = None,
                 feature_names: list[str] | None = None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        if y is not None:
            y = np.asarray(y, dtype=np.int64)
            if y.shape != (X.shape[0],):
                raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
            bad = ~np.isin(y, (0, 1))
            if bad.any():
                raise ValueError(f"labels must be 0 or 1; offending rows {np.nonzero(bad)[0][:5].tolist()}")
            y.setflags(write=False)
        if feature_names is not None and len(feature_names) != X.shape[1]:
            raise ValueError("feature_names length does not match the number of columns")
        X.setflags(write=False)
        self.X = X
        self.y = y
        self.feature_names = list(feature_names) if feature_names else None

    @property
    def n_examples(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def n_pos(self) -> int:
        return 0 if self.y is None else int(np.sum(self.y == 1))

    @property
    def n_neg(self) -> int:
        return 0 if self.y is None else int(np.sum(self.y == 0))

    def __len__(self) -> int:
        return self.n_examples

    def examples(self) -> Iterator[Example]:
        for i in range(self.n_examples):
            yield Example(self.X[i], None if self.y is None else int(self.y[i]))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(self.X[idx], None if self.y is None else self.y[idx], self.feature_names)

    def __repr__(self) -> str:
        labelled = "unlabelled" if self.y is None else f"{self.n_pos} pos / {self.n_neg} neg"
        return f"Dataset(n={self.n_examples}, dim={self.dim}, {labelled})"


def _looks_numeric(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv(path, has_labels: bool = True) -> Dataset:
    """Load a comma-separated dataset, label column last when present.

    A header row is auto-detected: if any cell of the first row is
    non-numeric the row is treated as column names.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise CsvFormatError(f"{path}: no rows")

    names = None
    if not all(_looks_numeric(c) for c in rows[0]):
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise CsvFormatError(f"{path}: no rows")

    width = len(rows[0])
    if has_labels and width < 2:
        raise CsvFormatError(f"{path}: need at least one feature column and a label column")

    features, labels = [], []
    for i, row in enumerate(rows):
        rowno = i + 1 + (names is not None)
        if len(row) != width:
            raise CsvFormatError(f"{path}: row {rowno} has {len(row)} columns, expected {width}")
        values = []
        for j, cell in enumerate(row):
            try:
                values.append(float(cell))
            except ValueError:
                raise CsvFormatError(f"{path}: row {rowno}, column {j + 1}: non-numeric value {cell!r}") from None
        if has_labels:
            lab = values.pop()
            if lab not in (0.0, 1.0):
                raise CsvFormatError(f"{path}: row {rowno}, column {width}: label must be 0 or 1, got {lab}")
            labels.append(int(lab))
        features.append(values)

    if names is not None and has_labels:
        names = names[:-1]
    X = np.array(features, dtype=np.float64)
    return Dataset(X, np.array(labels) if has_labels else None, names)


def write_csv(path, data: Dataset) -> None:
    """Write a dataset back out in the layout `load_csv` accepts."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if data.feature_names:
            header = list(data.feature_names) + (["label"] if data.y is not None else [])
            writer.writerow(header)
        for i in range(data.n_examples):
            row = [repr(float(v)) for v in data.X[i]]
            if data.y is not None:
                row.append(str(int(data.y[i])))
            writer.writerow(row)


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-feature z-scoring with population (divisor n) standard deviation.

    Zero-variance features transform to 0 rather than NaN, which keeps
    downstream training well defined on constant columns.
    """

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("fit requires a nonempty 2-d array")
        self.mean_ = X.mean(axis=0)
        self.std_ = X.std(axis=0)
        return self

    def transform(self, X):
        if not hasattr(self, "mean_"):
            raise ValueError("Standardizer has not been fitted")
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.mean_.shape[0]:
            raise ValueError(f"expected {self.mean_.shape[0]} features, got {X.shape[1]}")
        out = X - self.mean_
        nonzero = self.std_ > 0
        out[:, nonzero] /= self.std_[nonzero]
        out[:, ~nonzero] = 0.0
        return out[0] if single else out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class SyntheticSpec:
    """Configuration of the logistic latent generator.

    `latent_weights` and `bias` may be left unset: weights are then drawn
    from the seed and the bias is tuned by bisection so the mean positive
    probability matches `target_prevalence` within 1e-3.  An explicit
    `bias` wins over prevalence tuning.
    """

    dim: int = 34
    latent_weights: tuple[float, ...] | None = None
    bias: float | None = None
    noise_scale: float = 0.0
    target_prevalence: float = 0.1852
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")
        if not 0.0 < self.target_prevalence < 1.0:
            raise ValueError("target_prevalence must lie in (0, 1)")
        if self.latent_weights is not None:
            object.__setattr__(self, "latent_weights", tuple(float(w) for w in self.latent_weights))
            if len(self.latent_weights) != self.dim:
                raise ValueError("latent_weights length must equal dim")


def _tune_bias(z: np.ndarray, target: float) -> float:
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _sigmoid(z + mid).mean() < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def generate_synthetic(spec: SyntheticSpec, n: int) -> tuple[Dataset, np.ndarray]:
    """Draw `n` examples plus their ground-truth positive probabilities.

    Pure function of (spec, n): the same inputs give bit-identical output.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(spec.seed)
    freqs = rng.uniform(0.15, 0.85, size=spec.dim)
    X = (rng.random((n, spec.dim)) < freqs).astype(np.float64)
    if spec.latent_weights is None:
        w = rng.normal(0.0, 1.0, size=spec.dim) * (3.0 / np.sqrt(spec.dim))
    else:
        w = np.array(spec.latent_weights, dtype=np.float64)
    noise = rng.normal(0.0, 1.0, size=n) * spec.noise_scale
    z = X @ w + noise
    bias = spec.bias if spec.bias is not None else _tune_bias(z, spec.target_prevalence)
    probs = _sigmoid(z + bias)
    y = (rng.random(n) < probs).astype(np.int64)
    names = [f"f{j}" for j in range(spec.dim)]
    return Dataset(X, y, names), probs
