"""Flow-record ingestion, cleaning, splitting, scaling and synthetic data.

CSV handling targets CICIDS2017-style exports: one header row, numeric
feature columns, and an optional free-text label column whose benign value
is matched exactly after whitespace trimming.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import DataError
from .validation import as_float_matrix

__all__ = [
    "Dataset",
    "load_csv",
    "sanitize",
    "split_train_val",
    "Standardizer",
    "SynthSpec",
    "generate_synthetic",
]


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with named columns and optional 0/1 labels.

    Labels use 0 for benign and 1 for attack rows. Arrays are frozen
    (non-writeable) so datasets can be shared across threads safely.
    """

    features: np.ndarray
    column_names: tuple[str, ...]
    labels: np.ndarray | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        names = tuple(str(c) for c in self.column_names)
        if len(names) != feats.shape[1]:
            raise ValueError(
                f"{len(names)} column names for {feats.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise ValueError(
                    f"labels length {labels.shape} does not match "
                    f"{feats.shape[0]} rows"
                )
            if labels.size and not np.all(np.isin(np.unique(labels), (0, 1))):
                raise ValueError("labels must contain only 0 and 1")
            labels.flags.writeable = False
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_cols(self) -> int:
        return self.features.shape[1]

    def select_rows(self, index) -> "Dataset":
        """New dataset with the given row index (mask or integer array)."""
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.features[index], self.column_names, labels)

    def select_columns(self, indices) -> "Dataset":
        """New dataset with the given columns, preserving row order/labels."""
        indices = np.asarray(indices, dtype=np.int64)
        names = tuple(self.column_names[i] for i in indices)
        return Dataset(self.features[:, indices], names, self.labels)


def load_csv(path, label_column: str | None = None,
             benign_label: str = "BENIGN") -> Dataset:
    """Read a flow CSV into a :class:`Dataset`.

    All columns except ``label_column`` must parse as floats. Label cells
    equal to ``benign_label`` (after trimming) map to 0, anything else to 1.
    Header names are whitespace-trimmed; duplicates are rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input CSV not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(cell.strip() for cell in header):
            raise DataError(f"{path.name}: missing header row")
        names = [cell.strip() for cell in header]
        if _all_numeric(names):
            raise DataError(f"{path.name}: first row looks numeric, header missing")
        if "" in names or len(set(names)) != len(names):
            raise DataError(f"{path.name}: ambiguous header (blank or duplicate names)")
        label_idx = None
        if label_column is not None:
            if label_column not in names:
                raise DataError(
                    f"{path.name}: label column {label_column!r} not in header"
                )
            label_idx = names.index(label_column)
        feature_names = [n for i, n in enumerate(names) if i != label_idx]

        rows: list[list[float]] = []
        labels: list[int] = [] if label_idx is not None else None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue  # trailing blank lines are common in these exports
            if len(row) != len(names):
                raise DataError(
                    f"{path.name}:{lineno}: expected {len(names)} fields, got {len(row)}"
                )
            values = []
            for j, cell in enumerate(row):
                if j == label_idx:
                    labels.append(0 if cell.strip() == benign_label else 1)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path.name}:{lineno}: non-numeric value {cell!r} "
                        f"in column {names[j]!r}"
                    ) from None
            rows.append(values)

    features = np.asarray(rows, dtype=np.float64)
    if features.size == 0:
        features = features.reshape(0, len(feature_names))
    return Dataset(features, tuple(feature_names),
                   None if labels is None else np.asarray(labels))


def _all_numeric(cells: list[str]) -> bool:
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return False
    return bool(cells)


def sanitize(dataset: Dataset) -> tuple[Dataset, int]:
    """Drop rows containing NaN/infinity; return the clean set and drop count.

    Values are never imputed: a partially non-finite row would silently
    change reconstruction-error semantics, so the whole row goes.
    """
    finite = np.isfinite(dataset.features).all(axis=1)
    dropped = int(dataset.n_rows - finite.sum())
    if dataset.n_rows and not finite.any():
        raise DataError("all rows contain non-finite values; input unusable")
    if dropped == 0:
        return dataset, 0
    return dataset.select_rows(finite), dropped


def split_train_val(dataset: Dataset, train_fraction: float,
                    seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle-split into train/validation partitions.

    The train side gets round(n * train_fraction) rows; both sides keep the
    shuffled row order. Same seed, same partition.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = dataset.n_rows
    if n < 2:
        raise ValueError(f"need at least 2 rows to split, got {n}")
    n_train = int(round(n * train_fraction))
    if n_train < 1 or n_train > n - 1:
        raise ValueError(
            f"fraction {train_fraction} leaves an empty partition for {n} rows"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.select_rows(perm[:n_train]), dataset.select_rows(perm[n_train:])


class Standardizer(BaseEstimator, TransformerMixin):
    """Column-wise standardization: (x - mean) / std.

    Uses the population standard deviation (ddof=0). Constant columns get
    std 1 so they pass through unchanged and feature indices stay aligned.
    Accepts plain matrices or :class:`Dataset` (datasets come back as
    datasets, labels untouched).
    """

    def fit(self, X, y=None):
        names = getattr(X, "column_names", None)
        X = as_float_matrix(X)
        if X.shape[0] == 0:
            raise ValueError("cannot fit scaler on an empty dataset")
        self.means_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.stds_ = np.where(std == 0.0, 1.0, std)
        self.columns_ = None if names is None else tuple(names)
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "means_"):
            raise NotFittedError("Standardizer is not fitted")

    def transform(self, X):
        self._check_fitted()
        dataset = X if isinstance(X, Dataset) else None
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"input has {X.shape[1]} columns, scaler was fitted on "
                f"{self.n_features_in_}"
            )
        out = (X - self.means_) / self.stds_
        if dataset is not None:
            return Dataset(out, dataset.column_names, dataset.labels)
        return out

    def inverse_transform(self, X):
        self._check_fitted()
        dataset = X if isinstance(X, Dataset) else None
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"input has {X.shape[1]} columns, scaler was fitted on "
                f"{self.n_features_in_}"
            )
        out = X * self.stds_ + self.means_
        if dataset is not None:
            return Dataset(out, dataset.column_names, dataset.labels)
        return out

    def select(self, indices) -> "Standardizer":
        """Scaler restricted to a column subset (same fitted statistics)."""
        self._check_fitted()
        indices = np.asarray(indices, dtype=np.int64)
        sub = Standardizer()
        sub.means_ = self.means_[indices]
        sub.stds_ = self.stds_[indices]
        sub.columns_ = (
            None if self.columns_ is None
            else tuple(self.columns_[i] for i in indices)
        )
        sub.n_features_in_ = indices.size
        return sub

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "means": self.means_.tolist(),
            "stds": self.stds_.tolist(),
            "columns": None if self.columns_ is None else list(self.columns_),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Standardizer":
        scaler = cls()
        scaler.means_ = np.asarray(obj["means"], dtype=np.float64)
        scaler.stds_ = np.asarray(obj["stds"], dtype=np.float64)
        columns = obj.get("columns")
        scaler.columns_ = None if columns is None else tuple(columns)
        scaler.n_features_in_ = scaler.means_.size
        return scaler

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Standardizer":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read scaler file {path}: {exc}") from exc
        return cls.from_dict(obj)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a labeled synthetic flow dataset with known anomalies.

    Benign rows come from a fixed per-feature Gaussian with a shared
    low-rank correlation component. Attack rows use the same generator but
    shift each column in ``anomalous_features`` by ``shift_magnitude``
    benign standard deviations.
    """

    n_features: int
    n_benign: int
    n_attack: int
    anomalous_features: frozenset[int] = field(default_factory=frozenset)
    shift_magnitude: float = 4.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "anomalous_features",
                           frozenset(int(i) for i in self.anomalous_features))
        if self.n_features < 1:
            raise ValueError("n_features must be positive")
        if self.n_benign < 0 or self.n_attack < 0:
            raise ValueError("row counts must be non-negative")
        bad = [i for i in self.anomalous_features
               if not 0 <= i < self.n_features]
        if bad:
            raise ValueError(f"anomalous feature indices out of range: {bad}")
        if not self.shift_magnitude > 0:
            raise ValueError("shift_magnitude must be positive")


# Fraction of per-feature variance carried by the shared latent factors.
_SHARED_VARIANCE = 0.4
_LATENT_RANK = 3


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Deterministically generate the dataset described by ``spec``.

    Per-feature benign variance is exactly scale_j**2 by construction, so
    the injected shift equals ``shift_magnitude`` benign stds.
    """
    rng = np.random.default_rng(spec.seed)
    d = spec.n_features
    rank = min(_LATENT_RANK, d)
    mu = rng.uniform(-1.0, 1.0, size=d)
    scale = rng.uniform(0.5, 2.0, size=d)
    loadings = rng.normal(size=(d, rank))
    norms = np.linalg.norm(loadings, axis=1, keepdims=True)
    loadings = loadings / norms * np.sqrt(_SHARED_VARIANCE)
    noise_std = np.sqrt(1.0 - _SHARED_VARIANCE)

    def draw(n: int) -> np.ndarray:
        latent = rng.normal(size=(n, rank))
        noise = rng.normal(size=(n, d))
        return mu + scale * (latent @ loadings.T + noise_std * noise)

    benign = draw(spec.n_benign)
    attack = draw(spec.n_attack)
    anomalous = sorted(spec.anomalous_features)
    if anomalous and spec.n_attack:
        attack[:, anomalous] += spec.shift_magnitude * scale[anomalous]

    features = np.vstack([benign, attack])
    labels = np.concatenate([
        np.zeros(spec.n_benign, dtype=np.int64),
        np.ones(spec.n_attack, dtype=np.int64),
    ])
    names = tuple(f"f{i:02d}" for i in range(d))
    return Dataset(features, names, labels)
