"""Tabular binary-classification data: containers, generation, I/O and
neighbouring-dataset arithmetic.

Missing cells are tracked by ``missing_mask``; their entries in ``features``
are always ``nan`` so that an accidental read fails loudly instead of
silently contributing a stale value.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDataError,
    IncompatibleDatasetsError,
    ParameterError,
    ParseError,
    SchemaError,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical-integer"
FEATURE_KINDS = (CONTINUOUS, CATEGORICAL)


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, binary labels and an optional missingness mask.

    Arrays are copied and made read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray
    missing_mask: np.ndarray | None = None
    feature_kinds: tuple = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise SchemaError(f"features must be 2-D, got shape {x.shape}")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise SchemaError(
                f"labels must be a vector of length {x.shape[0]}, got shape {y.shape}"
            )
        if y.size and not np.all((y == 0) | (y == 1)):
            raise SchemaError("labels must contain only 0 and 1")
        y = y.astype(np.int8)

        mask = self.missing_mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != x.shape:
                raise SchemaError(
                    f"missing_mask shape {mask.shape} does not match features {x.shape}"
                )
            if x.shape[0] and np.any(mask.all(axis=0)):
                cols = np.flatnonzero(mask.all(axis=0)).tolist()
                raise DegenerateDataError(f"columns {cols} have no observed values")
            x = x.copy()
            x[mask] = np.nan
        kinds = self.feature_kinds
        if kinds is None:
            kinds = (CONTINUOUS,) * x.shape[1]
        kinds = tuple(kinds)
        if len(kinds) != x.shape[1] or any(k not in FEATURE_KINDS for k in kinds):
            raise SchemaError(f"feature_kinds must be {x.shape[1]} entries from {FEATURE_KINDS}")

        object.__setattr__(self, "features", _frozen(x))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "missing_mask", None if mask is None else _frozen(mask))
        object.__setattr__(self, "feature_kinds", kinds)

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def shape(self):
        return self.features.shape

    @property
    def has_missing(self):
        return self.missing_mask is not None and bool(self.missing_mask.any())

    def mask(self):
        """Missingness mask, all-false when the dataset carries none."""
        if self.missing_mask is None:
            return np.zeros(self.shape, dtype=bool)
        return self.missing_mask

    def class_counts(self):
        return np.bincount(self.labels, minlength=2)

    def subset(self, rows):
        rows = np.asarray(rows, dtype=int)
        mask = None if self.missing_mask is None else self.missing_mask[rows]
        return Dataset(self.features[rows], self.labels[rows], mask, self.feature_kinds)

    def replace(self, features=None, labels=None, missing_mask=...):
        """Copy with some fields swapped; pass ``missing_mask=None`` to drop the mask."""
        return Dataset(
            self.features if features is None else features,
            self.labels if labels is None else labels,
            self.missing_mask if missing_mask is ... else missing_mask,
            self.feature_kinds,
        )

    def equals(self, other):
        return diff(self, other).k == 0

    def require_complete(self, what="operation"):
        if self.has_missing:
            raise DegenerateDataError(f"{what} requires a dataset without missing values")


@dataclass(frozen=True)
class NeighbourDiff:
    k: int
    indices: tuple = ()


@dataclass(frozen=True)
class SyntheticSpec:
    """Two isotropic (optionally equicorrelated) Gaussian classes.

    ``correlation`` sets the off-diagonal correlation of the shared
    covariance ``covariance_scale * ((1 - rho) I + rho 11^T)``; 0 gives the
    isotropic case.  ``grid_step`` rounds every feature to a multiple of
    itself, giving discrete census-like columns.
    """

    n_per_class: int
    mean_0: tuple
    mean_1: tuple
    covariance_scale: float = 1.0
    dimension: int = None
    seed: int = 0
    correlation: float = 0.0
    grid_step: float = None

    def __post_init__(self):
        m0 = tuple(float(v) for v in np.atleast_1d(self.mean_0))
        m1 = tuple(float(v) for v in np.atleast_1d(self.mean_1))
        dim = self.dimension if self.dimension is not None else len(m0)
        object.__setattr__(self, "mean_0", m0)
        object.__setattr__(self, "mean_1", m1)
        object.__setattr__(self, "dimension", dim)

    def validate(self):
        if not isinstance(self.n_per_class, (int, np.integer)) or self.n_per_class < 1:
            raise ParameterError(f"n_per_class must be a positive integer, got {self.n_per_class!r}")
        if not isinstance(self.dimension, (int, np.integer)) or self.dimension < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.dimension!r}")
        if not (self.covariance_scale > 0 and math.isfinite(self.covariance_scale)):
            raise ParameterError(f"covariance_scale must be positive, got {self.covariance_scale!r}")
        for name in ("mean_0", "mean_1"):
            v = getattr(self, name)
            if len(v) not in (1, self.dimension):
                raise ParameterError(f"{name} has length {len(v)}, expected {self.dimension}")
        lo = -1.0 / (self.dimension - 1) if self.dimension > 1 else -1.0
        if not (lo < self.correlation < 1.0) and self.correlation != 0.0:
            raise ParameterError(f"correlation must lie in ({lo}, 1), got {self.correlation!r}")
        if self.grid_step is not None and not (self.grid_step > 0 and math.isfinite(self.grid_step)):
            raise ParameterError(f"grid_step must be positive, got {self.grid_step!r}")


def generate_gaussian(spec):
    """Sample ``2 * n_per_class`` rows: all class-0 rows first, then class 1."""
    spec.validate()
    d = spec.dimension
    rng = np.random.default_rng(spec.seed)
    mean0 = np.broadcast_to(np.asarray(spec.mean_0), (d,))
    mean1 = np.broadcast_to(np.asarray(spec.mean_1), (d,))
    z = rng.standard_normal((2 * spec.n_per_class, d))
    if spec.correlation:
        cov = (1 - spec.correlation) * np.eye(d) + spec.correlation
        z = z @ np.linalg.cholesky(cov).T
    z *= math.sqrt(spec.covariance_scale)
    n = spec.n_per_class
    z[:n] += mean0
    z[n:] += mean1
    if spec.grid_step is not None:
        z = np.round(z / spec.grid_step) * spec.grid_step
    y = np.repeat([0, 1], n)
    return Dataset(z, y)


def _parse_float(text):
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, label_column, missing_token="", categorical=None):
    """Read a headed CSV into a Dataset.

    Label values are mapped to {0, 1} by sorting the two distinct raw
    values (numerically when both parse as numbers, else as strings).
    Feature cells equal to ``missing_token`` are masked.  Columns whose
    observed values are all integral are tagged categorical unless
    ``categorical`` lists the categorical columns explicitly.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        rows = [r for r in reader if r]
    if label_column not in header:
        raise SchemaError(f"{path}: label column {label_column!r} not in header {header}")
    li = header.index(label_column)
    feat_cols = [i for i in range(len(header)) if i != li]

    raw_labels = []
    x = np.empty((len(rows), len(feat_cols)))
    mask = np.zeros(x.shape, dtype=bool)
    for r, row in enumerate(rows):
        line = r + 2
        if len(row) != len(header):
            raise ParseError(f"{path}: line {line} has {len(row)} fields, expected {len(header)}", row=r)
        if row[li] == missing_token:
            raise SchemaError(f"{path}: missing label on line {line}")
        raw_labels.append(row[li])
        for j, c in enumerate(feat_cols):
            cell = row[c]
            if cell == missing_token:
                mask[r, j] = True
                x[r, j] = np.nan
                continue
            v = _parse_float(cell)
            if v is None:
                raise ParseError(
                    f"{path}: line {line}, column {header[c]!r}: cannot parse {cell!r}",
                    row=r,
                    column=header[c],
                )
            x[r, j] = v

    distinct = sorted(set(raw_labels))
    if len(distinct) > 2:
        raise SchemaError(f"{path}: label column has {len(distinct)} distinct values, expected 2")
    if all(_parse_float(v) is not None for v in distinct):
        distinct.sort(key=float)
    y = np.array([distinct.index(v) for v in raw_labels], dtype=np.int8)

    names = [header[c] for c in feat_cols]
    if categorical is None:
        kinds = []
        for j in range(len(feat_cols)):
            obs = x[~mask[:, j], j]
            kinds.append(CATEGORICAL if obs.size and np.all(obs == np.round(obs)) else CONTINUOUS)
    else:
        unknown = set(categorical) - set(names)
        if unknown:
            raise SchemaError(f"{path}: unknown categorical columns {sorted(unknown)}")
        kinds = [CATEGORICAL if n in categorical else CONTINUOUS for n in names]
    return Dataset(x, y, mask if mask.any() else np.zeros_like(mask), tuple(kinds))


def save_csv(d, path, label_column="label", missing_token="", feature_names=None):
    """Write ``d`` in the layout :func:`load_csv` reads back."""
    names = feature_names or [f"x{j}" for j in range(d.n_features)]
    mask = d.mask()
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, label_column])
        for i in range(d.n_rows):
            cells = [missing_token if mask[i, j] else repr(float(d.features[i, j])) for j in range(d.n_features)]
            w.writerow([*cells, int(d.labels[i])])


def diff(a, b):
    """Rows at which two equally shaped datasets differ (any feature, mask or label)."""
    if a.shape != b.shape:
        raise IncompatibleDatasetsError(f"shapes differ: {a.shape} vs {b.shape}")
    ma, mb = a.mask(), b.mask()
    fa, fb = a.features, b.features
    cell = (ma != mb) | (~ma & ~mb & (fa != fb))
    rows = cell.any(axis=1) | (a.labels != b.labels)
    idx = tuple(int(i) for i in np.flatnonzero(rows))
    return NeighbourDiff(len(idx), idx)


def _round_half_up(v):
    return int(math.floor(v + 0.5))


def inject_missing(d, ratio, seed, max_tries=1000):
    """Mask ``round(ratio * n_rows * n_features)`` feature cells uniformly (MCAR).

    Draws are rejected and repeated while any column would be fully masked.
    """
    if not (0 < ratio < 1):
        raise ParameterError(f"ratio must lie in (0, 1), got {ratio!r}")
    if d.has_missing:
        raise ParameterError("dataset already has missing values")
    n, p = d.shape
    count = _round_half_up(ratio * n * p)
    if count > n * p - p:
        raise ParameterError(
            f"masking {count} of {n * p} cells would leave a column with no observed value"
        )
    rng = np.random.default_rng(seed)
    mask = np.zeros(n * p, dtype=bool)
    for _ in range(max_tries):
        mask[:] = False
        mask[rng.choice(n * p, size=count, replace=False)] = True
        m2 = mask.reshape(n, p)
        if not m2.all(axis=0).any():
            return d.replace(missing_mask=m2.copy())
    raise DegenerateDataError(f"could not place {count} missing cells in {max_tries} draws")


def split(d, train_fraction, seed):
    """Shuffle rows, then cut into ``(train, test)`` with ``round(f * n)`` train rows."""
    if not (0 < train_fraction < 1):
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction!r}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(d.n_rows)
    cut = _round_half_up(train_fraction * d.n_rows)
    return d.subset(order[:cut]), d.subset(order[cut:])


def concat(a, b):
    if a.n_features != b.n_features:
        raise IncompatibleDatasetsError("feature counts differ")
    mask = None
    if a.missing_mask is not None or b.missing_mask is not None:
        mask = np.vstack([a.mask(), b.mask()])
    return Dataset(
        np.vstack([a.features, b.features]),
        np.concatenate([a.labels, b.labels]),
        mask,
        a.feature_kinds,
    )
