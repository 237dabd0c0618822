"""Missing-value imputers and the multiplicity-aware imputers built on them.

Every imputer returns an :class:`ImputedDataset` whose observed cells are
bit-identical to the input and whose ``provenance`` names the method that
filled each formerly missing cell.
"""

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import dataset as ds
from . import models, overlap, rashomon
from .errors import DegenerateDataError, ParameterError
from .records import ResultRecord
from .seeding import derive_seed

MEAN = "Mean"
MEDIAN = "Median"
MODE = "Mode"
KNN = "KNN"
MICE = "MICE"
MULT_LOW = "MultLow"
MULT_HIGH = "MultHigh"
BASELINE_KINDS = (MEAN, MEDIAN, MODE, KNN, MICE)
KINDS = BASELINE_KINDS + (MULT_LOW, MULT_HIGH)

MICE_RIDGE = 1e-6


@dataclass(frozen=True)
class ImputationMethod:
    """An imputer and its settings.

    ``baselines`` lists the candidate imputers of a Mult* method; left as
    None it means the five baseline kinds with this method's settings.
    """

    kind: str
    knn_k: int = 5
    mice_iterations: int = 10
    seed: int = 0
    baselines: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown imputation kind {self.kind!r}; expected one of {KINDS}")
        if self.knn_k < 1:
            raise ParameterError(f"knn_k must be at least 1, got {self.knn_k}")
        if self.mice_iterations < 1:
            raise ParameterError(f"mice_iterations must be at least 1, got {self.mice_iterations}")
        if self.baselines is not None:
            object.__setattr__(self, "baselines", tuple(self.baselines))

    @property
    def name(self):
        return self.kind

    def candidate_methods(self):
        if self.baselines is not None:
            return self.baselines
        return tuple(
            ImputationMethod(k, self.knn_k, self.mice_iterations, self.seed) for k in BASELINE_KINDS
        )


@dataclass(frozen=True)
class ImputedDataset:
    """A completed dataset plus where each fill came from.

    ``provenance`` maps ``(row, column)`` of every formerly missing cell to
    a method name; ``notes`` holds free-form remarks such as kNN fallbacks.
    """

    data: object
    provenance: dict = field(default_factory=dict)
    notes: tuple = ()


def _check_columns(d):
    mask = d.mask()
    if d.n_rows == 0:
        raise DegenerateDataError("cannot impute an empty dataset")
    empty = np.flatnonzero(mask.all(axis=0))
    if empty.size:
        raise DegenerateDataError(f"columns {empty.tolist()} have no observed values")
    return mask


def _finish(d, filled, name, notes=()):
    mask = d.mask()
    rows, cols = np.nonzero(mask)
    prov = {(int(i), int(j)): name for i, j in zip(rows, cols)}
    out = np.where(mask, filled, d.features)
    return ImputedDataset(d.replace(features=out, missing_mask=None), prov, tuple(notes))


def _column_fill(d, stat, name):
    mask = _check_columns(d)
    filled = np.array(d.features, dtype=float)
    for j in range(d.n_features):
        miss = mask[:, j]
        if miss.any():
            filled[miss, j] = stat(d.features[~miss, j])
    return _finish(d, filled, name)


def _mode(values):
    vals, counts = np.unique(values, return_counts=True)
    return vals[np.argmax(counts)]  # unique sorts, so ties go to the smallest value


def impute_mean(d):
    return _column_fill(d, np.mean, MEAN)


def impute_median(d):
    return _column_fill(d, np.median, MEDIAN)


def impute_mode(d):
    return _column_fill(d, _mode, MODE)


def _observed_scale(d, mask):
    sd = np.array([np.std(d.features[~mask[:, j], j]) for j in range(d.n_features)])
    sd[~(sd > 0)] = 1.0
    return sd


def _scaled(d, mask):
    return np.where(mask, 0.0, d.features) / _observed_scale(d, mask), ~mask


def _row_distances(z, obs, i):
    shared = obs & obs[i]
    cnt = shared.sum(axis=1)
    sq = np.where(shared, (z - z[i]) ** 2, 0.0).sum(axis=1)
    return np.where(cnt > 0, sq / np.maximum(cnt, 1), np.inf)


def knn_distances(d, i):
    """Scaled mean-squared distance from row ``i`` to every row.

    Only features observed in both rows count; rows sharing none get ``inf``.
    """
    return _row_distances(*_scaled(d, d.mask()), i)


def impute_knn(d, k=5):
    """Fill each missing cell with the mean of its ``k`` nearest donors.

    Donors are rows observing that column, ranked by :func:`knn_distances`
    with ties going to the lower row index.
    """
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    mask = _check_columns(d)
    z, obs = _scaled(d, mask)
    filled = np.array(d.features, dtype=float)
    idx = np.arange(d.n_rows)
    notes = []
    for i in np.flatnonzero(mask.any(axis=1)):
        order = np.lexsort((idx, _row_distances(z, obs, i)))
        for j in np.flatnonzero(mask[i]):
            donors = order[obs[order, j]]
            if donors.size < k:
                notes.append(f"row {i} column {j}: only {donors.size} donors for k={k}")
            filled[i, j] = d.features[donors[:k], j].mean()
    return _finish(d, filled, KNN, notes)


def _ridge_fit(a, y, lam=MICE_RIDGE):
    return np.linalg.solve(a.T @ a + lam * np.eye(a.shape[1]), a.T @ y)


def impute_mice(d, iterations=10, seed=0):
    """Chained linear regressions, starting from column means.

    Each sweep visits columns in index order and refits that column on all
    others over its observed rows.  Deterministic; ``seed`` is unused.
    """
    if iterations < 1:
        raise ParameterError(f"iterations must be at least 1, got {iterations}")
    if d.n_features < 2:
        raise ParameterError("MICE needs at least two columns")
    mask = _check_columns(d)
    cur = np.array(impute_mean(d).data.features, dtype=float)
    ones = np.ones((d.n_rows, 1))
    cols = [j for j in range(d.n_features) if mask[:, j].any()]
    for _ in range(iterations):
        for j in cols:
            a = np.hstack([ones, np.delete(cur, j, axis=1)])
            miss = mask[:, j]
            beta = _ridge_fit(a[~miss], cur[~miss, j])
            cur[miss, j] = a[miss] @ beta
    return _finish(d, cur, MICE)


def impute(d, method, family=None):
    """Dispatch on ``method.kind``; Mult* kinds need ``family``."""
    kind = method.kind
    if kind == MEAN:
        return impute_mean(d)
    if kind == MEDIAN:
        return impute_median(d)
    if kind == MODE:
        return impute_mode(d)
    if kind == KNN:
        return impute_knn(d, method.knn_k)
    if kind == MICE:
        return impute_mice(d, method.mice_iterations, method.seed)
    if family is None:
        raise ParameterError(f"{kind} imputation needs a model family")
    pick = impute_multlow if kind == MULT_LOW else impute_multhigh
    return pick(d, list(method.candidate_methods()), family, method.seed)


def candidate_confidences(d, baselines, family, seed):
    """Confidence of the mean-imputed model on each baseline's version of each row.

    Returns ``(conf, candidates)`` where ``conf`` has shape
    ``(len(baselines), n_rows)`` and ``candidates`` holds the imputed datasets.
    """
    baselines = list(baselines)
    if not baselines:
        raise ParameterError("at least one baseline imputer is required")
    bad = [b.kind for b in baselines if b.kind not in BASELINE_KINDS]
    if bad:
        raise ParameterError(f"baselines must be plain imputers, got {bad}")
    scorer = models.train(family, impute_mean(d).data, derive_seed(seed, "scorer"))
    candidates = [impute(d, b) for b in baselines]
    conf = np.stack([scorer.confidence(c.data.features) for c in candidates])
    return conf, candidates


def _impute_mult(d, baselines, family, seed, highest, name):
    conf, candidates = candidate_confidences(d, baselines, family, seed)
    choice = np.argmax(conf, axis=0) if highest else np.argmin(conf, axis=0)
    feats = np.stack([c.data.features for c in candidates])
    out = feats[choice, np.arange(d.n_rows)]
    result = _finish(d, out, name)
    names = [b.name for b in baselines]
    prov = {cell: f"{name}:{names[choice[cell[0]]]}" for cell in result.provenance}
    notes = tuple(itertools.chain.from_iterable(c.notes for c in candidates))
    return ImputedDataset(result.data, prov, notes)


def impute_multlow(d, baselines, family, seed=0):
    """Per row with missing cells, adopt the baseline fill the scorer is least sure of."""
    return _impute_mult(d, baselines, family, seed, False, MULT_LOW)


def impute_multhigh(d, baselines, family, seed=0):
    """Per row with missing cells, adopt the baseline fill the scorer is most sure of."""
    return _impute_mult(d, baselines, family, seed, True, MULT_HIGH)


@dataclass
class ImputationRun:
    """Records of one ``(seed, r)`` cell plus the pairwise neighbour distances.

    ``pairwise_k[(a, b)]`` is ``dataset.diff(imputed[a], imputed[b]).k``.
    """

    records: list
    imputed: dict
    pairwise_k: dict


def run_imputation(train_missing, test, methods, family, rashomon_cfg=None, master_seed=0, r=None):
    """Impute with every method, then score pools under one shared threshold.

    Pool member seeds depend on ``(master_seed, r)`` only, so methods that
    produce the same data produce the same pool.
    """
    cfg = rashomon_cfg or rashomon.RashomonConfig()
    names = [m.name for m in methods]
    if not methods or len(set(names)) != len(names):
        raise ParameterError(f"methods must be nonempty and distinct, got {names}")
    if train_missing.missing_mask is None:
        raise ParameterError("train_missing must carry a missingness mask")
    test.require_complete("test set")

    imputed, pools, ovls, elapsed = {}, {}, {}, {}
    for m in methods:
        t0 = time.perf_counter()
        seeded = ImputationMethod(m.kind, m.knn_k, m.mice_iterations, derive_seed(master_seed, "impute", m.seed), m.baselines)
        imputed[m.name] = impute(train_missing, seeded, family)
        data = imputed[m.name].data
        pools[m.name] = rashomon.build_pool(family, data, cfg.pool_size, master_seed, "pool", r)
        ovls[m.name] = overlap.ovl_dataset(data, cfg.ovl_method, cfg.ovl_bins).value
        elapsed[m.name] = time.perf_counter() - t0

    eps = rashomon.select_epsilon(pools.values(), cfg.min_members)
    records = []
    for name in names:
        t0 = time.perf_counter()
        rset = rashomon.filter_pool(pools[name], eps, f"impute/{name}/r={r}")
        acc, amb = rashomon.evaluate(rset, test)
        records.append(
            ResultRecord(
                task="impute",
                seed=master_seed,
                algorithm=name,
                epsilon=eps,
                rashomon_size=len(rset),
                accuracy=acc,
                ambiguity=amb,
                ovl=ovls[name],
                r=r,
                runtime_seconds=elapsed[name] + time.perf_counter() - t0,
            )
        )
    pairwise = {
        (a, b): ds.diff(imputed[a].data, imputed[b].data).k for a, b in itertools.combinations(names, 2)
    }
    return ImputationRun(records, imputed, pairwise)
