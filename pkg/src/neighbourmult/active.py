"""Pool-based active learning with five acquisition strategies.

Every selector breaks score ties by ascending row index of the training
split, and returns row indices of that split in selection order.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import models, overlap, rashomon
from .errors import DegenerateDataError, ParameterError
from .records import ResultRecord
from .seeding import derive_seed, member_seeds

RANDOM = "Random"
CONFIDENCE = "Confidence"
COMMITTEE = "Committee"
MULT_LOW = "MultLow"
MULT_HIGH = "MultHigh"
STRATEGIES = (RANDOM, CONFIDENCE, COMMITTEE, MULT_LOW, MULT_HIGH)
_COMMITTEE_KINDS = (COMMITTEE, MULT_LOW, MULT_HIGH)


@dataclass(frozen=True)
class AcquisitionStrategy:
    kind: str
    committee_size: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ParameterError(f"unknown strategy {self.kind!r}; expected one of {STRATEGIES}")
        if self.kind in _COMMITTEE_KINDS and self.committee_size < 2:
            raise ParameterError(f"{self.kind} needs committee_size >= 2")

    @property
    def name(self):
        return self.kind


@dataclass(frozen=True)
class ActiveState:
    """Labeled rows of ``train`` (in acquisition order) at step ``step``.

    ``train`` holds the oracle labels; rows not in ``labeled_rows`` form the
    unlabeled pool and their labels are only read when revealed.
    """

    train: object
    labeled_rows: tuple
    step: int = 0

    @property
    def labeled(self):
        return self.train.subset(self.labeled_rows)

    @property
    def unlabeled_rows(self):
        taken = np.zeros(self.train.n_rows, dtype=bool)
        taken[list(self.labeled_rows)] = True
        return np.flatnonzero(~taken)

    @property
    def unlabeled_features(self):
        return self.train.features[self.unlabeled_rows]

    def reveal(self, rows):
        rows = [int(r) for r in rows]
        pool = set(self.unlabeled_rows.tolist())
        if len(set(rows)) != len(rows) or not set(rows) <= pool:
            raise ParameterError("revealed rows must be distinct members of the unlabeled pool")
        return ActiveState(self.train, self.labeled_rows + tuple(rows), self.step + 1)


def initial_state(train, n, seed, max_tries=100):
    """Sample ``n`` rows uniformly; redraw while the sample has a single class."""
    if not (1 <= n <= train.n_rows):
        raise ParameterError(f"initial size {n} must lie in [1, {train.n_rows}]")
    if train.class_counts().min() == 0:
        raise DegenerateDataError("training split has a single class")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        rows = rng.choice(train.n_rows, size=n, replace=False)
        if np.unique(train.labels[rows]).size == 2:
            return ActiveState(train, tuple(int(r) for r in rows), 0)
    raise DegenerateDataError(f"no two-class initial sample of size {n} in {max_tries} draws")


# ---------------------------------------------------------------------------
# score-level selectors; ``ids`` are the row indices the scores belong to


def _take(scores, q, ids, highest):
    scores = np.asarray(scores, dtype=float)
    ids = np.asarray(ids)
    if not (1 <= q <= len(ids)):
        raise ParameterError(f"query size {q} must lie in [1, {len(ids)}]")
    key = -scores if highest else scores
    order = np.lexsort((ids, key))
    return ids[order[:q]]


def select_lowest_confidence(conf, q, ids):
    return _take(conf, q, ids, highest=False)


def committee_disagreement(predictions):
    """Fraction of the committee voting with the minority label, per row."""
    ones = np.asarray(predictions, dtype=float).mean(axis=0)
    return np.minimum(ones, 1.0 - ones)


def select_committee(predictions, q, ids):
    return _take(committee_disagreement(predictions), q, ids, highest=True)


def select_multlow(conf_matrix, q, ids):
    """Rows whose highest confidence across the committee is lowest."""
    return _take(np.asarray(conf_matrix).max(axis=0), q, ids, highest=False)


def select_multhigh(conf_matrix, q, ids):
    """Rows whose lowest confidence across the committee is highest."""
    return _take(np.asarray(conf_matrix).min(axis=0), q, ids, highest=True)


# ---------------------------------------------------------------------------
# acquisition from a state


def _check_q(state, q):
    n_unlab = len(state.unlabeled_rows)
    if not (1 <= q <= n_unlab):
        raise ParameterError(f"query size {q} must lie in [1, {n_unlab}]")


def _committee(state, family, committee_size, seed):
    return models.train_many(family, state.labeled, member_seeds(seed, committee_size, "committee"))


def acquire_random(state, q, seed):
    _check_q(state, q)
    rng = np.random.default_rng(seed)
    return rng.choice(state.unlabeled_rows, size=q, replace=False)


def acquire_confidence(state, q, family, seed):
    _check_q(state, q)
    m = models.train(family, state.labeled, derive_seed(seed, "confidence"))
    return select_lowest_confidence(m.confidence(state.unlabeled_features), q, state.unlabeled_rows)


def acquire_committee(state, q, family, committee_size, seed):
    _check_q(state, q)
    com = _committee(state, family, committee_size, seed)
    preds = models.prediction_matrix(com, state.unlabeled_features)
    return select_committee(preds, q, state.unlabeled_rows)


def acquire_multlow(state, q, family, committee_size, seed):
    _check_q(state, q)
    com = _committee(state, family, committee_size, seed)
    return select_multlow(models.confidence_matrix(com, state.unlabeled_features), q, state.unlabeled_rows)


def acquire_multhigh(state, q, family, committee_size, seed):
    _check_q(state, q)
    com = _committee(state, family, committee_size, seed)
    return select_multhigh(models.confidence_matrix(com, state.unlabeled_features), q, state.unlabeled_rows)


def acquire(state, strategy, q, family, seed):
    kind = strategy.kind
    if kind == RANDOM:
        return acquire_random(state, q, seed)
    if kind == CONFIDENCE:
        return acquire_confidence(state, q, family, seed)
    k = strategy.committee_size
    if kind == COMMITTEE:
        return acquire_committee(state, q, family, k, seed)
    if kind == MULT_LOW:
        return acquire_multlow(state, q, family, k, seed)
    return acquire_multhigh(state, q, family, k, seed)


def trajectory(train, strategy, n, q, T, family, master_seed):
    """States ``D^0 .. D^T`` of one strategy; ``D^0`` depends only on ``(master_seed, n)``."""
    if q < 1 or T < 0:
        raise ParameterError("need q >= 1 and T >= 0")
    if n + T * q > train.n_rows:
        raise ParameterError(f"n + T*q = {n + T * q} exceeds the {train.n_rows} training rows")
    state = initial_state(train, n, derive_seed(master_seed, "initial", n))
    states = [state]
    for t in range(1, T + 1):
        seed = derive_seed(master_seed, "acquire", n, t, strategy.seed)
        state = state.reveal(acquire(state, strategy, q, family, seed))
        states.append(state)
    return states


def run_active(train, test, strategies, n, q, T, family, rashomon_cfg=None, master_seed=0):
    """Run every strategy from a shared ``D^0`` and score each step.

    At each step the pools of all strategies share one threshold (chosen by
    :func:`rashomon.select_epsilon`), so pass every strategy of a setting
    together.  Pool member seeds depend on ``(master_seed, n, t)`` but not
    on the strategy.  Returns one record per strategy per step ``0..T``.
    """
    cfg = rashomon_cfg or rashomon.RashomonConfig()
    if isinstance(strategies, AcquisitionStrategy):
        strategies = [strategies]
    names = [s.name for s in strategies]
    if len(set(names)) != len(names):
        raise ParameterError(f"duplicate strategies in {names}")
    test.require_complete("test set")

    paths = {}
    for s in strategies:
        t0 = time.perf_counter()
        paths[s.name] = (trajectory(train, s, n, q, T, family, master_seed), time.perf_counter() - t0)

    cells = {}
    cache = {}
    for t in range(T + 1):
        for s in strategies:
            state = paths[s.name][0][t]
            t0 = time.perf_counter()
            key = (t, state.labeled_rows)
            if key not in cache:
                labeled = state.labeled
                pool = rashomon.build_pool(family, labeled, cfg.pool_size, master_seed, "pool", n, t)
                ovl = overlap.ovl_dataset(labeled, cfg.ovl_method, cfg.ovl_bins).value
                cache[key] = (pool, ovl)
            cells[t, s.name] = (*cache[key], time.perf_counter() - t0)

    eps = {}
    if cfg.epsilon_scope == "run":
        shared = rashomon.select_epsilon([c[0] for c in cells.values()], cfg.min_members)
        eps = {t: shared for t in range(T + 1)}
    else:
        for t in range(T + 1):
            eps[t] = rashomon.select_epsilon([cells[t, s.name][0] for s in strategies], cfg.min_members)

    records = []
    for t in range(T + 1):
        for s in strategies:
            pool, ovl, elapsed = cells[t, s.name]
            t0 = time.perf_counter()
            rset = rashomon.filter_pool(pool, eps[t], f"active/{s.name}/n={n}/t={t}")
            acc, amb = rashomon.evaluate(rset, test)
            records.append(
                ResultRecord(
                    task="active",
                    seed=master_seed,
                    algorithm=s.name,
                    epsilon=eps[t],
                    rashomon_size=len(rset),
                    accuracy=acc,
                    ambiguity=amb,
                    ovl=ovl,
                    n=n,
                    t=t,
                    runtime_seconds=elapsed + time.perf_counter() - t0 + paths[s.name][1] / (T + 1),
                )
            )
    return records
