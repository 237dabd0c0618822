"""Rashomon sets under a shared loss threshold, and the ambiguity metric."""

from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import EmptyRashomonSetError, MultiplicityError, ParameterError
from .seeding import member_seeds


@dataclass
class EnsemblePool:
    """Models trained on one dataset, with their training losses."""

    models: list
    train_losses: np.ndarray

    def __post_init__(self):
        self.train_losses = np.asarray(self.train_losses, dtype=float)
        if len(self.models) != len(self.train_losses):
            raise ParameterError("models and train_losses must have equal length")
        if self.train_losses.size and not (
            np.all(np.isfinite(self.train_losses))
            and self.train_losses.min() >= 0
            and self.train_losses.max() <= 1
        ):
            raise ParameterError("train losses must be finite and lie in [0, 1]")

    def __len__(self):
        return len(self.models)


@dataclass
class RashomonSet:
    members: list
    epsilon: float
    reference_train: str = ""
    member_losses: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.members:
            raise EmptyRashomonSetError("a Rashomon set needs at least one member")
        if self.epsilon < 0:
            raise ParameterError(f"epsilon must be non-negative, got {self.epsilon}")

    def __len__(self):
        return len(self.members)

    def summary(self):
        return {
            "epsilon": float(self.epsilon),
            "size": len(self.members),
            "reference_train": self.reference_train,
            "member_seeds": [m.train_seed for m in self.members],
            "member_train_losses": None if self.member_losses is None else self.member_losses.tolist(),
        }


def build_pool(family, train, count, master_seed, *keys, loss=models.zero_one_loss):
    """Train ``count`` models on ``train`` with seeds derived from ``master_seed``.

    ``keys`` further namespace the derived seeds (e.g. a setting id).
    ``loss`` scores each member on ``train``; 0-1 loss by default.
    """
    if count < 1:
        raise ParameterError(f"count must be at least 1, got {count}")
    pool = []
    for i, seed in enumerate(member_seeds(master_seed, count, *keys)):
        try:
            pool.append(models.train(family, train, seed))
        except MultiplicityError as exc:
            raise type(exc)(f"pool member {i}: {exc}") from exc
    return EnsemblePool(pool, [loss(m, train) for m in pool])


def select_epsilon(pools, min_members=50):
    """Smallest threshold admitting ``min_members`` models in every pool.

    Equals the maximum over pools of the ``min_members``-th smallest loss.
    """
    pools = list(pools)
    if not pools:
        raise ParameterError("select_epsilon needs at least one pool")
    if min_members < 1:
        raise ParameterError(f"min_members must be at least 1, got {min_members}")
    eps = []
    for i, p in enumerate(pools):
        if len(p) < min_members:
            raise ParameterError(f"pool {i} has {len(p)} models, fewer than min_members={min_members}")
        eps.append(np.sort(p.train_losses)[min_members - 1])
    return float(max(eps))


def filter_pool(pool, epsilon, reference_train=""):
    """Members of ``pool`` whose training loss is at most ``epsilon``."""
    keep = np.flatnonzero(pool.train_losses <= epsilon)
    if keep.size == 0:
        lo = pool.train_losses.min() if len(pool) else float("nan")
        raise EmptyRashomonSetError(f"no model has loss <= {epsilon} (smallest is {lo})")
    return RashomonSet(
        [pool.models[i] for i in keep],
        float(epsilon),
        reference_train,
        pool.train_losses[keep],
    )


def disagreement_mask(predictions):
    """Per column of a (models, rows) prediction matrix: do any two models disagree?"""
    p = np.asarray(predictions)
    return p.min(axis=0) != p.max(axis=0)


def _test_features(test):
    if test.n_rows == 0:
        raise ParameterError("test set is empty")
    test.require_complete("evaluation on the test set")
    return test.features


def ambiguity(rset, test):
    """Fraction of test rows on which some pair of members predicts differently."""
    x = _test_features(test)
    return float(disagreement_mask(models.prediction_matrix(rset.members, x)).mean())


def accuracy(rset, test):
    """Mean test accuracy over members."""
    x = _test_features(test)
    preds = models.prediction_matrix(rset.members, x)
    return float((preds == test.labels).mean(axis=1).mean())


def evaluate(rset, test):
    """``(accuracy, ambiguity)`` from one pass of predictions."""
    x = _test_features(test)
    preds = models.prediction_matrix(rset.members, x)
    acc = float((preds == test.labels).mean(axis=1).mean())
    return acc, float(disagreement_mask(preds).mean())


EPSILON_SCOPES = ("step", "run")


@dataclass(frozen=True)
class RashomonConfig:
    """How pools are built and thresholded inside an experiment.

    ``epsilon_scope`` picks whether the shared threshold is recomputed for
    every step of a run (``"step"``) or fixed once per run (``"run"``).
    """

    pool_size: int = 100
    min_members: int = 50
    epsilon_scope: str = "step"
    ovl_method: str = None
    ovl_bins: int = 64

    def __post_init__(self):
        if self.pool_size < 1 or self.min_members < 1:
            raise ParameterError("pool_size and min_members must be positive")
        if self.pool_size < self.min_members:
            raise ParameterError(
                f"pool_size ({self.pool_size}) must be at least min_members ({self.min_members})"
            )
        if self.epsilon_scope not in EPSILON_SCOPES:
            raise ParameterError(f"epsilon_scope must be one of {EPSILON_SCOPES}")
