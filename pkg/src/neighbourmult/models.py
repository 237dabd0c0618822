"""Seeded binary classifiers: logistic regression, a one-hidden-layer MLP and
a random forest, all written against plain numpy.

Every stochastic choice made while fitting (initial weights, bootstrap
resample, feature subsampling) is drawn from the model's own seed, so
``train(family, d, seed)`` is a pure function.

Gradient-trained members run full-batch gradient descent on a seeded
bootstrap resample (expressed as per-row weights).  Without the resample
the convex logistic objective sends every initialization to the same
optimum and an ensemble has no spread to measure.
"""

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import DegenerateDataError, NumericError, ParameterError, ShapeError

LOGISTIC = "LogisticRegression"
FOREST = "RandomForest"
MLP = "MLP"
MODEL_KINDS = (LOGISTIC, FOREST, MLP)

FORMAT_NAME = "neighbourmult.model"
FORMAT_VERSION = 1

_DEFAULTS = {
    LOGISTIC: dict(learning_rate=0.1, epochs=500, l2=1e-4),
    MLP: dict(learning_rate=0.05, epochs=500, l2=1e-4, hidden=10),
    FOREST: dict(n_trees=50, max_depth=8, min_leaf=2),
}


@dataclass(frozen=True)
class ModelFamily:
    """A model class plus its fitting hyperparameters.

    Fields that do not apply to ``kind`` stay ``None``.  ``bootstrap``
    controls whether gradient-trained members fit a seeded bootstrap
    resample of the training rows (forests always bootstrap).
    ``max_depth=0`` grows forest trees until leaves are pure or too small.
    """

    kind: str = LOGISTIC
    learning_rate: float = None
    epochs: int = None
    l2: float = None
    hidden: int = None
    n_trees: int = None
    max_depth: int = None
    min_leaf: int = None
    max_features: int = None
    bootstrap: bool = True

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ParameterError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        for key, value in _DEFAULTS[self.kind].items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        self._check()

    def _check(self):
        for name in ("epochs", "hidden", "n_trees", "min_leaf", "max_depth", "max_features"):
            v = getattr(self, name)
            low = 0 if name == "max_depth" else 1
            if v is not None and (not isinstance(v, (int, np.integer)) or v < low):
                raise ParameterError(f"{name} must be an integer >= {low}, got {v!r}")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.l2 is not None and not self.l2 >= 0:
            raise ParameterError(f"l2 must be non-negative, got {self.l2!r}")

    @classmethod
    def logistic(cls, **kw):
        return cls(LOGISTIC, **kw)

    @classmethod
    def mlp(cls, **kw):
        return cls(MLP, **kw)

    @classmethod
    def forest(cls, **kw):
        return cls(FOREST, **kw)

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown model hyperparameters {sorted(unknown)}")
        return cls(**data)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class TrainedModel:
    """A fitted binary classifier.

    Subclasses provide :meth:`class1_score`, the model's score for class 1
    in [0, 1]; prediction and confidence derive from it.  A score of
    exactly 0.5 predicts class 0.
    """

    def __init__(self, family, train_seed, n_features):
        self.family = family
        self.train_seed = int(train_seed)
        self.n_features = int(n_features)

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = x.reshape(1, -1) if single else x
        if x2.ndim != 2 or x2.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got shape {x.shape}")
        if not np.all(np.isfinite(x2)):
            raise NumericError("features must be finite")
        return x2, single

    def class1_score(self, x):
        raise NotImplementedError

    def predict(self, x):
        x2, single = self._check_input(x)
        out = (self.class1_score(x2) > 0.5).astype(np.int8)
        return int(out[0]) if single else out

    def confidence(self, x):
        x2, single = self._check_input(x)
        s = self.class1_score(x2)
        out = np.maximum(s, 1.0 - s)
        return float(out[0]) if single else out

    def to_dict(self):
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "family": self.family.to_dict(),
            "train_seed": self.train_seed,
            "n_features": self.n_features,
            "params": self._params(),
        }

    def _params(self):
        raise NotImplementedError


class _Standardized(TrainedModel):
    def __init__(self, family, train_seed, center, scale):
        super().__init__(family, train_seed, len(center))
        self.center = np.asarray(center, dtype=float)
        self.scale = np.asarray(scale, dtype=float)

    def _standardize(self, x):
        return (x - self.center) / self.scale


class LogisticModel(_Standardized):
    def __init__(self, family, train_seed, center, scale, weights, bias):
        super().__init__(family, train_seed, center, scale)
        self.weights = np.asarray(weights, dtype=float)
        self.bias = float(bias)

    def logit(self, x):
        x2, _ = self._check_input(x)
        return self._standardize(x2) @ self.weights + self.bias

    def class1_score(self, x):
        return _sigmoid(self._standardize(x) @ self.weights + self.bias)

    def _params(self):
        return {
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }


class MLPModel(_Standardized):
    """ReLU hidden layer, two-way softmax output."""

    def __init__(self, family, train_seed, center, scale, w1, b1, w2, b2):
        super().__init__(family, train_seed, center, scale)
        self.w1 = np.asarray(w1, dtype=float)
        self.b1 = np.asarray(b1, dtype=float)
        self.w2 = np.asarray(w2, dtype=float)
        self.b2 = np.asarray(b2, dtype=float)

    def class_probabilities(self, x):
        x2, _ = self._check_input(x)
        h = np.maximum(self._standardize(x2) @ self.w1 + self.b1, 0.0)
        return _softmax(h @ self.w2 + self.b2)

    def class1_score(self, x):
        h = np.maximum(self._standardize(x) @ self.w1 + self.b1, 0.0)
        return _softmax(h @ self.w2 + self.b2)[:, 1]

    def _params(self):
        return {
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
        }


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class Tree:
    """Array-encoded binary tree; leaves have ``feature == -1`` and carry ``vote``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    vote: np.ndarray

    def predict(self, x):
        node = np.zeros(x.shape[0], dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = x[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] >= 0
        return self.vote[node]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "vote")}

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["feature"], dtype=int),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=int),
            np.asarray(d["right"], dtype=int),
            np.asarray(d["vote"], dtype=np.int8),
        )


class ForestModel(TrainedModel):
    """Hard-voting forest: the class-1 score is the fraction of trees voting 1."""

    def __init__(self, family, train_seed, n_features, trees):
        super().__init__(family, train_seed, n_features)
        self.trees = list(trees)

    def tree_votes(self, x):
        x2, _ = self._check_input(x)
        return np.stack([t.predict(x2) for t in self.trees])

    def class1_score(self, x):
        return np.mean([t.predict(x) for t in self.trees], axis=0)

    def _params(self):
        return {"trees": [t.to_dict() for t in self.trees]}


def model_from_dict(data):
    """Inverse of ``TrainedModel.to_dict``."""
    if data.get("format") != FORMAT_NAME:
        raise ParameterError(f"not a serialized model: format={data.get('format')!r}")
    if data.get("version") != FORMAT_VERSION:
        raise ParameterError(f"unsupported model format version {data.get('version')!r}")
    family = ModelFamily.from_dict(data["family"])
    p = data["params"]
    seed = data["train_seed"]
    if family.kind == LOGISTIC:
        return LogisticModel(family, seed, p["center"], p["scale"], p["weights"], p["bias"])
    if family.kind == MLP:
        return MLPModel(family, seed, p["center"], p["scale"], p["w1"], p["b1"], p["w2"], p["b2"])
    return ForestModel(family, seed, data["n_features"], [Tree.from_dict(t) for t in p["trees"]])


# ---------------------------------------------------------------------------
# losses and gradients


def logistic_loss_grad(w, b, x, y, sample_weight, l2):
    """Weighted log-loss plus ``l2/2 ||w||^2`` and its gradient.

    ``sample_weight`` has one entry per row and sums to 1.
    Returns ``(loss, grad_w, grad_b)``.
    """
    z = x @ w + b
    nll = np.logaddexp(0.0, z) - y * z
    loss = sample_weight @ nll + 0.5 * l2 * (w @ w)
    r = sample_weight * (_sigmoid(z) - y)
    return loss, r @ x + l2 * w, r.sum()


def mlp_loss_grad(params, x, y, sample_weight, l2):
    """Weighted cross-entropy of a ReLU/softmax network and its gradient.

    ``params`` is ``(w1 (d, h), b1 (h,), w2 (h, 2), b2 (2,))``; returns
    ``(loss, grads)`` with grads shaped like ``params``.
    """
    w1, b1, w2, b2 = params
    pre = x @ w1 + b1
    h = np.maximum(pre, 0.0)
    logits = h @ w2 + b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    onehot = np.stack([1 - y, y], axis=1).astype(float)
    nll = -(onehot * logp).sum(axis=1)
    loss = sample_weight @ nll + 0.5 * l2 * ((w1 * w1).sum() + (w2 * w2).sum())

    dlogits = (np.exp(logp) - onehot) * sample_weight[:, None]
    gw2 = h.T @ dlogits + l2 * w2
    gb2 = dlogits.sum(axis=0)
    dh = (dlogits @ w2.T) * (pre > 0)
    gw1 = x.T @ dh + l2 * w1
    gb1 = dh.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


# ---------------------------------------------------------------------------
# training


def _check_trainable(d):
    if d.has_missing:
        raise DegenerateDataError("training data has missing values; impute first")
    if d.n_rows == 0:
        raise DegenerateDataError("training data is empty")
    if not np.all(np.isfinite(d.features)):
        raise NumericError("training features must be finite")
    counts = d.class_counts()
    if counts.min() == 0:
        raise DegenerateDataError(f"training data has a single class (counts {counts.tolist()})")


def _standardization(x):
    center = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    return center, scale


def _sample_weight(rng, n, bootstrap):
    if not bootstrap:
        return np.full(n, 1.0 / n)
    return np.bincount(rng.integers(0, n, n), minlength=n) / n


def _train_logistic(family, x, y, seed):
    center, scale = _standardization(x)
    xs = (x - center) / scale
    n, d = xs.shape
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1.0 / math.sqrt(d), d)
    b = 0.0
    sw = _sample_weight(rng, n, family.bootstrap)
    yf = y.astype(float)
    lr, l2 = family.learning_rate, family.l2
    for _ in range(family.epochs):
        r = sw * (_sigmoid(xs @ w + b) - yf)
        w = w - lr * (r @ xs + l2 * w)
        b = b - lr * r.sum()
    return LogisticModel(family, seed, center, scale, w, b)


def _train_mlp(family, x, y, seed):
    center, scale = _standardization(x)
    xs = (x - center) / scale
    n, d = xs.shape
    hdim = family.hidden
    rng = np.random.default_rng(seed)
    params = [
        rng.normal(0.0, math.sqrt(2.0 / d), (d, hdim)),
        np.zeros(hdim),
        rng.normal(0.0, math.sqrt(2.0 / hdim), (hdim, 2)),
        np.zeros(2),
    ]
    sw = _sample_weight(rng, n, family.bootstrap)
    for _ in range(family.epochs):
        _, grads = mlp_loss_grad(params, xs, y, sw, family.l2)
        params = [p - family.learning_rate * g for p, g in zip(params, grads)]
    return MLPModel(family, seed, center, scale, *params)


def _best_split(xcol, y, min_leaf):
    """Best Gini split of one feature: ``(impurity_sum, threshold)`` or None."""
    order = np.argsort(xcol, kind="stable")
    xv = xcol[order]
    yv = y[order]
    n = len(xv)
    ones_left = np.cumsum(yv)[:-1]
    n_left = np.arange(1, n)
    valid = (xv[1:] > xv[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not valid.any():
        return None
    ones_total = yv.sum()
    n_right = n - n_left
    p_l = ones_left / n_left
    p_r = (ones_total - ones_left) / n_right
    # n_left * gini_left + n_right * gini_right
    cost = 2 * n_left * p_l * (1 - p_l) + 2 * n_right * p_r * (1 - p_r)
    cost = np.where(valid, cost, np.inf)
    i = int(np.argmin(cost))
    return cost[i], 0.5 * (xv[i] + xv[i + 1])


def _grow_tree(x, y, rng, max_depth, min_leaf, max_features):
    feature, threshold, left, right, vote = [], [], [], [], []

    def leaf(ys):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        vote.append(1 if 2 * ys.sum() > len(ys) else 0)
        return len(feature) - 1

    def grow(rows, depth):
        ys = y[rows]
        ones = ys.sum()
        if (
            ones == 0
            or ones == len(ys)
            or len(rows) < 2 * min_leaf
            or (max_depth and depth >= max_depth)
        ):
            return leaf(ys)
        parent_cost = 2 * len(ys) * (ones / len(ys)) * (1 - ones / len(ys))
        best = None
        for f in rng.choice(x.shape[1], size=max_features, replace=False):
            found = _best_split(x[rows, f], ys, min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(f), found[1])
        if best is None or best[0] >= parent_cost:
            return leaf(ys)
        _, f, thr = best
        node = leaf(ys)
        feature[node] = f
        threshold[node] = thr
        go_left = x[rows, f] <= thr
        left[node] = grow(rows[go_left], depth + 1)
        right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(len(y)), 0)
    return Tree(
        np.asarray(feature, dtype=int),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=int),
        np.asarray(right, dtype=int),
        np.asarray(vote, dtype=np.int8),
    )


def _train_forest(family, x, y, seed):
    rng = np.random.default_rng(seed)
    n, d = x.shape
    max_features = family.max_features or max(1, int(math.sqrt(d)))
    max_features = min(max_features, d)
    trees = []
    for _ in range(family.n_trees):
        rows = rng.integers(0, n, n)
        trees.append(_grow_tree(x[rows], y[rows], rng, family.max_depth, family.min_leaf, max_features))
    return ForestModel(family, seed, d, trees)


_TRAINERS = {LOGISTIC: _train_logistic, MLP: _train_mlp, FOREST: _train_forest}


def train_many(family, d, seeds):
    """Fit one model per seed on ``d``."""
    _check_trainable(d)
    x = np.asarray(d.features, dtype=float)
    y = np.asarray(d.labels, dtype=np.int64)
    fit = _TRAINERS[family.kind]
    return [fit(family, x, y, int(s)) for s in seeds]


def train(family, d, seed):
    return train_many(family, d, [seed])[0]


def predict(m, x):
    """Label in {0, 1} for a feature vector (or an array of labels for a matrix)."""
    return m.predict(x)


def confidence(m, x):
    """Score of the predicted class, in [0.5, 1]."""
    return m.confidence(x)


def zero_one_loss(m, d):
    if d.n_rows == 0:
        raise ParameterError("zero_one_loss needs a nonempty dataset")
    d.require_complete("zero_one_loss")
    return float(np.mean(m.predict(d.features) != d.labels))


def prediction_matrix(models, x):
    """Stack of predictions, shape (len(models), n_rows)."""
    return np.stack([m.predict(x) for m in models]) if models else np.empty((0, len(x)), np.int8)


def confidence_matrix(models, x):
    return np.stack([m.confidence(x) for m in models])
