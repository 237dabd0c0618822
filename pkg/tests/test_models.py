import json

import numpy as np
import pytest
from scipy.stats import norm

from neighbourmult import dataset as ds
from neighbourmult import models
from neighbourmult.errors import DegenerateDataError, NumericError, ParameterError, ShapeError

from conftest import toy

FAMILIES = [
    models.ModelFamily.logistic(epochs=80),
    models.ModelFamily.mlp(epochs=80),
    models.ModelFamily.forest(n_trees=7),
]


def _fd_check(f, theta, eps=1e-6):
    """Worst relative error between central differences and the analytic gradient."""
    _, g = f(theta)
    num = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = eps
        num[i] = (f(theta + e)[0] - f(theta - e)[0]) / (2 * eps)
    return np.max(np.abs(num - g)) / max(1e-8, np.max(np.abs(num)) + np.max(np.abs(g)))


@pytest.mark.parametrize("seed", range(50))
def test_logistic_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, d = rng.integers(3, 12), rng.integers(1, 5)
    x, y = rng.normal(size=(n, d)), rng.integers(0, 2, n)
    sw = rng.dirichlet(np.ones(n))
    l2 = rng.uniform(0, 0.1)

    def f(theta):
        loss, gw, gb = models.logistic_loss_grad(theta[:-1], theta[-1], x, y, sw, l2)
        return loss, np.r_[gw, gb]

    assert _fd_check(f, rng.normal(size=d + 1)) < 1e-5


@pytest.mark.parametrize("seed", range(50))
def test_mlp_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(1000 + seed)
    n, d, h = rng.integers(3, 10), rng.integers(1, 4), rng.integers(2, 6)
    x, y = rng.normal(size=(n, d)), rng.integers(0, 2, n)
    sw = rng.dirichlet(np.ones(n))
    shapes = [(d, h), (h,), (h, 2), (2,)]
    sizes = [int(np.prod(s)) for s in shapes]

    def unpack(theta):
        parts = np.split(theta, np.cumsum(sizes)[:-1])
        return [p.reshape(s) for p, s in zip(parts, shapes)]

    def f(theta):
        loss, grads = models.mlp_loss_grad(unpack(theta), x, y, sw, 0.01)
        return loss, np.concatenate([g.ravel() for g in grads])

    theta = rng.normal(size=sum(sizes))
    # keep pre-activations away from the ReLU kink
    w1, b1, _, _ = unpack(theta)
    pre = x @ w1 + b1
    if np.min(np.abs(pre)) < 1e-3:
        theta[d * h : d * h + h] += 0.01
    assert _fd_check(f, theta) < 1e-5


def test_separable_logistic_is_perfect():
    x = np.r_[np.full(50, -1.0), np.full(50, 1.0)]
    d = toy(x[:, None], np.r_[np.zeros(50), np.ones(50)].astype(int))
    m = models.train(models.ModelFamily.logistic(), d, 0)
    assert models.zero_one_loss(m, d) == 0.0
    assert m.predict(np.array([25.0])) == 1


def test_logistic_near_bayes_rate():
    spec = ds.SyntheticSpec(5000, [-1.0], [1.0], seed=3)
    tr, te = ds.split(ds.generate_gaussian(spec), 0.5, 1)
    m = models.train(models.ModelFamily.logistic(), tr, 0)
    bayes = norm.cdf(1.0)  # threshold at 0 between N(-1,1) and N(1,1)
    assert abs((1 - models.zero_one_loss(m, te)) - bayes) < 0.03


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.kind)
def test_training_is_deterministic(family, blobs):
    a = models.train(family, blobs, 5)
    b = models.train(family, blobs, 5)
    x = np.random.default_rng(0).normal(size=(40, 2))
    assert np.array_equal(a.class1_score(x), b.class1_score(x))


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.kind)
def test_confidence_is_score_of_predicted_class(family, blobs):
    m = models.train(family, blobs, 1)
    x = np.random.default_rng(1).normal(scale=3, size=(200, 2))
    s, p, c = m.class1_score(x), m.predict(x), m.confidence(x)
    assert np.all(c >= 0.5) and np.all(c <= 1.0)
    assert np.array_equal(p, (s > 0.5).astype(p.dtype))
    assert np.allclose(c, np.where(p == 1, s, 1 - s))


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.kind)
def test_serialization_round_trip(family, blobs):
    m = models.train(family, blobs, 2)
    back = models.model_from_dict(json.loads(json.dumps(m.to_dict())))
    np.testing.assert_array_equal(back.class1_score(blobs.features), m.class1_score(blobs.features))


def test_zero_weights_tie_goes_to_zero():
    fam = models.ModelFamily.logistic()
    m = models.LogisticModel(fam, 0, [0.0], [1.0], [0.0], 0.0)
    assert m.predict(np.array([3.0])) == 0
    assert m.confidence(np.array([3.0])) == 0.5


def test_forest_confidence_is_vote_fraction():
    leaf1 = models.Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([1], np.int8))
    leaf0 = models.Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([0], np.int8))
    m = models.ForestModel(models.ModelFamily.forest(), 0, 1, [leaf1] * 80 + [leaf0] * 20)
    assert m.predict(np.array([0.0])) == 1
    assert m.confidence(np.array([0.0])) == pytest.approx(0.8)


def test_single_tree_forest_matches_its_tree(blobs):
    fam = models.ModelFamily.forest(n_trees=1, max_depth=0)
    m = models.train(fam, blobs, 4)
    np.testing.assert_array_equal(m.predict(blobs.features), m.trees[0].predict(blobs.features))


def test_loss_extremes(blobs):
    m = models.train(models.ModelFamily.logistic(epochs=50), blobs, 0)
    p = m.predict(blobs.features)
    right = blobs.replace(labels=p)
    wrong = blobs.replace(labels=1 - p)
    assert models.zero_one_loss(m, right) == 0.0
    assert models.zero_one_loss(m, wrong) == 1.0


def test_bootstrap_members_differ(blobs):
    fam = models.ModelFamily.logistic(epochs=50)
    a, b = models.train_many(fam, blobs, [1, 2])
    assert not np.array_equal(a.weights, b.weights)


def test_single_class_is_degenerate():
    d = toy([[0.0], [1.0]], [1, 1])
    with pytest.raises(DegenerateDataError):
        models.train(models.ModelFamily.logistic(), d, 0)


def test_non_finite_features():
    d = toy([[0.0], [np.inf]], [0, 1])
    with pytest.raises(NumericError):
        models.train(models.ModelFamily.logistic(), d, 0)


def test_shape_mismatch(blobs):
    m = models.train(models.ModelFamily.logistic(epochs=5), blobs, 0)
    with pytest.raises(ShapeError):
        m.predict(np.zeros(3))


def test_empty_dataset_loss(blobs):
    m = models.train(models.ModelFamily.logistic(epochs=5), blobs, 0)
    with pytest.raises(ParameterError):
        models.zero_one_loss(m, blobs.subset([]))


@pytest.mark.parametrize("kw", [{"epochs": 0}, {"learning_rate": -1.0}, {"l2": -0.5}])
def test_bad_hyperparameters(kw):
    with pytest.raises(ParameterError):
        models.ModelFamily.logistic(**kw)


def test_mlp_default_width():
    assert models.ModelFamily.mlp().hidden == 10
