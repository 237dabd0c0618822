import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binomtest

from neighbourmult import dataset as ds, imputation as im, models
from neighbourmult.errors import DegenerateDataError, ParameterError
from neighbourmult.seeding import derive_seed

from conftest import toy

NAN = np.nan


def with_missing(features, labels=None):
    x = np.asarray(features, dtype=float)
    mask = np.isnan(x)
    labels = [i % 2 for i in range(len(x))] if labels is None else labels
    return toy(np.where(mask, 0.0, x), labels, mask)


@pytest.mark.parametrize(
    "fn, column, fill",
    [
        (im.impute_mean, [1, 2, 3, NAN], 2.0),
        (im.impute_median, [1, 2, 9, NAN], 2.0),
        (im.impute_mode, [1, 1, 2, NAN], 1.0),
        (im.impute_mode, [3, 1, 3, 1, NAN], 1.0),
    ],
)
def test_column_fill_examples(fn, column, fill):
    out = fn(with_missing(np.array(column)[:, None]))
    assert out.data.features[-1, 0] == fill
    assert not out.data.has_missing
    assert set(out.provenance) == {(len(column) - 1, 0)}


def test_fully_missing_column():
    with pytest.raises(DegenerateDataError):
        with_missing([[1.0, NAN], [2.0, NAN]])


KNN_ROWS = [[0, 10], [1, 20], [2, 30], [4, 40], [7, 50], [1.5, NAN]]


@pytest.mark.parametrize(
    "k, fill",
    [
        # distances from 1.5 along column 0: rows 1,2 at .5, row 0 at 1.5, row 3 at 2.5, row 4 at 5.5
        (1, 20.0),
        (2, 25.0),
        (3, 20.0),
        (4, 25.0),
        (5, 30.0),
    ],
)
def test_knn_hand_table(k, fill):
    out = im.impute_knn(with_missing(KNN_ROWS), k)
    assert out.data.features[5, 1] == pytest.approx(fill, abs=1e-6)
    assert out.notes == ()


def test_knn_too_few_donors_uses_all():
    out = im.impute_knn(with_missing(KNN_ROWS), 8)
    assert out.data.features[5, 1] == pytest.approx(30.0)
    assert "only 5 donors" in out.notes[0]


def test_knn_identical_rows():
    out = im.impute_knn(with_missing([[3, 4], [3, 4], [3, 4], [3, NAN]]), 2)
    assert out.data.features[3, 1] == 4.0


def knn_distance_oracle(x, mask, i, j):
    sd = []
    for c in range(x.shape[1]):
        vals = [x[r, c] for r in range(len(x)) if not mask[r, c]]
        s = float(np.std(vals))
        sd.append(s if s > 0 else 1.0)
    shared = [c for c in range(x.shape[1]) if not mask[i, c] and not mask[j, c]]
    if not shared:
        return np.inf
    return sum(((x[i, c] - x[j, c]) / sd[c]) ** 2 for c in shared) / len(shared)


@pytest.mark.parametrize("seed", range(20))
def test_knn_distances_match_oracle(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 5, (8, 3)).astype(float)
    mask = rng.random((8, 3)) < 0.25
    mask[0] = False
    d = toy(x, [0, 1] * 4, mask)
    for i in range(8):
        got = im.knn_distances(d, i)
        want = [knn_distance_oracle(x, mask, i, j) for j in range(8)]
        np.testing.assert_allclose(got, want, rtol=1e-12)


def test_mice_recovers_linear_relation():
    x1 = np.arange(1.0, 11.0)
    x2 = 2 * x1
    x2[6] = NAN
    for it in (1, 10):
        out = im.impute_mice(with_missing(np.column_stack([x1, x2])), iterations=it)
        assert out.data.features[6, 1] == pytest.approx(14.0, abs=1e-6)


def test_mice_uncorrelated_columns_give_means():
    # x2 is exactly orthogonal to x1 around its mean, so the fitted slope is zero
    x1 = np.array([-3.0, -1.0, 1.0, 3.0, 0.0])
    x2 = np.array([1.0, -1.0, -1.0, 1.0, NAN])
    for it in (1, 10):
        out = im.impute_mice(with_missing(np.column_stack([x1, x2])), iterations=it)
        assert out.data.features[4, 1] == pytest.approx(0.0, abs=1e-6)


def test_mice_errors():
    with pytest.raises(ParameterError):
        im.impute_mice(with_missing([[1.0], [NAN], [2.0]]))
    with pytest.raises(ParameterError):
        im.impute_mice(with_missing([[1.0, 2.0], [NAN, 1.0]]), iterations=0)


@pytest.mark.parametrize("kind", im.BASELINE_KINDS)
def test_no_missing_is_noop(kind, blobs):
    out = im.impute(blobs, im.ImputationMethod(kind))
    np.testing.assert_array_equal(out.data.features, blobs.features)
    assert out.provenance == {}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(im.BASELINE_KINDS))
def test_observed_cells_unchanged_and_idempotent(seed, kind):
    rng = np.random.default_rng(seed)
    d = ds.inject_missing(toy(rng.normal(size=(15, 3)), [0, 1] * 7 + [0]), 0.2, seed)
    out = im.impute(d, im.ImputationMethod(kind, knn_k=3))
    obs = ~d.missing_mask
    np.testing.assert_array_equal(out.data.features[obs], d.features[obs])
    assert np.isfinite(out.data.features).all()
    assert set(out.provenance) == {tuple(map(int, c)) for c in np.argwhere(d.missing_mask)}
    again = im.impute(out.data, im.ImputationMethod(kind, knn_k=3))
    np.testing.assert_array_equal(again.data.features, out.data.features)


def test_mice_beats_mean_on_correlated_gaussians():
    wins = 0
    for seed in range(20):
        spec = ds.SyntheticSpec(40, [0.0] * 3, [0.5] * 3, correlation=0.8, seed=seed)
        full = ds.generate_gaussian(spec)
        d = ds.inject_missing(full, 0.15, seed)
        m = d.missing_mask
        err = {
            name: np.mean((fn(d).data.features[m] - full.features[m]) ** 2)
            for name, fn in (("mean", im.impute_mean), ("mice", lambda x: im.impute_mice(x, 20)))
        }
        wins += err["mice"] < err["mean"]
    assert binomtest(wins, 20, 0.5, alternative="greater").pvalue < 0.05


# --- multiplicity-aware imputation


def brute_mult(d, baselines, family, seed, highest):
    # independent re-implementation of the per-row candidate rule
    scorer = models.train(family, im.impute_mean(d).data, derive_seed(seed, "scorer"))
    cands = [im.impute(d, b).data.features for b in baselines]
    out = np.array(d.features, dtype=float)
    for i in range(d.n_rows):
        if not d.missing_mask[i].any():
            continue
        best, best_c = None, None
        for c in cands:
            conf = float(scorer.confidence(c[i : i + 1])[0])
            if best is None or (conf > best_c if highest else conf < best_c):
                best, best_c = c[i], conf
        out[i] = best
    return out


@pytest.mark.parametrize("seed", range(100))
def test_mult_imputation_matches_brute_force(seed, small_family):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 20))
    x = rng.integers(0, 4, (n, 3)).astype(float) + rng.normal(scale=0.1, size=(n, 3))
    d = ds.inject_missing(toy(x, rng.integers(0, 2, n)), 0.2, seed)
    baselines = [im.ImputationMethod(k, knn_k=2) for k in rng.permutation(im.BASELINE_KINDS)[: rng.integers(1, 6)]]
    for fn, high in ((im.impute_multlow, False), (im.impute_multhigh, True)):
        got = fn(d, baselines, small_family, seed).data.features
        np.testing.assert_array_equal(got, brute_mult(d, baselines, small_family, seed, high))


def test_mult_picks_by_confidence(monkeypatch, small_family):
    d = with_missing([[1.0, NAN], [2.0, 3.0], [3.0, 5.0]])
    fills = [toy([[1.0, 7.0], [2.0, 3.0], [3.0, 5.0]], [0, 1, 0]), toy([[1.0, 9.0], [2.0, 3.0], [3.0, 5.0]], [0, 1, 0])]
    conf = np.array([[0.9, 0.7, 0.7], [0.6, 0.7, 0.7]])
    cands = [im.ImputedDataset(f, {}, ()) for f in fills]
    monkeypatch.setattr(im, "candidate_confidences", lambda *a: (conf, cands))
    base = [im.ImputationMethod(im.MEAN), im.ImputationMethod(im.MEDIAN)]
    low = im.impute_multlow(d, base, small_family)
    high = im.impute_multhigh(d, base, small_family)
    assert low.data.features[0, 1] == 9.0 and low.provenance[0, 1] == "MultLow:Median"
    assert high.data.features[0, 1] == 7.0 and high.provenance[0, 1] == "MultHigh:Mean"


def test_mult_unanimous_and_single_baseline(small_family):
    d = with_missing([[1, 2], [2, NAN], [3, 6], [4, 8], [5, NAN], [6, 12]], [0, 0, 0, 1, 1, 1])
    mean = im.impute_mean(d).data.features
    for fn in (im.impute_multlow, im.impute_multhigh):
        same = fn(d, [im.ImputationMethod(im.MEAN)] * 3, small_family).data.features
        np.testing.assert_array_equal(same, mean)
        mice = fn(d, [im.ImputationMethod(im.MICE)], small_family).data.features
        np.testing.assert_array_equal(mice, im.impute_mice(d).data.features)


def test_mult_rejects_nested_baselines(small_family):
    d = with_missing([[1, 2], [2, NAN], [3, 6], [4, 8]])
    with pytest.raises(ParameterError):
        im.impute_multlow(d, [im.ImputationMethod(im.MULT_HIGH)], small_family)
    with pytest.raises(ParameterError):
        im.impute_multlow(d, [], small_family)


def test_run_imputation(blobs, small_family):
    from neighbourmult.rashomon import RashomonConfig

    d = ds.inject_missing(blobs, 0.1, 3)
    methods = [im.ImputationMethod(k) for k in (im.MEAN, im.MEDIAN, im.MULT_LOW)]
    cfg = RashomonConfig(pool_size=6, min_members=3)
    run = im.run_imputation(d, blobs, methods, small_family, cfg, 2, 0.1)
    assert [r.algorithm for r in run.records] == ["Mean", "Median", "MultLow"]
    assert len({r.epsilon for r in run.records}) == 1
    missing_rows = int(d.missing_mask.any(axis=1).sum())
    assert all(0 <= k <= missing_rows for k in run.pairwise_k.values())
    again = im.run_imputation(d, blobs, methods, small_family, cfg, 2, 0.1)
    assert [r.as_row() for r in run.records] == [r.as_row() for r in again.records]


def test_run_imputation_identical_methods_agree(blobs, small_family):
    from neighbourmult.rashomon import RashomonConfig

    d = ds.inject_missing(blobs, 0.1, 3)
    methods = [im.ImputationMethod(im.MEAN), im.ImputationMethod(im.MULT_LOW, baselines=(im.ImputationMethod(im.MEAN),))]
    run = im.run_imputation(d, blobs, methods, small_family, RashomonConfig(4, 2), 0, 0.1)
    assert run.pairwise_k == {("Mean", "MultLow"): 0}
    a, b = run.records
    assert (a.accuracy, a.ambiguity, a.ovl) == (b.accuracy, b.ambiguity, b.ovl)


def test_run_imputation_validation(blobs, small_family):
    with pytest.raises(ParameterError):
        im.run_imputation(blobs, blobs, [im.ImputationMethod(im.MEAN)], small_family)
    d = ds.inject_missing(blobs, 0.1, 3)
    with pytest.raises(ParameterError):
        im.run_imputation(d, blobs, [im.ImputationMethod(im.MEAN)] * 2, small_family)
