from fractions import Fraction

import numpy as np
import pytest

from neighbourmult import theory as th
from neighbourmult.errors import ParameterError, UnsupportedInstanceError

from conftest import toy


def rashomon_oracle(hclass, d, eps):
    out = set()
    for h, f in enumerate(hclass.hypotheses):
        wrong = sum(f(x) != y for x, y in zip(d.features, d.labels))
        if Fraction(wrong, d.n_rows) <= Fraction(eps):
            out.add(h)
    return out


def test_threshold_example():
    hc = th.threshold_class([1, 2, 3, 4], thresholds=[0.5, 1.5, 2.5, 3.5])
    d = toy([[1], [2], [3], [4]], [0, 0, 1, 1])
    # hand-scored: "x > t" makes 2,1,0,1 mistakes, "x <= t" makes 2,3,4,3
    assert th.mistakes(hc, d).tolist() == [2, 1, 0, 1, 2, 3, 4, 3]
    got = th.enumerate_rashomon(hc, d, Fraction(1, 4))
    assert got == {1, 2, 3}
    assert [hc.params[h] for h in sorted(got)] == [("gt", 1.5), ("gt", 2.5), ("gt", 3.5)]


def test_enumeration_extremes():
    hc = th.threshold_class([1, 2, 3, 4])
    d = toy([[1], [2], [3], [4]], [0, 0, 1, 1])
    assert th.enumerate_rashomon(hc, d, 1) == frozenset(range(len(hc)))
    only = th.enumerate_rashomon(hc, d, 0)
    assert len(only) == 1 and hc.params[next(iter(only))][0] == "gt"


def test_default_thresholds_include_constants():
    hc = th.threshold_class([0, 1, 2])
    rows = {tuple(r) for r in hc.table.tolist()}
    assert (0, 0, 0) in rows and (1, 1, 1) in rows
    assert len(th.grid_class([(0,), (1,), (2,)])) == 8


def test_class_errors():
    with pytest.raises(ParameterError):
        th.grid_class([(i,) for i in range(13)])
    hc = th.threshold_class([0, 1])
    with pytest.raises(UnsupportedInstanceError):
        th.mistakes(hc, toy([[0.5]], [0]))


@pytest.mark.parametrize("seed", range(30))
@pytest.mark.parametrize("kind", th.CLASS_KINDS)
def test_enumeration_matches_oracle_and_is_monotone(seed, kind):
    rng = np.random.default_rng(seed)
    hc = th.random_class(rng, kind)
    d = th.random_dataset(rng, hc, 4)
    prev = frozenset()
    for eps in th.epsilon_grid(hc, d):
        cur = th.enumerate_rashomon(hc, d, eps)
        assert cur == rashomon_oracle(hc, d, eps)
        assert prev <= cur
        prev = cur


def hand_instance(eps=Fraction(1, 8)):
    hc = th.threshold_class(range(6))
    labels = [0, 0, 0, 0, 1, 1, 1, 1]
    # row 3 is a class-0 point sitting deep inside class 1 in d1, then moved home in d2
    d1 = toy([[0], [1], [2], [5], [3], [4], [5], [5]], labels)
    d2 = toy([[0], [1], [2], [0], [3], [4], [5], [5]], labels)
    return th.TheoremInstance(d1, d2, 3, eps, hc)


def test_hand_instance():
    inst = hand_instance()
    rep = th.verify_theorem(inst)
    assert rep.assumption1_hold and rep.assumption2_hold
    assert rep.subset_holds and rep.ovl_ordering_holds and not rep.vacuous
    assert rep.rashomon_sizes == (1, 3)
    assert rep.counterexample is None
    r1 = rashomon_oracle(inst.hclass, inst.d1, inst.epsilon)
    r2 = rashomon_oracle(inst.hclass, inst.d2, inst.epsilon)
    assert r1 < r2


def test_instance_must_differ_in_one_row():
    inst = hand_instance()
    with pytest.raises(ParameterError):
        th.TheoremInstance(inst.d1, inst.d1, 3, 0, inst.hclass)
    with pytest.raises(ParameterError):
        th.TheoremInstance(inst.d1, inst.d2, 2, 0, inst.hclass)


def test_assumption1_construction():
    # every admitted threshold mislabels d1's point and classifies d2's correctly
    inst = hand_instance(Fraction(1, 8))
    (s1, y1), (s2, y2) = inst.points
    union = th.enumerate_rashomon(inst.hclass, inst.d1, inst.epsilon) | th.enumerate_rashomon(
        inst.hclass, inst.d2, inst.epsilon
    )
    assert all(inst.hclass.table[h, s1] != y1 and inst.hclass.table[h, s2] == y2 for h in union)
    assert th.check_assumption1(inst)


def assumption1_oracle(inst):
    i = inst.differing_index
    union = rashomon_oracle(inst.hclass, inst.d1, inst.epsilon) | rashomon_oracle(inst.hclass, inst.d2, inst.epsilon)
    fs = inst.hclass.hypotheses
    return all(
        (fs[h](inst.d1.features[i]) != inst.d1.labels[i]) >= (fs[h](inst.d2.features[i]) != inst.d2.labels[i])
        for h in union
    )


def bayes_loss_oracle(d, x, y):
    same = sum(1 for xi, yi in zip(d.features.tolist(), d.labels) if xi == list(x) and yi == y)
    other = sum(1 for xi, yi in zip(d.features.tolist(), d.labels) if xi == list(x) and yi != y)
    if same == other:
        return Fraction(1, 2)
    return Fraction(int(same < other))


def assumption2_oracle(inst):
    i = inst.differing_index
    return bayes_loss_oracle(inst.d1, inst.d1.features[i], inst.d1.labels[i]) >= bayes_loss_oracle(
        inst.d2, inst.d2.features[i], inst.d2.labels[i]
    )


@pytest.mark.parametrize("seed", range(40))
@pytest.mark.parametrize("kind", th.CLASS_KINDS)
def test_assumptions_match_oracles(seed, kind):
    rng = np.random.default_rng(seed)
    for inst in th.random_instances(rng, kind, max_per_class=5):
        assert th.check_assumption1(inst) == assumption1_oracle(inst)
        assert th.check_assumption2(inst) == assumption2_oracle(inst)


@pytest.mark.parametrize("kind", th.CLASS_KINDS)
def test_exhaustive_neighbours_of_small_datasets(kind):
    rng = np.random.default_rng(3)
    for _ in range(5):
        hc = th.random_class(rng, kind, max_points=4)
        d = th.random_dataset(rng, hc, 3)
        for d2, i in th.all_pairs(hc, d):
            for eps in th.epsilon_grid(hc, d, d2):
                rep = th.verify_theorem(th.TheoremInstance(d, d2, i, eps, hc))
                if rep.assumptions_hold and not rep.vacuous:
                    assert rep.subset_holds and rep.ovl_ordering_holds


def test_report_dict_roundtrip_fields():
    rep = th.verify_theorem(hand_instance())
    out = rep.as_dict()
    assert out["assumptions_hold"] is True
    assert out["ovl1"] == str(rep.ovl1)
    assert out["rashomon_sizes"] == [1, 3]


def test_k_extension():
    rng = np.random.default_rng(5)
    chain = th.random_chain(rng, th.THRESHOLD, 3)
    assert chain is not None and len(chain) == 3
    rep = th.verify_k_extension(chain)
    assert len(rep.steps) == 3
    assert rep.assumptions_hold and rep.subset_holds


def test_k_extension_single_step_equals_theorem():
    inst = hand_instance()
    rep = th.verify_k_extension([inst])
    single = th.verify_theorem(inst)
    assert (rep.subset_holds, rep.rashomon_sizes, rep.ovl1, rep.ovl2) == (
        single.subset_holds,
        single.rashomon_sizes,
        single.ovl1,
        single.ovl2,
    )


def test_k_extension_reports_failed_step_without_asserting():
    hand = hand_instance()
    back = th.TheoremInstance(hand.d2, hand.d1, 3, hand.epsilon, hand.hclass)
    rep = th.verify_k_extension([hand, back])
    assert not rep.steps[1].assumption1_hold
    assert not rep.assumptions_hold
    assert rep.counterexample is None


def test_k_extension_rejects_broken_chains():
    a = hand_instance()
    with pytest.raises(ParameterError):
        th.verify_k_extension([a, a])
    with pytest.raises(ParameterError):
        th.verify_k_extension([a, th.TheoremInstance(a.d2, a.d1, 3, Fraction(1, 4), a.hclass)])
    with pytest.raises(ParameterError):
        th.verify_k_extension([])


def test_sweep_is_deterministic_and_clean():
    a = th.sweep(40, 1)
    b = th.sweep(40, 1)
    assert a.as_dict() == b.as_dict()
    assert a.subset_failures == a.ordering_failures == 0
    assert a.instances >= 40
