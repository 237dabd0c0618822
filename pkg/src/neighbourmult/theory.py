"""Exhaustive checks of the neighbouring-datasets theorem on finite instances.

Hypotheses are rows of a 0/1 table over a finite support, so Rashomon sets
are enumerated exactly and every loss is a ``Fraction``.  The Bayes
classifier of a dataset is its empirical majority vote per support point;
at a count tie its per-point loss is the expected 1/2.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import dataset as ds
from . import overlap
from .errors import ParameterError, UnsupportedInstanceError

THRESHOLD = "Threshold1D"
GRID = "GridLabeling"
CLASS_KINDS = (THRESHOLD, GRID)
MAX_GRID_POINTS = 12


@dataclass(frozen=True)
class FiniteHypothesisClass:
    """``table[h, s]`` is the label hypothesis ``h`` gives support point ``s``."""

    kind: str
    support: tuple
    table: np.ndarray
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in CLASS_KINDS:
            raise ParameterError(f"unknown class kind {self.kind!r}")
        support = tuple(tuple(float(v) for v in p) for p in self.support)
        table = np.asarray(self.table, dtype=np.int8)
        if table.ndim != 2 or table.shape[1] != len(support) or table.shape[0] == 0:
            raise ParameterError("table must be (hypotheses, support points) and nonempty")
        if len(set(support)) != len(support):
            raise ParameterError("support points must be distinct")
        table.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(support)})

    def __len__(self):
        return self.table.shape[0]

    def locate(self, features):
        """Support index of every row of ``features``."""
        x = np.asarray(features, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        out = np.empty(len(x), dtype=int)
        for i, row in enumerate(x.tolist()):
            key = tuple(row)
            if key not in self._index:
                raise UnsupportedInstanceError(f"row {i} value {key} is not a support point")
            out[i] = self._index[key]
        return out

    def hypothesis(self, h):
        """Hypothesis ``h`` as a function of one feature vector."""
        labels = self.table[h]

        def f(x):
            return int(labels[self.locate([np.atleast_1d(x)])[0]])

        return f

    @property
    def hypotheses(self):
        return [self.hypothesis(h) for h in range(len(self))]


def threshold_class(values, thresholds=None):
    """1-D thresholds in both orientations over the sorted support ``values``.

    Default thresholds sit below, between and above the support points, so
    both constant classifiers are included.
    """
    v = np.unique(np.asarray(values, dtype=float))
    if thresholds is None:
        thresholds = np.concatenate([[v[0] - 0.5], (v[:-1] + v[1:]) / 2, [v[-1] + 0.5]])
    thresholds = np.asarray(thresholds, dtype=float)
    rows, params = [], []
    for orient in ("gt", "le"):
        for t in thresholds:
            above = (v > t).astype(np.int8)
            rows.append(above if orient == "gt" else 1 - above)
            params.append((orient, float(t)))
    return FiniteHypothesisClass(THRESHOLD, [(x,) for x in v], np.array(rows), tuple(params))


def grid_class(points):
    """Every labeling of at most twelve support points."""
    points = [tuple(np.atleast_1d(p)) for p in points]
    m = len(points)
    if not (1 <= m <= MAX_GRID_POINTS):
        raise ParameterError(f"grid classes take 1..{MAX_GRID_POINTS} points, got {m}")
    codes = np.arange(2**m)
    table = (codes[:, None] >> np.arange(m)[None, :]) & 1
    return FiniteHypothesisClass(GRID, points, table, tuple(int(c) for c in codes))


# ---------------------------------------------------------------------------
# losses and Rashomon sets


def mistakes(hclass, d):
    """Number of training mistakes of every hypothesis on ``d``."""
    s = hclass.locate(d.features)
    return (hclass.table[:, s] != d.labels[None, :]).sum(axis=1)


def losses(hclass, d):
    return [Fraction(int(m), d.n_rows) for m in mistakes(hclass, d)]


def enumerate_rashomon(hclass, d, epsilon):
    """Indices of hypotheses whose 0-1 loss on ``d`` is at most ``epsilon``."""
    if d.n_rows == 0:
        raise ParameterError("enumerate_rashomon needs a nonempty dataset")
    eps = Fraction(epsilon)
    return frozenset(i for i, m in enumerate(mistakes(hclass, d)) if Fraction(int(m), d.n_rows) <= eps)


def epsilon_grid(hclass, *datasets):
    """Distinct loss values attained on the given datasets, ascending."""
    return sorted({x for d in datasets for x in losses(hclass, d)})


@dataclass(frozen=True)
class TheoremInstance:
    """Two datasets differing in exactly one row, a threshold and a class."""

    d1: object
    d2: object
    differing_index: int
    epsilon: object
    hclass: FiniteHypothesisClass

    def __post_init__(self):
        delta = ds.diff(self.d1, self.d2)
        if delta.indices != (self.differing_index,):
            raise ParameterError(
                f"datasets must differ exactly at row {self.differing_index}, got {delta.indices}"
            )
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))

    @property
    def points(self):
        """``((s1, y1), (s2, y2))``: support index and label of the differing rows."""
        i = self.differing_index
        s1 = self.hclass.locate(self.d1.features[i : i + 1])[0]
        s2 = self.hclass.locate(self.d2.features[i : i + 1])[0]
        return (int(s1), int(self.d1.labels[i])), (int(s2), int(self.d2.labels[i]))

    def to_dict(self):
        return {
            "class": self.hclass.kind,
            "support": [list(p) for p in self.hclass.support],
            "d1": {"features": self.d1.features.tolist(), "labels": self.d1.labels.tolist()},
            "d2": {"features": self.d2.features.tolist(), "labels": self.d2.labels.tolist()},
            "differing_index": self.differing_index,
            "epsilon": str(self.epsilon),
        }


@dataclass(frozen=True)
class VerificationReport:
    assumption1_hold: bool
    assumption2_hold: bool
    ovl_ordering_holds: bool
    subset_holds: bool
    vacuous: bool = False
    equal_priors: bool = True
    ovl1: Fraction = None
    ovl2: Fraction = None
    rashomon_sizes: tuple = ()
    counterexample: dict = None
    steps: tuple = field(default=())

    @property
    def assumptions_hold(self):
        return self.assumption1_hold and self.assumption2_hold

    def as_dict(self):
        return {
            "assumptions_hold": self.assumptions_hold,
            "assumption1_hold": self.assumption1_hold,
            "assumption2_hold": self.assumption2_hold,
            "ovl_ordering_holds": self.ovl_ordering_holds,
            "subset_holds": self.subset_holds,
            "vacuous": self.vacuous,
            "equal_priors": self.equal_priors,
            "ovl1": None if self.ovl1 is None else str(self.ovl1),
            "ovl2": None if self.ovl2 is None else str(self.ovl2),
            "rashomon_sizes": list(self.rashomon_sizes),
            "counterexample": self.counterexample,
            "steps": [s.as_dict() for s in self.steps],
        }


def _union(inst):
    return enumerate_rashomon(inst.hclass, inst.d1, inst.epsilon) | enumerate_rashomon(
        inst.hclass, inst.d2, inst.epsilon
    )


def check_assumption1(inst):
    """Every member of either Rashomon set errs on d1's differing row at least as much as on d2's."""
    (s1, y1), (s2, y2) = inst.points
    table = inst.hclass.table
    return all(int(table[h, s1] != y1) >= int(table[h, s2] != y2) for h in _union(inst))


def _label_counts(hclass, d):
    counts = np.zeros((len(hclass.support), 2), dtype=int)
    np.add.at(counts, (hclass.locate(d.features), d.labels.astype(int)), 1)
    return counts


def bayes_point_loss(counts, s, y):
    """Expected loss of the empirical Bayes classifier on ``(s, y)``; 1/2 at a tie."""
    own, other = counts[s, y], counts[s, 1 - y]
    if own == other:
        return Fraction(1, 2)
    return Fraction(int(own < other))


def bayes_classifier(counts):
    """Majority label per support point (ties go to 0); -1 where there is no data."""
    lab = (counts[:, 1] > counts[:, 0]).astype(int)
    lab[counts.sum(axis=1) == 0] = -1
    return lab


def check_assumption2(inst):
    """The empirical Bayes classifiers lose at least as much on d1's differing row as on d2's."""
    (s1, y1), (s2, y2) = inst.points
    c1 = _label_counts(inst.hclass, inst.d1)
    c2 = _label_counts(inst.hclass, inst.d2)
    holds = bayes_point_loss(c1, s1, y1) >= bayes_point_loss(c2, s2, y2)
    _check_redundancy(inst, c1, holds)
    return holds


def _check_redundancy(inst, c1, a2):
    # With d1's Bayes classifier in the union and no ties at the two points,
    # the second assumption is implied by the first.
    (s1, _), (s2, _) = inst.points
    if c1[s1, 0] == c1[s1, 1] or c1[s2, 0] == c1[s2, 1]:
        return
    bayes = bayes_classifier(c1)
    seen = bayes >= 0
    union = sorted(_union(inst))
    if not union:
        return
    rows = inst.hclass.table[union][:, seen]
    if not np.any((rows == bayes[seen]).all(axis=1)):
        return
    if check_assumption1(inst) and not a2:
        raise AssertionError("first assumption holds with the Bayes classifier admitted, but the second fails")


def _ovl(d):
    p0, p1 = overlap.class_conditionals(d, exact=True)
    return overlap.ovl_discrete(p0, p1)


def verify_theorem(inst):
    """Evaluate both assumptions and both conclusions on one instance."""
    r1 = enumerate_rashomon(inst.hclass, inst.d1, inst.epsilon)
    r2 = enumerate_rashomon(inst.hclass, inst.d2, inst.epsilon)
    a1 = check_assumption1(inst)
    a2 = check_assumption2(inst)
    ovl1, ovl2 = _ovl(inst.d1), _ovl(inst.d2)
    subset = r1 <= r2
    ordering = ovl1 >= ovl2
    counts1, counts2 = inst.d1.class_counts(), inst.d2.class_counts()
    equal = counts1[0] == counts1[1] and counts2[0] == counts2[1]
    vacuous = not r1 or not r2
    bad = a1 and a2 and not vacuous and (not subset or (equal and not ordering))
    return VerificationReport(
        a1,
        a2,
        ordering,
        subset,
        vacuous=vacuous,
        equal_priors=bool(equal),
        ovl1=ovl1,
        ovl2=ovl2,
        rashomon_sizes=(len(r1), len(r2)),
        counterexample=inst.to_dict() if bad else None,
    )


def verify_k_extension(chain):
    """Verify each 1-neighbouring step, then ``R(D0) <= R(Dk)`` end to end."""
    chain = list(chain)
    if not chain:
        raise ParameterError("a chain needs at least one step")
    first = chain[0]
    for a, b in zip(chain, chain[1:]):
        if not a.d2.equals(b.d1):
            raise ParameterError("consecutive steps must share a dataset")
    if any(s.epsilon != first.epsilon or not _same_class(s.hclass, first.hclass) for s in chain):
        raise ParameterError("steps must share epsilon and hypothesis class")
    steps = tuple(verify_theorem(s) for s in chain)
    d0, dk = first.d1, chain[-1].d2
    r0 = enumerate_rashomon(first.hclass, d0, first.epsilon)
    rk = enumerate_rashomon(first.hclass, dk, first.epsilon)
    ovl0, ovlk = _ovl(d0), _ovl(dk)
    a1 = all(s.assumption1_hold for s in steps)
    a2 = all(s.assumption2_hold for s in steps)
    subset = r0 <= rk
    vacuous = any(s.vacuous for s in steps)
    bad = a1 and a2 and not vacuous and not subset
    return VerificationReport(
        a1,
        a2,
        ovl0 >= ovlk,
        subset,
        vacuous=vacuous,
        equal_priors=all(s.equal_priors for s in steps),
        ovl1=ovl0,
        ovl2=ovlk,
        rashomon_sizes=(len(r0), len(rk)),
        counterexample={"chain": [s.to_dict() for s in chain]} if bad else None,
        steps=steps,
    )


def _same_class(a, b):
    return a.kind == b.kind and a.support == b.support and np.array_equal(a.table, b.table)


# ---------------------------------------------------------------------------
# random instances


def random_class(rng, kind, max_points=6):
    m = int(rng.integers(3, max_points + 1))
    if kind == THRESHOLD:
        return threshold_class(np.arange(m))
    if kind == GRID:
        return grid_class([(i // 3, i % 3) for i in range(m)])
    raise ParameterError(f"unknown class kind {kind!r}")


def random_dataset(rng, hclass, per_class):
    """Equal class counts; each class draws support points from its own random weights."""
    m = len(hclass.support)
    rows, labels = [], []
    for y in (0, 1):
        w = rng.dirichlet(np.ones(m))
        idx = rng.choice(m, size=per_class, p=w)
        rows.extend(hclass.support[i] for i in idx)
        labels.extend([y] * per_class)
    return ds.Dataset(np.array(rows, dtype=float), np.array(labels))


def random_move(rng, hclass, d):
    """Copy of ``d`` with one row moved to another support point, and that row's index."""
    i = int(rng.integers(d.n_rows))
    current = hclass.locate(d.features[i : i + 1])[0]
    others = [s for s in range(len(hclass.support)) if s != current]
    x = np.array(d.features)
    x[i] = hclass.support[int(rng.choice(others))]
    return d.replace(features=x), i


def random_instances(rng, kind, max_points=6, max_per_class=8, epsilons=None):
    """Instances of one random dataset pair at each threshold.

    ``epsilons`` defaults to the pair's whole loss grid.
    """
    hclass = random_class(rng, kind, max_points)
    d1 = random_dataset(rng, hclass, int(rng.integers(2, max_per_class + 1)))
    d2, i = random_move(rng, hclass, d1)
    grid = epsilon_grid(hclass, d1, d2) if epsilons is None else epsilons
    return [TheoremInstance(d1, d2, i, eps, hclass) for eps in grid]


def random_chain(rng, kind, length, max_points=6, max_per_class=8, tries=50):
    """A chain whose every step satisfies both assumptions non-vacuously, or None."""
    hclass = random_class(rng, kind, max_points)
    d = random_dataset(rng, hclass, int(rng.integers(2, max_per_class + 1)))
    grid = epsilon_grid(hclass, d)
    eps = grid[int(rng.integers(len(grid)))]
    steps = []
    for _ in range(length):
        for _ in range(tries):
            nxt, i = random_move(rng, hclass, d)
            inst = TheoremInstance(d, nxt, i, eps, hclass)
            live = enumerate_rashomon(hclass, d, eps) and enumerate_rashomon(hclass, nxt, eps)
            if live and check_assumption1(inst) and check_assumption2(inst):
                steps.append(inst)
                d = nxt
                break
        else:
            return None
    return steps


@dataclass
class SweepSummary:
    instances: int = 0
    assumptions_hold: int = 0
    vacuous: int = 0
    subset_failures: int = 0
    ordering_failures: int = 0
    counterexamples: list = field(default_factory=list)

    def as_dict(self):
        return {
            "instances": self.instances,
            "assumptions_hold": self.assumptions_hold,
            "vacuous": self.vacuous,
            "subset_failures": self.subset_failures,
            "ordering_failures": self.ordering_failures,
            "counterexamples": self.counterexamples,
        }


def sweep(count, seed, kinds=CLASS_KINDS, max_points=6, max_per_class=8, epsilons=None):
    """Verify instances drawn from ``count`` random dataset pairs.

    Each pair contributes one instance per threshold (see :func:`random_instances`).
    """
    rng = np.random.default_rng(seed)
    out = SweepSummary()
    for n in range(count):
        kind = kinds[n % len(kinds)]
        for inst in random_instances(rng, kind, max_points, max_per_class, epsilons):
            rep = verify_theorem(inst)
            out.instances += 1
            if rep.vacuous:
                out.vacuous += 1
                continue
            if rep.assumptions_hold:
                out.assumptions_hold += 1
                out.subset_failures += not rep.subset_holds
                out.ordering_failures += not rep.ovl_ordering_holds
                if rep.counterexample is not None:
                    out.counterexamples.append(rep.counterexample)
    return out


def sweep_chains(count, seed, kinds=CLASS_KINDS, lengths=(2, 3, 4)):
    """Verify ``count`` random chains; lengths and kinds cycle deterministically."""
    rng = np.random.default_rng(seed)
    reports = []
    n = 0
    while len(reports) < count:
        chain = random_chain(rng, kinds[n % len(kinds)], lengths[n % len(lengths)])
        n += 1
        if chain is not None:
            reports.append(verify_k_extension(chain))
    return reports


def all_pairs(hclass, d):
    """Every single-row move of ``d`` within the support, for exhaustive checks."""
    for i, s in itertools.product(range(d.n_rows), range(len(hclass.support))):
        x = np.array(d.features)
        if tuple(x[i]) == hclass.support[s]:
            continue
        x[i] = hclass.support[s]
        yield d.replace(features=x), i
