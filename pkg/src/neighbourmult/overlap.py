"""Overlapping coefficient (OVL) between class-conditional distributions.

OVL(P, Q) is the mass the two distributions share, ``sum_x min(P(x), Q(x))``,
and equals one minus their total variation distance.  With equal class
priors the Bayes 0-1 loss of separating P from Q is half the OVL.
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import rankdata

from . import models
from .errors import DegenerateDataError, ParameterError

EXACT = "ExactDiscrete"
HISTOGRAM = "Histogram"
PROJECTED = "ProjectedHistogram"
METHODS = (EXACT, HISTOGRAM, PROJECTED)

DEFAULT_BINS = 64
PROJECTOR_SEED = 20250101
_PROJECTOR = models.ModelFamily.logistic(bootstrap=False)


class UndefinedCorrelationError(DegenerateDataError):
    """Rank correlation of a constant sequence."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability mass over a finite support.

    Support points may be any hashable values (ints, bin indices, tuples of
    feature values).  Masses may be floats or ``Fraction``s.
    """

    support: tuple
    mass: tuple

    def __post_init__(self):
        support = tuple(self.support)
        mass = tuple(self.mass)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)
        if len(support) != len(mass):
            raise ParameterError("support and mass must have equal length")
        if len(set(support)) != len(support):
            raise ParameterError("support points must be distinct")
        if any(m < 0 for m in mass):
            raise ParameterError("masses must be non-negative")
        total = sum(mass)
        if abs(total - 1) > 1e-9:
            raise ParameterError(f"masses sum to {float(total)}, expected 1")

    @classmethod
    def from_mapping(cls, mapping):
        items = list(mapping.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @classmethod
    def empirical(cls, values, exact=True):
        """Empirical distribution of a sequence; masses are Fractions when ``exact``."""
        counts = Counter(values)
        n = sum(counts.values())
        if n == 0:
            raise ParameterError("empirical distribution of an empty sample")
        keys = sorted(counts, key=repr)
        mass = tuple(Fraction(counts[k], n) if exact else counts[k] / n for k in keys)
        return cls(tuple(keys), mass)

    def as_dict(self):
        return dict(zip(self.support, self.mass))


@dataclass(frozen=True)
class OverlapEstimate:
    value: float
    method: str
    bin_count: int = 0

    def __post_init__(self):
        if not (0 <= self.value <= 1 + 1e-12):
            raise ParameterError(f"OVL estimate {self.value} outside [0, 1]")
        if self.method not in METHODS:
            raise ParameterError(f"unknown OVL method {self.method!r}")

    def __float__(self):
        return float(self.value)


def ovl_discrete(p, q):
    """``sum_x min(p(x), q(x))`` over the union of supports."""
    pd, qd = p.as_dict(), q.as_dict()
    return sum(min(pd.get(x, 0), qd.get(x, 0)) for x in set(pd) | set(qd))


def total_variation(p, q):
    pd, qd = p.as_dict(), q.as_dict()
    return sum(abs(pd.get(x, 0) - qd.get(x, 0)) for x in set(pd) | set(qd)) / 2


def bayes_loss_discrete(p0, p1):
    """Bayes 0-1 loss for equally likely classes with conditionals ``p0``, ``p1``."""
    d0, d1 = p0.as_dict(), p1.as_dict()
    half = Fraction(1, 2) if all(isinstance(v, (int, Fraction)) for v in (*p0.mass, *p1.mass)) else 0.5
    return sum(min(half * d0.get(x, 0), half * d1.get(x, 0)) for x in set(d0) | set(d1))


def histogram_ovl(a, b, bins=DEFAULT_BINS):
    """OVL of two 1-D samples on shared bins spanning their pooled range."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise DegenerateDataError("histogram OVL needs two nonempty samples")
    if bins < 1:
        raise ParameterError(f"bins must be positive, got {bins}")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        return 1.0
    edges = np.linspace(lo, hi, bins + 1)
    ha = np.histogram(a, edges)[0] / a.size
    hb = np.histogram(b, edges)[0] / b.size
    return float(np.minimum(ha, hb).sum())


def class_conditionals(d, exact=True):
    """Empirical distributions of feature rows (as tuples) for class 0 and 1."""
    rows = [tuple(r) for r in d.features.tolist()]
    y = d.labels
    c0 = [r for r, lab in zip(rows, y) if lab == 0]
    c1 = [r for r, lab in zip(rows, y) if lab == 1]
    if not c0 or not c1:
        raise DegenerateDataError("OVL needs both classes present")
    return DiscreteDistribution.empirical(c0, exact), DiscreteDistribution.empirical(c1, exact)


def projection(d):
    """1-D projection of the rows onto a reference logistic direction."""
    ref = models.train(_PROJECTOR, d, PROJECTOR_SEED)
    return ((d.features - ref.center) / ref.scale) @ ref.weights


def ovl_dataset(d, method=None, bins=DEFAULT_BINS):
    """Estimate the OVL between the two classes of ``d``.

    ``method`` defaults to a plain histogram for one feature and to a
    histogram of the logistic projection otherwise; ``ExactDiscrete`` uses
    the empirical class-conditionals of whole rows.
    """
    d.require_complete("ovl_dataset")
    counts = d.class_counts()
    if counts.min() == 0:
        raise DegenerateDataError("OVL needs both classes present")
    if method is None:
        method = HISTOGRAM if d.n_features == 1 else PROJECTED
    if method == EXACT:
        p0, p1 = class_conditionals(d)
        return OverlapEstimate(float(ovl_discrete(p0, p1)), EXACT, 0)
    if method == HISTOGRAM:
        if d.n_features != 1:
            raise ParameterError("Histogram OVL needs exactly one feature; use ProjectedHistogram")
        z = d.features[:, 0]
    elif method == PROJECTED:
        z = projection(d)
    else:
        raise ParameterError(f"unknown OVL method {method!r}")
    y = d.labels
    return OverlapEstimate(histogram_ovl(z[y == 0], z[y == 1], bins), method, bins)


def spearman(xs, ys):
    """Spearman rank correlation with average ranks for ties."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError("spearman needs two sequences of equal length")
    if x.size < 2:
        raise ParameterError("spearman needs at least two points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("rank correlation is undefined for a constant sequence")
    rx = rankdata(x) - (x.size + 1) / 2
    ry = rankdata(y) - (y.size + 1) / 2
    r = float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))
    return min(1.0, max(-1.0, r))
