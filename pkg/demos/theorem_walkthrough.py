"""Walk through one hand-built pair of neighbouring datasets.

A class-0 point sits deep in class-1 territory in the first dataset and is
moved back home in the second.  We print both Rashomon sets, both
assumptions and both overlaps, then run a small randomized sweep.
"""

from fractions import Fraction

import numpy as np

from neighbourmult import dataset as ds, theory as th

labels = [0, 0, 0, 0, 1, 1, 1, 1]
d1 = ds.Dataset(np.array([[0], [1], [2], [5], [3], [4], [5], [5]], float), np.array(labels))
d2 = ds.Dataset(np.array([[0], [1], [2], [0], [3], [4], [5], [5]], float), np.array(labels))
hc = th.threshold_class(range(6))

print("threshold class with", len(hc), "hypotheses")
for eps in (Fraction(0), Fraction(1, 8), Fraction(1, 4)):
    inst = th.TheoremInstance(d1, d2, 3, eps, hc)
    rep = th.verify_theorem(inst)
    r1 = sorted(hc.params[h] for h in th.enumerate_rashomon(hc, d1, eps))
    r2 = sorted(hc.params[h] for h in th.enumerate_rashomon(hc, d2, eps))
    print(f"\neps = {eps}")
    print("  Rashomon set on d1:", r1)
    print("  Rashomon set on d2:", r2)
    print(f"  assumptions {rep.assumption1_hold}/{rep.assumption2_hold}, vacuous {rep.vacuous}")
    print(f"  subset holds {rep.subset_holds}, OVL {rep.ovl1} -> {rep.ovl2}")

print("\nrandom sweep over 200 dataset pairs:")
print(th.sweep(200, seed=1).as_dict() | {"counterexamples": "omitted"})
