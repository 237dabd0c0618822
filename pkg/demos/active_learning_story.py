"""A small active-learning run comparing the five acquisition strategies.

Every strategy starts from the same labeled sample.  After each step we
compare ambiguity on a fixed test set under one shared Rashomon threshold.
MultLow should end lowest and MultHigh highest, at similar accuracy.
"""

import numpy as np

from neighbourmult import active, dataset as ds, models, rashomon

spec = ds.SyntheticSpec(600, [-0.42] * 4, [0.42] * 4, seed=7)
train, test = ds.split(ds.generate_gaussian(spec), 0.8, 1000)
family = models.ModelFamily.logistic(epochs=200)
strategies = [active.AcquisitionStrategy(k, committee_size=10) for k in active.STRATEGIES]
cfg = rashomon.RashomonConfig(pool_size=40, min_members=20)

records = []
for seed in range(3):
    records += active.run_active(train, test, strategies, 300, 30, 3, family, cfg, seed)

print(f"{'t':>2} " + " ".join(f"{k:>11}" for k in active.STRATEGIES))
for t in range(4):
    amb = [np.mean([r.ambiguity for r in records if r.t == t and r.algorithm == k]) for k in active.STRATEGIES]
    print(f"{t:>2} " + " ".join(f"{a:11.4f}" for a in amb))
acc = {k: np.mean([r.accuracy for r in records if r.t == 3 and r.algorithm == k]) for k in active.STRATEGIES}
print("accuracy at the last step:", {k: round(float(v), 4) for k, v in acc.items()})
