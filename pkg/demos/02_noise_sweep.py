"""
How many epochs does the soft-min solver need as noise grows?
=============================================================

Projected gradient descent on the soft-min weights is run on a duplicated
dataset (the baseline) and on the data plus one noisy copy, for several noise
variances. Epochs are counted until the weights are within 1e-4 of the
Newton reference minimiser.
"""
from augclust.harness import default_config, run_experiment

cfg = default_config("noise_sweep", seeds=[0, 1], sweep=[0.0, 2.0, 6.0, 10.0])
rows = run_experiment(cfg)

print(f"baseline epochs: {rows[0].epochs_baseline}")
print(f"{'variance':>8} {'seed':>4} {'epochs':>6} {'fitted rate':>12}")
for r in rows:
    print(f"{r.sweep:8g} {r.seed:4d} {r.epochs_augmented:6d} {r.fitted_rate_augmented:12.6f}")
