# %% [markdown]
# # How much does one protocol tell us?
#
# Mutual information between a uniformly random output bit and the recorded
# outcome.  Repeating a plain run many times and voting is the baseline.

# %%
import math

from counterfactual.info import (
    PARTITIONS, mutual_information_repeat, mutual_information_zeno, zeno_params,
)

# flip probability at which a single noisy run carries no information
EPS_HALF = 1 - math.sqrt(2) / 2

for runs, eps in [(200, 0.2), (8, 0.2), (200, EPS_HALF)]:
    print(f"repeat runs={runs:3d} eps={eps:.4f}: {mutual_information_repeat(runs, eps).mi_bits:.5f}")

# %% [markdown]
# The Zeno protocol's outcome can be partitioned in more than one way.  The
# three-way split is the default.

# %%
for n, nprime, eps in [(10, 10, 0.2), (2, 2, 0.2), (10, 10, EPS_HALF)]:
    values = {k: mutual_information_zeno(zeno_params(n, nprime, eps), k).mi_bits
              for k in PARTITIONS}
    print(n, nprime, round(eps, 4), {k: round(v, 4) for k, v in values.items()})
