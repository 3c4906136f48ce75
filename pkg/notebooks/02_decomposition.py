# coding: utf-8

# # Decomposing a weighted density by group
#
# A composite density is built from synthetic estimates with quality
# weights, then split by publication period.  The components add up to the
# composite on the grid, and the quintile table shows how each period is
# spread over the composite's quintiles.

# In[1]:

import numpy as np

from kdx.density import decompose, moments, quintile_table, tail_probs
from kdx.synthetic import synthetic_dataset

ds = synthetic_dataset(40, rng=np.random.default_rng(3)).reweighted("quality")
print(len(ds), "estimates")

# In[2]:

dec = decompose(ds, "period")
total = np.sum([c.curve.values for c in dec.components], axis=0)
print("max |composite - sum of components|:", np.max(np.abs(dec.composite.values - total)))

# In[3]:

mean, sd = moments(dec.composite)
below, above = tail_probs(dec.composite)
print(f"kernel mean {mean:.1f}, sd {sd:.1f}, P(<0) {below:.4f}, P(>tail) {above:.4f}")

# In[4]:

for comp in dec.components:
    print(f"{comp.label:10s} weight {comp.weight:.3f}  mean {moments(comp.curve)[0]:8.1f}")

# In[5]:

print(quintile_table(dec).to_csv())
