# coding: utf-8

# # Are the period distributions the same?
#
# The equality-of-proportions statistic compares each period's share of the
# composite quintiles.  Its reference distribution comes from a bootstrap
# that permutes period labels, so the null of "no period effect" holds by
# construction.  The Kolmogorov-Smirnov table gives a second view.

# In[1]:

import numpy as np

from kdx.density import decompose
from kdx.inference import bootstrap_criticals, density_band, ks_table
from kdx.synthetic import null_dataset, synthetic_dataset

ds = synthetic_dataset(30, rng=np.random.default_rng(8)).reweighted("quality")

# In[2]:

res = bootstrap_criticals(ds, "period", B=99, seed=1)
print(f"statistic {res.statistic:.2f} on {res.dof} dof, asymptotic p {res.p_asymptotic:.3f}")
print("bootstrap criticals", {k: round(v, 2) for k, v in res.bootstrap_criticals.items()})

# Under a true null the bootstrap 5% critical value should reject about one
# time in twenty.  A handful of trials gives a rough look:

# In[3]:

hits = 0
for trial in range(20):
    null = null_dataset(50, rng=trial).reweighted("none")
    r = bootstrap_criticals(null, "period", B=99, seed=trial, kernel="normal",
                            bandwidth="silverman")
    hits += r.statistic > r.bootstrap_criticals[0.05]
print(f"{hits} rejections in 20 null trials")

# In[4]:

table = ks_table(decompose(ds, "period"))
for label, row in table.items():
    print(label, {p: round(v.p_value, 3) for p, v in row.items()})

# In[5]:

band = density_band(ds, B=50, seed=2, grid_size=512)
print("band width at the mode vs far tail:",
      float(np.max(band.upper - band.lower)), float((band.upper - band.lower)[-1]))
