# coding: utf-8

# # Trends in the estimates
#
# Weighted least squares and quantile regressions of the standardised
# estimate on the pure rate of time preference and the publication year,
# then year fixed effects.

# In[1]:

import numpy as np

from kdx.regression import build_design, quantile_reg, wls, year_fixed_effects
from kdx.synthetic import synthetic_dataset

ds = synthetic_dataset(60, rng=np.random.default_rng(4)).reweighted("paper")
design = build_design(ds)
print(design.names, design.X.shape)

# In[2]:

ols = wls(design)
for name in design.names:
    print(f"WLS {name:10s} {ols.coef(name):10.3f} ({ols.stderr(name):.3f})")

# In[3]:

for tau in (0.25, 0.5, 0.75):
    q = quantile_reg(design, tau, B=50, seed=0)
    print(f"tau {tau}: " + ", ".join(f"{n} {q.coef(n):.2f}" for n in design.names))

# In[4]:

fe = year_fixed_effects(ds)
for year, effect, hw in zip(fe.years, fe.effects, fe.half_width):
    print(f"{year}: {effect:9.1f} +/- {hw:.1f}")
