"""Regenerates the frozen reference values used by numstat_reference.rs."""
import numpy as np
from scipy import stats

with open("t_pvalue_grid.csv", "w") as f:
    f.write("df,t,p\n")
    for df in [1, 2, 5, 10, 30, 100]:
        for t in [0.0, 0.5, 1.0, 2.0, 5.0]:
            p = float(2.0 * stats.t.sf(abs(t), df))
            f.write(f"{df},{t!r},{p!r}\n")

rng = np.random.default_rng(20240607)
with open("ttest_1samp.csv", "w") as f:
    f.write("mu0,t,p,sample\n")
    for n in [2, 3, 5, 8, 20]:
        for mu0 in [0.0, 1.0]:
            y = rng.normal(loc=1.0, scale=2.0, size=n).round(6)
            r = stats.ttest_1samp(y, mu0)
            f.write(f"{mu0!r},{float(r.statistic)!r},{float(r.pvalue)!r},{' '.join(repr(float(v)) for v in y)}\n")
