import numpy as np

from binreg.dataset import Table, make_column


def linear_table(n=120, p=3, seed=0, noise=0.1, baseline=False):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, p))
    y = X @ np.arange(1.0, p + 1) + noise * r.standard_normal(n) + 10
    cols = [make_column(f"x{j}", "numeric_feature", X[:, j]) for j in range(p)]
    if baseline:
        cols.append(make_column("base", "appraisal_baseline", y + r.standard_normal(n)))
    cols.append(make_column("price", "target", y))
    return Table(cols)
