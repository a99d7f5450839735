# # Completing one slice by tracking its column space
#
# Every column is probed at d random rows. A probe the current basis
# explains is filled in by least squares; otherwise the column is read in
# full and joins the basis. A rank-r slice needs only r full columns.

# %%
import numpy as np

from tensor_sandwich import (
    BudgetExceeded,
    SamplingOracle,
    SliceCompletionConfig,
    complete_slice,
    default_slice_budget,
    generate_synthetic,
)

n, r, d = 60, 4, 12
_, t = generate_synthetic(n, r, seed=1)
oracle = SamplingOracle(t)
cfg = SliceCompletionConfig(rank_cap=r, per_column_samples=d,
                            budget=default_slice_budget(d, n, r))
res = complete_slice(oracle, 0, cfg)

err = np.linalg.norm(res.matrix - t[:, :, 0]) / np.linalg.norm(t[:, :, 0])
print(f"relative error {err:.2e}")
print(f"reads {res.queries} of {n * n}  ({res.columns_fully_sampled} columns read in full)")

# %% [markdown]
# With too small a budget the tracker stops before reading past it.

# %%
tight = SliceCompletionConfig(rank_cap=r, per_column_samples=d, budget=300)
try:
    complete_slice(SamplingOracle(t), 0, tight)
except BudgetExceeded as exc:
    print("stopped:", exc)
