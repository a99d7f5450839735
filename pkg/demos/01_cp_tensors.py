# # CP tensors and their unfoldings
#
# A rank-r CP tensor is a sum of r outer products a_i o b_i o c_i. This
# script builds one, checks the mode-3 unfolding identity and looks at how
# aligned the factors are with the coordinate axes.

# %%
import numpy as np

from tensor_sandwich import (
    coherence,
    cp_to_dense,
    generate_synthetic,
    khatri_rao,
    subspace_coherence,
    unfold3,
)

model, t = generate_synthetic(n=30, r=4, seed=0)
print("shape", t.shape, "rank", model.rank)
print("component weights", np.linalg.norm(model.C, axis=0).round(4))

# %% [markdown]
# Each row of the mode-3 unfolding is one frontal slice, flattened column by
# column. The rows are combinations of the Khatri-Rao columns of A and B.

# %%
lhs = unfold3(t)
rhs = model.C @ khatri_rao(model.A, model.B).T
print("unfolding identity error", np.abs(lhs - rhs).max())
print("dense from factors matches", np.allclose(cp_to_dense(model), t))

# %% [markdown]
# Coherence runs from 1 (spread out) to n/r (concentrated on a few rows).
# Gaussian factors sit near the low end, which is what makes sparse probes
# of a column informative.

# %%
print("mu(A) =", round(subspace_coherence(model.A), 3), " upper limit", 30 / 4)
spiky = np.eye(30)[:, :4]
print("mu(spiky) =", coherence(spiky))
