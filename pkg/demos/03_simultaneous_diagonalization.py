# # Recovering A and B from two completed slices
#
# Two random combinations of the same slices share the factors A and B.
# The eigenvectors of T_u pinv(T_v) are the columns of A, up to order and
# scale, and B follows by a solve.

# %%
import numpy as np

from tensor_sandwich import aggregate, draw_sphere, generate_synthetic, jennrich_factors

rng = np.random.default_rng(2)
model, t = generate_synthetic(25, 3, seed=2)
slices = [t[:, :, 0], t[:, :, 7]]
T_u = aggregate(slices, draw_sphere(2, rng))
T_v = aggregate(slices, draw_sphere(2, rng))
res = jennrich_factors(T_u, T_v, 3)

print("eigenvalues", res.eigenvalues.round(4))
print("smallest eigengap", f"{res.min_eigengap:.3e}")

# %% [markdown]
# Each recovered column lines up with exactly one true column.

# %%
A = model.A / np.linalg.norm(model.A, axis=0)
print("|cos| between recovered and true columns")
print(np.abs(res.A_hat.T @ A).round(6))
print("A_hat B_hat^T reproduces T_u:", np.allclose(res.A_hat @ res.B_hat.T, T_u))
