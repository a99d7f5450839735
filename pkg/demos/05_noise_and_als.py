# # Noise, and refining with masked ALS
#
# On noisy data the sandwich gives a good but not optimal estimate. A few
# sweeps of ALS on the entries it already read tighten it further. ALS
# from a random start on the same number of uniform samples does much worse.

# %%
import numpy as np

from tensor_sandwich import (
    SamplingOracle,
    SandwichConfig,
    SliceCompletionConfig,
    add_noise_snr,
    default_slice_budget,
    generate_synthetic,
    masked_als,
    random_init,
    relative_error,
    tensor_sandwich,
)

n, r, d = 50, 5, 14
_, truth = generate_synthetic(n, r, seed=4)
noisy = add_noise_snr(truth, 30.0, seed=5)
slice_cfg = SliceCompletionConfig(rank_cap=r, per_column_samples=d,
                                  budget=default_slice_budget(d, n, r), on_rank_cap="project")
oracle = SamplingOracle(noisy)
est, report = tensor_sandwich(oracle, SandwichConfig(slice_cfg, seed=4), truth=truth)
print(f"sandwich          {report.rel_error:.2e}  ({report.total_count} entries)")

# %%
trace = {}
refined = masked_als(oracle, est, 100, trace=trace)
print(f"sandwich + ALS    {relative_error(refined.full(), truth):.2e}")
print("observed residual", f"{trace['residuals'][0]:.3e} -> {trace['residuals'][-1]:.3e}")

# %%
rng = np.random.default_rng(6)
uniform = SamplingOracle(noisy)
flat = rng.choice(noisy.size, report.total_count, replace=False)
uniform.query_many(*np.unravel_index(flat, noisy.shape))
alone = masked_als(uniform, random_init(noisy.shape, r, 7), 100)
print(f"ALS alone         {relative_error(alone.full(), truth):.2e}")
