# # A small reproducible sweep
#
# Error against slice budget, written as CSV. Rerunning with the same
# base seed gives the same bytes.

# %%
from tensor_sandwich.experiments import ExperimentSpec, parse_csv, run_spec, summarize

spec = ExperimentSpec(kind="sample_sweep", n=30, ranks=[3], trials=4)
text = run_spec(spec)
assert text == run_spec(spec)

for cell in summarize(parse_csv(text)):
    print(f"budget {cell['slice_budget']:5d}  median error {cell['median_rel_error']:.1e}"
          f"  successes {cell['successes']}/{cell['trials']}")
