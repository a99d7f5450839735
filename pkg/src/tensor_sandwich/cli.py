"""Command line driver: ``generate``, ``complete`` and ``sweep``.

Exit status is 0 on success (including runs whose completion failed; that
outcome is reported in the JSON/CSV), 2 on bad input.
"""

import argparse
import json
import math
import sys

import numpy as np

from .errors import TensorSandwichError
from .experiments import ExperimentSpec, paper_scale, run_spec
from .oracle import SamplingOracle
from .sandwich import SandwichConfig, tensor_sandwich
from .slices import SliceCompletionConfig, default_column_samples, default_slice_budget
from .tensor import add_noise_snr, generate_synthetic, subspace_coherence
from .tensorio import load_tensor, save_tensor


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_generate(args):
    weights = np.ones(args.rank) if args.weights == "equal" else None
    model, truth = generate_synthetic(args.n, args.rank, args.seed, weights=weights)
    noisy = add_noise_snr(truth, args.snr, args.seed + 1) if args.snr is not None else truth
    save_tensor(args.out, noisy, model=model, truth=truth)
    print(json.dumps({"out": args.out, "dims": list(truth.shape), "rank": args.rank,
                      "snr_db": _jsonable(args.snr)}))
    return 0


def _complete_config(args, tensor, model):
    opts = _load_json(args.config) if args.config else {}
    n1 = tensor.shape[0]
    r = args.rank if args.rank is not None else opts.get("rank")
    if r is None:
        raise TensorSandwichError("rank is required (--rank or config 'rank')")
    delta = opts.get("delta", 0.1)
    d = args.d if args.d is not None else opts.get("per_column_samples")
    if d is None:
        mu0 = opts.get("mu0")
        if mu0 is None:
            # true coherence when the file carries its factors, else the worst case
            mu0 = subspace_coherence(model.A) if model is not None else n1 / r
        d = default_column_samples(mu0, r, delta, n1)
    budget = args.budget if args.budget is not None else opts.get(
        "budget", default_slice_budget(d, n1, r))
    slice_cfg = SliceCompletionConfig(
        rank_cap=r,
        per_column_samples=d,
        budget=budget,
        residual_tol=opts.get("residual_tol", 1e-8),
        on_rank_cap=opts.get("on_rank_cap", "raise"),
    )
    return SandwichConfig(
        slice_cfg,
        s=opts.get("s", 2),
        slices=opts.get("slices"),
        gamma=opts.get("gamma", 4),
        delta=delta,
        seed=args.seed if args.seed is not None else opts.get("seed", 0),
        als_iters=args.als_iters if args.als_iters is not None else opts.get("als_iters", 0),
    )


def cmd_complete(args):
    tensor, model, truth = load_tensor(args.tensor)
    cfg = _complete_config(args, tensor, model)
    oracle = SamplingOracle(tensor)
    est, report = tensor_sandwich(oracle, cfg, truth=truth)
    out = report.to_dict()
    out["fibers"] = [list(p) for p in out["fibers"]]
    if args.out and est is not None:
        save_tensor(args.out, est.full(), model=est)
        out["estimate"] = args.out
    print(json.dumps(_jsonable(out), indent=2))
    return 0


def cmd_sweep(args):
    opts = _load_json(args.config) if args.config else {}
    if args.kind:
        opts["kind"] = args.kind
    spec = ExperimentSpec.from_dict(opts)
    if args.paper_scale:
        spec = paper_scale(spec)
    if args.seed is not None:
        spec.base_seed = args.seed
    if args.trials is not None:
        spec.trials = args.trials
    if args.out:
        spec.output_path = args.out
    text = run_spec(spec, threads=args.threads)
    if not spec.output_path:
        sys.stdout.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="tensor-sandwich", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic CP tensor to a container file")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--rank", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--snr", type=float, default=None, help="add noise at this SNR (dB)")
    g.add_argument("--weights", choices=("decay", "equal"), default="decay")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("complete", help="run one completion and print the report as JSON")
    c.add_argument("tensor")
    c.add_argument("--config", help="JSON file with pipeline options")
    c.add_argument("--rank", type=int)
    c.add_argument("--d", type=int, help="probe size per column")
    c.add_argument("--budget", type=int, help="reads allowed per slice")
    c.add_argument("--als-iters", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--out", help="save the estimate as a container file")
    c.add_argument("--threads", type=int, default=1, help="unused; accepted for symmetry")
    c.set_defaults(func=cmd_complete)

    s = sub.add_parser("sweep", help="run an experiment sweep and write CSV")
    s.add_argument("--config", help="JSON ExperimentSpec")
    s.add_argument("--kind", choices=("sample_sweep", "noise_sweep", "als_compare"))
    s.add_argument("--out", help="CSV path (a .summary.csv is written next to it)")
    s.add_argument("--seed", type=int, help="override base_seed")
    s.add_argument("--trials", type=int)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--paper-scale", action="store_true", help="n = 200; slow")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TensorSandwichError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
