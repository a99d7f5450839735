"""Seeded experiment sweeps with CSV output.

Seeds
-----
Every random stream comes from ``numpy.random.SeedSequence(base_seed,
spawn_key=key)`` and takes the first 32-bit word of its state. Keys:

==========  ==========================================
stream      spawn_key
==========  ==========================================
data        ``(0, rank, trial)``
pipeline    ``(1, rank, slice_budget, trial)``
noise       ``(2, rank, round(1000 * snr_db), trial)``
ALS init    ``(3, rank, trial)``
ALS mask    ``(4, rank, trial)``
==========  ==========================================

The data stream ignores the budget and SNR, so every cell for a given
``(rank, trial)`` sees the same ground truth, and a noiseless cell matches
the SNR = inf cell bit for bit.

A trial that fails is written with its failure name in ``status`` and the
error of the zero estimate, ``rel_error = 1.0``.
"""

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import PreconditionError
from .oracle import SamplingOracle
from .sandwich import SandwichConfig, masked_als, random_init, tensor_sandwich
from .slices import SliceCompletionConfig, column_samples_for_budget
from .tensor import add_noise_snr, cp_to_dense, generate_synthetic, relative_error

KINDS = ("sample_sweep", "noise_sweep", "als_compare")

SAMPLE_COLUMNS = [
    "rank", "slice_budget", "trial", "seed", "omega1", "omega2", "total",
    "fraction", "rel_error", "status", "wall_ms",
]
NOISE_COLUMNS = [
    "rank", "slice_budget", "snr_db", "trial", "seed", "omega1", "omega2", "total",
    "fraction", "rel_error", "status", "wall_ms",
]
ALS_COLUMNS = [
    "rank", "slice_budget", "snr_db", "arm", "trial", "seed", "omega1", "omega2",
    "total", "fraction", "rel_error", "status", "wall_ms",
]
SUMMARY_COLUMNS = ["rank", "slice_budget", "snr_db", "arm", "trials", "successes",
                   "median_rel_error", "mean_rel_error", "median_fraction"]
ARMS = ("ALS", "TS", "TS_ALS")
FAILED_ERROR = 1.0


@dataclass
class ExperimentSpec:
    """One sweep.

    Slice budgets are given either as ``budgets`` (absolute reads per slice)
    or as ``budget_factors`` c, meaning ``m = round(c * n * r * log(n)^2)``
    for each rank r. Factors are the default because they scale with rank:
    six points from 0.035 to 0.7 for the sample sweep, 0.7 otherwise.
    """

    kind: str = "sample_sweep"
    n: int = 50
    ranks: list = field(default_factory=lambda: [2, 5])
    budget_factors: list = None
    budgets: list = None
    snr_list: list = field(default_factory=lambda: [10.0, 20.0, 30.0, 40.0, math.inf])
    trials: int = 10
    base_seed: int = 0
    output_path: str = None
    s: int = 2
    gamma: int = 4
    als_iters: int = 100
    residual_tol: float = 1e-8
    record_timing: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"kind must be one of {KINDS}")
        if self.trials < 1:
            raise PreconditionError("trials must be >= 1")
        if not self.ranks:
            raise PreconditionError("ranks must be nonempty")
        if self.budgets is None and self.budget_factors is None:
            self.budget_factors = (
                [float(x) for x in np.geomspace(0.035, 0.7, 6)]
                if self.kind == "sample_sweep" else [0.7]
            )
        if self.budgets is not None:
            if not self.budgets:
                raise PreconditionError("budgets must be nonempty")
        elif not self.budget_factors:
            raise PreconditionError("budget_factors must be nonempty")
        if self.kind != "sample_sweep" and not self.snr_list:
            raise PreconditionError("snr_list must be nonempty")
        if any(r > self.n for r in self.ranks):
            raise PreconditionError("every rank must be <= n")
        self.snr_list = [float(x) for x in self.snr_list]

    def slice_budgets(self, r):
        if self.budgets is not None:
            return [int(m) for m in self.budgets]
        base = self.n * r * math.log(self.n) ** 2
        return [int(round(c * base)) for c in self.budget_factors]

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "snr_list" in d:
            d["snr_list"] = [math.inf if str(x).lower() in ("inf", "infinity") else float(x)
                             for x in d["snr_list"]]
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["snr_list"] = ["inf" if math.isinf(x) else x for x in self.snr_list]
        return d


def derive_seed(base_seed, *key):
    """32-bit seed for the stream identified by ``key`` (see module docstring)."""
    ss = np.random.SeedSequence(base_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1)[0])


def _snr_key(snr):
    return -1 if math.isinf(snr) else int(round(1000 * snr))


def _sandwich_cfg(spec, n, r, budget, seed, noisy):
    d = column_samples_for_budget(budget, n, n, r)
    slice_cfg = SliceCompletionConfig(
        rank_cap=r,
        per_column_samples=d,
        budget=budget,
        residual_tol=spec.residual_tol,
        on_rank_cap="project" if noisy else "raise",
    )
    return SandwichConfig(slice_cfg, s=spec.s, gamma=spec.gamma, seed=seed)


def _data(spec, r, trial, snr=math.inf):
    _, truth = generate_synthetic(spec.n, r, derive_seed(spec.base_seed, 0, r, trial))
    if math.isinf(snr):
        return truth, truth
    noisy = add_noise_snr(truth, snr, derive_seed(spec.base_seed, 2, r, _snr_key(snr), trial))
    return truth, noisy


def _row(report, error, wall, spec, **extra):
    row = dict(extra)
    row.update(
        omega1=report.omega1_count if report else "",
        omega2=report.omega2_count if report else "",
        total=report.total_count if report else "",
        fraction=report.fraction if report else "",
        rel_error=error,
        status=report.status if report else "success",
        wall_ms=round(1000 * wall, 3) if spec.record_timing else "",
    )
    return row


def _sandwich_trial(spec, r, budget, trial, snr):
    truth, observed = _data(spec, r, trial, snr)
    seed = derive_seed(spec.base_seed, 1, r, budget, trial)
    cfg = _sandwich_cfg(spec, spec.n, r, budget, seed, noisy=not math.isinf(snr))
    t0 = time.perf_counter()
    oracle = SamplingOracle(observed)
    _, report = tensor_sandwich(oracle, cfg, truth=truth)
    wall = time.perf_counter() - t0
    err = report.rel_error if report.ok else FAILED_ERROR
    return seed, report, err, wall


def _sample_task(args):
    spec, r, budget, trial = args
    seed, report, err, wall = _sandwich_trial(spec, r, budget, trial, math.inf)
    return [_row(report, err, wall, spec, rank=r, slice_budget=budget, trial=trial, seed=seed)]


def _noise_task(args):
    spec, r, budget, snr, trial = args
    seed, report, err, wall = _sandwich_trial(spec, r, budget, trial, snr)
    return [_row(report, err, wall, spec, rank=r, slice_budget=budget, snr_db=snr,
                 trial=trial, seed=seed)]


def _als_task(args):
    spec, r, budget, snr, trial = args
    truth, observed = _data(spec, r, trial, snr)
    seed = derive_seed(spec.base_seed, 1, r, budget, trial)
    cfg = _sandwich_cfg(spec, spec.n, r, budget, seed, noisy=not math.isinf(snr))
    common = dict(rank=r, slice_budget=budget, snr_db=snr, trial=trial, seed=seed)
    rows = []

    t0 = time.perf_counter()
    oracle = SamplingOracle(observed)
    model, report = tensor_sandwich(oracle, cfg, truth=truth)
    wall_ts = time.perf_counter() - t0
    ts_err = report.rel_error if report.ok else FAILED_ERROR

    t0 = time.perf_counter()
    if model is not None:
        refined = masked_als(oracle, model, spec.als_iters)
        ts_als_err = relative_error(cp_to_dense(refined), truth)
    else:
        ts_als_err = FAILED_ERROR
    wall_ts_als = wall_ts + time.perf_counter() - t0

    # ALS alone: uniform mask with as many entries as the sandwich read
    t0 = time.perf_counter()
    count = report.total_count
    n = spec.n
    mask_rng = np.random.default_rng(derive_seed(spec.base_seed, 4, r, trial))
    flat = mask_rng.choice(n ** 3, size=count, replace=False)
    als_oracle = SamplingOracle(observed)
    als_oracle.query_many(*np.unravel_index(flat, (n, n, n)))
    init = random_init((n, n, n), r, derive_seed(spec.base_seed, 3, r, trial))
    als_model = masked_als(als_oracle, init, spec.als_iters)
    als_err = relative_error(cp_to_dense(als_model), truth)
    als_err = als_err if np.isfinite(als_err) else FAILED_ERROR
    wall_als = time.perf_counter() - t0
    als_report = replace(report, omega1_count=0, omega2_count=0,
                         total_count=als_oracle.query_count,
                         fraction=als_oracle.sample_report().fraction, status="success")

    rows.append(_row(als_report, als_err, wall_als, spec, arm="ALS", **common))
    rows.append(_row(report, ts_err, wall_ts, spec, arm="TS", **common))
    rows.append(_row(report, ts_als_err, wall_ts_als, spec, arm="TS_ALS", **common))
    return rows


def _tasks(spec):
    if spec.kind == "sample_sweep":
        return _sample_task, [
            (spec, r, m, t) for r in spec.ranks for m in spec.slice_budgets(r)
            for t in range(spec.trials)
        ]
    fn = _noise_task if spec.kind == "noise_sweep" else _als_task
    return fn, [
        (spec, r, m, snr, t) for r in spec.ranks for m in spec.slice_budgets(r)
        for snr in spec.snr_list for t in range(spec.trials)
    ]


def run_experiment(spec, threads=1):
    """Run every trial of ``spec``; rows come back in task order."""
    fn, tasks = _tasks(spec)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, tasks))
    else:
        results = [fn(t) for t in tasks]
    return [row for rows in results for row in rows]


def columns_for(kind):
    return {"sample_sweep": SAMPLE_COLUMNS, "noise_sweep": NOISE_COLUMNS,
            "als_compare": ALS_COLUMNS}[kind]


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def rows_to_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def summarize(rows):
    """Median and mean relative error per cell (rank, budget, SNR, arm)."""
    cells = {}
    for row in rows:
        key = (row["rank"], row["slice_budget"], row.get("snr_db", ""), row.get("arm", ""))
        cells.setdefault(key, []).append(row)
    out = []
    for key, group in cells.items():
        errs = np.array([g["rel_error"] for g in group], dtype=float)
        fracs = [g["fraction"] for g in group if g["fraction"] != ""]
        out.append(dict(
            rank=key[0], slice_budget=key[1], snr_db=key[2], arm=key[3],
            trials=len(group),
            successes=sum(g["status"] == "success" for g in group),
            median_rel_error=float(np.median(errs)),
            mean_rel_error=float(np.mean(errs)),
            median_fraction=float(np.median(fracs)) if fracs else "",
        ))
    return out


def _write(rows, spec, path):
    text = rows_to_csv(rows, columns_for(spec.kind))
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
        stem = str(path)[:-4] if str(path).endswith(".csv") else str(path)
        with open(stem + ".summary.csv", "w", newline="") as fh:
            fh.write(rows_to_csv(summarize(rows), SUMMARY_COLUMNS))
    return text


def run_sample_sweep(spec, threads=1):
    """Noiseless error versus slice budget; returns the CSV text."""
    spec = replace(spec, kind="sample_sweep")
    rows = run_experiment(spec, threads)
    return _write(rows, spec, spec.output_path)


def run_noise_sweep(spec, threads=1):
    """Error versus SNR at fixed budgets; returns the CSV text."""
    spec = replace(spec, kind="noise_sweep")
    rows = run_experiment(spec, threads)
    return _write(rows, spec, spec.output_path)


def run_als_compare(spec, threads=1):
    """ALS alone, the sandwich, and the sandwich refined by ALS on the same data."""
    spec = replace(spec, kind="als_compare")
    rows = run_experiment(spec, threads)
    return _write(rows, spec, spec.output_path)


def run_spec(spec, threads=1):
    runner = {"sample_sweep": run_sample_sweep, "noise_sweep": run_noise_sweep,
              "als_compare": run_als_compare}[spec.kind]
    return runner(spec, threads)


def paper_scale(spec):
    """The same sweep at full size: n = 200, ranks 5 to 20; slow."""
    return replace(spec, n=200, ranks=[5, 10, 15, 20])


def parse_csv(text):
    """Read CSV text back into typed rows (numbers become floats/ints)."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in raw.items():
            if k in ("rank", "slice_budget", "trial", "seed", "omega1", "omega2", "total"):
                row[k] = int(v) if v != "" else ""
            elif k in ("fraction", "rel_error", "snr_db", "wall_ms"):
                row[k] = float(v) if v != "" else ""
            else:
                row[k] = v
        rows.append(row)
    return rows
