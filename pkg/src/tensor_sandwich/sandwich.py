"""End-to-end tensor completion: slices, simultaneous diagonalization, fibers."""

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .censored import solve_C
from .errors import (
    DegenerateEigenvalues,
    NonRealSpectrum,
    PreconditionError,
    StructuralError,
    TensorSandwichError,
)
from .fibers import select_fibers
from .jennrich import aggregate, draw_sphere, jennrich_factors
from .slices import SliceCompletionConfig, complete_slices
from .tensor import CPModel, cp_to_dense, relative_error

SUCCESS = "success"


@dataclass(frozen=True)
class SandwichConfig:
    """Pipeline settings.

    ``seed`` drives every random choice (slice selection, per-slice probes,
    the sphere draws); ``slice_cfg.seed`` is overridden. The CP rank is
    ``slice_cfg.rank_cap``. Pass ``slices`` to fix the completed slices
    instead of drawing ``s`` of them uniformly.
    """

    slice_cfg: SliceCompletionConfig
    s: int = 2
    slices: tuple = None
    gamma: int = 4
    delta: float = 0.1
    seed: int = 0
    als_iters: int = 0
    max_redraws: int = 10
    pinv_tol: float = 1e-10
    eigengap_tol: float = 1e-6

    def __post_init__(self):
        if self.slices is not None:
            object.__setattr__(self, "slices", tuple(int(k) for k in self.slices))
            object.__setattr__(self, "s", len(self.slices))
        if self.s < 2:
            raise PreconditionError("need s >= 2 slices")
        if self.gamma < 1:
            raise PreconditionError("gamma must be >= 1")
        if self.als_iters < 0 or self.max_redraws < 0:
            raise PreconditionError("iteration counts must be non-negative")

    @property
    def rank(self):
        return self.slice_cfg.rank_cap


@dataclass
class CompletionReport:
    omega1_count: int = 0
    omega2_count: int = 0
    total_count: int = 0
    fraction: float = 0.0
    phase_timings: dict = field(default_factory=dict)
    rel_error: float = None
    jennrich_redraws: int = 0
    status: str = SUCCESS
    message: str = ""
    slices: list = field(default_factory=list)
    fibers: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == SUCCESS

    def to_dict(self):
        return asdict(self)


def _seed_streams(seed):
    ss = np.random.SeedSequence(seed)
    select, slices, sphere = ss.spawn(3)
    return (
        np.random.default_rng(select),
        int(slices.generate_state(1)[0]),
        np.random.default_rng(sphere),
    )


def tensor_sandwich(oracle, cfg, truth=None):
    """Complete the oracle's tensor from adaptively chosen entries.

    Parameters
    ----------
    oracle : SamplingOracle
    cfg : SandwichConfig
    truth : ndarray, optional
        When given, ``report.rel_error`` is filled in. It is never read by
        the reconstruction.

    Returns
    -------
    model : CPModel or None
        ``None`` when a phase failed; ``report.status`` names the failure.
    report : CompletionReport
    """
    n1, n2, n3 = oracle.shape
    r = cfg.rank
    if r > min(n1, n2):
        raise PreconditionError(f"rank {r} exceeds the slice dimensions {n1}x{n2}")
    rng_select, slice_seed, rng_sphere = _seed_streams(cfg.seed)
    report = CompletionReport()
    timings = report.phase_timings

    def finish(model):
        counts = oracle.sample_report()
        report.omega1_count = counts.omega1
        report.omega2_count = counts.omega2
        report.total_count = counts.total
        report.fraction = counts.fraction
        if model is not None and truth is not None:
            report.rel_error = relative_error(cp_to_dense(model), truth)
        return model, report

    try:
        t0 = time.perf_counter()
        if cfg.slices is not None:
            S = list(cfg.slices)
        else:
            if cfg.s > n3:
                raise PreconditionError(f"cannot pick {cfg.s} of {n3} slices")
            S = sorted(int(k) for k in rng_select.choice(n3, cfg.s, replace=False))
        report.slices = S
        completions, _ = complete_slices(
            oracle, S, replace(cfg.slice_cfg, seed=slice_seed)
        )
        mats = [c.matrix for c in completions]
        report.diagnostics["columns_fully_sampled"] = [c.columns_fully_sampled for c in completions]
        report.diagnostics["rank_cap_hits"] = [c.rank_cap_hits for c in completions]
        timings["slice_complete"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        jr = None
        for attempt in range(cfg.max_redraws + 1):
            u = draw_sphere(len(S), rng_sphere)
            v = draw_sphere(len(S), rng_sphere)
            try:
                jr = jennrich_factors(
                    aggregate(mats, u), aggregate(mats, v), r,
                    tol=cfg.pinv_tol, eigengap_tol=cfg.eigengap_tol,
                )
                break
            except (DegenerateEigenvalues, NonRealSpectrum) as exc:
                report.jennrich_redraws = attempt + 1
                last = exc
        if jr is None:
            raise type(last)(f"{last} (after {cfg.max_redraws} redraws)")
        report.jennrich_redraws = attempt
        report.diagnostics["min_eigengap"] = jr.min_eigengap
        report.diagnostics["condition_diag"] = jr.condition_diag
        timings["jennrich"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        pairs = select_fibers(jr.A_hat, jr.B_hat, cfg.gamma)
        report.fibers = pairs
        C_hat = solve_C(jr.A_hat, jr.B_hat, oracle, pairs, n3)
        model = CPModel(jr.A_hat, jr.B_hat, C_hat)
        timings["censored_lstsq"] = time.perf_counter() - t0

        if cfg.als_iters:
            t0 = time.perf_counter()
            trace = {}
            model = masked_als(oracle, model, cfg.als_iters, trace=trace)
            report.diagnostics["als_skipped_rows"] = trace["skipped"]
            report.diagnostics["als_residuals"] = trace["residuals"]
            timings["als"] = time.perf_counter() - t0
    except StructuralError:
        raise
    except TensorSandwichError as exc:
        report.status = type(exc).__name__
        report.message = str(exc)
        return finish(None)

    if not np.all(np.isfinite(model.A)) or not np.all(np.isfinite(model.C)):
        report.status = "NonFiniteEstimate"
        return finish(None)
    return finish(model)


def _mode_operator(index, n):
    m = index.size
    return sp.csr_matrix((np.ones(m), (index, np.arange(m))), shape=(n, m))


def _observed_residual(idx, vals, A, B, C):
    pred = np.sum(A[idx[:, 0]] * B[idx[:, 1]] * C[idx[:, 2]], axis=1)
    return float(np.linalg.norm(vals - pred))


def masked_als_entries(idx, vals, shape, init, iters, cond_tol=1e-12, trace=None):
    """Masked ALS on explicit observations ``vals`` at triples ``idx``.

    Each sweep updates A, B then C; every row of the updated factor solves
    its own least-squares problem over the observations that touch it. Rows
    whose system is numerically singular keep their previous value.
    """
    idx = np.asarray(idx, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if idx.ndim != 2 or idx.shape[1] != 3 or idx.shape[0] != vals.size:
        raise StructuralError("idx must be (m, 3) matching vals")
    if tuple(init.shape) != tuple(shape):
        raise StructuralError(f"init shape {init.shape} does not match {shape}")
    factors = [init.A.copy(), init.B.copy(), init.C.copy()]
    r = init.rank
    ops = [_mode_operator(idx[:, m], shape[m]) for m in range(3)]
    skipped = 0
    history = [_observed_residual(idx, vals, *factors)]

    for _ in range(iters):
        for mode in range(3):
            others = [f for m, f in enumerate(factors) if m != mode]
            ia, ib = [m for m in range(3) if m != mode]
            Z = others[0][idx[:, ia]] * others[1][idx[:, ib]]
            G = (ops[mode] @ (Z[:, :, None] * Z[:, None, :]).reshape(-1, r * r)).reshape(-1, r, r)
            rhs = ops[mode] @ (Z * vals[:, None])

            # Jacobi scaling before the solve keeps decaying components accurate
            d = np.sqrt(np.einsum("nii->ni", G))
            ok = np.all(d > 0, axis=1)
            d[~ok] = 1.0
            Gs = G / d[:, :, None] / d[:, None, :]
            ev = np.linalg.eigvalsh(Gs)
            ok &= ev[:, 0] > cond_tol * ev[:, -1]
            skipped += int(np.sum(~ok))
            F = factors[mode]
            if np.any(ok):
                y = np.linalg.solve(Gs[ok], (rhs[ok] / d[ok])[:, :, None])[:, :, 0]
                F[ok] = y / d[ok]

            if mode < 2:
                # move column norms into C so the model is unchanged
                norms = np.linalg.norm(F, axis=0)
                norms[norms == 0] = 1.0
                F /= norms
                factors[2] *= norms
        history.append(_observed_residual(idx, vals, *factors))

    if trace is not None:
        trace["residuals"] = history
        trace["skipped"] = skipped
    return CPModel(*factors)


def masked_als(oracle, init, iters, cond_tol=1e-12, trace=None):
    """Refine ``init`` by masked ALS on the entries the oracle has already seen.

    No new entries are read. Pass a dict as ``trace`` to receive the
    observed-entry residual after every sweep (``"residuals"``) and the
    number of skipped row updates (``"skipped"``).
    """
    idx, vals = oracle.observed_entries()
    return masked_als_entries(idx, vals, oracle.shape, init, iters, cond_tol, trace)


def random_init(shape, r, seed):
    """Gaussian CP model with unit-norm columns, for ALS started from scratch."""
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((n, r)) for n in shape]
    return CPModel(*[M / np.linalg.norm(M, axis=0) for M in mats])
