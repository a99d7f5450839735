"""Adaptive completion of frontal slices by sequential column-subspace tracking.

Each column of a slice is probed at ``d`` random rows. If the probe is
explained by the current basis the column is filled in by least squares on
that basis; otherwise the whole column is read and appended to the basis.
A rank-r slice therefore costs about ``n*d + r*(n - d)`` reads.
"""

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, PreconditionError, RankCapExceeded, StructuralError

SliceCompletion = namedtuple(
    "SliceCompletion", "matrix columns_fully_sampled basis queries rank_cap_hits"
)

_RANK_CAP_MODES = ("raise", "project")


@dataclass(frozen=True)
class SliceCompletionConfig:
    """Knobs for :func:`complete_slice`.

    Parameters
    ----------
    rank_cap : int
        Largest basis the tracker may build (the CP rank r).
    per_column_samples : int
        Probe size ``d``; values above the column length read whole columns.
    budget : int
        Maximum number of reads for one slice.
    residual_tol : float
        A probe counts as explained when its residual energy is at most
        ``residual_tol * ||probe||^2``.
    seed : int
    on_rank_cap : {"raise", "project"}
        What to do when a column needs a full read but the basis already
        holds ``rank_cap`` vectors. ``"project"`` keeps the least-squares fit
        instead, which is the useful behavior for noisy slices.
    """

    rank_cap: int
    per_column_samples: int
    budget: int
    residual_tol: float = 1e-8
    seed: int = 0
    on_rank_cap: str = "raise"

    def __post_init__(self):
        if self.rank_cap < 1:
            raise PreconditionError("rank_cap must be >= 1")
        if self.per_column_samples < 1:
            raise PreconditionError("per_column_samples must be >= 1")
        if self.residual_tol < 0:
            raise PreconditionError("residual_tol must be >= 0")
        if self.budget < 0:
            raise PreconditionError("budget must be >= 0")
        if self.on_rank_cap not in _RANK_CAP_MODES:
            raise PreconditionError(f"on_rank_cap must be one of {_RANK_CAP_MODES}")


def default_column_samples(mu0, r, delta, n, const=2.0):
    """Probe size ``ceil(const * mu0 * r * log(r^2/delta)^2)``, capped at ``n``."""
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    d = math.ceil(const * mu0 * r * math.log(r * r / delta) ** 2)
    return int(min(max(d, 1), n))


def default_slice_budget(d, n, r):
    """Per-slice budget ``d*n + r*n``, enough for any run that respects the rank cap."""
    return int(d * n + r * n)


def column_samples_for_budget(budget, n1, n2, r):
    """Largest probe size whose worst successful run fits in ``budget``.

    A successful run reads one full column, probes the other ``n2 - 1``
    columns with ``d`` reads each and tops up at most ``r - 1`` of them.
    Probes only test anything when ``d > r``, so smaller budgets usually
    end in :class:`BudgetExceeded`.
    Returns 1 when even ``d = 1`` does not fit.
    """
    for d in range(n1, 0, -1):
        cost = n1 + (n2 - 1) * d + (r - 1) * (n1 - d)
        if cost <= budget:
            return d
    return 1


def _orthonormal_extend(U, x):
    """Append the component of ``x`` orthogonal to ``U``; ``None`` if negligible."""
    norm_x = np.linalg.norm(x)
    if norm_x == 0:
        return None
    w = x.copy()
    # two passes of Gram-Schmidt for stability
    for _ in range(2):
        w -= U @ (U.T @ w)
    norm_w = np.linalg.norm(w)
    if norm_w <= 1e-12 * norm_x:
        return None
    return np.column_stack([U, w / norm_w])


def complete_slice(oracle, k, cfg):
    """Complete frontal slice ``k`` of the oracle's tensor.

    Returns
    -------
    SliceCompletion
        ``matrix`` (the completed slice), ``columns_fully_sampled``,
        ``basis`` (orthonormal estimate of the column space), ``queries``
        (reads issued for this slice) and ``rank_cap_hits``.

    Raises
    ------
    BudgetExceeded
        The next read would go past ``cfg.budget``.
    RankCapExceeded
        A column outside a full-size basis was detected and
        ``cfg.on_rank_cap == "raise"``.
    """
    n1, n2, n3 = oracle.shape
    if not 0 <= k < n3:
        raise StructuralError(f"slice index {k} out of range [0, {n3})")
    d = min(cfg.per_column_samples, n1)
    rng = np.random.default_rng(cfg.seed)

    U = np.empty((n1, 0))
    X = np.empty((n1, n2))
    queries = 0
    full_cols = 0
    cap_hits = 0
    all_rows = np.arange(n1)

    def spend(count):
        nonlocal queries
        if queries + count > cfg.budget:
            raise BudgetExceeded(
                f"slice {k}: {queries} reads used, {count} more needed, budget {cfg.budget}",
                slice_index=k, queries=queries, budget=cfg.budget,
            )
        queries += count

    for j in range(n2):
        if U.shape[1] == 0:
            spend(n1)
            x = oracle.query_column(all_rows, j, k)
            X[:, j] = x
            full_cols += 1
            U_new = _orthonormal_extend(U, x)
            if U_new is not None:
                U = U_new
            continue

        rows = np.sort(rng.choice(n1, size=d, replace=False))
        spend(d)
        x_om = oracle.query_column(rows, j, k)
        U_om = U[rows]
        sv = np.linalg.svd(U_om, compute_uv=False)
        # a probe with no more rows than basis vectors cannot reveal a new direction
        well_posed = U_om.shape[0] > U_om.shape[1] and sv[-1] > 1e-10 * sv[0]

        at_cap = U.shape[1] >= cfg.rank_cap
        if well_posed:
            coef = np.linalg.lstsq(U_om, x_om, rcond=None)[0]
            resid = x_om - U_om @ coef
            if resid @ resid <= cfg.residual_tol * (x_om @ x_om):
                X[:, j] = U @ coef
                continue
            if at_cap:
                if cfg.on_rank_cap == "raise":
                    raise RankCapExceeded(
                        f"slice {k}: column {j} lies outside a rank-{cfg.rank_cap} basis",
                        slice_index=k,
                    )
                cap_hits += 1
                X[:, j] = U @ coef
                continue
        elif at_cap and cfg.on_rank_cap == "project":
            cap_hits += 1
            X[:, j] = U @ np.linalg.lstsq(U_om, x_om, rcond=None)[0]
            continue

        # probe not explained, or too few rows to test it: read the rest
        rest = np.setdiff1d(all_rows, rows, assume_unique=True)
        spend(rest.size)
        x = np.empty(n1)
        x[rows] = x_om
        if rest.size:
            x[rest] = oracle.query_column(rest, j, k)
        X[:, j] = x
        full_cols += 1
        U_new = _orthonormal_extend(U, x)
        if U_new is not None:
            if at_cap:
                raise RankCapExceeded(
                    f"slice {k}: column {j} lies outside a rank-{cfg.rank_cap} basis",
                    slice_index=k,
                )
            U = U_new

    return SliceCompletion(X, full_cols, U, queries, cap_hits)


def complete_slices(oracle, S, cfg):
    """Complete every slice in ``S`` with independent randomness per slice.

    Reads are tagged as phase ``"omega1"`` on the oracle.

    Returns
    -------
    completions : list of SliceCompletion
    omega1 : int
        Distinct entries read in phase ``"omega1"`` so far.
    """
    S = [int(k) for k in S]
    if len(S) < 1:
        raise StructuralError("need at least one slice")
    if len(set(S)) != len(S):
        raise StructuralError(f"duplicate slice indices in {S}")
    n3 = oracle.shape[2]
    for k in S:
        if not 0 <= k < n3:
            raise StructuralError(f"slice index {k} out of range [0, {n3})")

    seeds = np.random.SeedSequence(cfg.seed).spawn(len(S))
    completions = []
    with oracle.phase("omega1"):
        for k, ss in zip(S, seeds):
            slice_cfg = SliceCompletionConfig(
                rank_cap=cfg.rank_cap,
                per_column_samples=cfg.per_column_samples,
                budget=cfg.budget,
                residual_tol=cfg.residual_tol,
                seed=int(ss.generate_state(1)[0]),
                on_rank_cap=cfg.on_rank_cap,
            )
            completions.append(complete_slice(oracle, k, slice_cfg))
    return completions, oracle.phase_count("omega1")
