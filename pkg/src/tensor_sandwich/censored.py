"""Censored least squares for the third CP factor."""

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import IllConditionedFibers, StructuralError
from .tensor import khatri_rao, unfold3


def restricted_khatri_rao(A_hat, B_hat, pairs):
    """Rows of ``khatri_rao(A_hat, B_hat)`` at fiber locations ``pairs``."""
    ij = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.asarray(A_hat)[ij[:, 0]] * np.asarray(B_hat)[ij[:, 1]]


def lstsq_shared(K, T, cond_tol=1e-10):
    """Solve ``K c_k = T[:, k]`` for every column of ``T`` with one QR of ``K``.

    Raises :class:`IllConditionedFibers` if ``sigma_min(K) < cond_tol * sigma_max(K)``.
    """
    K = np.asarray(K, dtype=float)
    T = np.asarray(T, dtype=float)
    m, r = K.shape
    if m < r:
        raise IllConditionedFibers(f"{m} rows cannot determine {r} unknowns")
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[-1] < cond_tol * sv[0]:
        raise IllConditionedFibers(
            f"restricted Khatri-Rao matrix has sigma_min/sigma_max = {sv[-1] / sv[0]:.2e}"
        )
    Q, R = qr(K, mode="economic")
    return solve_triangular(R, Q.T @ T)


def solve_C(A_hat, B_hat, oracle, pairs, n3=None):
    """Recover ``C`` (``n3 x r``) from the tubes ``T[i, j, :]`` at ``pairs``.

    Every tube is read through the oracle under phase ``"omega2"``. Row ``k``
    of the result solves ``khatri_rao(A_hat, B_hat)[K] c = t_K`` where ``K``
    indexes the fiber rows, so any column scaling carried by ``B_hat`` is
    absorbed into ``C``.
    """
    A_hat = np.asarray(A_hat, dtype=float)
    B_hat = np.asarray(B_hat, dtype=float)
    if A_hat.shape[1] != B_hat.shape[1]:
        raise StructuralError("factor estimates have different ranks")
    if n3 is None:
        n3 = oracle.shape[2]
    if n3 != oracle.shape[2]:
        raise StructuralError(f"n3={n3} does not match oracle shape {oracle.shape}")
    ij = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    K = restricted_khatri_rao(A_hat, B_hat, ij)

    k = np.arange(n3)
    with oracle.phase("omega2"):
        tubes = oracle.query_many(ij[:, 0, None], ij[:, 1, None], k[None, :])
    # tubes: (len(pairs), n3); column k is t_K for slice k
    return lstsq_shared(K, tubes).T


def censored_residual(A_hat, B_hat, C, pairs, tubes):
    """Relative residual of the censored system per slice."""
    K = restricted_khatri_rao(A_hat, B_hat, pairs)
    R = K @ np.asarray(C).T - tubes
    denom = np.linalg.norm(tubes, axis=0)
    denom[denom == 0] = 1.0
    return np.linalg.norm(R, axis=0) / denom


def full_lstsq_C(A_hat, B_hat, t):
    """Unrestricted least squares ``unfold3(t) ~ C khatri_rao(A_hat, B_hat)^T``."""
    KR = khatri_rao(A_hat, B_hat)
    return np.linalg.lstsq(KR, unfold3(t).T, rcond=None)[0].T
