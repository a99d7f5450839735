"""Recover two CP factors from completed frontal slices by simultaneous diagonalization.

For random weight vectors u, v the aggregates ``T_u = A D_u B^T`` and
``T_v = A D_v B^T`` share the factors; ``T_u pinv(T_v) = A D_u D_v^{-1} pinv(A)``
so its leading eigenvectors are the columns of A. The matching (rescaled)
columns of B follow from ``pinv(A) T_u``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigenvalues, NonRealSpectrum, RankDeficient, StructuralError


@dataclass(frozen=True)
class JennrichResult:
    A_hat: np.ndarray
    B_hat: np.ndarray
    eigenvalues: np.ndarray
    min_eigengap: float
    condition_diag: float


def draw_sphere(s, rng):
    """Uniform draw from the unit sphere in R^s (normalized Gaussian)."""
    if s < 1:
        raise StructuralError("sphere dimension must be >= 1")
    while True:
        g = rng.standard_normal(s)
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm


def aggregate(slices, w):
    """Weighted sum ``sum_k w[k] * slices[k]`` of equally shaped matrices."""
    w = np.asarray(w, dtype=float)
    if len(slices) != w.size:
        raise StructuralError(f"{len(slices)} slices but {w.size} weights")
    if not slices:
        raise StructuralError("no slices to aggregate")
    stack = np.stack([np.asarray(M, dtype=float) for M in slices])
    return np.tensordot(w, stack, axes=1)


def truncated_pinv(M, r, tol=1e-10):
    """Rank-r pseudoinverse from the truncated SVD.

    Also returns ``sigma_r / sigma_1``. Raises :class:`RankDeficient` when
    ``sigma_r <= tol * sigma_1``.
    """
    U, sv, Vt = np.linalg.svd(M, full_matrices=False)
    if sv.size < r or sv[0] == 0 or sv[r - 1] <= tol * sv[0]:
        got = int(np.sum(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0
        raise RankDeficient(f"matrix has numerical rank {got} < {r}")
    pinv = (Vt[:r].T / sv[:r]) @ U[:, :r].T
    return pinv, float(sv[r - 1] / sv[0])


def _normalize_columns(V):
    V = V / np.linalg.norm(V, axis=0)
    # sign convention: largest-magnitude entry of each column is positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def jennrich_factors(T_u, T_v, r, tol=1e-10, eigengap_tol=1e-6, imag_tol=1e-8):
    """Simultaneously diagonalize two slice aggregates.

    Parameters
    ----------
    T_u, T_v : (n1, n2) arrays
        Aggregates of the same slices under different random weights.
    r : int
        CP rank.
    tol : float
        Relative singular-value cutoff of the rank-r pseudoinverse of ``T_v``.
    eigengap_tol : float
        Minimum separation of the kept eigenvalues, and of the r-th from
        the discarded ones, relative to ``max |lambda|``.
    imag_tol : float
        Kept eigenvalues with ``|imag| > imag_tol * |lambda|`` are rejected.

    Returns
    -------
    JennrichResult
        ``A_hat`` has unit-norm columns sorted by decreasing ``|lambda|``;
        ``B_hat`` is index-matched and carries the component scales, so
        ``A_hat @ B_hat.T == T_u`` for exact inputs.
    """
    T_u = np.asarray(T_u, dtype=float)
    T_v = np.asarray(T_v, dtype=float)
    if T_u.shape != T_v.shape or T_u.ndim != 2:
        raise StructuralError(f"aggregate shapes differ: {T_u.shape} vs {T_v.shape}")
    n1, n2 = T_u.shape
    if not 1 <= r <= min(n1, n2):
        raise StructuralError(f"rank {r} incompatible with {T_u.shape}")

    pinv_v, cond = truncated_pinv(T_v, r, tol)
    M = T_u @ pinv_v
    lam, vecs = np.linalg.eig(M)

    # largest |lambda| first, ties broken by larger real part
    order = np.lexsort((-lam.real, -np.abs(lam)))
    lam = lam[order]
    vecs = vecs[:, order]
    kept = lam[:r]
    scale = np.abs(kept[0])
    if scale == 0:
        raise DegenerateEigenvalues("all eigenvalues vanish")

    if np.any(np.abs(kept.imag) > imag_tol * np.abs(kept)):
        raise NonRealSpectrum(f"complex eigenvalues among the leading {r}: {kept}")
    kept = kept.real

    if r > 1:
        diffs = np.abs(kept[:, None] - kept[None, :])
        gap = float(np.min(diffs[np.triu_indices(r, 1)]))
    else:
        gap = float(scale)
    if r < lam.size:
        # separation from the (numerically) null eigenvalues
        gap = min(gap, float(np.abs(kept[-1]) - np.abs(lam[r])))
    if gap <= eigengap_tol * scale:
        raise DegenerateEigenvalues(
            f"eigenvalue gap {gap:.3e} below {eigengap_tol:g} * {scale:.3e}"
        )

    A_hat = _normalize_columns(vecs[:, :r].real)
    sv_a = np.linalg.svd(A_hat, compute_uv=False)
    if sv_a[-1] <= tol * sv_a[0]:
        raise RankDeficient("recovered eigenvectors are linearly dependent")
    B_hat = (np.linalg.pinv(A_hat) @ T_u).T
    return JennrichResult(A_hat, B_hat, kept, gap, cond)
