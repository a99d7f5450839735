"""Dense order-3 tensors, CP models and the linear-algebra helpers around them.

A dense tensor is a plain ``numpy.ndarray`` with ``ndim == 3``. Slices are
frontal, ``T[:, :, k]``, and vectorize column-major, so entry ``(i, j)`` of a
slice sits at linear position ``q = i + n1 * j``. :func:`khatri_rao` uses the
same ordering for its rows, which makes ``unfold3(T) == C @ khatri_rao(A, B).T``
hold for every CP tensor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, StructuralError


@dataclass(frozen=True)
class CPModel:
    """Rank-r CP model ``sum_i A[:, i] o B[:, i] o C[:, i]``.

    Component weights live in the column scales of ``C``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        mats = []
        for name in "ABC":
            M = np.asarray(getattr(self, name), dtype=float)
            if M.ndim != 2:
                raise StructuralError(f"factor {name} must be 2-d, got shape {M.shape}")
            M = M.copy()
            M.setflags(write=False)
            object.__setattr__(self, name, M)
            mats.append(M)
        ranks = {M.shape[1] for M in mats}
        if len(ranks) != 1:
            raise StructuralError(
                f"factor column counts differ: {[M.shape[1] for M in mats]}"
            )
        if mats[0].shape[1] < 1:
            raise StructuralError("rank must be positive")

    @property
    def rank(self):
        return self.A.shape[1]

    @property
    def shape(self):
        return (self.A.shape[0], self.B.shape[0], self.C.shape[0])

    def full(self):
        return cp_to_dense(self)


def as_tensor3(t):
    """Validate and return ``t`` as a finite float array with three modes."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise StructuralError(f"expected an order-3 tensor, got shape {t.shape}")
    return t


def cp_to_dense(model):
    """Expand a :class:`CPModel` into its dense tensor.

    Entry ``(h, j, k)`` equals ``sum_i A[h, i] * B[j, i] * C[k, i]``.
    """
    if not isinstance(model, CPModel):
        model = CPModel(*model)
    return np.einsum("hi,ji,ki->hjk", model.A, model.B, model.C)


def khatri_rao(A, B):
    """Column-wise Kronecker product with rows ordered ``q = i + n1 * j``.

    Row ``q`` of the result is ``A[i, :] * B[j, :]`` where ``i = q % n1`` and
    ``j = q // n1``; this is the vec ordering used by :func:`unfold3`.

    Parameters
    ----------
    A : (n1, r) array
    B : (n2, r) array

    Returns
    -------
    (n1 * n2, r) array
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise StructuralError("khatri_rao expects two matrices")
    if A.shape[1] != B.shape[1]:
        raise StructuralError(
            f"column counts differ: {A.shape[1]} vs {B.shape[1]}"
        )
    n1, r = A.shape
    n2 = B.shape[0]
    return (B[:, None, :] * A[None, :, :]).reshape(n1 * n2, r)


def vec_slice(M):
    """Column-major vectorization of a matrix slice."""
    return np.asarray(M).ravel(order="F")


def linear_to_pair(q, n1):
    """Invert the slice vec ordering: ``q -> (q % n1, q // n1)``."""
    q = np.asarray(q)
    return q % n1, q // n1


def unfold3(t):
    """Mode-3 unfolding: row ``k`` is ``vec_slice(t[:, :, k])``."""
    t = as_tensor3(t)
    n1, n2, n3 = t.shape
    return t.reshape(n1 * n2, n3, order="F").T


def fold3(M, shape):
    """Inverse of :func:`unfold3`."""
    n1, n2, n3 = shape
    M = np.asarray(M, dtype=float)
    if M.shape != (n3, n1 * n2):
        raise StructuralError(f"cannot fold {M.shape} into {shape}")
    return M.T.reshape(n1, n2, n3, order="F")


def coherence(basis, tol=1e-10):
    """Coherence ``(n/r) * max_i ||row_i(basis)||^2`` of an orthonormal basis.

    The value lies in ``[1, n/r]``; 1 means perfectly spread energy, ``n/r``
    means some coordinate axis lies inside the subspace.
    """
    U = np.asarray(basis, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    n, r = U.shape
    if r == 0 or r > n:
        raise PreconditionError(f"basis shape {U.shape} cannot be orthonormal")
    gram_err = np.max(np.abs(U.T @ U - np.eye(r)))
    if gram_err > tol:
        raise PreconditionError(
            f"basis columns not orthonormal (max |U^T U - I| = {gram_err:.2e})"
        )
    return (n / r) * float(np.max(np.sum(U**2, axis=1)))


def subspace_coherence(M):
    """Coherence of the column span of a full-column-rank matrix."""
    Q, _ = np.linalg.qr(np.asarray(M, dtype=float))
    return coherence(Q)


def kruskal_rank_at_least_2(M, tol=1e-10):
    """True iff no column of ``M`` is zero and no two columns are parallel.

    Every pair of columns is tested by the ratio of its singular values.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 2:
        raise PreconditionError("need a matrix with at least two rows")
    norms = np.linalg.norm(M, axis=0)
    scale = max(float(norms.max(initial=0.0)), np.finfo(float).tiny)
    if np.any(norms <= tol * scale):
        return False
    U = M / norms
    r = U.shape[1]
    for a in range(r):
        for b in range(a + 1, r):
            # |sin| of the angle via the chord, which stays accurate near parallel
            sign = 1.0 if U[:, a] @ U[:, b] >= 0 else -1.0
            chord = np.linalg.norm(U[:, a] - sign * U[:, b])
            if chord * np.sqrt(max(1.0 - chord * chord / 4.0, 0.0)) <= tol:
                return False
    return True


def generate_synthetic(n, r, seed, weights=None):
    """Random CP tensor with unit-norm Gaussian factor columns.

    Column ``i`` of ``C`` is scaled by ``weights[i]``, which defaults to
    ``1 / (i + 1)**2``.

    Returns
    -------
    (CPModel, ndarray)
    """
    if r < 1 or n < 1:
        raise PreconditionError("n and r must be positive")
    if r > n:
        raise PreconditionError(f"rank {r} exceeds mode size {n}")
    if weights is None:
        weights = 1.0 / np.arange(1, r + 1) ** 2
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (r,):
        raise StructuralError(f"need {r} weights, got shape {weights.shape}")

    rng = np.random.default_rng(seed)
    A, B, C = (rng.standard_normal((n, r)) for _ in range(3))
    A /= np.linalg.norm(A, axis=0)
    B /= np.linalg.norm(B, axis=0)
    C /= np.linalg.norm(C, axis=0)
    C *= weights
    model = CPModel(A, B, C)
    return model, cp_to_dense(model)


def add_noise_snr(t, snr_db, seed):
    """Add Gaussian noise N scaled so ``10 log10(||t|| / ||N||) == snr_db``.

    ``snr_db = inf`` returns an unchanged copy.
    """
    t = as_tensor3(t)
    if np.isinf(snr_db) and snr_db > 0:
        return t.copy()
    norm_t = np.linalg.norm(t)
    if norm_t == 0:
        raise PreconditionError("cannot set an SNR against a zero tensor")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(t.shape)
    noise *= norm_t / (np.linalg.norm(noise) * 10.0 ** (snr_db / 10.0))
    return t + noise


def relative_error(est, truth):
    """Frobenius relative error ``||est - truth|| / ||truth||``."""
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise StructuralError(f"shape mismatch {est.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise PreconditionError("truth tensor is zero")
    return float(np.linalg.norm(est - truth) / denom)
