"""Choose mode-3 fibers whose Khatri-Rao rows keep the C solve well posed."""

import numpy as np
from scipy.linalg import qr

from .errors import PreconditionError, RankDeficient
from .oracle import SampleSet
from .tensor import khatri_rao, linear_to_pair


def select_fibers(A_hat, B_hat, gamma=4, tol=1e-12):
    """Pick ``gamma * r`` fiber locations ``(i, j)`` by pivoted QR.

    Column-pivoted QR of ``khatri_rao(A_hat, B_hat).T`` orders the ``n1*n2``
    candidate rows greedily by residual norm; the first ``r`` pivots are
    linearly independent whenever both factors have full column rank. Pivot
    ``q`` maps to ``(q % n1, q // n1)``.

    Returns
    -------
    list of (int, int)
    """
    A_hat = np.asarray(A_hat, dtype=float)
    B_hat = np.asarray(B_hat, dtype=float)
    n1, r = A_hat.shape
    n2 = B_hat.shape[0]
    if gamma < 1:
        raise PreconditionError("gamma must be >= 1")
    count = int(gamma) * r
    if count > n1 * n2:
        raise PreconditionError(f"gamma*r = {count} exceeds the {n1 * n2} available fibers")

    KR = khatri_rao(A_hat, B_hat)
    # LAPACK geqp3 takes the first maximal column, so ties go to the lowest index
    _, R, piv = qr(KR.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size < r or diag[0] == 0 or diag[r - 1] <= tol * diag[0]:
        raise RankDeficient("Khatri-Rao product of the factor estimates is rank deficient")

    rows = piv[:count]
    i, j = linear_to_pair(rows, n1)
    return [(int(a), int(b)) for a, b in zip(i, j)]


def fibers_to_omega2(pairs, n3):
    """All triples ``(i, j, k)`` for each fiber ``(i, j)`` and ``k < n3``."""
    pairs = [tuple(p) for p in pairs]
    if len(set(pairs)) != len(pairs):
        raise PreconditionError("fiber locations must be distinct")
    if not pairs:
        return SampleSet()
    ij = np.asarray(pairs, dtype=np.int64)
    k = np.arange(n3, dtype=np.int64)
    triples = np.column_stack([
        np.repeat(ij[:, 0], n3),
        np.repeat(ij[:, 1], n3),
        np.tile(k, len(pairs)),
    ])
    return SampleSet(triples)
