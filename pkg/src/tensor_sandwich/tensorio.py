"""Tensor container files.

Format ``tensor-sandwich/1`` is a NumPy ``.npz`` archive holding:

``format``
    the string ``"tensor-sandwich/1"``
``dims``
    int64 array ``[n1, n2, n3]``
``values``
    float64 array of ``n1*n2*n3`` entries in row-major (C) order, so entry
    ``(i, j, k)`` sits at ``(i*n2 + j)*n3 + k``
``A``, ``B``, ``C`` (optional)
    CP factors that generated the tensor
``truth`` (optional)
    noiseless tensor values, same layout as ``values``, for error reporting
"""

import numpy as np

from .errors import StructuralError
from .tensor import CPModel, as_tensor3

FORMAT = "tensor-sandwich/1"


def save_tensor(path, tensor, model=None, truth=None):
    t = as_tensor3(tensor)
    payload = dict(
        format=np.array(FORMAT),
        dims=np.array(t.shape, dtype=np.int64),
        values=np.ascontiguousarray(t, dtype=np.float64).ravel(order="C"),
    )
    if model is not None:
        payload.update(A=model.A, B=model.B, C=model.C)
    if truth is not None:
        truth = as_tensor3(truth)
        if truth.shape != t.shape:
            raise StructuralError("truth and tensor shapes differ")
        payload["truth"] = truth.ravel(order="C")
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_tensor(path):
    """Return ``(tensor, model_or_None, truth_or_None)``."""
    with np.load(path, allow_pickle=False) as z:
        fmt = str(z["format"]) if "format" in z.files else None
        if fmt != FORMAT:
            raise StructuralError(f"{path}: unsupported container format {fmt!r}")
        dims = tuple(int(x) for x in z["dims"])
        if len(dims) != 3:
            raise StructuralError(f"{path}: expected 3 dims, got {dims}")
        values = z["values"]
        if values.size != np.prod(dims):
            raise StructuralError(f"{path}: {values.size} values for dims {dims}")
        tensor = values.reshape(dims, order="C")
        model = CPModel(z["A"], z["B"], z["C"]) if "A" in z.files else None
        truth = z["truth"].reshape(dims, order="C") if "truth" in z.files else None
    return tensor, model, truth
