"""Gated access to ground-truth tensor entries with exact sample accounting."""

from collections import namedtuple
from contextlib import contextmanager

import numpy as np

from .errors import StructuralError
from .tensor import as_tensor3

SampleReport = namedtuple("SampleReport", "omega1 omega2 total fraction")


class SampleSet:
    """Finite set of distinct 0-based index triples ``(i, j, k)``."""

    __slots__ = ("_triples",)

    def __init__(self, triples=()):
        arr = np.asarray(list(triples) if not isinstance(triples, np.ndarray) else triples,
                         dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 3), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise StructuralError(f"triples must have shape (m, 3), got {arr.shape}")
        if np.any(arr < 0):
            raise StructuralError("negative index in sample set")
        arr = np.unique(arr, axis=0)
        arr.setflags(write=False)
        self._triples = arr

    @property
    def triples(self):
        return self._triples

    def __len__(self):
        return len(self._triples)

    def __iter__(self):
        return (tuple(int(x) for x in row) for row in self._triples)

    def __contains__(self, item):
        item = np.asarray(item, dtype=np.int64)
        return bool(np.any(np.all(self._triples == item, axis=1)))

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return np.array_equal(self._triples, other._triples)

    def __or__(self, other):
        return SampleSet(np.vstack([self._triples, other._triples]))

    def __repr__(self):
        return f"SampleSet(<{len(self)} triples>)"


class SamplingOracle:
    """Sole reader of a hidden tensor; every distinct entry read is counted once.

    Reads are grouped into named phases with :meth:`phase`. The pipeline tags
    slice completion as ``"omega1"`` and fiber sampling as ``"omega2"``; a
    triple read in both phases counts once in the total.

    Parameters
    ----------
    source : array_like, shape (n1, n2, n3)
        Ground truth, possibly noise-corrupted.
    """

    def __init__(self, source):
        src = as_tensor3(source)
        self._source = src.copy()
        self._source.setflags(write=False)
        self.shape = src.shape
        size = src.size
        self._observed = np.zeros(size, dtype=bool)
        self._values = np.full(size, np.nan)
        self._count = 0
        self._phase_masks = {}
        self._phase = None

    @property
    def query_count(self):
        return self._count

    @property
    def size(self):
        return self._observed.size

    @contextmanager
    def phase(self, name):
        """Attribute all queries made inside the block to phase ``name``."""
        prev = self._phase
        self._phase = name
        self._phase_masks.setdefault(name, np.zeros(self.size, dtype=bool))
        try:
            yield self
        finally:
            self._phase = prev

    def _flat(self, i, j, k):
        i, j, k = (np.asarray(x, dtype=np.int64) for x in (i, j, k))
        n1, n2, n3 = self.shape
        if (np.any(i < 0) or np.any(i >= n1) or np.any(j < 0) or np.any(j >= n2)
                or np.any(k < 0) or np.any(k >= n3)):
            raise StructuralError(f"index out of range for shape {self.shape}")
        return np.ravel_multi_index((i, j, k), self.shape)

    def _record(self, flat):
        flat = np.atleast_1d(flat)
        new = np.unique(flat[~self._observed[flat]])
        if new.size:
            self._observed[new] = True
            self._values[new] = self._source.ravel()[new]
            self._count += int(new.size)
        if self._phase is not None:
            self._phase_masks[self._phase][flat] = True

    def query(self, i, j, k):
        """Return entry ``(i, j, k)`` and record it as observed."""
        flat = self._flat(i, j, k)
        self._record(flat)
        return float(self._values[flat])

    def query_many(self, i, j, k):
        """Vectorized :meth:`query`; index arrays broadcast together."""
        flat = self._flat(i, j, k)
        self._record(flat.ravel())
        return self._values[flat]

    def query_column(self, rows, j, k):
        """Entries ``(rows, j, k)`` of a single column of slice ``k``."""
        rows = np.asarray(rows, dtype=np.int64)
        return self.query_many(rows, np.full_like(rows, j), np.full_like(rows, k))

    def phase_count(self, name):
        mask = self._phase_masks.get(name)
        return 0 if mask is None else int(mask.sum())

    def observed(self):
        """All observed entries as a :class:`SampleSet`."""
        flat = np.flatnonzero(self._observed)
        return SampleSet(np.column_stack(np.unravel_index(flat, self.shape)))

    def phase_samples(self, name):
        mask = self._phase_masks.get(name)
        if mask is None:
            return SampleSet()
        flat = np.flatnonzero(mask)
        return SampleSet(np.column_stack(np.unravel_index(flat, self.shape)))

    def observed_entries(self):
        """``(indices, values)`` of everything observed so far; no new reads.

        ``indices`` has shape ``(m, 3)``.
        """
        flat = np.flatnonzero(self._observed)
        idx = np.column_stack(np.unravel_index(flat, self.shape))
        return idx, self._values[flat].copy()

    def observed_mask(self):
        return self._observed.reshape(self.shape).copy()

    def sample_report(self):
        """Distinct counts for ``omega1``, ``omega2``, the union, and ``|Ω| / size``."""
        total = self._count
        return SampleReport(
            self.phase_count("omega1"),
            self.phase_count("omega2"),
            total,
            total / self.size,
        )
