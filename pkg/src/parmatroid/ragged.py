"""Ragged integer rows stored as one flat array plus offsets."""
import numpy as np


class Ragged:
    __slots__ = ("flat", "offs")

    def __init__(self, flat, offs):
        self.flat = np.ascontiguousarray(flat, dtype=np.int64)
        self.offs = np.ascontiguousarray(offs, dtype=np.int64)

    @classmethod
    def from_rows(cls, rows):
        rows = [np.asarray(r, dtype=np.int64).ravel() for r in rows]
        offs = np.zeros(len(rows) + 1, dtype=np.int64)
        if rows:
            offs[1:] = np.cumsum([len(r) for r in rows])
            flat = np.concatenate(rows) if offs[-1] else np.zeros(0, np.int64)
        else:
            flat = np.zeros(0, np.int64)
        return cls(flat, offs)

    @classmethod
    def from_matrix(cls, mat):
        mat = np.asarray(mat, dtype=np.int64)
        m, k = mat.shape
        return cls(mat.ravel(), np.arange(m + 1, dtype=np.int64) * k)

    @classmethod
    def from_prefixes(cls, orders, lengths):
        """Rows ``orders[i][:lengths[i]]`` for a 2-D ``orders`` array."""
        orders = np.asarray(orders, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        mask = np.arange(orders.shape[1])[None, :] < lengths[:, None]
        offs = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offs[1:])
        return cls(orders[mask], offs)

    def __len__(self):
        return len(self.offs) - 1

    def lengths(self):
        return np.diff(self.offs)

    def row(self, i):
        return self.flat[self.offs[i]:self.offs[i + 1]]

    def rows(self):
        return [self.row(i) for i in range(len(self))]

    def row_ids(self):
        """Row index of every flat entry."""
        return np.repeat(np.arange(len(self), dtype=np.int64), self.lengths())

    def total(self):
        return int(self.offs[-1])
