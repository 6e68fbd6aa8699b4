# modules/exact_core/matrices.py

from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from core.exceptions import DimensionMismatchError, RingMismatchError
from .rings import RingSpec


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    """Dense matrix of exact scalars; acts on column vectors."""
    ring: RingSpec
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=object)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-d array, got {arr.ndim} dimensions")
        out = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(arr.shape):
            out[idx] = self.ring.coerce(arr[idx])
        out.flags.writeable = False
        object.__setattr__(self, "entries", out)

    # constructors
    @classmethod
    def zeros(cls, ring: RingSpec, rows: int, cols: int) -> "ExactMatrix":
        arr = np.empty((rows, cols), dtype=object)
        arr.fill(ring.zero())
        return cls(ring, arr)

    @classmethod
    def identity(cls, ring: RingSpec, n: int) -> "ExactMatrix":
        arr = np.empty((n, n), dtype=object)
        arr.fill(ring.zero())
        for i in range(n):
            arr[i, i] = ring.one()
        return cls(ring, arr)

    @classmethod
    def from_rows(cls, ring: RingSpec, rows: Sequence[Sequence[Any]], cols: Optional[int] = None) -> "ExactMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls.zeros(ring, 0, cols or 0)
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionMismatchError("ragged row list")
        arr = np.empty((len(rows), width), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                arr[i, j] = x
        return cls(ring, arr)

    @classmethod
    def integer(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "ExactMatrix":
        return cls.from_rows(RingSpec.integers(), rows, cols)

    @classmethod
    def column(cls, ring: RingSpec, values: Iterable[Any]) -> "ExactMatrix":
        return cls.from_rows(ring, [[v] for v in values], cols=1)

    @classmethod
    def block(cls, ring: RingSpec, blocks: List[List["ExactMatrix"]]) -> "ExactMatrix":
        """Assemble a block matrix; every block row/column must agree in size."""
        if not blocks:
            return cls.zeros(ring, 0, 0)
        heights = [row[0].rows for row in blocks]
        widths = [b.cols for b in blocks[0]]
        for i, row in enumerate(blocks):
            for j, b in enumerate(row):
                if b.shape != (heights[i], widths[j]):
                    raise DimensionMismatchError(
                        f"block ({i},{j}) has shape {b.shape}, expected {(heights[i], widths[j])}")
        arr = np.empty((sum(heights), sum(widths)), dtype=object)
        arr.fill(ring.zero())
        r0 = 0
        for i, row in enumerate(blocks):
            c0 = 0
            for j, b in enumerate(row):
                arr[r0:r0 + heights[i], c0:c0 + widths[j]] = b.entries
                c0 += widths[j]
            r0 += heights[i]
        return cls(ring, arr)

    @classmethod
    def hstack(cls, ring: RingSpec, mats: List["ExactMatrix"], rows: int = 0) -> "ExactMatrix":
        if not mats:
            return cls.zeros(ring, rows, 0)
        return cls.block(ring, [mats])

    @classmethod
    def vstack(cls, ring: RingSpec, mats: List["ExactMatrix"], cols: int = 0) -> "ExactMatrix":
        if not mats:
            return cls.zeros(ring, 0, cols)
        return cls.block(ring, [[m] for m in mats])

    # shape
    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def __getitem__(self, idx):
        return self.entries[idx]

    def _check(self, other: "ExactMatrix"):
        if self.ring != other.ring:
            raise RingMismatchError(f"{self.ring.describe()} vs {other.ring.describe()}")

    # arithmetic
    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return ExactMatrix.zeros(self.ring, self.rows, other.cols)
        return ExactMatrix(self.ring, self.entries.dot(other.entries))

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatchError(f"cannot add {self.shape} and {other.shape}")
        return ExactMatrix(self.ring, self.entries + other.entries)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def __neg__(self) -> "ExactMatrix":
        return self.scale(-1)

    def scale(self, k: Any) -> "ExactMatrix":
        if self.rows == 0 or self.cols == 0:
            return self
        k = self.ring.coerce(k)
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(self.shape):
            out[idx] = k * self.entries[idx]
        return ExactMatrix(self.ring, out)

    def __rmul__(self, k: int) -> "ExactMatrix":
        return self.scale(k)

    def __mul__(self, k: int) -> "ExactMatrix":
        return self.scale(k)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.ring, self.entries.T)

    def conjugate(self) -> "ExactMatrix":
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(self.shape):
            out[idx] = self.ring.conj(self.entries[idx])
        return ExactMatrix(self.ring, out)

    def dual(self) -> "ExactMatrix":
        return involution_dual(self)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "ExactMatrix":
        arr = np.empty((len(rows), len(cols)), dtype=object)
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                arr[i, j] = self.entries[r, c]
        return ExactMatrix(self.ring, arr)

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(x) for x in self.entries.flat)

    def nonzero_entries(self):
        for idx in np.ndindex(self.shape):
            if not self.ring.is_zero(self.entries[idx]):
                yield idx, self.entries[idx]

    def max_abs(self) -> int:
        """Largest absolute integer entry (integer matrices only)."""
        return max((abs(int(x)) for x in self.entries.flat), default=0)

    def to_list(self) -> List[List[Any]]:
        return [[self.entries[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def to_int_list(self) -> List[List[int]]:
        return [[int(x) for x in row] for row in self.to_list()]

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.ring != other.ring or self.shape != other.shape:
            return False
        return all(a == b for a, b in zip(self.entries.flat, other.entries.flat))

    def __hash__(self) -> int:
        return hash((self.shape, tuple(self.entries.flat)))

    def __repr__(self) -> str:
        return f"ExactMatrix({self.to_list()})"


def involution_dual(m: ExactMatrix) -> ExactMatrix:
    """Matrix of the dual morphism: transpose with the involution applied entrywise."""
    return m.conjugate().transpose()


def regular_representation(m: ExactMatrix) -> ExactMatrix:
    """
    Integer matrix of a group-ring matrix acting on ℤ[G] ≅ ℤ^|G|: each entry a
    becomes the |G|×|G| block L(a) with L(a)[g·h][h] = a_g.
    """
    ring = m.ring
    if ring.is_integers:
        return m
    group = ring.group_elements()
    size = len(group)
    data = [[0] * (m.cols * size) for _ in range(m.rows * size)]
    for (i, j), a in m.nonzero_entries():
        for g, c in a.terms:
            for h in group:
                data[i * size + ring.group_mul(g, h)][j * size + h] += c
    return ExactMatrix.integer(data, cols=m.cols * size)
