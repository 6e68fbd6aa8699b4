# modules/k_based/sparse.py

from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from modules.exact_core import ExactMatrix, RingSpec

Key = Hashable


@dataclass(frozen=True)
class Dual:
    """Marker for the dual basis element x* of a generator key x."""
    key: Key

    def __repr__(self) -> str:
        return f"{self.key!r}*"


def toggle_dual(k: Key) -> Key:
    return k.key if isinstance(k, Dual) else Dual(k)


def undual(k: Key) -> Key:
    return k.key if isinstance(k, Dual) else k


class KeyedMatrix:
    """
    Sparse integer matrix indexed by generator keys. Entry (row, col) is the
    coefficient of `row` in the image of `col`; products compose like
    ordinary matrices acting on column vectors.
    """

    def __init__(self, entries: Optional[Dict[Tuple[Key, Key], int]] = None):
        self._rows: Dict[Key, Dict[Key, int]] = {}
        for (r, c), v in (entries or {}).items():
            self.add(r, c, v)

    @classmethod
    def identity(cls, keys: Iterable[Key]) -> "KeyedMatrix":
        out = cls()
        for k in keys:
            out.add(k, k, 1)
        return out

    def add(self, row: Key, col: Key, value: int):
        if not value:
            return
        line = self._rows.setdefault(row, {})
        v = line.get(col, 0) + int(value)
        if v:
            line[col] = v
        else:
            del line[col]
            if not line:
                del self._rows[row]

    def get(self, row: Key, col: Key) -> int:
        line = self._rows.get(row)
        return line.get(col, 0) if line else 0

    def row(self, row: Key) -> Dict[Key, int]:
        return dict(self._rows.get(row, {}))

    def items(self) -> Iterator[Tuple[Key, Key, int]]:
        for r, line in self._rows.items():
            for c, v in line.items():
                yield r, c, v

    def row_keys(self) -> Set[Key]:
        return set(self._rows)

    def col_keys(self) -> Set[Key]:
        return {c for line in self._rows.values() for c in line}

    def __len__(self) -> int:
        return sum(len(line) for line in self._rows.values())

    def is_zero(self) -> bool:
        return not self._rows

    def first_nonzero(self) -> Optional[Tuple[Key, Key, int]]:
        return next(self.items(), None)

    def copy(self) -> "KeyedMatrix":
        out = KeyedMatrix()
        for r, line in self._rows.items():
            out._rows[r] = dict(line)
        return out

    # arithmetic
    def __matmul__(self, other: "KeyedMatrix") -> "KeyedMatrix":
        out = KeyedMatrix()
        for r, line in self._rows.items():
            for x, a in line.items():
                other_line = other._rows.get(x)
                if other_line:
                    for c, b in other_line.items():
                        out.add(r, c, a * b)
        return out

    def __add__(self, other: "KeyedMatrix") -> "KeyedMatrix":
        return combine((1, self), (1, other))

    def __sub__(self, other: "KeyedMatrix") -> "KeyedMatrix":
        return combine((1, self), (-1, other))

    def __neg__(self) -> "KeyedMatrix":
        return self.scale(-1)

    def scale(self, k: int) -> "KeyedMatrix":
        return combine((k, self))

    def map_signs(self, fn: Callable[[Key, Key], int]) -> "KeyedMatrix":
        """Multiply each entry (r, c) by fn(r, c)."""
        out = KeyedMatrix()
        for r, c, v in self.items():
            out.add(r, c, fn(r, c) * v)
        return out

    def relabel(self, rows: Callable[[Key], Key], cols: Callable[[Key], Key]) -> "KeyedMatrix":
        out = KeyedMatrix()
        for r, c, v in self.items():
            out.add(rows(r), cols(c), v)
        return out

    def restrict(self, rows: Optional[Callable[[Key], bool]] = None,
                 cols: Optional[Callable[[Key], bool]] = None) -> "KeyedMatrix":
        out = KeyedMatrix()
        for r, line in self._rows.items():
            if rows is not None and not rows(r):
                continue
            for c, v in line.items():
                if cols is None or cols(c):
                    out.add(r, c, v)
        return out

    def transpose(self) -> "KeyedMatrix":
        out = KeyedMatrix()
        for r, c, v in self.items():
            out.add(c, r, v)
        return out

    def dual_transpose(self) -> "KeyedMatrix":
        """Transpose with every key moved to its dual: (r, c) ↦ (c*, r*), x** = x."""
        out = KeyedMatrix()
        for r, c, v in self.items():
            out.add(toggle_dual(c), toggle_dual(r), v)
        return out

    def to_exact(self, row_keys: Sequence[Key], col_keys: Sequence[Key]) -> ExactMatrix:
        pos = {k: i for i, k in enumerate(col_keys)}
        data = []
        for r in row_keys:
            line = self._rows.get(r, {})
            row = [0] * len(col_keys)
            for c, v in line.items():
                if c in pos:
                    row[pos[c]] = v
            data.append(row)
        return ExactMatrix.from_rows(RingSpec.integers(), data, cols=len(col_keys))

    def to_list(self) -> List[List[Any]]:
        return sorted(([repr(r), repr(c), v] for r, c, v in self.items()))

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, KeyedMatrix):
            return NotImplemented
        return self._rows == other._rows

    __hash__ = None

    def __repr__(self) -> str:
        return f"KeyedMatrix({len(self)} entries)"


def combine(*terms: Tuple[int, KeyedMatrix]) -> KeyedMatrix:
    """Linear combination Σ k·M."""
    out = KeyedMatrix()
    for k, M in terms:
        if not k:
            continue
        for r, c, v in M.items():
            out.add(r, c, k * v)
    return out


def from_exact(m: ExactMatrix, row_keys: Sequence[Key], col_keys: Sequence[Key]) -> KeyedMatrix:
    out = KeyedMatrix()
    for (i, j), v in m.nonzero_entries():
        out.add(row_keys[i], col_keys[j], int(v))
    return out
