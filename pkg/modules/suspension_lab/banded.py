# modules/suspension_lab/banded.py

import random
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from core.exceptions import DimensionMismatchError, RingMismatchError, SuspensionError
from core.logger import get_surgery_logger
from modules.chain_algebra import block_diagonal
from modules.exact_core import ExactMatrix, RingKind, RingSpec, involution_dual
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")

Index = Tuple[int, int]
TailRow = Dict[int, ExactMatrix]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def common_frame(mats: Iterable["BandedMatrix"]) -> Tuple[int, int, Tuple[int, int]]:
    """Heads and period on which every given morphism can be written."""
    mats = list(mats)
    periodic = [m for m in mats if not m.is_finite]
    period = (1, 1)
    if periodic:
        slope = periodic[0].slope
        if any(m.slope != slope for m in periodic):
            raise SuspensionError(f"periodic tails of slopes {sorted({m.slope for m in periodic})} do not combine")
        L = 1
        for m in periodic:
            L = _lcm(L, m.P)
        period = (L, L * slope[1] // slope[0])
    return max(m.row_head for m in mats), max(m.col_head for m in mats), period


@dataclass(frozen=True, eq=False)
class BandedMatrix:
    """
    Morphism f: source → target of the ℕ-graded category, stored as blocks
    f(i, j): source(j) → target(i). Blocks with i < row_head or j < col_head
    are listed in `exceptional`; from the heads on the blocks repeat with
    period (P, Q):

        f(row_head + P·t + ρ, col_head + Q·t + c) = tail[ρ][c]   (t ≥ 0).

    Period (1, 1) is the ordinary band of constant diagonals, keyed by the
    offset j − i. Every row and column has finitely many nonzero blocks.
    """
    ring: RingSpec
    target: GradedObject
    source: GradedObject
    row_head: int = 0
    col_head: int = 0
    period: Tuple[int, int] = (1, 1)
    exceptional: Dict[Index, ExactMatrix] = field(default_factory=dict)
    tail: Tuple[TailRow, ...] = ()
    _rows: Dict[int, List[int]] = field(default_factory=dict, init=False, repr=False)
    _cols: Dict[int, List[int]] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        P, Q = self.period
        if P < 1 or Q < 1:
            raise SuspensionError(f"period {self.period} must be positive")
        if self.row_head < self.target.stable_from or self.col_head < self.source.stable_from:
            raise SuspensionError(f"heads ({self.row_head}, {self.col_head}) sit inside the "
                                  f"non-constant part of {self.target.describe()} / {self.source.describe()}")
        if len(self.tail) > P:
            raise SuspensionError(f"{len(self.tail)} tail rows for row period {P}")
        tail_shape = (self.target.tail_rank, self.source.tail_rank)
        tail = []
        for rho in range(P):
            row = self.tail[rho] if rho < len(self.tail) else {}
            clean = {}
            for c, b in row.items():
                self._check_block(b, tail_shape, f"tail[{rho}][{c}]")
                if not b.is_zero():
                    clean[int(c)] = b
            tail.append(clean)
        exc = {}
        rows: Dict[int, List[int]] = {}
        cols: Dict[int, List[int]] = {}
        for (i, j), b in self.exceptional.items():
            if i < 0 or j < 0:
                raise SuspensionError(f"negative index ({i}, {j})")
            if i >= self.row_head and j >= self.col_head:
                raise SuspensionError(f"exceptional block ({i}, {j}) lies in the periodic region")
            self._check_block(b, (self.target.rank(i), self.source.rank(j)), f"block ({i}, {j})")
            if not b.is_zero():
                exc[(i, j)] = b
                rows.setdefault(i, []).append(j)
                cols.setdefault(j, []).append(i)
        object.__setattr__(self, "tail", tuple(tail))
        object.__setattr__(self, "exceptional", exc)
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "_cols", cols)

    def _check_block(self, b: ExactMatrix, shape, what: str):
        if b.ring != self.ring:
            raise RingMismatchError(f"{what} lives over {b.ring.describe()}, expected {self.ring.describe()}")
        if tuple(b.shape) != tuple(shape):
            raise DimensionMismatchError(f"{what} has shape {b.shape}, expected {shape}")

    # constructors

    @classmethod
    def zero(cls, ring: RingSpec, target: GradedObject, source: GradedObject) -> "BandedMatrix":
        return cls(ring, target, source, target.stable_from, source.stable_from)

    @classmethod
    def identity(cls, ring: RingSpec, obj: GradedObject) -> "BandedMatrix":
        head = obj.stable_from
        exc = {(i, i): ExactMatrix.identity(ring, obj.rank(i)) for i in range(head)}
        tail = ({0: ExactMatrix.identity(ring, obj.tail_rank)},) if obj.tail_rank else ()
        return cls(ring, obj, obj, head, head, (1, 1), exc, tail)

    @classmethod
    def finite(cls, ring: RingSpec, target: GradedObject, source: GradedObject,
               entries: Dict[Index, ExactMatrix]) -> "BandedMatrix":
        """A morphism with finitely many nonzero blocks."""
        entries = {k: b for k, b in entries.items() if not b.is_zero()}
        top = max((i for i, _ in entries), default=-1)
        return cls(ring, target, source, max(top + 1, target.stable_from), source.stable_from, (1, 1), entries)

    @classmethod
    def scalar_band(cls, ring: RingSpec, diagonals: Dict[int, Any], head: int = 0,
                    exceptional: Optional[Dict[Index, Any]] = None) -> "BandedMatrix":
        """Endomorphism of underline R with constant diagonals a[i, i+offset] = diagonals[offset] for i, j ≥ head."""
        one = GradedObject.constant(1)
        as_block = lambda x: x if isinstance(x, ExactMatrix) else ExactMatrix.from_rows(ring, [[x]])
        exc = {k: as_block(v) for k, v in (exceptional or {}).items()}
        return cls(ring, one, one, head, head, (1, 1), exc, ({c: as_block(v) for c, v in diagonals.items()},))

    @classmethod
    def tabulate(cls, ring: RingSpec, target: GradedObject, source: GradedObject, head: int, reach: int,
                 block: Callable[[int, int], Optional[ExactMatrix]]) -> "BandedMatrix":
        """
        Period-(1, 1) morphism read off a block function that depends only on
        j − i once i, j ≥ head and vanishes for |j − i| > reach.
        """
        head = max(head, target.stable_from, source.stable_from)
        exc = {}
        for i in range(head + reach + 1):
            for j in range(max(0, i - reach), i + reach + 1):
                if i < head or j < head:
                    b = block(i, j)
                    if b is not None:
                        exc[(i, j)] = b
        far = head + reach
        tail = {}
        for c in range(-reach, reach + 1):
            b = block(far, far + c)
            if b is not None:
                tail[c] = b
        return cls(ring, target, source, head, head, (1, 1), exc, (tail,))

    # access

    @property
    def P(self) -> int:
        return self.period[0]

    @property
    def Q(self) -> int:
        return self.period[1]

    def zero_block(self, i: int, j: int) -> ExactMatrix:
        return ExactMatrix.zeros(self.ring, self.target.rank(i), self.source.rank(j))

    def entry(self, i: int, j: int) -> ExactMatrix:
        if i < self.row_head or j < self.col_head:
            return self.exceptional.get((i, j)) or self.zero_block(i, j)
        t, rho = divmod(i - self.row_head, self.P)
        c = j - self.col_head - self.Q * t
        return self.tail[rho].get(c) or self.zero_block(i, j)

    def _tail_row(self, i: int) -> Iterable[Tuple[int, ExactMatrix]]:
        t, rho = divmod(i - self.row_head, self.P)
        for c, b in self.tail[rho].items():
            j = self.col_head + self.Q * t + c
            if j >= self.col_head:
                yield j, b

    def row(self, i: int) -> Dict[int, ExactMatrix]:
        """Nonzero blocks f(i, j), keyed by j."""
        out = {j: self.exceptional[(i, j)] for j in self._rows.get(i, ())}
        if i >= self.row_head:
            out.update(self._tail_row(i))
        return out

    def column(self, j: int) -> Dict[int, ExactMatrix]:
        """Nonzero blocks f(i, j), keyed by i."""
        out = {i: self.exceptional[(i, j)] for i in self._cols.get(j, ())}
        if j >= self.col_head:
            for rho, row in enumerate(self.tail):
                for c, b in row.items():
                    t, rest = divmod(j - self.col_head - c, self.Q)
                    if rest == 0 and t >= 0:
                        out[self.row_head + self.P * t + rho] = b
        return out

    @property
    def is_finite(self) -> bool:
        """Finitely many nonzero blocks, i.e. zero in the quotient by finite morphisms."""
        return not any(self.tail)

    def is_zero(self) -> bool:
        return self.is_finite and not self.exceptional

    @property
    def slope(self) -> Tuple[int, int]:
        g = gcd(self.P, self.Q)
        return self.P // g, self.Q // g

    def radius(self) -> int:
        """Largest |c| over the periodic blocks; the band radius for period (1, 1)."""
        return max((abs(c) for row in self.tail for c in row), default=0)

    def max_exceptional_row(self) -> int:
        return max(self._rows, default=-1)

    def max_exceptional_col(self) -> int:
        return max(self._cols, default=-1)

    def nonzero_blocks(self) -> Iterable[Tuple[Index, ExactMatrix]]:
        """Only for finite morphisms."""
        if not self.is_finite:
            raise SuspensionError("a morphism with a periodic tail has infinitely many blocks")
        return sorted(self.exceptional.items())

    def window(self, rows: int, cols: int) -> ExactMatrix:
        """The blocks with i < rows, j < cols flattened into one matrix."""
        height = sum(self.target.rank(i) for i in range(rows))
        width = sum(self.source.rank(j) for j in range(cols))
        if not height or not width:
            return ExactMatrix.zeros(self.ring, height, width)
        grid = [[self.entry(i, j) for j in range(cols) if self.source.rank(j)]
                for i in range(rows) if self.target.rank(i)]
        return ExactMatrix.block(self.ring, grid)

    # re-anchoring

    def _unclipped_row(self) -> int:
        """First row from which no periodic block falls left of col_head."""
        c_min = min((c for row in self.tail for c in row), default=0)
        return self.row_head + self.P * max(0, _ceil_div(-c_min, self.Q))

    def reanchored(self, row_head: int, col_head: int, period: Optional[Tuple[int, int]] = None) -> "BandedMatrix":
        """
        The same morphism with later heads and (optionally) a period that is a
        common multiple (mP, mQ) of the current one.
        """
        P2, Q2 = period or self.period
        if row_head < self.row_head or col_head < self.col_head:
            raise SuspensionError("heads can only move outwards")
        if not self.is_finite:
            m, rest = divmod(P2, self.P)
            if rest or Q2 != m * self.Q:
                raise SuspensionError(f"period {(P2, Q2)} is not a multiple of {self.period}")
        tail: List[TailRow] = []
        if not self.is_finite:
            floor_row = max(self._unclipped_row(), self.max_exceptional_row() + 1)
            T = max(0, _ceil_div(floor_row - row_head, P2))
            for rho in range(P2):
                i = row_head + P2 * T + rho
                tail.append({j - col_head - Q2 * T: b for j, b in self._tail_row(i)})
        exc: Dict[Index, ExactMatrix] = {}
        for i in range(row_head):
            for j, b in self.row(i).items():
                exc[(i, j)] = b
        for j in range(col_head):
            for i, b in self.column(j).items():
                if i >= row_head:
                    exc[(i, j)] = b
        return BandedMatrix(self.ring, self.target, self.source, row_head, col_head, (P2, Q2), exc, tuple(tail))

    def _aligned(self, other: "BandedMatrix") -> Tuple["BandedMatrix", "BandedMatrix"]:
        if self.ring != other.ring:
            raise RingMismatchError(f"{self.ring.describe()} vs {other.ring.describe()}")
        rh, ch, period = common_frame([self, other])
        return self.reanchored(rh, ch, period), other.reanchored(rh, ch, period)

    # arithmetic

    def _check_same_objects(self, other: "BandedMatrix"):
        if self.target != other.target or self.source != other.source:
            raise DimensionMismatchError(f"{self.source.describe()}→{self.target.describe()} vs "
                                         f"{other.source.describe()}→{other.target.describe()}")

    def __add__(self, other: "BandedMatrix") -> "BandedMatrix":
        self._check_same_objects(other)
        a, b = self._aligned(other)
        exc = dict(a.exceptional)
        for k, m in b.exceptional.items():
            exc[k] = exc[k] + m if k in exc else m
        tail = []
        for ra, rb in zip(a.tail, b.tail):
            row = dict(ra)
            for c, m in rb.items():
                row[c] = row[c] + m if c in row else m
            tail.append(row)
        return BandedMatrix(a.ring, a.target, a.source, a.row_head, a.col_head, a.period, exc, tuple(tail))

    def scale(self, k: Any) -> "BandedMatrix":
        return BandedMatrix(self.ring, self.target, self.source, self.row_head, self.col_head, self.period,
                            {key: b.scale(k) for key, b in self.exceptional.items()},
                            tuple({c: b.scale(k) for c, b in row.items()} for row in self.tail))

    def __neg__(self) -> "BandedMatrix":
        return self.scale(-1)

    def __sub__(self, other: "BandedMatrix") -> "BandedMatrix":
        return self + (-other)

    def _product_row(self, other: "BandedMatrix", i: int) -> Dict[int, ExactMatrix]:
        acc: Dict[int, ExactMatrix] = {}
        for k, a in self.row(i).items():
            for j, b in other.row(k).items():
                acc[j] = acc[j] + a @ b if j in acc else a @ b
        return acc

    def __matmul__(self, other: "BandedMatrix") -> "BandedMatrix":
        """Composition self ∘ other: (fg)(i, j) = Σ_k f(i, k) g(k, j)."""
        if self.ring != other.ring:
            raise RingMismatchError(f"{self.ring.describe()} vs {other.ring.describe()}")
        if self.source != other.target:
            raise DimensionMismatchError(f"cannot compose into {self.source.describe()} "
                                         f"from {other.target.describe()}")
        if self.is_finite or other.is_finite:
            return self._finite_product(other)
        L = _lcm(self.Q, other.P)
        period = (self.P * L // self.Q, other.Q * L // other.P)
        # rows of `other` from k_floor on, and the columns of `self` they meet, are purely periodic
        k_floor = max(other.row_head, other.max_exceptional_row() + 1, other._unclipped_row(), self.col_head)
        c_min = min(c for row in self.tail for c in row)
        t_need = max(0, _ceil_div(k_floor - self.col_head - c_min, self.Q))
        row_head = max(self.row_head + self.P * t_need, self.max_exceptional_row() + 1)
        col_head = other.col_head
        exc = {}
        for i in range(row_head):
            for j, b in self._product_row(other, i).items():
                exc[(i, j)] = b
        tail = tuple({j - col_head: b for j, b in self._product_row(other, row_head + rho).items()}
                     for rho in range(period[0]))
        return BandedMatrix(self.ring, self.target, other.source, row_head, col_head, period, exc, tail)

    def _finite_product(self, other: "BandedMatrix") -> "BandedMatrix":
        acc: Dict[Index, ExactMatrix] = {}

        def put(key, m):
            acc[key] = acc[key] + m if key in acc else m

        if self.is_finite:
            for (i, k), a in self.exceptional.items():
                for j, b in other.row(k).items():
                    put((i, j), a @ b)
        else:
            for (k, j), b in other.exceptional.items():
                for i, a in self.column(k).items():
                    put((i, j), a @ b)
        return BandedMatrix.finite(self.ring, self.target, other.source, acc)

    def dual(self) -> "BandedMatrix":
        """Involution: f*(j, i) = f(i, j)*."""
        P, Q = self.period
        tail: List[TailRow] = [{} for _ in range(Q)]
        for rho, row in enumerate(self.tail):
            for c, b in row.items():
                q, rho2 = divmod(c, Q)
                tail[rho2][rho - P * q] = involution_dual(b)
        exc = {(j, i): involution_dual(b) for (i, j), b in self.exceptional.items()}
        return BandedMatrix(self.ring, self.source, self.target, self.col_head, self.row_head, (Q, P), exc, tuple(tail))

    def direct_sum(self, other: "BandedMatrix") -> "BandedMatrix":
        """f ⊕ g: source ⊕ source' → target ⊕ target', blockwise diagonal."""
        a, b = self._aligned(other)
        exc = {}
        for key in set(a.exceptional) | set(b.exceptional):
            exc[key] = block_diagonal(a.ring, [a.entry(*key), b.entry(*key)])
        tail = []
        ts = (a.target.tail_rank, a.source.tail_rank)
        to = (b.target.tail_rank, b.source.tail_rank)
        for ra, rb in zip(a.tail, b.tail):
            row = {}
            for c in set(ra) | set(rb):
                x = ra.get(c) or ExactMatrix.zeros(a.ring, *ts)
                y = rb.get(c) or ExactMatrix.zeros(a.ring, *to)
                row[c] = block_diagonal(a.ring, [x, y])
            tail.append(row)
        return BandedMatrix(a.ring, a.target + b.target, a.source + b.source, a.row_head, a.col_head,
                            a.period, exc, tuple(tail))

    def keep_lower_right(self, row_bound: int, col_bound: int) -> "BandedMatrix":
        """Zero every block f(i, j) with i ≤ row_bound or j ≤ col_bound."""
        m = self.reanchored(max(self.row_head, row_bound + 1), max(self.col_head, col_bound + 1))
        exc = {(i, j): b for (i, j), b in m.exceptional.items() if i > row_bound and j > col_bound}
        return BandedMatrix(m.ring, m.target, m.source, m.row_head, m.col_head, m.period, exc, m.tail)

    def truncated(self, row_bound: int, col_bound: int) -> "BandedMatrix":
        """The finite morphism source{[0, col_bound]} → target{[0, row_bound]} of the kept blocks."""
        entries = {}
        for i in range(row_bound + 1):
            for j, b in self.row(i).items():
                if j <= col_bound:
                    entries[(i, j)] = b
        return BandedMatrix.finite(self.ring, self.target.truncate(row_bound), self.source.truncate(col_bound),
                                   entries)

    def max_row_in_columns(self, col_bound: int) -> int:
        """Largest i with f(i, j) ≠ 0 for some j ≤ col_bound; −1 when there is none."""
        return max((i for j in range(col_bound + 1) for i in self.column(j)), default=-1)

    def max_nonzero_row(self) -> int:
        if not self.is_finite:
            raise SuspensionError("a periodic tail has nonzero blocks in arbitrarily late rows")
        return self.max_exceptional_row()

    # comparison

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, BandedMatrix):
            return NotImplemented
        if self.ring != other.ring or self.target != other.target or self.source != other.source:
            return False
        if not self.is_finite and not other.is_finite and self.slope != other.slope:
            return False
        if self.is_finite != other.is_finite:
            return False
        a, b = self._aligned(other)
        return a.exceptional == b.exceptional and a.tail == b.tail

    __hash__ = None

    def equivalent(self, other: "BandedMatrix") -> bool:
        """f ~ g: the difference has finitely many nonzero blocks."""
        self._check_same_objects(other)
        if not self.is_finite and not other.is_finite and self.slope != other.slope:
            return False
        return (self - other).is_finite

    def differs_only_within(self, other: "BandedMatrix", row_bound: int, col_bound: int) -> bool:
        """Every block where the two differ has i ≤ row_bound or j ≤ col_bound."""
        return (self - other).keep_lower_right(row_bound, col_bound).is_zero()

    def describe(self) -> str:
        return (f"{self.source.describe()} → {self.target.describe()}, heads ({self.row_head}, {self.col_head}), "
                f"period {self.period}, {len(self.exceptional)} exceptional blocks, "
                f"{sum(len(r) for r in self.tail)} periodic blocks")

    def __repr__(self) -> str:
        return f"BandedMatrix({self.describe()})"


@dataclass(frozen=True, eq=False)
class SuspensionElement:
    """
    Class of a banded morphism modulo morphisms with finitely many nonzero
    blocks: an element of ΣR (or of ΣM_{s,r}(R) for constant objects), and in
    general a morphism of the category at infinity. The stored representative
    keeps only the periodic tail.
    """
    representative: BandedMatrix

    def __post_init__(self):
        m = self.representative
        object.__setattr__(self, "representative",
                           BandedMatrix(m.ring, m.target, m.source, m.row_head, m.col_head, m.period, {}, m.tail))

    @classmethod
    def of(cls, m: BandedMatrix) -> "SuspensionElement":
        return cls(m)

    @classmethod
    def zero(cls, ring: RingSpec, target: GradedObject, source: GradedObject) -> "SuspensionElement":
        return cls(BandedMatrix.zero(ring, target, source))

    @classmethod
    def identity(cls, ring: RingSpec, obj: GradedObject) -> "SuspensionElement":
        return cls(BandedMatrix.identity(ring, obj))

    @property
    def ring(self) -> RingSpec:
        return self.representative.ring

    @property
    def target(self) -> GradedObject:
        return self.representative.target

    @property
    def source(self) -> GradedObject:
        return self.representative.source

    def is_zero(self) -> bool:
        return self.representative.is_finite

    def __add__(self, other: "SuspensionElement") -> "SuspensionElement":
        return SuspensionElement(self.representative + other.representative)

    def __neg__(self) -> "SuspensionElement":
        return SuspensionElement(-self.representative)

    def __sub__(self, other: "SuspensionElement") -> "SuspensionElement":
        return SuspensionElement(self.representative - other.representative)

    def scale(self, k: Any) -> "SuspensionElement":
        return SuspensionElement(self.representative.scale(k))

    def __matmul__(self, other: "SuspensionElement") -> "SuspensionElement":
        return SuspensionElement(self.representative @ other.representative)

    __mul__ = __matmul__

    def dual(self) -> "SuspensionElement":
        return SuspensionElement(self.representative.dual())

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, SuspensionElement):
            return NotImplemented
        if self.ring != other.ring or self.target != other.target or self.source != other.source:
            return False
        return self.representative.equivalent(other.representative)

    __hash__ = None

    def __repr__(self) -> str:
        return f"SuspensionElement({self.representative.describe()})"


def random_scalar(rng: random.Random, ring: RingSpec, bound: int = 2) -> Any:
    c = rng.randint(-bound, bound)
    if ring.is_integers:
        return c
    if ring.kind is RingKind.LAURENT:
        g = tuple(rng.randint(-1, 1) for _ in range(ring.rank))
    else:
        g = rng.choice(ring.group_elements())
    return ring.element({g: c})


def random_block(rng: random.Random, ring: RingSpec, rows: int, cols: int, bound: int = 2,
                 density: float = 0.7) -> ExactMatrix:
    data = [[random_scalar(rng, ring, bound) if rng.random() < density else ring.zero() for _ in range(cols)]
            for _ in range(rows)]
    if not rows:
        return ExactMatrix.zeros(ring, 0, cols)
    return ExactMatrix.from_rows(ring, data, cols=cols)


def random_graded_object(rng: random.Random, max_rank: int = 2, head: int = 2, finite: bool = False) -> GradedObject:
    ranks = tuple(rng.randint(0, max_rank) for _ in range(rng.randint(0, head)))
    return GradedObject(ranks, 0 if finite else rng.randint(1, max_rank))


def random_banded(rng: random.Random, ring: Optional[RingSpec] = None, target: Optional[GradedObject] = None,
                  source: Optional[GradedObject] = None, head: int = 2, radius: int = 1, bound: int = 2,
                  density: float = 0.6) -> BandedMatrix:
    """Random period-(1, 1) morphism with a random head block and random constant diagonals."""
    ring = ring or RingSpec.integers()
    target = target or GradedObject.constant(1)
    source = source or GradedObject.constant(1)
    head = max(head, target.stable_from, source.stable_from)
    exc = {}
    for i in range(head + radius + 1):
        for j in range(max(0, i - radius - head), i + radius + head + 1):
            if (i < head or j < head) and rng.random() < density:
                exc[(i, j)] = random_block(rng, ring, target.rank(i), source.rank(j), bound)
    tail = {c: random_block(rng, ring, target.tail_rank, source.tail_rank, bound)
            for c in range(-radius, radius + 1) if rng.random() < density}
    return BandedMatrix(ring, target, source, head, head, (1, 1), exc, (tail,))
