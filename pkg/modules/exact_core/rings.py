# modules/exact_core/rings.py

from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Any, Dict, Iterable, Optional, Tuple, Union

from core.exceptions import RingMismatchError, SurgeryKitError

GroupElement = Union[int, Tuple[int, ...]]


class RingKind(Enum):
    """Scalar rings supported by the exact core"""
    INTEGERS = "integers"
    FINITE_GROUP = "finite_group"
    LAURENT = "laurent"


@dataclass(frozen=True)
class RingSpec:
    """Integers, a finite group ring or a Laurent ring ℤ[ℤ^k], all with g ↦ g⁻¹."""
    kind: RingKind
    table: Optional[Tuple[Tuple[int, ...], ...]] = None
    identity: int = 0
    rank: int = 0
    _inverses: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.kind is RingKind.FINITE_GROUP:
            self._check_group_table()
        elif self.kind is RingKind.LAURENT and self.rank < 1:
            raise SurgeryKitError(f"Laurent ring needs rank >= 1, got {self.rank}")

    def _check_group_table(self):
        table = self.table or ()
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise SurgeryKitError("group table must be a non-empty square table")
        if any(not 0 <= x < n for row in table for x in row):
            raise SurgeryKitError("group table entries out of range")
        e = self.identity
        if any(table[e][g] != g or table[g][e] != g for g in range(n)):
            raise SurgeryKitError(f"index {e} is not a two-sided identity")
        for a, b, c in product(range(n), repeat=3):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise SurgeryKitError(f"group table not associative at ({a}, {b}, {c})")
        inverses = []
        for g in range(n):
            inv = [h for h in range(n) if table[g][h] == e and table[h][g] == e]
            if not inv:
                raise SurgeryKitError(f"element {g} has no inverse")
            inverses.append(inv[0])
        object.__setattr__(self, "_inverses", tuple(inverses))

    @classmethod
    def integers(cls) -> "RingSpec":
        return cls(RingKind.INTEGERS)

    @classmethod
    def finite_group(cls, table: Iterable[Iterable[int]], identity: int = 0) -> "RingSpec":
        return cls(RingKind.FINITE_GROUP, table=tuple(tuple(int(x) for x in row) for row in table),
                   identity=identity)

    @classmethod
    def cyclic(cls, order: int) -> "RingSpec":
        """ℤ[ℤ/order] with the additive multiplication table."""
        return cls.finite_group([[(a + b) % order for b in range(order)] for a in range(order)])

    @classmethod
    def laurent(cls, rank: int) -> "RingSpec":
        return cls(RingKind.LAURENT, rank=rank)

    @property
    def is_integers(self) -> bool:
        return self.kind is RingKind.INTEGERS

    @property
    def is_commutative(self) -> bool:
        if self.kind is not RingKind.FINITE_GROUP:
            return True
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(len(t)) for b in range(len(t)))

    # group operations
    def group_identity(self) -> GroupElement:
        if self.kind is RingKind.LAURENT:
            return (0,) * self.rank
        return self.identity

    def group_mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        if self.kind is RingKind.LAURENT:
            return tuple(a + b for a, b in zip(g, h))
        return self.table[g][h]

    def group_inv(self, g: GroupElement) -> GroupElement:
        if self.kind is RingKind.LAURENT:
            return tuple(-a for a in g)
        return self._inverses[g]

    def group_elements(self) -> Tuple[GroupElement, ...]:
        if self.kind is not RingKind.FINITE_GROUP:
            raise SurgeryKitError("only finite group rings enumerate their group")
        return tuple(range(len(self.table)))

    # scalars
    def zero(self) -> Any:
        return 0 if self.is_integers else GroupRingElement(self, ())

    def one(self) -> Any:
        return 1 if self.is_integers else self.element({self.group_identity(): 1})

    def element(self, terms: Dict[GroupElement, int]) -> "GroupRingElement":
        if self.is_integers:
            raise RingMismatchError("the integers have no group elements")
        return GroupRingElement.from_terms(self, terms)

    def group_element(self, g: GroupElement) -> "GroupRingElement":
        return self.element({g: 1})

    def coerce(self, x: Any) -> Any:
        if self.is_integers:
            if isinstance(x, GroupRingElement):
                raise RingMismatchError("group ring scalar in an integer matrix")
            return int(x)
        if isinstance(x, GroupRingElement):
            if x.ring != self:
                raise RingMismatchError("scalars from different group rings")
            return x
        return self.element({self.group_identity(): int(x)})

    def conj(self, x: Any) -> Any:
        if self.is_integers:
            return x
        return self.coerce(x).conj()

    def is_zero(self, x: Any) -> bool:
        if self.is_integers:
            return x == 0
        return self.coerce(x).is_zero()

    def augmentation(self, x: Any) -> int:
        """ε: ℤG → ℤ, summing coefficients."""
        if self.is_integers:
            return int(x)
        return sum(c for _, c in self.coerce(x).terms)

    def describe(self) -> str:
        if self.kind is RingKind.INTEGERS:
            return "Z"
        if self.kind is RingKind.LAURENT:
            return f"Z[Z^{self.rank}]"
        return f"Z[G], |G|={len(self.table)}"


@dataclass(frozen=True)
class GroupRingElement:
    """Finite formal ℤ-combination of group elements, terms sorted and nonzero."""
    ring: RingSpec
    terms: Tuple[Tuple[GroupElement, int], ...]

    @classmethod
    def from_terms(cls, ring: RingSpec, terms: Dict[GroupElement, int]) -> "GroupRingElement":
        clean = {g: int(c) for g, c in terms.items() if c}
        return cls(ring, tuple(sorted(clean.items())))

    def _other(self, other: Any) -> "GroupRingElement":
        return self.ring.coerce(other)

    def as_dict(self) -> Dict[GroupElement, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: Any) -> "GroupRingElement":
        other = self._other(other)
        acc = self.as_dict()
        for g, c in other.terms:
            acc[g] = acc.get(g, 0) + c
        return GroupRingElement.from_terms(self.ring, acc)

    __radd__ = __add__

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.ring, tuple((g, -c) for g, c in self.terms))

    def __sub__(self, other: Any) -> "GroupRingElement":
        return self + (-self._other(other))

    def __rsub__(self, other: Any) -> "GroupRingElement":
        return self._other(other) - self

    def __mul__(self, other: Any) -> "GroupRingElement":
        if isinstance(other, int):
            return GroupRingElement.from_terms(self.ring, {g: c * other for g, c in self.terms})
        other = self._other(other)
        acc: Dict[GroupElement, int] = {}
        for g, a in self.terms:
            for h, b in other.terms:
                gh = self.ring.group_mul(g, h)
                acc[gh] = acc.get(gh, 0) + a * b
        return GroupRingElement.from_terms(self.ring, acc)

    def __rmul__(self, other: Any) -> "GroupRingElement":
        if isinstance(other, int):
            return self * other
        return self._other(other) * self

    def conj(self) -> "GroupRingElement":
        return GroupRingElement.from_terms(self.ring, {self.ring.group_inv(g): c for g, c in self.terms})

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, GroupRingElement):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, int):
            return self == self.ring.coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*g{g}" for g, c in self.terms)
