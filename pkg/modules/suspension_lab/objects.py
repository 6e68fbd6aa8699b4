# modules/suspension_lab/objects.py

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from core.exceptions import SuspensionError


@dataclass(frozen=True)
class GradedObject:
    """
    Object M = Σ_i M(i) of the ℕ-graded category over based free modules:
    M(i) = R^{head[i]} for i < len(head) and R^{tail_rank} afterwards.
    Trailing head entries equal to the tail are folded away, so equal rank
    functions compare equal.
    """
    head: Tuple[int, ...] = ()
    tail_rank: int = 0

    def __post_init__(self):
        head = tuple(int(r) for r in self.head)
        if any(r < 0 for r in head) or self.tail_rank < 0:
            raise SuspensionError("graded ranks must be non-negative")
        while head and head[-1] == self.tail_rank:
            head = head[:-1]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "tail_rank", int(self.tail_rank))

    @classmethod
    def constant(cls, rank: int) -> "GradedObject":
        """underline R^rank."""
        return cls((), rank)

    @classmethod
    def finite(cls, ranks: Sequence[int]) -> "GradedObject":
        return cls(tuple(ranks), 0)

    @classmethod
    def zero(cls) -> "GradedObject":
        return cls((), 0)

    @property
    def stable_from(self) -> int:
        """First index from which the rank is constant."""
        return len(self.head)

    def rank(self, i: int) -> int:
        if i < 0:
            return 0
        return self.head[i] if i < len(self.head) else self.tail_rank

    def ranks(self, upto: int) -> List[int]:
        return [self.rank(i) for i in range(upto)]

    @property
    def is_constant(self) -> bool:
        return not self.head

    @property
    def has_finite_support(self) -> bool:
        return self.tail_rank == 0

    @property
    def is_zero(self) -> bool:
        return self.tail_rank == 0 and not any(self.head)

    def support(self) -> Iterator[int]:
        """Indices with M(i) ≠ 0; only defined for finite support."""
        if not self.has_finite_support:
            raise SuspensionError("the support of this object is infinite")
        return (i for i, r in enumerate(self.head) if r)

    def max_support(self) -> int:
        """Largest index with M(i) ≠ 0, −1 for the zero object."""
        found = list(self.support())
        return found[-1] if found else -1

    def total_rank(self) -> int:
        if not self.has_finite_support:
            raise SuspensionError("an object of infinite support has no total rank")
        return sum(self.head)

    def offset(self, i: int) -> int:
        """Σ_{k<i} rank M(k)."""
        if i <= len(self.head):
            return sum(self.head[:i])
        return sum(self.head) + (i - len(self.head)) * self.tail_rank

    def direct_sum(self, other: "GradedObject") -> "GradedObject":
        width = max(self.stable_from, other.stable_from)
        return GradedObject(tuple(self.rank(i) + other.rank(i) for i in range(width)),
                            self.tail_rank + other.tail_rank)

    def __add__(self, other: "GradedObject") -> "GradedObject":
        return self.direct_sum(other)

    def truncate(self, upto: int) -> "GradedObject":
        """M{[0, upto]}."""
        return GradedObject(tuple(self.rank(i) for i in range(upto + 1)), 0)

    def shifted(self, k: int = 1) -> "GradedObject":
        """Right shift: (TM)(0) = 0, (TM)(i) = M(i−1)."""
        if k < 0:
            raise SuspensionError("only right shifts are defined")
        return GradedObject((0,) * k + tuple(self.rank(i) for i in range(self.stable_from)), self.tail_rank)

    def describe(self) -> str:
        head = ",".join(str(r) for r in self.head)
        return f"({head}{';' if head else ''}{self.tail_rank}...)"

    def to_dict(self):
        return {"head": list(self.head), "tail": self.tail_rank}

    @classmethod
    def from_dict(cls, data) -> "GradedObject":
        return cls(tuple(data.get("head", ())), int(data.get("tail", 0)))
