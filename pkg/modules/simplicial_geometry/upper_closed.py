# modules/simplicial_geometry/upper_closed.py

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Set

from core.exceptions import SimplicialError
from .complexes import OrderedComplex, Simplex, closure_of, is_face


@dataclass(frozen=True)
class UpperClosedSet:
    """Simplex subset S of a host complex with σ ∈ S, σ ≤ τ ⇒ τ ∈ S."""
    host: OrderedComplex
    simplices: FrozenSet[Simplex]

    def __post_init__(self):
        chosen = frozenset(tuple(s) for s in self.simplices)
        for s in chosen:
            if s not in self.host:
                raise SimplicialError(f"{s} is not a simplex of the host complex")
        for s in chosen:
            for t in self.host.star(s):
                if t not in chosen:
                    raise SimplicialError(f"not upper closed: {s} in S but its coface {t} is not")
        object.__setattr__(self, "simplices", chosen)

    @classmethod
    def generated_by(cls, host: OrderedComplex, seeds: Iterable[Simplex]) -> "UpperClosedSet":
        """Smallest upper closed set containing the seeds."""
        out: Set[Simplex] = set()
        for s in seeds:
            out.update(host.star(tuple(s)))
        return cls(host, frozenset(out))

    def __contains__(self, s) -> bool:
        return tuple(s) in self.simplices

    def closure(self) -> FrozenSet[Simplex]:
        return closure_of(self.simplices)

    def boundary(self) -> FrozenSet[Simplex]:
        """∂S = S̄ ∖ S."""
        return self.closure() - self.simplices

    def interior(self) -> FrozenSet[Simplex]:
        """S⁻: simplices of S sharing no vertex with ∂S."""
        touched = {v for s in self.boundary() for v in s}
        return frozenset(s for s in self.simplices if not touched.intersection(s))

    def complement(self) -> FrozenSet[Simplex]:
        return frozenset(self.host.simplices) - self.simplices


@dataclass(frozen=True)
class UpperClosedCalculus:
    closure: FrozenSet[Simplex]
    boundary: FrozenSet[Simplex]
    interior: FrozenSet[Simplex]
    complement: FrozenSet[Simplex]


def upper_closed_calculus(S: UpperClosedSet) -> UpperClosedCalculus:
    """(S̄, ∂S, S⁻) plus the complement, each a subcomplex except S⁻ ⊂ S."""
    return UpperClosedCalculus(S.closure(), S.boundary(), S.interior(), S.complement())


def is_upper_closed(host: OrderedComplex, subset: Iterable[Simplex]) -> bool:
    chosen = {tuple(s) for s in subset}
    return all(t in chosen for s in chosen for t in host.simplices if is_face(s, t))
