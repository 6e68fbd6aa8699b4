# modules/chain_algebra/complexes.py

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from core.exceptions import DimensionMismatchError, RingMismatchError
from core.logger import get_surgery_logger
from modules.exact_core import ExactMatrix, RingSpec

logger = get_surgery_logger("surgerykit.chain_algebra", "CHAIN")


def sign(k: int) -> int:
    """(-1)^k for any integer k."""
    return -1 if k % 2 else 1


def _as_matrix(ring: RingSpec, m: Any, rows: int, cols: int) -> ExactMatrix:
    if isinstance(m, ExactMatrix):
        mat = m
    else:
        mat = ExactMatrix.from_rows(ring, m, cols=cols)
        if mat.rows == 0 and rows:
            mat = ExactMatrix.zeros(ring, rows, cols)
    if mat.shape != (rows, cols):
        raise DimensionMismatchError(f"expected a {rows}x{cols} matrix, got {mat.shape}")
    return mat


@dataclass(frozen=True, eq=False)
class ChainComplex:
    """
    Bounded complex of based free modules. `d[r]` maps degree r to r-1 and
    has shape rank(r-1) x rank(r). Ranks vanish outside [lo, hi].
    """
    ring: RingSpec
    lo: int
    hi: int
    ranks: Dict[int, int]
    d: Dict[int, ExactMatrix] = field(default_factory=dict)

    def __post_init__(self):
        ranks = {r: int(self.ranks.get(r, 0)) for r in range(self.lo, self.hi + 1)}
        if any(v < 0 for v in ranks.values()):
            raise DimensionMismatchError("negative rank")
        object.__setattr__(self, "ranks", ranks)
        diffs = {}
        for r in range(self.lo + 1, self.hi + 1):
            rows, cols = ranks[r - 1], ranks[r]
            if r in self.d:
                diffs[r] = _as_matrix(self.ring, self.d[r], rows, cols)
            else:
                diffs[r] = ExactMatrix.zeros(self.ring, rows, cols)
        for r, m in self.d.items():
            if r not in diffs and isinstance(m, ExactMatrix) and not m.is_zero():
                raise DimensionMismatchError(f"differential d_{r} outside the window [{self.lo}, {self.hi}]")
        object.__setattr__(self, "d", diffs)

    @classmethod
    def from_data(cls, ring: RingSpec, ranks: Mapping[int, int],
                  differentials: Optional[Mapping[int, Any]] = None) -> "ChainComplex":
        if not ranks:
            return cls.zero(ring)
        lo, hi = min(ranks), max(ranks)
        return cls(ring, lo, hi, dict(ranks), dict(differentials or {}))

    @classmethod
    def zero(cls, ring: RingSpec) -> "ChainComplex":
        return cls(ring, 0, -1, {}, {})

    @classmethod
    def concentrated(cls, ring: RingSpec, degree: int, rank: int) -> "ChainComplex":
        return cls(ring, degree, degree, {degree: rank})

    def rank(self, r: int) -> int:
        return self.ranks.get(r, 0)

    def diff(self, r: int) -> ExactMatrix:
        if r in self.d:
            return self.d[r]
        return ExactMatrix.zeros(self.ring, self.rank(r - 1), self.rank(r))

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def total_rank(self) -> int:
        return sum(self.ranks.values())

    def is_zero(self) -> bool:
        return self.total_rank() == 0

    def identity(self) -> "ChainMap":
        return ChainMap(self, self, 0, {r: ExactMatrix.identity(self.ring, self.rank(r)) for r in self.degrees()})

    def shift(self, k: int) -> "ChainComplex":
        """C[k]_r = C_{r-k}; the differential picks up (-1)^k."""
        return ChainComplex(self.ring, self.lo + k, self.hi + k,
                            {r + k: v for r, v in self.ranks.items()},
                            {r + k: m.scale(sign(k)) for r, m in self.d.items()})

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ChainComplex):
            return NotImplemented
        degs = set(r for r, v in self.ranks.items() if v) | set(r for r, v in other.ranks.items() if v)
        if self.ring != other.ring or any(self.rank(r) != other.rank(r) for r in degs):
            return False
        return all(self.diff(r) == other.diff(r) for r in degs)

    __hash__ = None

    def describe(self) -> str:
        return " ".join(f"{r}:{self.rank(r)}" for r in self.degrees())


@dataclass(frozen=True, eq=False)
class ChainMap:
    """Graded map of the given degree: maps[r]: C_r -> D_{r+degree}."""
    source: ChainComplex
    target: ChainComplex
    degree: int
    maps: Dict[int, ExactMatrix] = field(default_factory=dict)

    def __post_init__(self):
        if self.source.ring != self.target.ring:
            raise RingMismatchError("chain map between complexes over different rings")
        fixed = {}
        for r in self.source.degrees():
            rows, cols = self.target.rank(r + self.degree), self.source.rank(r)
            if r in self.maps:
                fixed[r] = _as_matrix(self.source.ring, self.maps[r], rows, cols)
            else:
                fixed[r] = ExactMatrix.zeros(self.source.ring, rows, cols)
        object.__setattr__(self, "maps", fixed)

    @property
    def ring(self) -> RingSpec:
        return self.source.ring

    def at(self, r: int) -> ExactMatrix:
        if r in self.maps:
            return self.maps[r]
        return ExactMatrix.zeros(self.ring, self.target.rank(r + self.degree), self.source.rank(r))

    def commutator_defect(self) -> Dict[int, ExactMatrix]:
        """Nonzero entries of d_D f - (-1)^deg f d_C, keyed by source degree."""
        out = {}
        for r in range(self.source.lo, self.source.hi + 2):
            lhs = self.target.diff(r + self.degree) @ self.at(r)
            rhs = self.at(r - 1) @ self.source.diff(r)
            m = lhs - rhs.scale(sign(self.degree))
            if not m.is_zero():
                out[r] = m
        return out

    def is_chain_map(self) -> bool:
        return not self.commutator_defect()

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self ∘ first."""
        return ChainMap(first.source, self.target, first.degree + self.degree,
                        {r: self.at(r + first.degree) @ first.at(r) for r in first.source.degrees()})

    def __add__(self, other: "ChainMap") -> "ChainMap":
        if other.degree != self.degree:
            raise DimensionMismatchError("adding chain maps of different degree")
        return ChainMap(self.source, self.target, self.degree,
                        {r: self.at(r) + other.at(r) for r in self.source.degrees()})

    def __neg__(self) -> "ChainMap":
        return self.scale(-1)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        return self + (-other)

    def scale(self, k: Any) -> "ChainMap":
        return ChainMap(self.source, self.target, self.degree, {r: m.scale(k) for r, m in self.maps.items()})

    def equals(self, other: "ChainMap") -> bool:
        return self.degree == other.degree and all(self.at(r) == other.at(r) for r in self.source.degrees())


@dataclass(frozen=True, eq=False)
class ChainHomotopy:
    """h[r]: C_r -> D_{r+1}."""
    source: ChainComplex
    target: ChainComplex
    maps: Dict[int, ExactMatrix] = field(default_factory=dict)

    def at(self, r: int) -> ExactMatrix:
        if r in self.maps:
            return self.maps[r]
        return ExactMatrix.zeros(self.source.ring, self.target.rank(r + 1), self.source.rank(r))

    def defect(self, f: ChainMap, g: ChainMap) -> Dict[int, ExactMatrix]:
        """Degrees where d h + h d differs from f - g."""
        out = {}
        for r in self.source.degrees():
            lhs = self.target.diff(r + 1) @ self.at(r) + self.at(r - 1) @ self.source.diff(r)
            m = lhs - (f.at(r) - g.at(r))
            if not m.is_zero():
                out[r] = m
        return out

    def verifies(self, f: ChainMap, g: ChainMap) -> bool:
        return not self.defect(f, g)


def verify_complex(C: ChainComplex) -> Dict[str, Any]:
    """Report every degree r with d_{r-1} d_r != 0."""
    failures = []
    for r in range(C.lo + 2, C.hi + 1):
        prod = C.diff(r - 1) @ C.diff(r)
        if not prod.is_zero():
            failures.append({"degree": r, "product": prod.to_list()})
            logger.warning(f"d^2 != 0 at degree {r}: {prod.to_list()}")
    logger.debug(f"verify_complex over degrees {C.lo}..{C.hi}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


def dual_complex(C: ChainComplex, n: int) -> ChainComplex:
    """C^{n-*}: degree r holds C_{n-r}^*, differential (-1)^r d_{n-r+1}^*."""
    ranks = {r: C.rank(n - r) for r in range(n - C.hi, n - C.lo + 1)}
    diffs = {r: C.diff(n - r + 1).dual().scale(sign(r)) for r in range(n - C.hi + 1, n - C.lo + 1)}
    return ChainComplex(C.ring, n - C.hi, n - C.lo, ranks, diffs)


def dual_map(f: ChainMap, n: int) -> ChainMap:
    """f^{n-*}: D^{n-*} -> C^{n-*} for a degree-0 chain map f: C -> D."""
    C_dual, D_dual = dual_complex(f.source, n), dual_complex(f.target, n)
    return ChainMap(D_dual, C_dual, 0, {r: f.at(n - r).dual() for r in D_dual.degrees()})


def double_dual_identification(C: ChainComplex, n: int) -> ChainMap:
    """Chain isomorphism C -> (C^{n-*})^{n-*}, (-1)^{r(n+1)} in degree r."""
    DD = dual_complex(dual_complex(C, n), n)
    return ChainMap(C, DD, 0, {r: ExactMatrix.identity(C.ring, C.rank(r)).scale(sign(r * (n + 1)))
                               for r in C.degrees()})


def mapping_cone(f: ChainMap) -> ChainComplex:
    """C(f)_r = D_r + C_{r-1}, d = [[d_D, (-1)^{r-1} f],[0, d_C]]."""
    if f.degree != 0:
        raise DimensionMismatchError("mapping cone needs a degree-0 chain map")
    C, D, ring = f.source, f.target, f.ring
    lo, hi = min(D.lo, C.lo + 1), max(D.hi, C.hi + 1)
    if D.is_zero() and C.is_zero():
        return ChainComplex.zero(ring)
    ranks = {r: D.rank(r) + C.rank(r - 1) for r in range(lo, hi + 1)}
    diffs = {}
    for r in range(lo + 1, hi + 1):
        diffs[r] = ExactMatrix.block(ring, [
            [D.diff(r), f.at(r - 1).scale(sign(r - 1))],
            [ExactMatrix.zeros(ring, C.rank(r - 2), D.rank(r)), C.diff(r - 1)],
        ])
    return ChainComplex(ring, lo, hi, ranks, diffs)


def cone_inclusion(f: ChainMap) -> ChainMap:
    """D -> C(f)."""
    cone = mapping_cone(f)
    ring = f.ring
    return ChainMap(f.target, cone, 0, {
        r: ExactMatrix.vstack(ring, [ExactMatrix.identity(ring, f.target.rank(r)),
                                     ExactMatrix.zeros(ring, f.source.rank(r - 1), f.target.rank(r))],
                              cols=f.target.rank(r))
        for r in f.target.degrees()})


def direct_sum(complexes: Sequence[ChainComplex]) -> ChainComplex:
    """Blockwise sum; all summands share the ring."""
    if not complexes:
        raise DimensionMismatchError("direct sum of nothing")
    ring = complexes[0].ring
    if any(c.ring != ring for c in complexes):
        raise RingMismatchError("direct sum over different rings")
    nonempty = [c for c in complexes if c.lo <= c.hi]
    if not nonempty:
        return ChainComplex.zero(ring)
    lo, hi = min(c.lo for c in nonempty), max(c.hi for c in nonempty)
    ranks = {r: sum(c.rank(r) for c in complexes) for r in range(lo, hi + 1)}
    diffs = {}
    for r in range(lo + 1, hi + 1):
        diffs[r] = block_diagonal(ring, [c.diff(r) for c in complexes])
    return ChainComplex(ring, lo, hi, ranks, diffs)


def block_diagonal(ring: RingSpec, mats: Iterable[ExactMatrix]) -> ExactMatrix:
    mats = list(mats)
    rows = [[m if i == j else ExactMatrix.zeros(ring, m.rows, other.cols)
             for j, other in enumerate(mats)] for i, m in enumerate(mats)]
    if not mats:
        return ExactMatrix.zeros(ring, 0, 0)
    return ExactMatrix.block(ring, rows)


def chain_complex_of_lists(ranks: Mapping[int, int], differentials: Mapping[int, List[List[int]]]) -> ChainComplex:
    """Integer complex from plain nested lists, used by scenarios and tests."""
    ring = RingSpec.integers()
    return ChainComplex.from_data(ring, ranks, {r: ExactMatrix.from_rows(ring, m, cols=ranks.get(r, 0))
                                                for r, m in differentials.items()})
