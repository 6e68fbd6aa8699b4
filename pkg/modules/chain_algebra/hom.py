# modules/chain_algebra/hom.py

from dataclasses import dataclass
from typing import Dict, List, Tuple

from core.exceptions import RingMismatchError, UnsupportedRingError
from modules.exact_core import ExactMatrix
from .complexes import ChainComplex, ChainMap, sign

HomElement = Dict[int, ExactMatrix]


@dataclass(frozen=True, eq=False)
class HomComplex:
    """
    Hom(C, D)_r = sum over q of Hom(C_q, D_{r+q}). An element of degree r is a
    family {q: f_q} with f_q of shape rank D_{r+q} x rank C_q.
    """
    source: ChainComplex
    target: ChainComplex

    def __post_init__(self):
        if self.source.ring != self.target.ring:
            raise RingMismatchError("Hom complex between complexes over different rings")

    @property
    def ring(self):
        return self.source.ring

    @property
    def lo(self) -> int:
        return self.target.lo - self.source.hi

    @property
    def hi(self) -> int:
        return self.target.hi - self.source.lo

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def slots(self, r: int) -> List[Tuple[int, int, int]]:
        """(q, rows, cols) for every nonzero block of degree r."""
        out = []
        for q in self.source.degrees():
            rows, cols = self.target.rank(r + q), self.source.rank(q)
            if rows and cols:
                out.append((q, rows, cols))
        return out

    def block(self, f: HomElement, r: int, q: int) -> ExactMatrix:
        if q in f:
            return f[q]
        return ExactMatrix.zeros(self.ring, self.target.rank(r + q), self.source.rank(q))

    def zero(self, r: int) -> HomElement:
        return {q: ExactMatrix.zeros(self.ring, rows, cols) for q, rows, cols in self.slots(r)}

    def differential(self, f: HomElement, r: int) -> HomElement:
        """(df)_q = d_D f_q + (-1)^{r+q-1} f_{q-1} d_C, an element of degree r-1."""
        out = {}
        for q in self.source.degrees():
            m = self.target.diff(r + q) @ self.block(f, r, q)
            m = m + (self.block(f, r, q - 1) @ self.source.diff(q)).scale(sign(r + q - 1))
            out[q] = m
        return out

    def is_cycle(self, f: HomElement, r: int) -> bool:
        return all(m.is_zero() for m in self.differential(f, r).values())

    def as_chain_complex(self) -> ChainComplex:
        """Flatten to a chain complex of based modules (commutative rings only)."""
        if not self.ring.is_commutative:
            raise UnsupportedRingError("flattening Hom needs a commutative ring")
        ranks = {r: sum(rows * cols for _, rows, cols in self.slots(r)) for r in self.degrees()}
        diffs = {}
        for r in range(self.lo + 1, self.hi + 1):
            columns = []
            for f in self._basis(r):
                columns.append(self._flatten(self.differential(f, r), r - 1))
            rows = [[columns[j][i] for j in range(len(columns))] for i in range(ranks[r - 1])]
            diffs[r] = ExactMatrix.from_rows(self.ring, rows, cols=ranks[r])
        return ChainComplex(self.ring, self.lo, self.hi, ranks, diffs)

    def _basis(self, r: int):
        for q, rows, cols in self.slots(r):
            for i in range(rows):
                for j in range(cols):
                    f = self.zero(r)
                    entries = f[q].to_list()
                    entries[i][j] = self.ring.one()
                    f[q] = ExactMatrix.from_rows(self.ring, entries, cols=cols)
                    yield f

    def _flatten(self, f: HomElement, r: int) -> list:
        out = []
        for q, rows, cols in self.slots(r):
            block = self.block(f, r, q)
            out.extend(block[i, j] for i in range(rows) for j in range(cols))
        return out


def chain_map_as_cycle(f: ChainMap) -> HomElement:
    """Degree-0 chain maps become Hom cycles after f_q -> (-1)^{q(q+1)/2} f_q."""
    return {q: f.at(q).scale(sign(q * (q + 1) // 2)) for q in f.source.degrees()}


def cycle_as_chain_map(hom: HomComplex, f: HomElement) -> ChainMap:
    return ChainMap(hom.source, hom.target, 0,
                    {q: hom.block(f, 0, q).scale(sign(q * (q + 1) // 2)) for q in hom.source.degrees()})
