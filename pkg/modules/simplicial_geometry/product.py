# modules/simplicial_geometry/product.py

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from core.exceptions import SimplicialError
from core.logger import get_surgery_logger
from .complexes import OrderedComplex, Simplex, is_face

logger = get_surgery_logger("surgerykit.simplicial", "SIMPLICIAL")


def staircase_facets(L: OrderedComplex, offset: int) -> List[Simplex]:
    """Monotone-path triangulation of L × [0,1]; the level-1 copy of v is v + offset."""
    tops = []
    for s in L.facets():
        for i in range(len(s)):
            tops.append(s[:i + 1] + tuple(v + offset for v in s[i:]))
    return tops


@dataclass(frozen=True)
class ProductDecomposition:
    """
    The staircase triangulation L⊗[0,1] of an ordered complex L. Level-0
    vertices keep their labels; level-1 vertices are shifted by `offset`,
    so every level-0 vertex precedes every level-1 vertex.
    """
    L: OrderedComplex
    offset: int
    product: OrderedComplex

    def level0(self, s: Simplex) -> Simplex:
        """(s ∩ L)₀, the bottom face."""
        return tuple(v for v in s if v < self.offset)

    def level1(self, s: Simplex) -> Simplex:
        """(s ∩ L)₁ read back in L."""
        return tuple(v - self.offset for v in s if v >= self.offset)

    def lift(self, sigma: Simplex, v: int) -> Simplex:
        """σ joined with the level-1 copy of v."""
        return tuple(sigma) + (v + self.offset,)

    def at_ends(self, s: Simplex) -> bool:
        """s ∈ L⊗∂[0,1]."""
        return not self.level0(s) or not self.level1(s)

    def interior(self) -> List[Simplex]:
        return [s for s in self.product if not self.at_ends(s)]

    def a_sigma(self, sigma: Simplex) -> List[Simplex]:
        """A_σ: interior simplices whose bottom face contains σ."""
        return [s for s in self.interior() if is_face(sigma, self.level0(s))]

    def b_sigma(self, sigma: Simplex) -> List[Simplex]:
        """B_σ = A_σ ∖ ⋃_{τ>σ} A_τ: interior simplices with bottom face exactly σ."""
        return [s for s in self.interior() if self.level0(s) == tuple(sigma)]

    def cofaces_in_l(self, sigma: Simplex) -> List[Simplex]:
        return self.L.cofaces(tuple(sigma))

    def capped(self, apex: Optional[int] = None) -> OrderedComplex:
        """L⊗[0,1] with a cone on L⊗1; the apex comes after every other vertex."""
        apex = 2 * self.offset if apex is None else apex
        caps = [tuple(v + self.offset for v in s) + (apex,) for s in self.L.facets()]
        return OrderedComplex.from_facets(list(self.product.facets()) + caps)

    def check_partition(self) -> Dict[str, Any]:
        """The B_σ are pairwise disjoint and cover the interior."""
        seen: Dict[Simplex, Simplex] = {}
        failures = []
        for sigma in self.L:
            for s in self.b_sigma(sigma):
                if s in seen:
                    failures.append({"simplex": list(s), "sigmas": [list(seen[s]), list(sigma)]})
                seen[s] = sigma
        for s in self.interior():
            if s not in seen:
                failures.append({"simplex": list(s), "sigmas": []})
        for sigma in self.L:
            expected = set(self.a_sigma(sigma))
            for tau in self.L.star(sigma):
                if tau != sigma:
                    expected -= set(self.a_sigma(tau))
            if expected != set(self.b_sigma(sigma)):
                failures.append({"sigma": list(sigma), "kind": "difference"})
        return {"valid": not failures, "failures": failures}


def product_interval(L: OrderedComplex, offset: Optional[int] = None) -> ProductDecomposition:
    """Staircase L⊗[0,1]; the default offset is one past the largest vertex."""
    if not L.simplices:
        raise SimplicialError("product with the interval needs a nonempty complex")
    offset = max(L.vertices) + 1 if offset is None else offset
    if offset <= max(L.vertices):
        raise SimplicialError("offset must exceed every vertex of L")
    product = OrderedComplex.from_facets(staircase_facets(L, offset))
    logger.debug(f"L⊗[0,1] with {len(product)} simplices over {len(L)} simplices of L")
    return ProductDecomposition(L, offset, product)
