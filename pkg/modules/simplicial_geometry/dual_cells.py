# modules/simplicial_geometry/dual_cells.py

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from core.exceptions import SimplicialError
from core.logger import get_surgery_logger
from .complexes import OrderedComplex, Simplex, incidence_number, is_face

logger = get_surgery_logger("surgerykit.simplicial", "SIMPLICIAL")


def complement(sigma: Simplex, l: int) -> Simplex:
    """σ* as the vertex set {0, ..., l+1} ∖ σ."""
    return tuple(i for i in range(l + 2) if i not in sigma)


def j_map(sigma: Simplex, l: int) -> Tuple[int, ...]:
    """J_σ(i) is the (i+1)-th element of {0, ..., l+1} ∖ σ."""
    return complement(sigma, l)


def j_all(sigma: Simplex, l: int) -> int:
    return sum(complement(sigma, l))


@dataclass(frozen=True)
class SphereEmbedding:
    """Order-preserving injective vertex map of K_c into ∂Δ^{l+1}."""
    complex: OrderedComplex
    l: int
    vertex_map: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        vmap = dict(self.vertex_map) or {v: v for v in self.complex.vertices}
        verts = sorted(self.complex.vertices)
        if set(vmap) != set(verts):
            raise SimplicialError("vertex map must be defined on exactly the vertices of the complex")
        images = [vmap[v] for v in verts]
        if any(not 0 <= x <= self.l + 1 for x in images):
            raise SimplicialError(f"vertex images must lie in 0..{self.l + 1}")
        if any(a >= b for a, b in zip(images, images[1:])):
            raise SimplicialError("vertex map is not strictly order preserving")
        if any(len(s) == self.l + 2 for s in self.complex):
            raise SimplicialError(f"a simplex fills all of Δ^{self.l + 1}; not an embedding into its boundary")
        object.__setattr__(self, "vertex_map", vmap)

    @classmethod
    def identity(cls, K: OrderedComplex, l: Optional[int] = None) -> "SphereEmbedding":
        top = max(K.vertices, default=0)
        if l is None:
            l = max(top - 1, K.dimension, 0)
        return cls(K, l, {v: v for v in K.vertices})

    def image(self, sigma: Simplex) -> Simplex:
        return tuple(self.vertex_map[v] for v in sigma)

    def embedded(self) -> OrderedComplex:
        return self.complex.relabel(dict(self.vertex_map))


@dataclass(frozen=True)
class DualComplex:
    """
    Cells σ* of Σ^l for the simplices σ of ∂Δ^{l+1} that meet the embedded
    complex, i.e. its image together with all cofaces of image simplices.
    """
    l: int
    simplices: Tuple[Simplex, ...]
    embedded: FrozenSet[Simplex] = frozenset()

    def dual(self, sigma: Simplex) -> Simplex:
        return complement(sigma, self.l)

    def undual(self, cell: Simplex) -> Simplex:
        return complement(cell, self.l)

    def cell_dim(self, sigma: Simplex) -> int:
        """|σ*| = l − |σ|."""
        return self.l - (len(sigma) - 1)

    def j_map(self, sigma: Simplex) -> Tuple[int, ...]:
        return j_map(sigma, self.l)

    def j_all(self, sigma: Simplex) -> int:
        return j_all(sigma, self.l)

    def dual_incidence(self, sigma: Simplex, tau: Simplex) -> int:
        """n_{τ*}^{σ*} for σ < τ of codimension one."""
        return incidence_number(self.dual(tau), self.dual(sigma))

    def cells(self) -> List[Simplex]:
        return [self.dual(s) for s in self.simplices]

    def underline(self, V: Iterable[Simplex]) -> FrozenSet[Simplex]:
        """{σ* : σ ∉ V}, over the materialized cells."""
        excluded = {tuple(s) for s in V}
        return frozenset(self.dual(s) for s in self.simplices if s not in excluded)

    def adjacent_pairs(self):
        present = set(self.simplices)
        for tau in self.simplices:
            for i in range(len(tau)):
                sigma = tau[:i] + tau[i + 1:]
                if sigma and sigma in present:
                    yield sigma, tau

    def check_dual_incidence(self) -> Dict[str, Any]:
        """n_σ^τ + n_{τ*}^{σ*} = J_σ^all − J_τ^all on every codimension-one pair."""
        failures, checked = [], 0
        for sigma, tau in self.adjacent_pairs():
            checked += 1
            lhs = incidence_number(sigma, tau) + self.dual_incidence(sigma, tau)
            rhs = self.j_all(sigma) - self.j_all(tau)
            if lhs != rhs:
                failures.append({"sigma": list(sigma), "tau": list(tau), "lhs": lhs, "rhs": rhs})
                logger.warning(f"dual incidence fails at {sigma} < {tau}: {lhs} != {rhs}")
        logger.debug(f"dual incidence checked on {checked} pairs, l = {self.l}")
        return {"valid": not failures, "failures": failures, "checked": checked}

    def check_order_reversal(self) -> Dict[str, Any]:
        """σ ≤ τ ⇔ τ* ≤ σ*."""
        failures = []
        for a in self.simplices:
            for b in self.simplices:
                if is_face(a, b) != is_face(self.dual(b), self.dual(a)):
                    failures.append({"sigma": list(a), "tau": list(b)})
        return {"valid": not failures, "failures": failures}


def dual_cell_data(emb: SphereEmbedding) -> DualComplex:
    """Dual cells of the image of K_c and of every coface in ∂Δ^{l+1}."""
    l = emb.l
    image = {emb.image(s) for s in emb.complex}
    verts = set(v for s in image for v in s)
    cells = []
    for k in range(1, l + 2):
        for s in combinations(range(l + 2), k):
            if verts.intersection(s):
                cells.append(s)
    logger.debug(f"materialized {len(cells)} dual cells for l = {l}")
    return DualComplex(l, tuple(cells), frozenset(image))


def full_dual_complex(l: int) -> DualComplex:
    """All cells of Σ^l."""
    return dual_cell_data(SphereEmbedding.identity(OrderedComplex.simplex_boundary(l + 1), l))


def dual_incidence_exhaustive(max_l: int = 5) -> Dict[str, Any]:
    """Run the dual incidence identity over ∂Δ^{l+1} for every l ≤ max_l."""
    failures, checked = [], 0
    for l in range(0, max_l + 1):
        report = full_dual_complex(l).check_dual_incidence()
        checked += report["checked"]
        failures.extend(dict(f, l=l) for f in report["failures"])
    return {"valid": not failures, "failures": failures, "checked": checked}
