# modules/simplicial_geometry/covers.py

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from core.exceptions import CoverError
from core.logger import get_surgery_logger
from modules.exact_core import RingSpec
from modules.exact_core.rings import RingKind
from .complexes import OrderedComplex, Simplex, is_face

logger = get_surgery_logger("surgerykit.simplicial", "SIMPLICIAL")


@dataclass(frozen=True)
class FiniteGaloisCover:
    """
    Free simplicial action of a finite group G on the total complex K̃ with
    quotient projection p. Total vertices are labelled so that the vertex
    order of every lifted simplex agrees with the order of its projection.
    """
    base: OrderedComplex
    total: OrderedComplex
    ring: RingSpec
    action: Mapping[int, Mapping[int, int]]
    projection: Mapping[int, int]

    @property
    def group(self) -> Tuple[int, ...]:
        return self.ring.group_elements()

    @property
    def order(self) -> int:
        return len(self.group)

    def project(self, s: Simplex) -> Simplex:
        return tuple(self.projection[v] for v in s)

    def translate(self, g: int, s: Simplex) -> Simplex:
        return tuple(sorted(self.action[g][v] for v in s))

    def base_lift(self, sigma: Simplex) -> Simplex:
        """Chosen lift σ̃₀, the smallest lift of σ."""
        lifts = [s for s in self.total if self.project(s) == tuple(sigma)]
        if not lifts:
            raise CoverError(f"{sigma} has no lift")
        return min(lifts)

    def lifts(self, sigma: Simplex) -> Dict[int, Simplex]:
        """g ↦ g·σ̃₀."""
        root = self.base_lift(sigma)
        return {g: self.translate(g, root) for g in self.group}

    def locate(self, lift: Simplex) -> Tuple[Simplex, int]:
        """(σ, g) with lift = g·σ̃₀."""
        sigma = self.project(lift)
        for g, s in self.lifts(sigma).items():
            if s == tuple(lift):
                return sigma, g
        raise CoverError(f"{lift} is not a simplex of the total complex")

    def gamma(self, sigma: Simplex, tau: Simplex) -> List[int]:
        """{g : σ̃₀ ≤ g·τ̃₀}."""
        root = self.base_lift(sigma)
        return [g for g, t in self.lifts(tau).items() if is_face(root, t)]

    def preimage(self, simplices: Iterable[Simplex]) -> FrozenSet[Simplex]:
        """p⁻¹ of a set of base simplices."""
        chosen = {tuple(s) for s in simplices}
        return frozenset(s for s in self.total if self.project(s) in chosen)


def _relabel_by_projection(total: OrderedComplex, projection: Mapping[int, int]) -> Dict[int, int]:
    fibers: Dict[int, List[int]] = {}
    for v in sorted(total.vertices):
        fibers.setdefault(projection[v], []).append(v)
    width = max(len(f) for f in fibers.values())
    return {v: b * width + i for b, fiber in fibers.items() for i, v in enumerate(fiber)}


def build_cover(base: OrderedComplex, total: OrderedComplex, ring: RingSpec,
                action: Mapping[int, Mapping[int, int]], projection: Mapping[int, int]) -> FiniteGaloisCover:
    """Validate the action data and return the cover with projection-compatible labels."""
    if ring.kind is not RingKind.FINITE_GROUP:
        raise CoverError("a Galois cover needs a finite group ring")
    group = ring.group_elements()
    tverts = set(total.vertices)
    if set(projection) != tverts:
        raise CoverError("projection must be defined on every vertex of the total complex")
    if set(action) != set(group):
        raise CoverError("action must be given for every group element")
    simplices = set(total.simplices)
    for g in group:
        perm = {int(k): int(v) for k, v in action[g].items()}
        if set(perm) != tverts or set(perm.values()) != tverts:
            raise CoverError(f"group element {g} does not permute the vertices")
        for s in total:
            if tuple(sorted(perm[v] for v in s)) not in simplices:
                raise CoverError(f"group element {g} is not simplicial on {s}")
            if any(projection[perm[v]] != projection[v] for v in s):
                raise CoverError(f"projection is not invariant under {g}")
    e = ring.group_identity()
    if any(action[e][v] != v for v in tverts):
        raise CoverError("the identity must act trivially")
    for g in group:
        for h in group:
            gh = ring.group_mul(g, h)
            if any(action[gh][v] != action[g][action[h][v]] for v in tverts):
                raise CoverError(f"action is not a homomorphism at ({g}, {h})")
    for s in total:
        image = tuple(projection[v] for v in s)
        if len(set(image)) != len(s) or tuple(sorted(image)) not in base:
            raise CoverError(f"projection is not simplicial on {s}")
        for g in group:
            if g != e and set(action[g][v] for v in s) == set(s):
                raise CoverError(f"group element {g} fixes the simplex {s}")
    for sigma in base:
        fiber = [s for s in total if tuple(sorted(projection[v] for v in s)) == sigma]
        if len(fiber) != len(group):
            raise CoverError(f"fiber over {sigma} has {len(fiber)} simplices, expected {len(group)}")
    for s in total:
        down = tuple(sorted(projection[v] for v in s))
        for tau in base.cofaces(down):
            above = [t for t in total.cofaces(s) if tuple(sorted(projection[v] for v in t)) == tau]
            if len(above) != 1:
                raise CoverError(f"projection is not a covering near {s}: {len(above)} lifts of {tau}")
    relabel = _relabel_by_projection(total, projection)
    new_total = total.relabel(relabel)
    new_action = {g: {relabel[v]: relabel[action[g][v]] for v in tverts} for g in group}
    new_projection = {relabel[v]: projection[v] for v in tverts}
    logger.debug(f"cover of {len(base)} simplices by {len(total)} simplices, |G| = {len(group)}")
    return FiniteGaloisCover(base, new_total, ring, new_action, new_projection)


def trivial_cover(base: OrderedComplex) -> FiniteGaloisCover:
    ring = RingSpec.finite_group([[0]])
    verts = base.vertices
    return build_cover(base, base, ring, {0: {v: v for v in verts}}, {v: v for v in verts})


def cyclic_cycle_cover(n: int, m: int) -> FiniteGaloisCover:
    """The (n·m)-cycle over the n-cycle, ℤ/m rotating by n steps."""
    total = OrderedComplex.cycle(n * m)
    action = {g: {v: (v + n * g) % (n * m) for v in range(n * m)} for g in range(m)}
    return build_cover(OrderedComplex.cycle(n), total, RingSpec.cyclic(m), action,
                       {v: v % n for v in range(n * m)})


def split_cover(base: OrderedComplex, order: int) -> FiniteGaloisCover:
    """K × ℤ/m: `order` disjoint copies of the base, ℤ/m permuting them."""
    width = max(base.vertices) + 1
    total = OrderedComplex.from_facets([tuple(g * width + v for v in s) for g in range(order)
                                        for s in base.facets()])
    verts = [g * width + v for g in range(order) for v in base.vertices]
    action = {g: {x: ((x // width + g) % order) * width + x % width for x in verts} for g in range(order)}
    return build_cover(base, total, RingSpec.cyclic(order), action, {x: x % width for x in verts})


def cover_from_data(base: OrderedComplex, total_facets: Sequence[Sequence[int]], table: Sequence[Sequence[int]],
                    action: Mapping[int, Mapping[int, int]], projection: Mapping[int, int],
                    identity: int = 0) -> FiniteGaloisCover:
    """Scenario entry point: plain lists in, validated cover out."""
    ring = RingSpec.finite_group(table, identity)
    return build_cover(base, OrderedComplex.from_facets(total_facets), ring,
                       {int(g): {int(a): int(b) for a, b in p.items()} for g, p in action.items()},
                       {int(a): int(b) for a, b in projection.items()})
