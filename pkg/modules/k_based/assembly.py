# modules/k_based/assembly.py

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from core.exceptions import CoverError, SimplicialError, SuspensionError
from core.logger import get_surgery_logger
from modules.chain_algebra import ChainComplex, ChainMap, is_quasi_isomorphism_z
from modules.exact_core import ExactMatrix, RingSpec, involution_dual, regular_representation
from modules.simplicial_geometry import DistanceFiltration, FiniteGaloisCover, Simplex, is_face
from .complexes import Generator, KBasedComplex, Variance, allowed, cone_is_acyclic
from .duality import duality_t, structure_dual, t_key
from .quadratic import KQuadraticStructure, verify_k_quadratic
from .sparse import Dual, Key, KeyedMatrix

logger = get_surgery_logger("surgerykit.k_based", "KBASED")


def _check_base(C: KBasedComplex, cover: FiniteGaloisCover):
    if set(C.host) != set(cover.base.simplices):
        raise CoverError("the complex and the cover have different base complexes")


def transition(cover: FiniteGaloisCover, variance: Variance, sigma: Simplex, tau: Simplex) -> List[int]:
    """Γ(σ, τ): the g with σ̃₀ → g·τ̃₀ allowed by the variance."""
    root = cover.base_lift(sigma)
    return [g for g, t in cover.lifts(tau).items() if allowed(variance, root, t)]


def _assembled_entry(ring: RingSpec, value: int, elements: Iterable[int]):
    return ring.element({ring.group_inv(g): value for g in elements})


def _by_degree(C: KBasedComplex) -> Dict[int, List[Key]]:
    out: Dict[int, List[Key]] = {}
    for g in C.generators:
        out.setdefault(g.degree, []).append(g.key)
    return out


def _assemble_block(M: KeyedMatrix, rows: List[Key], cols: List[Key], row_simplex, col_simplex,
                    cover: FiniteGaloisCover, variance: Variance) -> ExactMatrix:
    ring = cover.ring
    pos_r = {k: i for i, k in enumerate(rows)}
    pos_c = {k: j for j, k in enumerate(cols)}
    data = [[ring.zero()] * len(cols) for _ in rows]
    for r, c, v in M.items():
        if r in pos_r and c in pos_c:
            gamma = transition(cover, variance, col_simplex(c), row_simplex(r))
            if gamma:
                data[pos_r[r]][pos_c[c]] = data[pos_r[r]][pos_c[c]] + _assembled_entry(ring, v, gamma)
    return ExactMatrix.from_rows(ring, data, cols=len(cols))


@dataclass(frozen=True, eq=False)
class AssembledComplex:
    """
    Free ℤG-complex of a K-based complex: one basis element per generator,
    the copy c⊗h standing for c over h⁻¹·σ̃₀.
    """
    cover: FiniteGaloisCover
    source: KBasedComplex
    complex: ChainComplex
    basis: Dict[int, List[Key]] = field(default_factory=dict)

    def underlying(self) -> ChainComplex:
        """Restriction of scalars to ℤ via the regular representation."""
        C = self.complex
        size = self.cover.order
        return ChainComplex(RingSpec.integers(), C.lo, C.hi, {r: size * C.rank(r) for r in C.degrees()},
                            {r: regular_representation(C.diff(r)) for r in range(C.lo + 1, C.hi + 1)})

    def compact_dual(self) -> ChainComplex:
        """C^{cd}: C_r* in degree −r with the involution-dual differential."""
        C = self.complex
        if C.lo > C.hi:
            return ChainComplex.zero(C.ring)
        return ChainComplex(C.ring, -C.hi, -C.lo, {-r: C.rank(r) for r in C.degrees()},
                            {-r + 1: involution_dual(C.diff(r)) for r in range(C.lo + 1, C.hi + 1)})


def assemble(C: KBasedComplex, cover: FiniteGaloisCover) -> AssembledComplex:
    """Universal assembly: each d[r][c] becomes d[r][c]·Σ_{g ∈ Γ(s(c), s(r))} g⁻¹."""
    _check_base(C, cover)
    basis = _by_degree(C)
    ring = cover.ring
    if not basis:
        return AssembledComplex(cover, C, ChainComplex.zero(ring), {})
    lo, hi = min(basis), max(basis)
    ranks = {r: len(basis.get(r, [])) for r in range(lo, hi + 1)}
    diffs = {r: _assemble_block(C.d, basis.get(r - 1, []), basis.get(r, []), C.simplex, C.simplex, cover, C.variance)
             for r in range(lo + 1, hi + 1)}
    logger.debug(f"assembled {len(C)} generators over {ring.describe()}")
    return AssembledComplex(cover, C, ChainComplex(ring, lo, hi, ranks, diffs), basis)


def assemble_morphism(f: KeyedMatrix, source: AssembledComplex, target: AssembledComplex,
                      variance: Optional[Variance] = None) -> ChainMap:
    """Degree-0 K-based morphism assembled degreewise."""
    cover = source.cover
    variance = variance or target.source.variance
    S, T = source.source, target.source
    maps = {r: _assemble_block(f, target.basis.get(r, []), source.basis.get(r, []), T.simplex, S.simplex,
                               cover, variance)
            for r in source.complex.degrees()}
    return ChainMap(source.complex, target.complex, 0, maps)


def underlying_integer_map(f: ChainMap, source: AssembledComplex, target: AssembledComplex) -> ChainMap:
    return ChainMap(source.underlying(), target.underlying(), f.degree,
                    {r: regular_representation(m) for r, m in f.maps.items()})


def compact_supported_dual(C: KBasedComplex) -> KBasedComplex:
    """C^{cd}: e* over s(e) in degree −deg e, differential the transpose; variance flips."""
    gens = tuple(Generator(Dual(g.key), g.simplex, -g.degree) for g in C.generators)
    d = KeyedMatrix()
    for r, c, v in C.d.items():
        d.add(Dual(c), Dual(r), v)
    return KBasedComplex(C.host, C.variance.flipped(), gens, d)


# Υ: C^{cd} → TC, e* ↦ Σ_{x ≤ s(e)} T(x|e)

def upsilon(C: KBasedComplex, TC: Optional[KBasedComplex] = None) -> KeyedMatrix:
    TC = TC or duality_t(C)
    out = KeyedMatrix()
    for e in C.generators:
        for x in e.simplex:
            k = t_key((x,), e.key)
            if k in TC:
                out.add(k, Dual(e.key), 1)
    return out


def check_upsilon(C: KBasedComplex) -> Dict[str, Any]:
    """Υ is a chain map with ℤ-acyclic cone."""
    if C.variance is not Variance.COVARIANT:
        raise SimplicialError("Υ is defined for covariant complexes")
    TC = duality_t(C)
    Ccd = compact_supported_dual(C)
    ups = upsilon(C, TC)
    failures = []
    if not (TC.d @ ups - ups @ Ccd.d).is_zero():
        failures.append({"kind": "chain_map"})
    elif not cone_is_acyclic(ups, Ccd.degree_map(), Ccd.d, TC.degree_map(), TC.d):
        failures.append({"kind": "cone_acyclic"})
    return {"valid": not failures, "failures": failures}


def assembled_upsilon(C: KBasedComplex, cover: FiniteGaloisCover) -> Tuple[ChainMap, AssembledComplex, AssembledComplex]:
    """Υ over the cover, assembled from the vertex inclusions of each lifted simplex."""
    TC = duality_t(C)
    source = assemble(compact_supported_dual(C), cover)
    target = assemble(TC, cover)
    return assemble_morphism(upsilon(C, TC), source, target, Variance.CONTRAVARIANT), source, target


def check_assembled_upsilon(C: KBasedComplex, cover: FiniteGaloisCover) -> Dict[str, Any]:
    f, source, target = assembled_upsilon(C, cover)
    failures = []
    if not f.is_chain_map():
        failures.append({"kind": "chain_map"})
    elif not is_quasi_isomorphism_z(underlying_integer_map(f, source, target)):
        failures.append({"kind": "cone_acyclic"})
    return {"valid": not failures, "failures": failures}


# partial assembly over a convex simplex set

def is_convex(K: Iterable[Simplex], S: Iterable[Simplex]) -> bool:
    """σ ≤ ρ ≤ τ with σ, τ ∈ S forces ρ ∈ S; exactly the upper closed ∩ subcomplex sets."""
    chosen = {tuple(s) for s in S}
    for rho in K:
        if rho in chosen:
            continue
        below = any(is_face(s, rho) for s in chosen)
        above = any(is_face(rho, t) for t in chosen)
        if below and above:
            return False
    return True


def _require_convex(C: KBasedComplex, S: Iterable[Simplex]) -> FrozenSet[Simplex]:
    chosen = frozenset(tuple(s) for s in S)
    missing = [s for s in chosen if s not in set(C.host)]
    if missing:
        raise SimplicialError(f"{missing[0]} is not a simplex of the host")
    if not is_convex(C.host, chosen):
        raise SimplicialError("partial assembly needs S = (upper closed) ∩ (subcomplex)")
    return chosen


def partial_assembly(C: KBasedComplex, S: Iterable[Simplex], cover: FiniteGaloisCover) -> AssembledComplex:
    """Assembly of the part of C over S."""
    chosen = _require_convex(C, S)
    part = C.restrict(lambda g: g.simplex in chosen)
    return assemble(part, cover)


def partial_assembly_morphism(f: KeyedMatrix, source: KBasedComplex, target: KBasedComplex,
                              S: Iterable[Simplex], cover: FiniteGaloisCover) -> ChainMap:
    chosen = _require_convex(source, S)
    A = partial_assembly(source, chosen, cover)
    B = partial_assembly(target, chosen, cover)
    return assemble_morphism(f, A, B, target.variance)


def compact_supported_dual_map(h: ChainMap) -> Dict[int, ExactMatrix]:
    """h^{cd}: degreewise involution dual, reversing direction."""
    return {r: involution_dual(h.at(r)) for r in h.source.degrees()}


def check_partial_functor(f: KeyedMatrix, g: KeyedMatrix, C0: KBasedComplex, C1: KBasedComplex,
                          C2: KBasedComplex, S: Iterable[Simplex], cover: FiniteGaloisCover) -> Dict[str, Any]:
    """P(g f) = P(g) P(f), P(id) = id and (g f)^{cd} = f^{cd} g^{cd}."""
    chosen = _require_convex(C0, S)
    Pf = partial_assembly_morphism(f, C0, C1, chosen, cover)
    Pg = partial_assembly_morphism(g, C1, C2, chosen, cover)
    Pgf = partial_assembly_morphism(g @ f, C0, C2, chosen, cover)
    failures = []
    if not Pgf.equals(Pg.compose(Pf)):
        failures.append({"kind": "composition"})
    Pid = partial_assembly_morphism(KeyedMatrix.identity(C0.keys()), C0, C0, chosen, cover)
    if not Pid.equals(Pid.source.identity()):
        failures.append({"kind": "identity"})
    gf_cd, f_cd = compact_supported_dual_map(Pgf), compact_supported_dual_map(Pf)
    if any(gf_cd[r] != f_cd[r] @ involution_dual(Pg.at(r)) for r in gf_cd):
        failures.append({"kind": "dual_reverses"})
    return {"valid": not failures, "failures": failures}


# band grouping by the distance filtration

@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """
    Generators grouped by the band of their simplex and a map cut into band
    blocks m(b', b). Over a cover the blocks are assembled over ℤG.
    """
    cutoff: int
    variance: Variance
    bands: Dict[int, List[Key]]
    blocks: Dict[Tuple[int, int], ExactMatrix]
    ring: RingSpec = field(default_factory=RingSpec.integers)
    source_bands: Optional[Dict[int, List[Key]]] = None

    def columns(self) -> Dict[int, List[Key]]:
        return self.bands if self.source_bands is None else self.source_bands

    def is_bidiagonal(self) -> bool:
        """Blocks only stay in their band or step one band outward (inward when contravariant)."""
        step = 1 if self.variance is Variance.COVARIANT else -1
        return all(b2 - b1 in (0, step) for (b2, b1), m in self.blocks.items() if not m.is_zero())

    def block(self, target_band: int, source_band: int) -> ExactMatrix:
        key = (target_band, source_band)
        if key in self.blocks:
            return self.blocks[key]
        return ExactMatrix.zeros(self.ring, len(self.bands.get(target_band, [])),
                                 len(self.columns().get(source_band, [])))

    def augmented(self) -> "BandDecomposition":
        """ε: ℤG → ℤ applied to every block."""
        if self.ring.is_integers:
            return self
        ints = RingSpec.integers()
        blocks = {}
        for key, m in self.blocks.items():
            flat = ExactMatrix.from_rows(ints, [[self.ring.augmentation(x) for x in row] for row in m.to_list()],
                                         cols=m.cols)
            if not flat.is_zero():
                blocks[key] = flat
        return BandDecomposition(self.cutoff, self.variance, self.bands, blocks, ints, self.source_bands)


def _group_by_band(generators: Iterable[Generator], filtration: DistanceFiltration,
                   cutoff: int) -> Dict[int, List[Key]]:
    bands: Dict[int, List[Key]] = {}
    for g in generators:
        b = filtration.band_of(g.simplex)
        if b > cutoff:
            raise SuspensionError(f"generator {g.key!r} sits in band {b}, beyond the cutoff {cutoff}")
        bands.setdefault(b, []).append(g.key)
    return bands


def _cut_into_bands(M: KeyedMatrix, row_bands: Dict[int, List[Key]], col_bands: Dict[int, List[Key]],
                    row_simplex, col_simplex, variance: Variance, cutoff: int,
                    cover: Optional[FiniteGaloisCover]) -> BandDecomposition:
    blocks = {}
    for b1, cols in col_bands.items():
        for b2, rows in row_bands.items():
            if cover is None:
                m = M.to_exact(rows, cols)
            else:
                m = _assemble_block(M, rows, cols, row_simplex, col_simplex, cover, variance)
            if not m.is_zero():
                blocks[(b2, b1)] = m
    ring = RingSpec.integers() if cover is None else cover.ring
    return BandDecomposition(cutoff, variance, row_bands, blocks, ring,
                             None if col_bands is row_bands else col_bands)


def band_blocks(C: KBasedComplex, filtration: DistanceFiltration, cutoff: int,
                cover: Optional[FiniteGaloisCover] = None) -> BandDecomposition:
    """
    Band blocks d(b', b) up to `cutoff`, assembled along `cover` when one is
    given; generators beyond the cutoff are rejected.
    """
    if cover is not None:
        _check_base(C, cover)
    bands = _group_by_band(C.generators, filtration, cutoff)
    return _cut_into_bands(C.d, bands, bands, C.simplex, C.simplex, C.variance, cutoff, cover)


def structure_band_blocks(theta: KQuadraticStructure, u: int, filtration: DistanceFiltration, cutoff: int,
                          cover: Optional[FiniteGaloisCover] = None) -> BandDecomposition:
    """Band blocks θ_u(b', b): TD → D, sources grouped by the band of their T-simplex."""
    D, TD = theta.complex, theta.dual
    if cover is not None:
        _check_base(D, cover)
    rows = _group_by_band(D.generators, filtration, cutoff)
    cols = _group_by_band(TD.generators, filtration, cutoff)
    return _cut_into_bands(theta.component(u), rows, cols, D.simplex, TD.simplex, D.variance, cutoff, cover)


# infinite transfer along a finite cover

def transfer_key(key: Key, g: int) -> Key:
    return ("~", key, g)


def _lift_target(cover: FiniteGaloisCover, variance: Variance, lifted_source: Simplex, tau: Simplex) -> Tuple[int, Simplex]:
    found = [(h, t) for h, t in cover.lifts(tau).items() if allowed(variance, lifted_source, t)]
    if len(found) != 1:
        raise CoverError(f"{lifted_source} has {len(found)} lifts of {tau} in reach")
    return found[0]


def infinite_transfer_finite(X: KBasedComplex, cover: FiniteGaloisCover) -> KBasedComplex:
    """Ẋ(σ̃) = X(pσ̃): one copy of every generator over each lift, blocks lifted along the cover."""
    _check_base(X, cover)
    gens = []
    for e in X.generators:
        for g, s in cover.lifts(e.simplex).items():
            gens.append(Generator(transfer_key(e.key, g), s, e.degree))
    d = transfer_morphism(X.d, X, X, cover)
    return KBasedComplex(cover.total, X.variance, tuple(gens), d)


def transfer_morphism(f: KeyedMatrix, source: KBasedComplex, target: KBasedComplex,
                      cover: FiniteGaloisCover) -> KeyedMatrix:
    out = KeyedMatrix()
    for r, c, v in f.items():
        sigma, tau = source.simplex(c), target.simplex(r)
        for g, s in cover.lifts(sigma).items():
            h, _ = _lift_target(cover, target.variance, s, tau)
            out.add(transfer_key(r, h), transfer_key(c, g), v)
    return out


def transferred_duality_keys(TX: KBasedComplex, X: KBasedComplex, cover: FiniteGaloisCover) -> Dict[Key, Key]:
    """Transfer of T(σ|e) over the lift g·σ̃₀, matched with the generator T(σ̃|ẽ) of T(Ẋ)."""
    out: Dict[Key, Key] = {}
    for t in TX.generators:
        for g, lifted in cover.lifts(t.simplex).items():
            h, _ = _lift_target(cover, X.variance, lifted, t.source.simplex)
            out[transfer_key(t.key, g)] = t_key(lifted, transfer_key(t.source.key, h))
    return out


def transfer_commutes_with_duality(X: KBasedComplex, cover: FiniteGaloisCover) -> bool:
    """T(Ẋ) and the transfer of TX agree after matching T(σ̃|ẽ) with (T(σ|e), g)."""
    TX = duality_t(X)
    left = duality_t(infinite_transfer_finite(X, cover))
    right = infinite_transfer_finite(TX, cover)
    rename = transferred_duality_keys(TX, X, cover)
    if set(rename.values()) != set(left.keys()):
        return False
    return right.d.relabel(rename.__getitem__, rename.__getitem__) == left.d


def _transfer_structure_map(m: KeyedMatrix, D: KBasedComplex, TD: KBasedComplex, cover: FiniteGaloisCover,
                            rename: Dict[Key, Key]) -> KeyedMatrix:
    return transfer_morphism(m, TD, D, cover).relabel(lambda r: r, rename.__getitem__)


def lift_structure(theta: KQuadraticStructure, cover: FiniteGaloisCover) -> KQuadraticStructure:
    """The structure transferred to the total complex, written against T of the transferred complex."""
    D, TD = theta.complex, theta.dual
    lifted = infinite_transfer_finite(D, cover)
    rename = transferred_duality_keys(TD, D, cover)
    psi = {u: _transfer_structure_map(m, D, TD, cover, rename) for u, m in theta.psi.items()}
    return KQuadraticStructure(lifted, duality_t(lifted), theta.n, psi)


def check_structure_transfer(theta: KQuadraticStructure, cover: FiniteGaloisCover) -> Dict[str, Any]:
    """The lifted θ is a quadratic structure and the transfer commutes with T on every ψ_u."""
    lifted = lift_structure(theta, cover)
    failures = [dict(f, kind="lifted_" + f["kind"]) for f in verify_k_quadratic(lifted)["failures"]]
    D, TD = theta.complex, theta.dual
    rename = transferred_duality_keys(TD, D, cover)
    for u in range(0, theta.top + 1):
        down = _transfer_structure_map(structure_dual(theta.component(u), D, TD), D, TD, cover, rename)
        up = structure_dual(lifted.component(u), lifted.complex, lifted.dual)
        if down != up:
            failures.append({"kind": "structure_dual", "u": u})
    return {"valid": not failures, "failures": failures}


def assemble_lifted(f: KeyedMatrix, rows: List[Key], cols: List[Key], cover: FiniteGaloisCover,
                    row_lift: Callable[[Key, int], Key] = transfer_key,
                    col_lift: Callable[[Key, int], Key] = transfer_key) -> ExactMatrix:
    """
    ℤG-matrix of an equivariant map between transferred complexes: entry
    (r, c) is Σ_h f[r over h][c over the identity lift]·h⁻¹.
    """
    ring = cover.ring
    e = ring.group_identity()
    data = [[ring.zero()] * len(cols) for _ in rows]
    for j, c in enumerate(cols):
        column = col_lift(c, e)
        for i, r in enumerate(rows):
            terms: Dict[int, int] = {}
            for h in cover.group:
                v = f.get(row_lift(r, h), column)
                if v:
                    inv = ring.group_inv(h)
                    terms[inv] = terms.get(inv, 0) + v
            if terms:
                data[i][j] = ring.element(terms)
    return ExactMatrix.from_rows(ring, data, cols=len(cols))
