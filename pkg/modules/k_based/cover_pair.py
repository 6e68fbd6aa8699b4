# modules/k_based/cover_pair.py

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Tuple

from core.exceptions import CoverError, InvalidStructureError, SimplicialError
from core.logger import get_surgery_logger
from modules.chain_algebra import sign
from modules.exact_core import ExactMatrix
from modules.simplicial_geometry import FiniteGaloisCover, UpperClosedSet, trivial_cover
from .assembly import assemble_lifted, check_assembled_upsilon, lift_structure, transfer_key
from .complexes import KBasedComplex, Variance
from .duality import structure_dual, t_key, twisted_dual_differential
from .quadratic import KQuadraticStructure, dual_form_boundary
from .sparse import Dual, Key, KeyedMatrix, undual

logger = get_surgery_logger("surgerykit.k_based", "KBASED")

Family = Dict[int, KeyedMatrix]


def _vertex_sum(m: KeyedMatrix, D: KBasedComplex, TD: KBasedComplex, rows, cols,
                vertex_ok: Callable[[int], bool]) -> KeyedMatrix:
    """[a][e*] ↦ Σ_x m[a][T(x|e)] over the vertices x of s(e) passing vertex_ok."""
    out = KeyedMatrix()
    for a, tk, v in m.items():
        if a not in rows:
            continue
        t = TD.generator(tk)
        e = t.source.key
        if e in cols and len(t.simplex) == 1 and vertex_ok(t.simplex[0]):
            out.add(a, Dual(e), v)
    return out


def upsilon_matrix(D: KBasedComplex, TD: KBasedComplex, keys, vertex_ok: Callable[[int], bool]) -> KeyedMatrix:
    """Υ: e* ↦ Σ_x T(x|e) over the admissible vertices x of s(e)."""
    out = KeyedMatrix()
    for e in D.generators:
        if e.key not in keys:
            continue
        for x in e.simplex:
            if vertex_ok(x):
                out.add(t_key((x,), e.key), Dual(e.key), 1)
    return out


def dual_exchange_defect(f: KeyedMatrix, D: KBasedComplex, TD: KBasedComplex, l: int, keys,
                         vertex_ok: Callable[[int], bool] = lambda x: True) -> KeyedMatrix:
    """
    (−1)^{r(l−r)} (Tf) Υ − (f Υ)ᵗ for f: TD → D of degree l, r the degree
    of the dual source; zero on every key set.
    """
    keys = set(keys)
    lhs = _vertex_sum(structure_dual(f, D, TD), D, TD, keys, keys, vertex_ok)
    lhs = lhs.map_signs(lambda c, e: sign(D.degree(undual(e)) * (l - D.degree(undual(e)))))
    rhs = _vertex_sum(f, D, TD, keys, keys, vertex_ok).dual_transpose()
    return lhs - rhs


def check_dual_exchange(theta: KQuadraticStructure, S: Optional[UpperClosedSet] = None) -> Dict[str, Any]:
    """The exchange square for every ψ_u, on all of C and on C over S with the vertices of S."""
    D, TD, n = theta.complex, theta.dual, theta.n
    runs: List[Tuple[str, FrozenSet[Key], Callable[[int], bool]]] = [("all", frozenset(D.keys()), lambda x: True)]
    if S is not None:
        runs.append(("upper_closed", frozenset(g.key for g in D.generators if g.simplex in S),
                     lambda x: (x,) in S))
    failures = []
    for u in range(0, max(theta.top, 0) + 1):
        for name, keys, ok in runs:
            defect = dual_exchange_defect(theta.component(u), D, TD, n - u, keys, ok)
            if not defect.is_zero():
                a, b, v = defect.first_nonzero()
                failures.append({"kind": "dual_exchange", "on": name, "u": u,
                                 "entry": [repr(a), repr(b)], "value": v})
    return {"valid": not failures, "failures": failures}


def _pair_families(theta: KQuadraticStructure, S: UpperClosedSet, all_keys: FrozenSet[Key],
                   boundary: FrozenSet[Key]) -> Tuple[Family, Family]:
    """(ψ^ass, δψ^ass) of a covariant structure over an upper closed S."""
    D, TD, n = theta.complex, theta.dual, theta.n
    top = max(theta.top, 0)
    in_s = lambda x: (x,) in S
    psi_ass = {u: _vertex_sum(theta.component(u), D, TD, all_keys, all_keys, in_s) for u in range(0, top + 2)}
    bd = S.boundary()
    delta: Family = {}
    for u in range(0, top + 1):
        out = KeyedMatrix()
        for a, tk, v in theta.component(u).items():
            if a not in boundary:
                continue
            t = TD.generator(tk)
            e = t.source.key
            if e not in boundary or len(t.simplex) != 2:
                continue
            v0, v1 = t.simplex
            if not (((v0,) in bd and in_s(v1)) or ((v1,) in bd and in_s(v0))):
                continue
            out.add(a, Dual(e), sign(u) * sign(n - u - D.degree(a) - 1) * v)
        delta[u] = out
    return psi_ass, delta


def _split_keys(D: KBasedComplex, S: UpperClosedSet) -> Tuple[FrozenSet[Key], FrozenSet[Key], FrozenSet[Key]]:
    interior = S.interior()
    all_keys = frozenset(g.key for g in D.generators if g.simplex in S)
    inner = frozenset(g.key for g in D.generators if g.simplex in interior)
    return all_keys, inner, all_keys - inner


@dataclass(frozen=True, eq=False)
class CoverQuadraticPair:
    """
    (i_C: C^∂ → C^all, (ψ^ass, δψ^ass)) for an upper closed S of the base of a
    finite Galois cover p. `theta` and `S` are the lifts to the total
    complex: C^all is the transferred complex over p⁻¹(S), C^∂ its part over
    p⁻¹(S ∖ S⁻), ψ^ass the structure pushed through Υ and δψ^ass the
    correction read off the edges crossing ∂p⁻¹(S). The ℤG-matrices come
    from assembling these equivariant families back over the base.
    """
    base: KQuadraticStructure
    base_S: UpperClosedSet
    cover: FiniteGaloisCover
    theta: KQuadraticStructure
    S: UpperClosedSet
    all_keys: FrozenSet[Key]
    interior_keys: FrozenSet[Key]
    boundary_keys: FrozenSet[Key]
    psi_ass: Family = field(default_factory=dict)
    delta: Family = field(default_factory=dict)

    @property
    def top(self) -> int:
        return max(self.theta.top, 0)

    def in_s(self, x: int) -> bool:
        return (x,) in self.S

    def d_all(self) -> KeyedMatrix:
        keys = self.all_keys
        return self.theta.complex.d.restrict(lambda r: r in keys, lambda c: c in keys)

    def d_boundary(self) -> KeyedMatrix:
        keys = self.boundary_keys
        return self.theta.complex.d.restrict(lambda r: r in keys, lambda c: c in keys)

    def inclusion(self) -> KeyedMatrix:
        return KeyedMatrix.identity(sorted(self.boundary_keys, key=repr))

    def check_inclusion(self) -> bool:
        """i_C is a chain map: d never leaves C^∂."""
        D = self.theta.complex
        return (D.d.restrict(cols=lambda c: c in self.boundary_keys) - self.d_boundary()).is_zero()

    def relation_residual(self) -> Family:
        """∂ψ^ass + (−1)^{n−1} δψ^ass; zero for every u."""
        n = self.theta.n
        res = dual_form_boundary(self.psi_ass, self.d_all(), self.theta.complex.degree, n, self.top)
        for u in res:
            res[u] = res[u] + self.delta.get(u, KeyedMatrix()).scale(sign(n - 1))
        return res

    def interior_residual(self) -> Family:
        """On S⁻ every vertex is admissible, so ψ^ass is the plain vertex sum there."""
        D, TD = self.theta.complex, self.theta.dual
        inner = self.interior_keys
        out = {}
        for u in range(0, self.top + 1):
            plain = _vertex_sum(self.theta.component(u), D, TD, inner, inner, lambda x: True)
            out[u] = plain - self.psi_ass[u].restrict(lambda a: a in inner, lambda c: undual(c) in inner)
        return out

    def t_s(self) -> KeyedMatrix:
        """T_S = d^{−*} Υ − (−1)^{deg e} Υ d^{cd}, rows restricted to S."""
        D, TD = self.theta.complex, self.theta.dual
        ups = upsilon_matrix(D, TD, self.all_keys, self.in_s)
        t1 = (twisted_dual_differential(TD) @ ups).restrict(rows=lambda tk: TD.simplex(tk) in self.S)
        t2 = (ups @ self.d_all().dual_transpose()).map_signs(lambda a, c: sign(D.degree(undual(c))))
        return t1 - t2

    def expected_t_s(self) -> KeyedMatrix:
        """(−1)^{deg e} Σ T(v₀ v₁|e) over vertices v₀ ∈ ∂S, v₁ ∈ S of s(e), for e over S ∖ S⁻."""
        D = self.theta.complex
        bd = self.S.boundary()
        out = KeyedMatrix()
        for e in D.generators:
            if e.key not in self.boundary_keys:
                continue
            for v0 in e.simplex:
                if (v0,) not in bd:
                    continue
                for v1 in e.simplex:
                    if self.in_s(v1):
                        out.add(t_key(tuple(sorted((v0, v1))), e.key), Dual(e.key), sign(e.degree))
        return out

    def interior_quadratic_residual(self) -> Family:
        """ψ^ass restricted to S⁻ is an n-dimensional structure there."""
        inner = self.interior_keys
        family = {u: m.restrict(lambda a: a in inner, lambda c: undual(c) in inner) for u, m in self.psi_ass.items()}
        d = self.theta.complex.d.restrict(lambda r: r in inner, lambda c: c in inner)
        return dual_form_boundary(family, d, self.theta.complex.degree, self.theta.n, self.top)

    # the group ring side

    def base_keys(self) -> Tuple[FrozenSet[Key], FrozenSet[Key], FrozenSet[Key]]:
        """(all, interior, boundary) generator keys of the base structure over S."""
        return _split_keys(self.base.complex, self.base_S)

    def assembly_basis(self) -> List[Key]:
        return sorted(self.base_keys()[0], key=repr)

    def assembled(self, m: KeyedMatrix) -> ExactMatrix:
        """ℤG-matrix of an equivariant family on C^all, columns read as dual generators."""
        basis = self.assembly_basis()
        return assemble_lifted(m, basis, basis, self.cover,
                               col_lift=lambda k, g: Dual(transfer_key(k, g)))

    def assembled_psi(self) -> Dict[int, ExactMatrix]:
        return {u: self.assembled(m) for u, m in self.psi_ass.items()}

    def assembled_delta(self) -> Dict[int, ExactMatrix]:
        return {u: self.assembled(m) for u, m in self.delta.items()}

    def augmented(self, m: ExactMatrix) -> KeyedMatrix:
        """ε applied entrywise, keyed by base generators (a, e*)."""
        basis = self.assembly_basis()
        ring = self.cover.ring
        out = KeyedMatrix()
        for (i, j), x in m.nonzero_entries():
            out.add(basis[i], Dual(basis[j]), ring.augmentation(x))
        return out

    def base_families(self) -> Tuple[Family, Family]:
        """(ψ^ass, δψ^ass) computed directly on the base."""
        all_keys, _, boundary = self.base_keys()
        return _pair_families(self.base, self.base_S, all_keys, boundary)

    def check_assembled_upsilon_parts(self) -> List[Dict[str, Any]]:
        """Υ over ℤG for C^all and C^∂ on the base: chain maps with ℤ-acyclic cones."""
        all_keys, _, boundary = self.base_keys()
        failures = []
        for name, keys in (("all", all_keys), ("boundary", boundary)):
            part = self.base.complex.restrict(lambda g: g.key in keys)
            if not len(part):
                continue
            report = check_assembled_upsilon(part, self.cover)
            failures += [dict(f, kind=f"upsilon_{name}_{f['kind']}") for f in report["failures"]]
        return failures

    def check_augmentation(self) -> List[Dict[str, Any]]:
        """ε of the assembled families recovers the families computed on the base."""
        psi, delta = self.base_families()
        failures = []
        for name, assembled, expected in (("psi_ass", self.assembled_psi(), psi),
                                          ("delta", self.assembled_delta(), delta)):
            for u, m in assembled.items():
                if self.augmented(m) != expected.get(u, KeyedMatrix()):
                    failures.append({"kind": f"augmentation_{name}", "u": u})
        return failures

    def verify(self) -> Dict[str, Any]:
        failures: List[Dict[str, Any]] = []
        if not self.check_inclusion():
            failures.append({"kind": "inclusion"})
        for name, family in (("relation", self.relation_residual()),
                             ("interior_identity", self.interior_residual()),
                             ("interior_quadratic", self.interior_quadratic_residual())):
            bad = [u for u, m in family.items() if not m.is_zero()]
            if bad:
                failures.append({"kind": name, "u": bad})
        ts = self.t_s()
        if not ts.restrict(cols=lambda c: undual(c) in self.interior_keys).is_zero():
            failures.append({"kind": "t_s_vanishes"})
        if ts.restrict(cols=lambda c: undual(c) in self.boundary_keys) != self.expected_t_s():
            failures.append({"kind": "t_s_boundary"})
        failures += check_dual_exchange(self.theta, self.S)["failures"]
        failures += self.check_assembled_upsilon_parts()
        failures += self.check_augmentation()
        logger.debug(f"cover pair over {len(self.S.simplices)} simplices, |G| = {self.cover.order}: "
                     f"{len(failures)} failures")
        return {"valid": not failures, "failures": failures}


def cover_quadratic_pair(theta: KQuadraticStructure, S: UpperClosedSet,
                         cover: Optional[FiniteGaloisCover] = None) -> CoverQuadraticPair:
    """
    Pair of a covariant structure over an upper closed S, built on the lift
    of θ to p⁻¹(S) for `cover` (the trivial cover when omitted).
    """
    D = theta.complex
    if D.variance is not Variance.COVARIANT:
        raise InvalidStructureError("the cover pair takes a covariant structure")
    if set(D.host) != set(S.host.simplices):
        raise SimplicialError("S lives on a different complex than the structure")
    cover = cover or trivial_cover(S.host)
    if set(cover.base.simplices) != set(D.host):
        raise CoverError("the cover and the structure have different base complexes")
    lifted = lift_structure(theta, cover)
    S_lift = UpperClosedSet(cover.total, cover.preimage(S.simplices))
    all_keys, inner, boundary = _split_keys(lifted.complex, S_lift)
    psi_ass, delta = _pair_families(lifted, S_lift, all_keys, boundary)
    pair = CoverQuadraticPair(theta, S, cover, lifted, S_lift, all_keys, inner, boundary, psi_ass, delta)
    logger.debug(f"cover pair: {len(all_keys)} generators over p⁻¹(S), {len(inner)} over its interior")
    return pair
