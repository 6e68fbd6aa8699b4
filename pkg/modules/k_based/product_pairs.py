# modules/k_based/product_pairs.py

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional, Set

from core.exceptions import InvalidStructureError, SimplicialError
from core.logger import get_surgery_logger
from modules.chain_algebra import sign
from modules.simplicial_geometry import ProductDecomposition, Simplex, incidence_number, simplex_dim
from .complexes import Generator, KBasedComplex, Variance, cone_is_acyclic
from .duality import duality_t, structure_dual, t_key
from .quadratic import KQuadraticStructure, dual_form_boundary, relative_duality_check
from .sparse import Dual, Key, KeyedMatrix, undual

logger = get_surgery_logger("surgerykit.k_based", "KBASED")


def _require_in_l(decomp: ProductDecomposition, sigma: Simplex) -> Simplex:
    sigma = tuple(sigma)
    if sigma not in decomp.L:
        raise SimplicialError(f"{sigma} is not a simplex of L")
    return sigma


def _keys_over(D: KBasedComplex, simplices) -> Set[Key]:
    chosen = set(simplices)
    return {g.key for g in D.generators if g.simplex in chosen}


def mho_matrix(D: KBasedComplex, TD: KBasedComplex, decomp: ProductDecomposition, sigma: Simplex) -> KeyedMatrix:
    """
    ℧_σ: e* ↦ Σ_{v ∈ (s(e)∩L)₁} T(σ ∗ v₁ | e) for every generator e over A_σ.
    """
    sigma = _require_in_l(decomp, sigma)
    A = set(decomp.a_sigma(sigma))
    out = KeyedMatrix()
    for e in D.generators:
        if e.simplex not in A:
            continue
        for v in decomp.level1(e.simplex):
            tk = t_key(decomp.lift(sigma, v), e.key)
            if tk not in TD:
                raise InvalidStructureError(f"duality complex has no generator {tk!r}")
            out.add(tk, Dual(e.key), 1)
    return out


@dataclass(frozen=True, eq=False)
class MhoSigma:
    """℧_σ as a chain map ⊕_{A_σ} D_{*−|σ|−1}(s)* → ⊕_{B_σ} TD(s)."""
    sigma: Simplex
    matrix: KeyedMatrix
    source_degrees: Dict[Key, int] = field(default_factory=dict)
    d_source: KeyedMatrix = field(default_factory=KeyedMatrix)
    target_degrees: Dict[Key, int] = field(default_factory=dict)
    d_target: KeyedMatrix = field(default_factory=KeyedMatrix)

    def is_chain_map(self) -> bool:
        return (self.d_target @ self.matrix - self.matrix @ self.d_source).is_zero()

    def cone_is_acyclic(self) -> bool:
        return cone_is_acyclic(self.matrix, self.source_degrees, self.d_source,
                               self.target_degrees, self.d_target)


def mho_sigma(D: KBasedComplex, decomp: ProductDecomposition, sigma: Simplex,
              TD: Optional[KBasedComplex] = None) -> MhoSigma:
    sigma = _require_in_l(decomp, sigma)
    TD = TD or duality_t(D)
    sd = simplex_dim(sigma)
    A = _keys_over(D, decomp.a_sigma(sigma))
    B = set(decomp.b_sigma(sigma))
    source_degrees = {Dual(k): -(D.degree(k) + sd + 1) for k in D.keys() if k in A}
    d_source = KeyedMatrix()
    for r, c, v in D.d.items():
        if r in A and c in A:
            d_source.add(Dual(c), Dual(r), sign(sd + 1) * v)
    target_degrees = {t.key: t.degree for t in TD.generators if t.simplex in B}
    d_target = TD.d.restrict(lambda r: r in target_degrees, lambda c: c in target_degrees)
    return MhoSigma(sigma, mho_matrix(D, TD, decomp, sigma), source_degrees, d_source,
                    target_degrees, d_target)


def delta_psi(theta: KQuadraticStructure, decomp: ProductDecomposition, sigma: Simplex, u: int) -> KeyedMatrix:
    """δψ_u[σ] = (−1)^{(|σ|+1) r} θ_u ℧_σ, restricted to rows over A_σ and sources over B_σ."""
    sigma = _require_in_l(decomp, sigma)
    D, TD = theta.complex, theta.dual
    A = _keys_over(D, decomp.a_sigma(sigma))
    B = set(decomp.b_sigma(sigma))
    th = theta.component(u).restrict(lambda r: r in A, lambda c: TD.simplex(c) in B)
    raw = th @ mho_matrix(D, TD, decomp, sigma)
    sd = simplex_dim(sigma)
    return raw.map_signs(lambda a, b: sign((sd + 1) * D.degree(a)))


def delta_family(theta: KQuadraticStructure, decomp: ProductDecomposition, sigma: Simplex,
                 top: Optional[int] = None) -> Dict[int, KeyedMatrix]:
    top = theta.top + 1 if top is None else top
    return {u: delta_psi(theta, decomp, sigma, u) for u in range(0, top + 1)}


def check_mho_identity(theta: KQuadraticStructure, decomp: ProductDecomposition, sigma: Simplex) -> Dict[str, Any]:
    """
    (Tθ_u) ℧ = (−1)^{r r' + (|σ|+1)(r + r')} ℧* θ_u* on the σ-band, where r
    and r' are the degrees of the two D generators an entry pairs.
    """
    sigma = _require_in_l(decomp, sigma)
    D, TD = theta.complex, theta.dual
    sd = simplex_dim(sigma)
    A = _keys_over(D, decomp.a_sigma(sigma))
    B = set(decomp.b_sigma(sigma))
    mho = mho_matrix(D, TD, decomp, sigma)
    failures = []
    for u in range(0, theta.top + 1):
        th = theta.component(u).restrict(lambda r: r in A, lambda c: TD.simplex(c) in B)
        tth = structure_dual(theta.component(u), D, TD).restrict(lambda r: r in A, lambda c: TD.simplex(c) in B)
        lhs = tth @ mho
        rhs = mho.dual_transpose() @ th.dual_transpose()
        for x, y, v in rhs.items():
            r, rp = D.degree(x), D.degree(undual(y))
            lhs.add(x, y, -sign(r * rp + (sd + 1) * (r + rp)) * v)
        if not lhs.is_zero():
            a, b, v = lhs.first_nonzero()
            failures.append({"u": u, "entry": [repr(a), repr(b)], "value": v})
    return {"valid": not failures, "failures": failures}


def pair_relation(theta: KQuadraticStructure, decomp: ProductDecomposition, sigma: Simplex) -> Dict[int, KeyedMatrix]:
    """
    Residual of the (n−|σ|−1)-dimensional pair relation on D(A_σ) → D(A_σ∖B_σ):
    the dual-form boundary of δψ[σ] plus (−1)^{N−1} Σ_τ (−1)^{n_σ^τ + n + 1} δψ[τ]
    over the codimension-one cofaces τ of σ in L. Zero for every u.
    """
    sigma = _require_in_l(decomp, sigma)
    D, n = theta.complex, theta.n
    N = n - simplex_dim(sigma) - 1
    A = _keys_over(D, decomp.a_sigma(sigma))
    B = _keys_over(D, decomp.b_sigma(sigma))
    top = theta.top
    family = delta_family(theta, decomp, sigma, top + 1)
    dF = D.d.restrict(lambda r: r in A, lambda c: c in A)
    out = dual_form_boundary(family, dF, D.degree, N, top)
    cofaces = decomp.cofaces_in_l(sigma)
    rest = lambda k: k in A and k not in B
    for u in range(0, top + 1):
        for tau in cofaces:
            coef = sign(N - 1) * sign(incidence_number(sigma, tau)) * sign(n + 1)
            part = delta_psi(theta, decomp, tau, u).restrict(rest, lambda c: rest(undual(c)))
            for a, b, v in part.items():
                out[u].add(a, b, coef * v)
    return out


def check_pair_relation(theta: KQuadraticStructure, decomp: ProductDecomposition, sigma: Simplex) -> Dict[str, Any]:
    failures = []
    for u, res in pair_relation(theta, decomp, sigma).items():
        if not res.is_zero():
            a, b, v = res.first_nonzero()
            failures.append({"u": u, "entry": [repr(a), repr(b)], "value": v})
    return {"valid": not failures, "failures": failures}


def relative_delta_poincare(theta: KQuadraticStructure, decomp: ProductDecomposition, sigma: Simplex) -> Dict[str, Any]:
    """The symmetrized δψ_0[σ] projected to D(B_σ) is a ℤ-equivalence."""
    sigma = _require_in_l(decomp, sigma)
    D = theta.complex
    N = theta.n - simplex_dim(sigma) - 1
    A = _keys_over(D, decomp.a_sigma(sigma))
    B = _keys_over(D, decomp.b_sigma(sigma))
    dA = D.d.restrict(lambda r: r in A, lambda c: c in A)
    keys = [k for k in D.keys() if k in A]
    return relative_duality_check(delta_psi(theta, decomp, sigma, 0), dA, D.degree, N, keys, lambda k: k in B)


# the A^part functor: interior generators read over their bottom face

def interior_keys(D: KBasedComplex, decomp: ProductDecomposition) -> FrozenSet[Key]:
    return frozenset(g.key for g in D.generators if not decomp.at_ends(g.simplex))


def a_part_complex(D: KBasedComplex, decomp: ProductDecomposition) -> KBasedComplex:
    """DL_r(σ) = ⊕_{s ∈ B_σ} D_r(s)."""
    if D.variance is not Variance.COVARIANT:
        raise InvalidStructureError("the product decomposition takes covariant complexes")
    keep = interior_keys(D, decomp)
    gens = tuple(Generator(g.key, decomp.level0(g.simplex), g.degree) for g in D.generators if g.key in keep)
    return KBasedComplex(decomp.L, Variance.COVARIANT, gens,
                         D.d.restrict(lambda r: r in keep, lambda c: c in keep))


def a_part_morphism(f: KeyedMatrix, source: KBasedComplex, target: KBasedComplex,
                    decomp: ProductDecomposition) -> KeyedMatrix:
    src, tgt = interior_keys(source, decomp), interior_keys(target, decomp)
    return f.restrict(lambda r: r in tgt, lambda c: c in src)


def check_a_part_functor(f: KeyedMatrix, g: KeyedMatrix, D0: KBasedComplex, D1: KBasedComplex,
                         D2: KBasedComplex, decomp: ProductDecomposition) -> Dict[str, Any]:
    """A(g f) = A(g) A(f), A(id) = id, and A of a chain map is a chain map."""
    failures = []
    if a_part_morphism(g @ f, D0, D2, decomp) != (a_part_morphism(g, D1, D2, decomp) @
                                                  a_part_morphism(f, D0, D1, decomp)):
        failures.append({"kind": "composition"})
    ident = KeyedMatrix.identity(D0.keys())
    if a_part_morphism(ident, D0, D0, decomp) != KeyedMatrix.identity(interior_keys(D0, decomp)):
        failures.append({"kind": "identity"})
    for h, src, tgt in ((f, D0, D1), (g, D1, D2)):
        if (tgt.d @ h - h @ src.d).is_zero():
            A_src, A_tgt = a_part_complex(src, decomp), a_part_complex(tgt, decomp)
            Ah = a_part_morphism(h, src, tgt, decomp)
            if not (A_tgt.d @ Ah - Ah @ A_src.d).is_zero():
                failures.append({"kind": "chain_map"})
    return {"valid": not failures, "failures": failures}


def restrict_to_l(theta: KQuadraticStructure, decomp: ProductDecomposition) -> KQuadraticStructure:
    """
    (DL, θL): the n-dimensional structure on L⊗[0,1] read as an
    (n−1)-dimensional structure on L, θL_u[c][T(σ|e)] =
    Σ_v (−1)^{n+|σ|+deg c+1} θ_u[c][T(σ ∗ v₁|e)].
    """
    D, TD, n = theta.complex, theta.dual, theta.n
    if D.variance is not Variance.COVARIANT:
        raise InvalidStructureError("restriction to L takes a covariant structure")
    missing = [s for s in D.host if s not in decomp.product]
    if missing:
        raise SimplicialError(f"{missing[0]} is not in the product decomposition")
    DL = a_part_complex(D, decomp)
    TDL = duality_t(DL)
    keep = interior_keys(D, decomp)
    psi: Dict[int, KeyedMatrix] = {}
    for u, m in theta.psi.items():
        out = KeyedMatrix()
        for row, tk, v in m.items():
            if row not in keep:
                continue
            t = TD.generator(tk)
            if t.source.key not in keep:
                continue
            bottom, top = decomp.level0(t.simplex), decomp.level1(t.simplex)
            if not bottom or len(top) != 1:
                continue
            sd = simplex_dim(bottom)
            out.add(row, t_key(bottom, t.source.key), sign(n + sd + D.degree(row) + 1) * v)
        psi[u] = out
    q = KQuadraticStructure(DL, TDL, n - 1, psi)
    logger.debug(f"restricted to L: {q.describe()}")
    return q
