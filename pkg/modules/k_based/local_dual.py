# modules/k_based/local_dual.py

from typing import Callable, Dict, FrozenSet, Iterable, Optional

from core.exceptions import InvalidStructureError, SimplicialError
from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import sign
from modules.simplicial_geometry import (Simplex, SphereEmbedding, closure_of, complement, j_all,
                                         simplex_dim)
from .complexes import Generator, KBasedComplex, Variance
from .duality import duality_t, t_key
from .quadratic import KQuadraticStructure
from .sparse import KeyedMatrix

logger = get_surgery_logger("surgerykit.k_based", "KBASED")


def _local_sign(k: int, image: Simplex, l: int, row_degree: int) -> int:
    a = simplex_dim(image)
    return SignManifest.sign("local_dual.sign") * sign(k + j_all(image, l) + l * a + l * row_degree + l * (l - 1) // 2)


def _embedded_image(emb: SphereEmbedding) -> Dict[Simplex, Simplex]:
    return {s: emb.image(s) for s in emb.complex}


def _check_relative(C: KBasedComplex, L: Optional[Iterable[Simplex]], over=lambda s: s) -> FrozenSet[Simplex]:
    """L_c ⊂ K_c must be a subcomplex carrying no generator of C."""
    if L is None:
        return frozenset()
    sub = frozenset(tuple(s) for s in L)
    if closure_of(sub) != sub:
        raise SimplicialError("L_c is not closed under faces")
    bad = [g.key for g in C.generators if over(g.simplex) in sub]
    if bad:
        raise SimplicialError(f"generator {bad[0]!r} sits over L_c; the complex must vanish there")
    return sub


def local_dual(q: KQuadraticStructure, emb: SphereEmbedding,
               L: Optional[Iterable[Simplex]] = None) -> KQuadraticStructure:
    """
    Move a k-dimensional structure over K_c ⊂ ∂Δ^{l+1} to a (k−l)-dimensional
    one over the dual cells: every generator over σ now sits over σ* and the
    complex becomes contravariant. Entries pick up
    (−1)^{k + J_σ^all + l|σ| + l deg c + l(l−1)/2}.

    With a subcomplex L_c the complex must vanish over L_c; the dual cells of
    L_c stay in the host, so the result lives over the dual cells of K_c ∖ L_c.
    """
    C, TC, k, l = q.complex, q.dual, q.n, emb.l
    if C.variance is not Variance.COVARIANT:
        raise InvalidStructureError("local duality takes a covariant structure")
    sub = _check_relative(C, L)
    if not sub <= set(emb.complex):
        raise SimplicialError(f"{min(sub - set(emb.complex))} is not a simplex of K_c")
    image = _embedded_image(emb)
    missing = [s for s in C.host if s not in image]
    if missing:
        raise SimplicialError(f"embedding does not contain {missing[0]}")
    star: Callable[[Simplex], Simplex] = lambda s: complement(image[s], l)
    gens = tuple(Generator(g.key, star(g.simplex), g.degree) for g in C.generators)
    Cc = KBasedComplex(tuple(star(s) for s in C.host), Variance.CONTRAVARIANT, gens, C.d.copy())
    TCc = duality_t(Cc)
    psi: Dict[int, KeyedMatrix] = {}
    for u, m in q.psi.items():
        out = KeyedMatrix()
        for r, c, v in m.items():
            t = TC.generator(c)
            col = t_key(star(t.simplex), t.source.key)
            if col not in TCc:
                raise SimplicialError(f"dual cell of {t.simplex} is missing from the dual complex")
            out.add(r, col, _local_sign(k, image[t.simplex], l, C.degree(r)) * v)
        psi[u] = out
    logger.debug(f"local dual: k={k}, l={l}, {len(C)} generators, {len(sub)} simplices in L_c")
    return KQuadraticStructure(Cc, TCc, k - l, psi)


def local_dual_inverse(q: KQuadraticStructure, emb: SphereEmbedding,
                       L: Optional[Iterable[Simplex]] = None) -> KQuadraticStructure:
    """Inverse of local_dual for the same embedding and L_c."""
    Cc, TCc, l = q.complex, q.dual, emb.l
    if Cc.variance is not Variance.CONTRAVARIANT:
        raise InvalidStructureError("the inverse local dual takes a contravariant structure")
    image = _embedded_image(emb)
    back = {complement(img, l): s for s, img in image.items()}
    _check_relative(Cc, L, over=lambda s: back.get(s))
    missing = [s for s in Cc.host if s not in back]
    if missing:
        raise SimplicialError(f"{missing[0]} is not the dual cell of an embedded simplex")
    k = q.n + l
    gens = tuple(Generator(g.key, back[g.simplex], g.degree) for g in Cc.generators)
    C = KBasedComplex(tuple(back[s] for s in Cc.host), Variance.COVARIANT, gens, Cc.d.copy())
    TC = duality_t(C)
    psi: Dict[int, KeyedMatrix] = {}
    for u, m in q.psi.items():
        out = KeyedMatrix()
        for r, c, v in m.items():
            t = TCc.generator(c)
            sigma = back[t.simplex]
            out.add(r, t_key(sigma, t.source.key), _local_sign(k, image[sigma], l, C.degree(r)) * v)
        psi[u] = out
    return KQuadraticStructure(C, TC, k, psi)
