# modules/k_based/duality.py

from typing import Any, Dict, List, Tuple

from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import sign
from modules.simplicial_geometry import Simplex, incidence_number, is_face, simplex_dim
from .complexes import Generator, KBasedComplex, Variance, allowed, cone_is_acyclic
from .sparse import Key, KeyedMatrix

logger = get_surgery_logger("surgerykit.k_based", "KBASED")


def t_key(sigma: Simplex, key: Key) -> Key:
    return ("T", tuple(sigma), key)


def _neighbours(host: Tuple[Simplex, ...]) -> Tuple[Dict[Simplex, List[Simplex]], Dict[Simplex, List[Simplex]]]:
    present = set(host)
    up: Dict[Simplex, List[Simplex]] = {s: [] for s in host}
    down: Dict[Simplex, List[Simplex]] = {s: [] for s in host}
    for t in host:
        for i in range(len(t)):
            f = t[:i] + t[i + 1:]
            if f and f in present:
                up[f].append(t)
                down[t].append(f)
    return up, down


def duality_t(C: KBasedComplex) -> KBasedComplex:
    """
    The duality functor on K-based complexes. T(C) has a generator T(σ|e)
    for each generator e of C and each σ ∈ K with σ ≤ s(e) (covariant) or
    s(e) ≤ σ (contravariant); it sits over σ in degree y − deg e, with
    y = −|σ| or +|σ|. The differential is the simplicial coboundary (resp.
    boundary) of the star of s(e) plus (−1)^y times the transpose of d_C.
    """
    cov = C.variance is Variance.COVARIANT
    gens: List[Generator] = []
    for e in C.generators:
        for sigma in C.host:
            if not allowed(C.variance, sigma, e.simplex):
                continue
            y = -simplex_dim(sigma) if cov else simplex_dim(sigma)
            gens.append(Generator(t_key(sigma, e.key), sigma, y - e.degree, y, e))
    present = {g.key for g in gens}
    up, down = _neighbours(C.host)
    d = KeyedMatrix()
    for t in gens:
        e, sigma = t.source, t.simplex
        if cov:
            for tau in up[sigma]:
                if is_face(tau, e.simplex):
                    d.add(t_key(tau, e.key), t.key, sign(incidence_number(sigma, tau)))
        else:
            for tau in down[sigma]:
                if is_face(e.simplex, tau):
                    d.add(t_key(tau, e.key), t.key, sign(incidence_number(tau, sigma)))
        for c, v in C.d.row(e.key).items():
            k = t_key(sigma, c)
            if k in present:
                d.add(k, t.key, sign(t.height) * v)
    TC = KBasedComplex(C.host, C.variance, tuple(gens), d)
    logger.debug(f"duality T: {len(C)} generators -> {len(TC)}")
    return TC


def duality_t_morphism(f: KeyedMatrix, TC: KBasedComplex, TD: KBasedComplex) -> KeyedMatrix:
    """
    T(f): T(D) → T(C) for a degree-0 morphism f: C → D, where TC, TD are the
    duality complexes of its source and target: T(σ|d) ↦ Σ f[d][c] T(σ|c).
    """
    by_label: Dict[Tuple[Simplex, Key], Key] = {(g.simplex, g.source.key): g.key for g in TC.generators}
    out = KeyedMatrix()
    for t in TD.generators:
        for c, v in f.row(t.source.key).items():
            k = by_label.get((t.simplex, c))
            if k is not None:
                out.add(k, t.key, v)
    return out


def _natural_d_exponent(variance: Variance, a: int) -> int:
    if variance is Variance.COVARIANT:
        return a * (a + 1) // 2
    return a * (a - 1) // 2


def natural_d(T2C: KBasedComplex) -> KeyedMatrix:
    """
    The natural chain map 𝔇: T²C → C, T(σ|T(σ|e)) ↦ ±e. `T2C` must be
    duality_t(duality_t(C)); every other generator maps to zero.
    """
    flip = SignManifest.sign("duality.natural_d")
    out = KeyedMatrix()
    for b in T2C.generators:
        inner = b.source
        if inner is None or inner.source is None or inner.simplex != b.simplex:
            continue
        a = simplex_dim(b.simplex)
        out.add(inner.source.key, b.key, flip * sign(_natural_d_exponent(T2C.variance, a)))
    return out


def check_duality_axioms(C: KBasedComplex) -> Dict[str, Any]:
    """
    𝔇 is a chain map with ℤ-acyclic cone, and 𝔇(TC)∘T(𝔇(C)) = id on TC.
    """
    TC = duality_t(C)
    T2C = duality_t(TC)
    T3C = duality_t(T2C)
    D = natural_d(T2C)
    failures = []
    if not (C.d @ D - D @ T2C.d).is_zero():
        failures.append({"kind": "chain_map"})
    composite = natural_d(T3C) @ duality_t_morphism(D, T3C, TC)
    if composite != KeyedMatrix.identity(TC.keys()):
        failures.append({"kind": "composite_identity"})
    if not failures and not cone_is_acyclic(D, T2C.degree_map(), T2C.d, C.degree_map(), C.d):
        failures.append({"kind": "cone_acyclic"})
    return {"valid": not failures, "failures": failures}


def structure_dual(psi: KeyedMatrix, C: KBasedComplex, TC: KBasedComplex) -> KeyedMatrix:
    """
    T on maps ψ: TC → C: (Tψ)[c][T(σ|e)] = (−1)^{|σ| + m(deg c + |σ|)} ψ[e][T(σ|c)],
    m = −deg T(σ|e). Involutive.
    """
    flip = SignManifest.sign("duality.structure_dual")
    out = KeyedMatrix()
    for e_key, tk, v in psi.items():
        tg = TC.generator(tk)
        sigma, c = tg.simplex, tg.source
        target_col = t_key(sigma, e_key)
        if target_col not in TC:
            continue
        a = simplex_dim(sigma)
        m = -TC.degree(target_col)
        out.add(c.key, target_col, flip * sign(a + m * (c.degree + a)) * v)
    return out


def twisted_dual_differential(TC: KBasedComplex) -> KeyedMatrix:
    """The differential of C^{-*}: (−1)^m d_{TC} on a source of degree −m."""
    return TC.d.map_signs(lambda r, c: sign(-TC.degree(c)))


def duality_tower(C: KBasedComplex, depth: int = 2) -> List[KBasedComplex]:
    """[C, TC, T²C, ...] up to `depth` applications."""
    out = [C]
    for _ in range(depth):
        out.append(duality_t(out[-1]))
    return out

