# modules/k_based/quadratic.py

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from core.exceptions import InvalidStructureError
from core.logger import get_surgery_logger
from modules.chain_algebra import sign
from .complexes import Generator, KBasedComplex, Variance, allowed, cone_is_acyclic
from .duality import duality_t, structure_dual, twisted_dual_differential
from .sparse import Key, KeyedMatrix, combine, toggle_dual, undual

logger = get_surgery_logger("surgerykit.k_based", "KBASED")


@dataclass(frozen=True, eq=False)
class KQuadraticStructure:
    """
    n-dimensional quadratic structure on a K-based complex C: maps
    ψ_u: TC → C, u ≥ 0, with ψ_u[c][t] ≠ 0 only when deg c − deg t = n − u
    and the entry respects the face order.
    """
    complex: KBasedComplex
    dual: KBasedComplex
    n: int
    psi: Dict[int, KeyedMatrix] = field(default_factory=dict)

    def component(self, u: int) -> KeyedMatrix:
        return self.psi.get(u, KeyedMatrix())

    @property
    def top(self) -> int:
        return max((u for u, m in self.psi.items() if not m.is_zero()), default=-1)

    def is_zero(self) -> bool:
        return self.top < 0

    def describe(self) -> str:
        return f"n={self.n} on {self.complex.describe()}, u<={self.top}"


def k_relation(C: KBasedComplex, TC: KBasedComplex, n: int, psi: Mapping[int, KeyedMatrix], u: int,
               twisted: Optional[KeyedMatrix] = None) -> KeyedMatrix:
    """
    d ψ_u − (−1)^{n−u} ψ_u d^{−*} + (−1)^{n−u−1} ψ_{u+1} + (−1)^n T ψ_{u+1};
    zero for every u on a quadratic structure.
    """
    Dm = twisted if twisted is not None else twisted_dual_differential(TC)
    p = psi.get(u, KeyedMatrix())
    p1 = psi.get(u + 1, KeyedMatrix())
    return combine((1, C.d @ p), (-sign(n - u), p @ Dm), (sign(n - u - 1), p1),
                   (sign(n), structure_dual(p1, C, TC)))


def structure_slots(C: KBasedComplex, TC: KBasedComplex, n: int, u: int) -> List[Tuple[Key, Key]]:
    """Entries (c, t) allowed in ψ_u."""
    return [(c.key, t.key) for t in TC.generators for c in C.generators
            if c.degree - t.degree == n - u and allowed(C.variance, t.simplex, c.simplex)]


def verify_k_quadratic(q: KQuadraticStructure) -> Dict[str, Any]:
    C, TC, n = q.complex, q.dual, q.n
    failures = []
    for u, m in q.psi.items():
        for r, c, _ in m.items():
            if r not in C or c not in TC:
                failures.append({"kind": "unknown", "u": u, "entry": [repr(r), repr(c)]})
            elif C.degree(r) - TC.degree(c) != n - u or not allowed(C.variance, TC.simplex(c), C.simplex(r)):
                failures.append({"kind": "support", "u": u, "entry": [repr(r), repr(c)]})
    if failures:
        return {"valid": False, "failures": failures}
    Dm = twisted_dual_differential(TC)
    for u in range(0, q.top + 1):
        res = k_relation(C, TC, n, q.psi, u, Dm)
        if not res.is_zero():
            r, c, v = res.first_nonzero()
            failures.append({"kind": "relation", "u": u, "entry": [repr(r), repr(c)], "value": v})
    return {"valid": not failures, "failures": failures}


def require_valid_k(q: KQuadraticStructure):
    report = verify_k_quadratic(q)
    if not report["valid"]:
        raise InvalidStructureError("K-based quadratic relation fails", report["failures"])


def boundary_structure(C: KBasedComplex, TC: KBasedComplex, chi: Mapping[int, KeyedMatrix],
                       n: int) -> Dict[int, KeyedMatrix]:
    """The n-dimensional structure ∂χ of an (n+1)-chain χ; always a quadratic structure."""
    Dm = twisted_dual_differential(TC)
    top = max(chi, default=-1)
    out = {}
    for u in range(0, top + 1):
        res = k_relation(C, TC, n + 1, chi, u, Dm)
        if not res.is_zero():
            out[u] = res
    return out


def random_k_quadratic(rng: random.Random, C: KBasedComplex, n: int, top: int = 3, bound: int = 1,
                       TC: Optional[KBasedComplex] = None) -> KQuadraticStructure:
    """Random null-cobordant structure: the boundary of a random (n+1)-chain supported in u ≤ top."""
    TC = TC or duality_t(C)
    chi = {}
    for u in range(0, top + 1):
        m = KeyedMatrix()
        for r, c in structure_slots(C, TC, n + 1, u):
            m.add(r, c, rng.randint(-bound, bound))
        chi[u] = m
    return KQuadraticStructure(C, TC, n, boundary_structure(C, TC, chi, n))


def hyperbolic_seed(D: KBasedComplex, n: int, rng: Optional[random.Random] = None,
                    top: int = 3) -> KQuadraticStructure:
    """
    Poincaré structure on C = D ⊕ (TD shifted up by n) with ψ_0 the inclusion
    of the shifted copy, plus a random boundary on D when `rng` is given.
    """
    if D.variance is not Variance.COVARIANT:
        raise InvalidStructureError("hyperbolic seeds are built on covariant complexes")
    TD = duality_t(D)
    gens: List[Generator] = list(D.generators)
    gens += [Generator(("H", t.key), t.simplex, t.degree + n) for t in TD.generators]
    d = D.d.copy()
    for r, c, v in TD.d.items():
        d.add(("H", r), ("H", c), sign(n - TD.degree(c)) * v)
    C = KBasedComplex(D.host, D.variance, tuple(gens), d)
    TC = duality_t(C)
    psi: Dict[int, KeyedMatrix] = {}
    if rng is not None:
        psi = {u: m.copy() for u, m in random_k_quadratic(rng, D, n, top, TC=TD).psi.items()}
    base = psi.setdefault(0, KeyedMatrix())
    for t in TD.generators:
        base.add(("H", t.key), t.key, 1)
    q = KQuadraticStructure(C, TC, n, psi)
    logger.debug(f"hyperbolic seed {q.describe()}")
    return q


def k_symmetrize(q: KQuadraticStructure) -> KeyedMatrix:
    """φ = (1 + T)ψ_0: TC → C."""
    p0 = q.component(0)
    return p0 + structure_dual(p0, q.complex, q.dual)


def symmetrization_defect(q: KQuadraticStructure) -> KeyedMatrix:
    """d φ − (−1)^n φ d^{−*}; zero because φ is a chain map C^{n−*} → C."""
    phi = k_symmetrize(q)
    return combine((1, q.complex.d @ phi), (-sign(q.n), phi @ twisted_dual_differential(q.dual)))


def componentwise_poincare(q: KQuadraticStructure) -> Dict[str, Any]:
    """
    Poincaré on every simplex: for each σ the σσ-component of φ has a
    ℤ-acyclic mapping cone.
    """
    C, TC, n = q.complex, q.dual, q.n
    phi = k_symmetrize(q)
    failures, checked = [], 0
    for sigma in C.host:
        targets = {g.key: g.degree for g in C.generators if g.simplex == sigma}
        sources = {t.key: t.degree + n for t in TC.generators if t.simplex == sigma}
        if not targets and not sources:
            continue
        checked += 1
        d_target = C.d.restrict(lambda r: r in targets, lambda c: c in targets)
        d_source = TC.d.restrict(lambda r: r in sources, lambda c: c in sources).map_signs(
            lambda r, c: sign(n - TC.degree(c)))
        f = phi.restrict(lambda r: r in targets, lambda c: c in sources)
        if not cone_is_acyclic(f, sources, d_source, targets, d_target):
            failures.append({"simplex": list(sigma)})
    logger.debug(f"componentwise Poincaré: {checked} simplices, {len(failures)} failures")
    return {"valid": not failures, "failures": failures, "checked": checked}


# families of maps C^{M-*} -> C written with explicit dual keys (a, x*)


def dual_form_boundary(psi: Mapping[int, KeyedMatrix], d: KeyedMatrix, degree: Callable[[Key], int],
                       M: int, top: int) -> Dict[int, KeyedMatrix]:
    """
    Relation for families written on dual keys:
    d ψ_u + (−1)^{deg a} ψ_u d* + (−1)^{M−u−1} ψ_{u+1} + (−1)^{M + r r'} ψ_{u+1}ᵗ.
    """
    dT = d.dual_transpose()
    out = {}
    for u in range(0, top + 1):
        p = psi.get(u, KeyedMatrix())
        p1 = psi.get(u + 1, KeyedMatrix())
        o = d @ p
        for a, b, v in (p @ dT).items():
            o.add(a, b, sign(degree(a)) * v)
        for a, b, v in p1.items():
            o.add(a, b, sign(M - u - 1) * v)
            o.add(undual(b), toggle_dual(a), sign(M + degree(undual(b)) * degree(a)) * v)
        out[u] = o
    return out


def relative_duality_check(psi0: KeyedMatrix, d: KeyedMatrix, degree: Callable[[Key], int], M: int,
                           keys: List[Key], quotient: Callable[[Key], bool]) -> Dict[str, Any]:
    """
    Symmetrize ψ_0 to φ: C^{M−*} → C, project to the quotient spanned by the
    keys passing `quotient`, and require a chain map with ℤ-acyclic cone.
    """
    phi = psi0.copy()
    for a, b, v in psi0.items():
        r = degree(undual(b))
        phi.add(undual(b), toggle_dual(a), sign(r * (M - r)) * v)
    chosen = set(keys)
    phi_b = phi.restrict(rows=quotient)
    d_b = d.restrict(quotient, quotient)
    d_s = KeyedMatrix()
    for x, y, v in d.items():
        if x in chosen and y in chosen:
            d_s.add(toggle_dual(y), toggle_dual(x), sign(M - degree(x)) * v)
    if not (d_b @ phi_b - phi_b @ d_s).is_zero():
        return {"valid": False, "failures": [{"kind": "chain_map"}]}
    targets = {k: degree(k) for k in keys if quotient(k)}
    sources = {toggle_dual(k): M - degree(k) for k in keys}
    if not cone_is_acyclic(phi_b, sources, d_s, targets, d_b):
        return {"valid": False, "failures": [{"kind": "cone_acyclic"}]}
    return {"valid": True, "failures": []}
