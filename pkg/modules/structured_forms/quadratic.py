# modules/structured_forms/quadratic.py

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core.exceptions import DimensionMismatchError, InvalidStructureError, UnsupportedRingError
from core.logger import get_surgery_logger
from modules.chain_algebra import (ChainComplex, ChainHomotopy, ChainMap, ContractionResult, HomologyGroup,
                                   block_diagonal, chain_contraction_z, direct_sum, dual_complex, mapping_cone,
                                   sign, verify_homotopy_equivalence)
from modules.exact_core import ExactMatrix, RingSpec

logger = get_surgery_logger("surgerykit.structured_forms", "FORMS")

# (s, p) -> matrix of psi_s on C_p^*, landing in C_{n-s-p}
Family = Dict[Tuple[int, int], ExactMatrix]


def family_block(C: ChainComplex, n: int, family: Family, s: int, p: int) -> ExactMatrix:
    if (s, p) in family:
        return family[(s, p)]
    return ExactMatrix.zeros(C.ring, C.rank(n - s - p), C.rank(p))


def top_s(family: Family) -> int:
    nonzero = [s for (s, _), m in family.items() if not m.is_zero()]
    return max(nonzero) if nonzero else -1


def quadratic_residual(C: ChainComplex, n: int, family: Family, s: int, p: int) -> ExactMatrix:
    """
    d psi_s[p] - (-1)^{r0} psi_s[p+1] d^* + (-1)^{(r0+1)(n+s)} psi_{s+1}[r0]^* + (-1)^s psi_{s+1}[p]
    with r0 = n-p-s-1; a map C_p^* -> C_{r0}.
    """
    r0 = n - p - s - 1
    out = C.diff(r0 + 1) @ family_block(C, n, family, s, p)
    out = out - (family_block(C, n, family, s, p + 1) @ C.diff(p + 1).dual()).scale(sign(r0))
    out = out + family_block(C, n, family, s + 1, r0).dual().scale(sign((r0 + 1) * (n + s)))
    out = out + family_block(C, n, family, s + 1, p).scale(sign(s))
    return out


def check_family_shapes(C: ChainComplex, n: int, family: Family, name: str = "psi"):
    for (s, p), m in family.items():
        if s < 0:
            raise DimensionMismatchError(f"{name}_{s} has negative index")
        expected = (C.rank(n - s - p), C.rank(p))
        if m.shape != expected:
            raise DimensionMismatchError(f"{name}_{s}[{p}] has shape {m.shape}, expected {expected}")
        if m.ring != C.ring:
            raise DimensionMismatchError(f"{name}_{s}[{p}] lives over another ring")


def family_from_lists(C: ChainComplex, n: int, blocks: Dict[Tuple[int, int], Any]) -> Family:
    """Accept nested lists or matrices keyed by (s, p)."""
    out = {}
    for (s, p), m in blocks.items():
        if isinstance(m, ExactMatrix):
            out[(s, p)] = m
        elif m:
            out[(s, p)] = ExactMatrix.from_rows(C.ring, m, cols=C.rank(p))
    return out


@dataclass(frozen=True, eq=False)
class QuadraticComplex:
    """n-dimensional quadratic structure psi = {psi_s} on C; psi_s vanishes for s > top_s."""
    complex: ChainComplex
    n: int
    psi: Family = field(default_factory=dict)

    def __post_init__(self):
        check_family_shapes(self.complex, self.n, self.psi)
        object.__setattr__(self, "psi", {k: m for k, m in self.psi.items() if m.rows and m.cols})

    @property
    def ring(self):
        return self.complex.ring

    @property
    def top_s(self) -> int:
        return top_s(self.psi)

    def block(self, s: int, p: int) -> ExactMatrix:
        return family_block(self.complex, self.n, self.psi, s, p)

    def component(self, s: int) -> Dict[int, ExactMatrix]:
        """psi_s as a family p -> C_p^* -> C_{n-s-p}."""
        return {p: self.block(s, p) for p in self.complex.degrees()}

    def t_dual(self, s: int) -> Dict[int, ExactMatrix]:
        return t_dual(self.complex, self.n - s, self.component(s))

    def scale(self, k: int) -> "QuadraticComplex":
        return QuadraticComplex(self.complex, self.n, {key: m.scale(k) for key, m in self.psi.items()})

    def __neg__(self) -> "QuadraticComplex":
        return self.scale(-1)

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.psi.values())


def verify_quadratic(q: QuadraticComplex) -> Dict[str, Any]:
    """Every (s, p) at which the four-term relation fails; empty means valid."""
    C = q.complex
    failures = []
    for s in range(0, q.top_s + 2):
        for p in C.degrees():
            res = quadratic_residual(C, q.n, q.psi, s, p)
            if res.rows and res.cols and not res.is_zero():
                failures.append({"s": s, "p": p, "r": q.n - p - s - 1, "residual": res.to_list()})
                logger.warning(f"quadratic relation fails at s={s}, source degree {p}")
    logger.debug(f"verify_quadratic n={q.n} top_s={q.top_s}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


def require_valid(q: QuadraticComplex, what: str = "quadratic complex"):
    report = verify_quadratic(q)
    if not report["valid"]:
        raise InvalidStructureError(f"invalid {what}", report["failures"])


def t_dual(C: ChainComplex, m: int, family: Dict[int, ExactMatrix]) -> Dict[int, ExactMatrix]:
    """(T phi)[p] = (-1)^{(p+1)m + p} phi[m-p]^* for phi[p]: C_p^* -> C_{m-p}."""
    out = {}
    for p in C.degrees():
        src = family.get(m - p, ExactMatrix.zeros(C.ring, C.rank(p), C.rank(m - p)))
        out[p] = src.dual().scale(sign((p + 1) * m + p))
    return out


def symmetrization_blocks(C: ChainComplex, n: int, family: Family) -> Dict[int, ExactMatrix]:
    """phi_r = (-1)^p psi_0[p] + (-1)^{(p+1)n} psi_0[n-p]^*, p = n-r: (C^{n-*})_r -> C_r."""
    out = {}
    for r in range(n - C.hi, n - C.lo + 1):
        p = n - r
        m = family_block(C, n, family, 0, p).scale(sign(p))
        m = m + family_block(C, n, family, 0, n - p).dual().scale(sign((p + 1) * n))
        out[r] = m
    return out


def symmetrize(q: QuadraticComplex, check: bool = True) -> ChainMap:
    """(1+T)psi_0 as a degree-0 chain map C^{n-*} -> C."""
    if check:
        require_valid(q)
    C = q.complex
    return ChainMap(dual_complex(C, q.n), C, 0, symmetrization_blocks(C, q.n, q.psi))


@dataclass
class PoincareReport:
    """Result of a Poincaré test; the witness is the first nonzero homology of the cone."""
    is_poincare: bool
    witness: Optional[HomologyGroup] = None
    contraction: Optional[ChainHomotopy] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"poincare": self.is_poincare,
                "witness": self.witness.to_dict() if self.witness else None}


def poincare_of_map(f: ChainMap) -> PoincareReport:
    if not f.ring.is_integers:
        raise UnsupportedRingError("Poincaré duality is decided over the integers only; "
                                   "supply a homotopy inverse and use is_poincare_certified")
    result: ContractionResult = chain_contraction_z(mapping_cone(f))
    return PoincareReport(result.contractible, result.witness, result.homotopy)


def is_poincare_z(q: QuadraticComplex) -> PoincareReport:
    report = poincare_of_map(symmetrize(q))
    logger.debug(f"is_poincare_z n={q.n}: {report.is_poincare}")
    return report


def is_poincare_certified(q: QuadraticComplex, inverse: ChainMap, h_source: ChainHomotopy,
                          h_target: ChainHomotopy) -> Dict[str, Any]:
    """Over any ring: verify caller data showing (1+T)psi_0 is a homotopy equivalence."""
    return verify_homotopy_equivalence(symmetrize(q), inverse, h_source, h_target)


def direct_sum_families(complexes: Sequence[ChainComplex], n: int, families: Sequence[Family]) -> Family:
    ring = complexes[0].ring
    keys = set()
    for fam in families:
        keys |= set(fam)
    out = {}
    for (s, p) in keys:
        out[(s, p)] = block_diagonal(ring, [family_block(C, n, fam, s, p) for C, fam in zip(complexes, families)])
    return out


def direct_sum_quadratic(items: Sequence[QuadraticComplex]) -> QuadraticComplex:
    if not items:
        raise DimensionMismatchError("direct sum of nothing")
    n = items[0].n
    if any(q.n != n for q in items):
        raise DimensionMismatchError("direct sum of quadratic complexes of different dimension")
    complexes = [q.complex for q in items]
    return QuadraticComplex(direct_sum(complexes), n, direct_sum_families(complexes, n, [q.psi for q in items]))


def hyperbolic_form(rank: int = 1, degree: int = 0) -> QuadraticComplex:
    """psi_0 = [[0, I],[0, 0]] on Z^{2 rank} in degree k, n = 2k."""
    ring = RingSpec.integers()
    C = ChainComplex.concentrated(ring, degree, 2 * rank)
    zero = ExactMatrix.zeros(ring, rank, rank)
    psi0 = ExactMatrix.block(ring, [[zero, ExactMatrix.identity(ring, rank)], [zero, zero]])
    return QuadraticComplex(C, 2 * degree, {(0, degree): psi0})


def form_complex(matrix: List[List[int]], degree: int = 0) -> QuadraticComplex:
    """Quadratic complex with psi_0 given by an integer matrix on Z^r in degree k, n = 2k."""
    ring = RingSpec.integers()
    m = ExactMatrix.from_rows(ring, matrix)
    return QuadraticComplex(ChainComplex.concentrated(ring, degree, m.rows), 2 * degree, {(0, degree): m})
