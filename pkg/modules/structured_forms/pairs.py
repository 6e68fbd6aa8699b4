# modules/structured_forms/pairs.py

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from core.exceptions import DimensionMismatchError, InvalidStructureError
from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import ChainComplex, ChainMap, dual_complex, mapping_cone, sign
from modules.exact_core import ExactMatrix
from .quadratic import (Family, PoincareReport, QuadraticComplex, check_family_shapes, family_block,
                        poincare_of_map, quadratic_residual, symmetrization_blocks, top_s, verify_quadratic)

logger = get_surgery_logger("surgerykit.structured_forms", "FORMS")


@dataclass(frozen=True, eq=False)
class QuadraticPair:
    """
    (n+1)-dimensional quadratic pair (f: C -> D, (delta_psi, psi)): psi is an
    n-dimensional structure on C, delta_psi an (n+1)-dimensional family on D.
    """
    f: ChainMap
    n: int
    delta_psi: Family = field(default_factory=dict)
    psi: Family = field(default_factory=dict)

    def __post_init__(self):
        if self.f.degree != 0:
            raise DimensionMismatchError("pair map must have degree 0")
        check_family_shapes(self.target, self.n + 1, self.delta_psi, "delta_psi")
        check_family_shapes(self.source, self.n, self.psi, "psi")

    @property
    def source(self) -> ChainComplex:
        return self.f.source

    @property
    def target(self) -> ChainComplex:
        return self.f.target

    @property
    def boundary(self) -> QuadraticComplex:
        return QuadraticComplex(self.source, self.n, self.psi)

    def top_s(self) -> int:
        return max(top_s(self.delta_psi), top_s(self.psi))


def pair_residual(pair: QuadraticPair, s: int, p: int) -> ExactMatrix:
    """Q_{n+1}(delta_psi)_s[p] + (-1)^s f psi_s[p] f^*."""
    C, D, n, f = pair.source, pair.target, pair.n, pair.f
    out = quadratic_residual(D, n + 1, pair.delta_psi, s, p)
    push = f.at(n - s - p) @ family_block(C, n, pair.psi, s, p) @ f.at(p).dual()
    return out + push.scale(sign(s) * SignManifest.sign("pair.relation"))


def verify_quadratic_pair(pair: QuadraticPair) -> Dict[str, Any]:
    """Five-term relation on D, four-term relation on C and the chain-map condition."""
    failures = []
    if not pair.f.is_chain_map():
        failures.append({"kind": "chain_map", "degrees": sorted(pair.f.commutator_defect())})
    for fail in verify_quadratic(pair.boundary)["failures"]:
        failures.append({"kind": "boundary", **fail})
    D = pair.target
    for s in range(0, pair.top_s() + 2):
        for p in D.degrees():
            res = pair_residual(pair, s, p)
            if res.rows and res.cols and not res.is_zero():
                failures.append({"kind": "pair", "s": s, "p": p, "r": pair.n - p - s, "residual": res.to_list()})
                logger.warning(f"pair relation fails at s={s}, source degree {p}")
    logger.debug(f"verify_quadratic_pair n+1={pair.n + 1}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


def require_valid_pair(pair: QuadraticPair):
    report = verify_quadratic_pair(pair)
    if not report["valid"]:
        raise InvalidStructureError("invalid quadratic pair", report["failures"])


def relative_duality_map(pair: QuadraticPair) -> ChainMap:
    """
    D^{n+1-*} -> C(f): phi_r = [(1+T)delta_psi_0 ; (-1)^{r+1} (1+T)psi_0 f^*] in degree r.
    """
    C, D, n, f = pair.source, pair.target, pair.n, pair.f
    ring = C.ring
    cone = mapping_cone(f)
    Dd = dual_complex(D, n + 1)
    sym_d = symmetrization_blocks(D, n + 1, pair.delta_psi)
    sym_c = symmetrization_blocks(C, n, pair.psi)
    maps = {}
    for r in Dd.degrees():
        top = sym_d.get(r, ExactMatrix.zeros(ring, D.rank(r), Dd.rank(r)))
        low = sym_c.get(r - 1, ExactMatrix.zeros(ring, C.rank(r - 1), C.rank(n - r + 1)))
        low = (low @ f.at(n + 1 - r).dual()).scale(sign(r + 1))
        maps[r] = ExactMatrix.vstack(ring, [top, low], cols=Dd.rank(r))
    return ChainMap(Dd, cone, 0, maps)


def is_poincare_pair_z(pair: QuadraticPair) -> PoincareReport:
    report = poincare_of_map(relative_duality_map(pair))
    logger.debug(f"is_poincare_pair_z: {report.is_poincare}")
    return report


def algebraic_thom(pair: QuadraticPair, check: bool = True) -> QuadraticComplex:
    """(n+1)-dimensional quadratic complex on the mapping cone of f."""
    if check:
        require_valid_pair(pair)
    C, D, n, f = pair.source, pair.target, pair.n, pair.f
    ring = C.ring
    E = mapping_cone(f)
    N = n + 1
    lower_left = SignManifest.sign("thom.lower_left")
    lower_right = SignManifest.sign("thom.lower_right")
    out: Family = {}
    for s in range(0, pair.top_s() + 2):
        for p in E.degrees():
            t = N - s - p
            if not E.rank(t) or not E.rank(p):
                continue
            ul = family_block(D, N, pair.delta_psi, s, p)
            ur = ExactMatrix.zeros(ring, D.rank(t), C.rank(p - 1))
            ll = (family_block(C, n, pair.psi, s, p) @ f.at(p).dual()).scale(sign(p + n) * lower_left)
            lr = family_block(C, n, pair.psi, s + 1, n - s - p).dual().scale(
                sign(s + p + s * p + p * n) * lower_right)
            block = ExactMatrix.block(ring, [[ul, ur], [ll, lr]])
            if not block.is_zero():
                out[(s, p)] = block
    return QuadraticComplex(E, N, out)


def zero_source_pair(q: QuadraticComplex) -> QuadraticPair:
    """(0 -> D, (delta_psi, 0)) regarded as an (n+1)-dimensional pair."""
    zero = ChainComplex.zero(q.ring)
    return QuadraticPair(ChainMap(zero, q.complex, 0, {}), q.n - 1, dict(q.psi), {})
