# modules/structured_forms/thickening.py

from dataclasses import dataclass
from typing import Optional, Tuple

from core.signs import SignManifest
from core.logger import get_surgery_logger
from modules.chain_algebra import ChainComplex, ChainMap, dual_complex, sign
from modules.exact_core import ExactMatrix
from .pairs import QuadraticPair
from .quadratic import Family, QuadraticComplex, family_block, require_valid, symmetrization_blocks

logger = get_surgery_logger("surgerykit.structured_forms", "FORMS")


@dataclass(frozen=True)
class ThickeningSigns:
    """Signs of the boundary construction; `higher_s` holds (a, b, c) of (-1)^{a s + b p + c}."""
    phi_block: int = 1
    dual_block: int = -1
    identity_block: int = 1
    higher_s: Tuple[int, int, int] = (1, 1, 1)
    pair_map: int = 1

    @classmethod
    def from_manifest(cls) -> "ThickeningSigns":
        return cls(phi_block=SignManifest.sign("thickening.phi_block"),
                   dual_block=SignManifest.sign("thickening.dual_block"),
                   identity_block=SignManifest.sign("thickening.identity_block"),
                   higher_s=tuple(SignManifest.value("thickening.higher_s")),
                   pair_map=SignManifest.sign("thickening.pair_map"))

    def higher(self, s: int, p: int) -> int:
        a, b, c = self.higher_s
        return sign(a * s + b * p + c)


def boundary_complex(q: QuadraticComplex, signs: ThickeningSigns) -> ChainComplex:
    """dC_r = C_{r+1} + (C^{n-*})_r with d = [[d_C, e1 phi_r], [0, e2 d]]."""
    C, n, ring = q.complex, q.n, q.ring
    D = dual_complex(C, n)
    phi = symmetrization_blocks(C, n, q.psi)
    lo, hi = min(C.lo - 1, D.lo), max(C.hi - 1, D.hi)
    ranks = {r: C.rank(r + 1) + D.rank(r) for r in range(lo, hi + 1)}
    diffs = {}
    for r in range(lo + 1, hi + 1):
        ph = phi.get(r, ExactMatrix.zeros(ring, C.rank(r), D.rank(r)))
        diffs[r] = ExactMatrix.block(ring, [
            [C.diff(r + 1), ph.scale(signs.phi_block)],
            [ExactMatrix.zeros(ring, D.rank(r - 1), C.rank(r + 1)), D.diff(r).scale(signs.dual_block)],
        ])
    return ChainComplex(ring, lo, hi, ranks, diffs)


def boundary_structure(q: QuadraticComplex, B: ChainComplex, signs: ThickeningSigns) -> Family:
    """(n-1)-dimensional structure on dC."""
    C, n, ring = q.complex, q.n, q.ring
    D = dual_complex(C, n)
    N = n - 1
    out: Family = {}
    for s in range(0, q.top_s + 2):
        for p in B.degrees():
            t = N - s - p
            if not B.rank(t) or not B.rank(p):
                continue
            if s == 0:
                ul = ExactMatrix.zeros(ring, C.rank(t + 1), C.rank(p + 1))
                ll = ExactMatrix.identity(ring, C.rank(p + 1)).scale(signs.identity_block)
            else:
                ul = family_block(C, n, q.psi, s - 1, p + 1).scale(signs.higher(s, p))
                ll = ExactMatrix.zeros(ring, D.rank(t), C.rank(p + 1))
            block = ExactMatrix.block(ring, [
                [ul, ExactMatrix.zeros(ring, C.rank(t + 1), D.rank(p))],
                [ll, ExactMatrix.zeros(ring, D.rank(t), D.rank(p))],
            ])
            if not block.is_zero():
                out[(s, p)] = block
    return out


def boundary_inclusion(q: QuadraticComplex, B: ChainComplex, signs: ThickeningSigns) -> ChainMap:
    """i_r = [0, (-1)^r]: dC_r -> (C^{n-*})_r."""
    C, ring = q.complex, q.ring
    D = dual_complex(C, q.n)
    maps = {}
    for r in B.degrees():
        maps[r] = ExactMatrix.hstack(ring, [ExactMatrix.zeros(ring, D.rank(r), C.rank(r + 1)),
                                            ExactMatrix.identity(ring, D.rank(r)).scale(sign(r) * signs.pair_map)],
                                     rows=D.rank(r))
    return ChainMap(B, D, 0, maps)


def boundary_thickening(q: QuadraticComplex, signs: Optional[ThickeningSigns] = None,
                        check: bool = True) -> QuadraticPair:
    """The n-dimensional pair (dC -> C^{n-*}, (0, d psi))."""
    if check:
        require_valid(q)
    signs = signs or ThickeningSigns.from_manifest()
    B = boundary_complex(q, signs)
    pair = QuadraticPair(boundary_inclusion(q, B, signs), q.n - 1, {}, boundary_structure(q, B, signs))
    logger.debug(f"boundary thickening n={q.n}: boundary ranks {B.describe()}")
    return pair


def boundary(q: QuadraticComplex, signs: Optional[ThickeningSigns] = None) -> QuadraticComplex:
    return boundary_thickening(q, signs).boundary
