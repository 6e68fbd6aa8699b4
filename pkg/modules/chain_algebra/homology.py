# modules/chain_algebra/homology.py

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from core.exceptions import UnsupportedRingError
from core.logger import get_surgery_logger
from modules.exact_core import ExactMatrix, smith_normal_form, solve_linear
from .complexes import ChainComplex, ChainHomotopy, ChainMap, mapping_cone

logger = get_surgery_logger("surgerykit.chain_algebra", "CHAIN")


@dataclass(frozen=True)
class HomologyGroup:
    """ℤ^free ⊕ ⊕ ℤ/t."""
    degree: int
    free_rank: int
    torsion: tuple = ()

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def describe(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"

    def to_dict(self) -> Dict[str, Any]:
        return {"degree": self.degree, "free_rank": self.free_rank, "torsion": list(self.torsion)}


@dataclass
class ContractionResult:
    """Either a contraction h with dh + hd = id, or a nonzero homology witness."""
    homotopy: Optional[ChainHomotopy]
    witness: Optional[HomologyGroup] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def contractible(self) -> bool:
        return self.homotopy is not None


def _require_integers(C: ChainComplex, op: str):
    if not C.ring.is_integers:
        raise UnsupportedRingError(f"{op} is only decided over the integers, got {C.ring.describe()}")


def homology_z(C: ChainComplex) -> Dict[int, HomologyGroup]:
    """Exact homology of an integer complex via Smith normal forms."""
    _require_integers(C, "homology_z")
    ranks_of_d = {}
    torsion_of_d = {}
    for r in range(C.lo + 1, C.hi + 1):
        snf = smith_normal_form(C.diff(r))
        ranks_of_d[r] = snf.rank
        torsion_of_d[r] = snf.torsion
    out = {}
    for r in C.degrees():
        kernel = C.rank(r) - ranks_of_d.get(r, 0)
        image = ranks_of_d.get(r + 1, 0)
        out[r] = HomologyGroup(r, kernel - image, tuple(torsion_of_d.get(r + 1, [])))
    logger.debug(f"homology over {C.lo}..{C.hi}: " + ", ".join(f"H{r}={h.describe()}" for r, h in out.items()))
    return out


def first_nonzero_homology(C: ChainComplex) -> Optional[HomologyGroup]:
    for h in homology_z(C).values():
        if not h.is_zero:
            return h
    return None


def is_acyclic_z(C: ChainComplex) -> bool:
    return first_nonzero_homology(C) is None


def chain_contraction_z(C: ChainComplex) -> ContractionResult:
    """
    Build h with dh + hd = id degree by degree from the bottom: d_{r+1} h_r must
    equal id - h_{r-1} d_r, solved column by column over ℤ.
    """
    _require_integers(C, "chain_contraction_z")
    witness = first_nonzero_homology(C)
    if witness is not None:
        return ContractionResult(None, witness)
    ring = C.ring
    maps: Dict[int, ExactMatrix] = {}
    for r in C.degrees():
        prev = maps.get(r - 1, ExactMatrix.zeros(ring, C.rank(r), C.rank(r - 1)))
        rhs = ExactMatrix.identity(ring, C.rank(r)) - prev @ C.diff(r)
        if C.rank(r) == 0:
            maps[r] = ExactMatrix.zeros(ring, C.rank(r + 1), 0)
            continue
        result = solve_linear(C.diff(r + 1), rhs)
        if not result.solvable:
            # unreachable for acyclic integer complexes
            logger.warning(f"contraction step failed at degree {r}: {result.witness}")
            return ContractionResult(None, None, {"degree": r, **result.witness})
        maps[r] = result.solution
    h = ChainHomotopy(C, C, maps)
    return ContractionResult(h)


def is_quasi_isomorphism_z(f: ChainMap) -> bool:
    return is_acyclic_z(mapping_cone(f))


def verify_homotopy_equivalence(f: ChainMap, g: ChainMap, h_source: ChainHomotopy,
                                h_target: ChainHomotopy) -> Dict[str, Any]:
    """Check caller-supplied data gf ≃ id and fg ≃ id; works over any ring."""
    gf = g.compose(f)
    fg = f.compose(g)
    src = h_source.defect(gf, f.source.identity())
    tgt = h_target.defect(fg, f.target.identity())
    failures = [{"side": "source", "degree": r} for r in src] + [{"side": "target", "degree": r} for r in tgt]
    return {"valid": not failures and f.is_chain_map() and g.is_chain_map(), "failures": failures}
