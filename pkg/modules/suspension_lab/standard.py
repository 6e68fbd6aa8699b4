# modules/suspension_lab/standard.py

from dataclasses import dataclass
from typing import Any, Dict

from core.logger import get_surgery_logger
from modules.exact_core import ExactMatrix, RingSpec
from .banded import BandedMatrix
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")


@dataclass(frozen=True, eq=False)
class Reordering:
    """Isomorphism T: M → standard with its inverse."""
    source: GradedObject
    standard: GradedObject
    forward: BandedMatrix
    inverse: BandedMatrix

    def verify(self) -> Dict[str, Any]:
        failures = []
        ring = self.forward.ring
        if self.inverse @ self.forward != BandedMatrix.identity(ring, self.source):
            failures.append({"identity": "inverse_after_forward"})
        if self.forward @ self.inverse != BandedMatrix.identity(ring, self.standard):
            failures.append({"identity": "forward_after_inverse"})
        for fail in failures:
            logger.warning(f"reordering of {self.source.describe()} fails: {fail['identity']}")
        return {"valid": not failures, "failures": failures}


def _unit_row(ring: RingSpec, width: int, a: int) -> ExactMatrix:
    return ExactMatrix.from_rows(ring, [[ring.one() if k == a else ring.zero() for k in range(width)]])


def _reorder_infinite(ring: RingSpec, M: GradedObject) -> Reordering:
    """
    Basis vector a of M(i) goes to index N(i) + a of underline R, where
    N(i) = rank M(0) + … + rank M(i−1); from the stable index on this
    interleaves rank M copies, so T has period (rank, 1).
    """
    n, s0 = M.tail_rank, M.stable_from
    target = GradedObject.constant(1)
    exc = {}
    for i in range(s0):
        for a in range(M.rank(i)):
            exc[(M.offset(i) + a, i)] = _unit_row(ring, M.rank(i), a)
    tail = tuple({0: _unit_row(ring, n, rho)} for rho in range(n))
    forward = BandedMatrix(ring, target, M, M.offset(s0), s0, (n, 1), exc, tail)
    inverse = BandedMatrix(ring, M, target, s0, M.offset(s0), (1, n),
                           {(i, k): b.transpose() for (k, i), b in exc.items()},
                           ({rho: _unit_row(ring, n, rho).transpose() for rho in range(n)},))
    return Reordering(M, target, forward, inverse)


def _reorder_finite(ring: RingSpec, M: GradedObject) -> Reordering:
    """M of finite support collapses onto OM = ⊕ M(i), concentrated at index 0."""
    total = M.total_rank()
    target = GradedObject.finite([total]) if total else GradedObject.zero()
    forward_blocks, inverse_blocks = {}, {}
    for i in M.support():
        r, off = M.rank(i), M.offset(i)
        incl = ExactMatrix.from_rows(ring, [[ring.one() if k == off + a else ring.zero() for a in range(r)]
                                            for k in range(total)])
        forward_blocks[(0, i)] = incl
        inverse_blocks[(i, 0)] = incl.transpose()
    return Reordering(M, target, BandedMatrix.finite(ring, target, M, forward_blocks),
                      BandedMatrix.finite(ring, M, target, inverse_blocks))


def reorder_to_standard(ring: RingSpec, M: GradedObject) -> Reordering:
    """
    T: M ≅ underline R when M has infinite support, and T: M ≅ OM placed at
    index 0 when the support is finite.
    """
    out = _reorder_infinite(ring, M) if not M.has_finite_support else _reorder_finite(ring, M)
    logger.debug(f"reordered {M.describe()} onto {out.standard.describe()}")
    return out


def essential_image_witness(ring: RingSpec, M: GradedObject) -> Reordering:
    """M ⊕ underline R ≅ underline R: every object is a summand of the standard one."""
    return reorder_to_standard(ring, M + GradedObject.constant(1))
