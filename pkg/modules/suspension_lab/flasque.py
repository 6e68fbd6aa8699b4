# modules/suspension_lab/flasque.py

from typing import Any, Dict, List, Optional, Tuple

from core.exceptions import SuspensionError
from core.logger import get_surgery_logger
from modules.exact_core import ExactMatrix, RingSpec
from .banded import BandedMatrix
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")

Piece = Tuple[int, int, ExactMatrix]


def _place(ring: RingSpec, rows: int, cols: int, pieces: List[Piece]) -> ExactMatrix:
    data = [[ring.zero() for _ in range(cols)] for _ in range(rows)]
    for r0, c0, m in pieces:
        for (a, b), v in m.nonzero_entries():
            data[r0 + a][c0 + b] = v
    if not rows:
        return ExactMatrix.zeros(ring, 0, cols)
    return ExactMatrix.from_rows(ring, data, cols=cols)


def _require_finite(*objects: GradedObject):
    for M in objects:
        if not M.has_finite_support:
            raise SuspensionError(f"ΣM of {M.describe()} has unbounded ranks; "
                                  "the flasque structure is computed for objects of finite support")


# right shift

def shift_object(M: GradedObject) -> GradedObject:
    """(TM)(0) = 0, (TM)(i) = M(i−1)."""
    return M.shifted()


def shift_morphism(f: BandedMatrix) -> BandedMatrix:
    """(Tf)(i, j) = f(i−1, j−1), zero in row and column 0."""
    exc = {(i + 1, j + 1): b for (i, j), b in f.exceptional.items()}
    return BandedMatrix(f.ring, f.target.shifted(), f.source.shifted(), f.row_head + 1, f.col_head + 1,
                        f.period, exc, f.tail)


# Σ = ⊕_{l ≥ 1} T^l

def suspension_object(M: GradedObject) -> GradedObject:
    """ΣM(i) = M(i−1) ⊕ M(i−2) ⊕ … ⊕ M(0), in that order."""
    _require_finite(M)
    top = M.max_support()
    return GradedObject(tuple(M.offset(i) for i in range(top + 2)), M.total_rank())


def _position(M: GradedObject, i: int, m: int) -> int:
    """Offset of the summand M(m) inside ΣM(i), m < i."""
    return M.offset(i) - M.offset(m + 1)


def suspension_morphism(f: BandedMatrix) -> BandedMatrix:
    """Σf(i, j) = ⊕_{l=1}^{min(i,j)} f(i−l, j−l)."""
    M, N = f.source, f.target
    _require_finite(M, N)
    top = max(M.max_support(), N.max_support(), 0)
    SM, SN = suspension_object(M), suspension_object(N)

    def block(i: int, j: int) -> ExactMatrix:
        pieces = []
        for l in range(1, min(i, j) + 1):
            b = f.entry(i - l, j - l)
            if b.rows and b.cols and not b.is_zero():
                pieces.append((_position(N, i, i - l), _position(M, j, j - l), b))
        return _place(f.ring, SN.rank(i), SM.rank(j), pieces)

    return BandedMatrix.tabulate(f.ring, SN, SM, top + 1, top, block)


def sigma(ring: RingSpec, M: GradedObject) -> BandedMatrix:
    """σ_M: M ⊕ ΣM → ΣM with σ_M(i+1, i) = Id and zero elsewhere."""
    SM = suspension_object(M)
    source = M + SM
    return BandedMatrix.tabulate(ring, SM, source, M.max_support() + 1, 1,
                                 lambda i, j: ExactMatrix.identity(ring, source.rank(j)) if i == j + 1 else None)


def sigma_inverse(ring: RingSpec, M: GradedObject) -> BandedMatrix:
    SM = suspension_object(M)
    target = M + SM
    return BandedMatrix.tabulate(ring, target, SM, M.max_support() + 1, 1,
                                 lambda i, j: ExactMatrix.identity(ring, target.rank(i)) if j == i + 1 else None)


def phi(ring: RingSpec, M: GradedObject, N: GradedObject) -> BandedMatrix:
    """φ_{M,N}: Σ(M ⊕ N) → ΣM ⊕ ΣN, regrouping the summands of each degree."""
    _require_finite(M, N)
    MN = M + N
    source, target = suspension_object(MN), suspension_object(M) + suspension_object(N)
    top = max(MN.max_support(), 0)

    def block(i: int, j: int) -> Optional[ExactMatrix]:
        if i != j:
            return None
        pieces = []
        for m in range(i):
            src = _position(MN, i, m)
            if M.rank(m):
                pieces.append((_position(M, i, m), src, ExactMatrix.identity(ring, M.rank(m))))
            if N.rank(m):
                pieces.append((M.offset(i) + _position(N, i, m), src + M.rank(m),
                               ExactMatrix.identity(ring, N.rank(m))))
        return _place(ring, target.rank(i), source.rank(i), pieces)

    return BandedMatrix.tabulate(ring, target, source, top + 1, 0, block)


def phi_inverse(ring: RingSpec, M: GradedObject, N: GradedObject) -> BandedMatrix:
    """φ is a permutation in every degree, so its inverse is its dual."""
    return phi(ring, M, N).dual()


def regroup(ring: RingSpec, A: GradedObject, B: GradedObject, C: GradedObject, D: GradedObject) -> BandedMatrix:
    """A ⊕ B ⊕ C ⊕ D → A ⊕ C ⊕ B ⊕ D."""
    objects = (A, B, C, D)
    source, target = A + B + C + D, A + C + B + D
    head = max(o.stable_from for o in objects)

    def block(i: int, j: int) -> Optional[ExactMatrix]:
        if i != j:
            return None
        r = [o.rank(i) for o in objects]
        src = [0, r[0], r[0] + r[1], r[0] + r[1] + r[2]]
        dst = [0, r[0] + r[2], r[0], r[0] + r[2] + r[1]]
        pieces = [(dst[k], src[k], ExactMatrix.identity(ring, r[k])) for k in range(4) if r[k]]
        return _place(ring, target.rank(i), source.rank(i), pieces)

    return BandedMatrix.tabulate(ring, target, source, head, 0, block)


def check_flasque(ring: RingSpec, M: GradedObject, N: GradedObject,
                  f: Optional[BandedMatrix] = None) -> Dict[str, Any]:
    """
    σ is an isomorphism, σ_{M⊕N} = φ⁻¹(σ_M ⊕ σ_N)(Id ⊕ φ) up to the regrouping
    of summands, and for f: M → N naturality Σf∘σ_M = σ_N∘(f ⊕ Σf) and
    Σ(f*) = (Σf)*.
    """
    failures = []
    for name, X in (("M", M), ("N", N)):
        s, s_inv = sigma(ring, X), sigma_inverse(ring, X)
        if s_inv @ s != BandedMatrix.identity(ring, s.source) or s @ s_inv != BandedMatrix.identity(ring, s.target):
            failures.append({"identity": "sigma_iso", "object": name})
    MN = M + N
    SM, SN = suspension_object(M), suspension_object(N)
    lhs = sigma(ring, MN)
    middle = BandedMatrix.identity(ring, MN).direct_sum(phi(ring, M, N))
    rhs = phi_inverse(ring, M, N) @ sigma(ring, M).direct_sum(sigma(ring, N)) @ regroup(ring, M, N, SM, SN) @ middle
    if lhs != rhs:
        failures.append({"identity": "compatibility"})
    if f is not None:
        if f.source != M or f.target != N:
            raise SuspensionError("f must be a morphism M → N")
        Sf = suspension_morphism(f)
        if Sf @ sigma(ring, M) != sigma(ring, N) @ f.direct_sum(Sf):
            failures.append({"identity": "naturality"})
        if suspension_morphism(f.dual()) != Sf.dual():
            failures.append({"identity": "involution"})
    for fail in failures:
        logger.warning(f"flasque identity fails: {fail['identity']}")
    logger.debug(f"flasque check on {M.describe()}, {N.describe()}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}
