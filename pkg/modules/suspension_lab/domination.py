# modules/suspension_lab/domination.py

import random
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from core.exceptions import DimensionMismatchError, SuspensionError
from core.logger import get_surgery_logger
from modules.chain_algebra import ChainComplex
from modules.exact_core import ExactMatrix, RingSpec
from .banded import BandedMatrix, random_block
from .complexes import Bounds, GradedChainComplex, verify_graded_complex
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")

Homotopy = Dict[int, BandedMatrix]


@dataclass
class DominationResult:
    """D finite with f: C → D, g: D → C and h = T such that dh + hd = id − gf."""
    dominating: GradedChainComplex
    finite: ChainComplex
    f: Dict[int, BandedMatrix]
    g: Dict[int, BandedMatrix]
    h: Homotopy
    bounds: Bounds
    report: Dict[str, Any]

    @property
    def valid(self) -> bool:
        return self.report["valid"]


def _contraction_at(C: GradedChainComplex, T: Homotopy, r: int) -> BandedMatrix:
    if r in T:
        return T[r]
    return BandedMatrix.zero(C.ring, C.obj(r + 1), C.obj(r))


def contraction_error(C: GradedChainComplex, T: Homotopy, r: int) -> BandedMatrix:
    """e_r = Id − d_{r+1} T_r − T_{r−1} d_r, finite when T contracts C at infinity."""
    ident = BandedMatrix.identity(C.ring, C.obj(r))
    return ident - C.diff(r + 1) @ _contraction_at(C, T, r) - _contraction_at(C, T, r - 1) @ C.diff(r)


def domination_bounds(C: GradedChainComplex, T: Homotopy) -> Bounds:
    """b_r covers every row of e_r and d_r maps C_r{[0, b_r]} into C_{r−1}{[0, b_{r−1}]}."""
    bounds = {}
    for r in C.degrees():
        e = contraction_error(C, T, r)
        if not e.is_finite:
            raise SuspensionError(f"Id − dT − Td has a periodic tail in degree {r}; T is no contraction at infinity")
        bounds[r] = e.max_nonzero_row()
    for r in range(C.hi, C.lo, -1):
        bounds[r - 1] = max(bounds[r - 1], C.diff(r).max_row_in_columns(bounds[r]))
    return bounds


def _inclusion(ring: RingSpec, big: GradedObject, bound: int) -> BandedMatrix:
    small = big.truncate(bound)
    return BandedMatrix.finite(ring, big, small,
                               {(i, i): ExactMatrix.identity(ring, big.rank(i)) for i in range(bound + 1)})


def finite_domination(C: GradedChainComplex, T: Homotopy) -> DominationResult:
    """
    Finite domination of a complex in F_ℕ that is contractible at infinity:
    D_r = C_r{[0, b_r]}, f_r = Id − dT − Td, g the inclusion and h = T.
    """
    verdict = verify_graded_complex(C)
    if not verdict["valid"]:
        raise SuspensionError("finite domination needs d² = 0 exactly")
    for r, t in T.items():
        if t.source != C.obj(r) or t.target != C.obj(r + 1):
            raise DimensionMismatchError(f"T_{r} maps {t.source.describe()} → {t.target.describe()}")
    ring = C.ring
    bounds = domination_bounds(C, T)
    objects = {r: C.obj(r).truncate(bounds[r]) for r in C.degrees()}
    diffs = {r: C.diff(r).truncated(bounds[r - 1], bounds[r]) for r in range(C.lo + 1, C.hi + 1)}
    D = GradedChainComplex(ring, C.lo, C.hi, objects, diffs)
    f = {r: BandedMatrix.finite(ring, objects[r], C.obj(r), contraction_error(C, T, r).exceptional)
         for r in C.degrees()}
    g = {r: _inclusion(ring, C.obj(r), bounds[r]) for r in C.degrees()}
    h = {r: _contraction_at(C, T, r) for r in C.degrees()}

    failures = [{"kind": "dominating_complex", **x} for x in verify_graded_complex(D)["failures"]]
    for r in range(C.lo, C.hi + 1):
        if r > C.lo:
            if not (D.diff(r) @ f[r] - f[r - 1] @ C.diff(r)).is_zero():
                failures.append({"kind": "f_chain_map", "degree": r})
            if not (C.diff(r) @ g[r] - g[r - 1] @ D.diff(r)).is_zero():
                failures.append({"kind": "g_chain_map", "degree": r})
        ident = BandedMatrix.identity(ring, C.obj(r))
        homotopy = C.diff(r + 1) @ h[r] + _contraction_at(C, T, r - 1) @ C.diff(r)
        if homotopy != ident - g[r] @ f[r]:
            failures.append({"kind": "homotopy", "degree": r})
    for fail in failures:
        logger.warning(f"finite domination identity fails: {fail}")
    logger.info(f"finite domination with bounds {bounds}: {len(failures)} failures")
    report = {"valid": not failures, "failures": failures}
    return DominationResult(D, C.truncation(bounds), f, g, h, bounds, report)


# instances

def shift_up(ring: RingSpec, rank: int = 1) -> BandedMatrix:
    """S(i+1, i) = Id on underline R^rank; S*S = Id and SS* = Id − E_00."""
    obj = GradedObject.constant(rank)
    return BandedMatrix(ring, obj, obj, 0, 0, (1, 1), {}, ({-1: ExactMatrix.identity(ring, rank)},))


def cone_of_identity(ring: RingSpec, rank: int = 1) -> Tuple[GradedChainComplex, Homotopy]:
    """cone(Id of underline R^rank) with the contraction T_0 = Id − E_00, exact except in index 0."""
    obj = GradedObject.constant(rank)
    ident = BandedMatrix.identity(ring, obj)
    corner = BandedMatrix.finite(ring, obj, obj, {(0, 0): ExactMatrix.identity(ring, rank)})
    C = GradedChainComplex(ring, 0, 1, {0: obj, 1: obj}, {1: ident})
    return C, {0: ident - corner}


def _elementary(rng: random.Random, ring: RingSpec, rank: int, spread: int = 3) -> Tuple[BandedMatrix, BandedMatrix]:
    """A finite elementary automorphism Id + E and its inverse Id − E, E strictly off the block diagonal."""
    obj = GradedObject.constant(rank)
    i = rng.randrange(spread)
    j = rng.choice([k for k in range(spread) if k != i])
    E = BandedMatrix.finite(ring, obj, obj, {(i, j): random_block(rng, ring, rank, rank, bound=2)})
    ident = BandedMatrix.identity(ring, obj)
    return ident + E, ident - E


def random_contractible(rng: random.Random, ring: Optional[RingSpec] = None, rank: int = 1,
                        steps: int = 2) -> Tuple[GradedChainComplex, Homotopy]:
    """
    C_1 = C_0 = underline R^rank with d = U S V for finite elementary U, V and
    the shift S; T = V⁻¹ S* U⁻¹ plus a random finite error.
    """
    ring = ring or RingSpec.integers()
    obj = GradedObject.constant(rank)
    U = V = U_inv = V_inv = BandedMatrix.identity(ring, obj)
    for _ in range(steps):
        a, a_inv = _elementary(rng, ring, rank)
        b, b_inv = _elementary(rng, ring, rank)
        U, U_inv = U @ a, a_inv @ U_inv
        V, V_inv = b @ V, V_inv @ b_inv
    S = shift_up(ring, rank)
    d = U @ S @ V
    error = BandedMatrix.finite(ring, obj, obj, {(rng.randrange(3), rng.randrange(3)):
                                                 random_block(rng, ring, rank, rank, bound=1)})
    T = V_inv @ S.dual() @ U_inv + error
    C = GradedChainComplex(ring, 0, 1, {0: obj, 1: obj}, {1: d})
    return C, {0: T}
