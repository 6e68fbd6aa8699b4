# modules/suspension_lab/lift.py

from dataclasses import dataclass
from typing import Any, Dict, Optional

from core.exceptions import SuspensionError
from core.logger import get_surgery_logger
from .banded import BandedMatrix
from .complexes import (Bounds, GradedChainComplex, GradedQuadraticComplex, GradedQuadraticPair, verify_graded_pair,
                        verify_graded_quadratic)

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")


@dataclass
class LiftResult:
    """A genuine complex in F_ℕ together with the bounds b_r that were cut off."""
    lifted: Any
    bounds: Bounds
    report: Dict[str, Any]

    @property
    def valid(self) -> bool:
        return self.report["valid"]


def _finite_row_bound(m: BandedMatrix, what: str) -> int:
    if not m.is_finite:
        raise SuspensionError(f"{what} has a periodic tail; the input is not a complex at infinity")
    return m.max_nonzero_row()


def _raise_to(bounds: Bounds, r: int, value: int):
    if r in bounds and value > bounds[r]:
        bounds[r] = value


def _close_downwards(C: GradedChainComplex, bounds: Bounds):
    """b_{r−1} ≥ the last row d_r reaches from C_r{[0, b_r]}, processed from the top degree down."""
    for r in range(C.hi, C.lo, -1):
        _raise_to(bounds, r - 1, C.diff(r).max_row_in_columns(bounds[r]))


def complex_bounds(C: GradedChainComplex, extra: Optional[Dict[int, int]] = None) -> Bounds:
    """
    Smallest b_r ≥ −1 such that d² vanishes below the bounds and every d_r
    maps C_r{[0, b_r]} into C_{r−1}{[0, b_{r−1}]}.
    """
    bounds = {r: -1 for r in C.degrees()}
    for r, v in (extra or {}).items():
        _raise_to(bounds, r, v)
    for r in range(C.lo + 2, C.hi + 1):
        _raise_to(bounds, r - 2, _finite_row_bound(C.square(r), f"d_{r - 1} d_{r}"))
    return bounds


def quadratic_bounds(q: GradedQuadraticComplex) -> Bounds:
    C = q.complex
    extra: Dict[int, int] = {}
    for s in range(0, q.top_s + 2):
        for p in C.degrees():
            r0 = q.n - p - s - 1
            row = _finite_row_bound(q.residual(s, p), f"the quadratic residual at s={s}, p={p}")
            extra[r0] = max(extra.get(r0, -1), row)
    bounds = complex_bounds(C, extra)
    _close_downwards(C, bounds)
    return bounds


def _check_supplied(C: GradedChainComplex, minimal: Bounds, supplied: Bounds) -> Bounds:
    bounds = {r: supplied.get(r, -1) for r in C.degrees()}
    for r in C.degrees():
        if bounds[r] < minimal[r]:
            raise SuspensionError(f"bound b_{r} = {bounds[r]} is below the required {minimal[r]}")
    closed = dict(bounds)
    _close_downwards(C, closed)
    if closed != bounds:
        bad = sorted(r for r in bounds if closed[r] != bounds[r])
        raise SuspensionError(f"bounds are not closed under the differential at degrees {bad}")
    return bounds


def _lift_complex(C: GradedChainComplex, bounds: Bounds) -> GradedChainComplex:
    """d′_r = [[0, 0], [0, d_r^{11}]] for C_r = C_r{[0, b_r]} ⊕ C_r{> b_r}."""
    diffs = {r: C.diff(r).keep_lower_right(bounds[r - 1], bounds[r]) for r in range(C.lo + 1, C.hi + 1)}
    return GradedChainComplex(C.ring, C.lo, C.hi, C.objects, diffs)


def _outside(n: int, bounds: Bounds, s: int, p: int) -> int:
    return bounds.get(n - s - p, -1)


def lift_from_infinity(q: GradedQuadraticComplex, bounds: Optional[Bounds] = None) -> LiftResult:
    """
    Lift a quadratic complex of the category at infinity to a genuine one in F_ℕ
    by cutting every d and ψ_s down to the blocks past the bounds.
    """
    C = q.complex
    minimal = quadratic_bounds(q)
    bounds = minimal if bounds is None else _check_supplied(C, minimal, bounds)
    lifted_complex = _lift_complex(C, bounds)
    psi = {(s, p): m.keep_lower_right(_outside(q.n, bounds, s, p), bounds.get(p, -1)) for (s, p), m in q.psi.items()}
    lifted = GradedQuadraticComplex(lifted_complex, q.n, psi)
    report = verify_graded_quadratic(lifted)
    diffs_ok = all(lifted_complex.diff(r).differs_only_within(C.diff(r), bounds[r - 1], bounds[r])
                   for r in range(C.lo + 1, C.hi + 1))
    report["same_class"] = diffs_ok and all(
        psi[k].differs_only_within(m, _outside(q.n, bounds, *k), bounds.get(k[1], -1)) for k, m in q.psi.items())
    logger.info(f"lifted quadratic complex with bounds {bounds}: valid={report['valid']}")
    return LiftResult(lifted, bounds, report)


def lift_pair(pair: GradedQuadraticPair, bounds: Optional[Bounds] = None) -> LiftResult:
    """
    Pair variant: the boundary (C, ψ) is already a genuine quadratic complex;
    only D, f and δψ are cut down, f to the rows past the bounds of D.
    """
    if not verify_graded_quadratic(pair.boundary)["valid"]:
        raise SuspensionError("the boundary of the pair must be lifted first")
    D, n = pair.target, pair.n
    extra: Dict[int, int] = {}
    for r in range(pair.source.lo, pair.source.hi + 2):
        if r - 1 in D.objects:
            row = _finite_row_bound(pair.chain_map_defect(r), f"the chain map defect at degree {r}")
            extra[r - 1] = max(extra.get(r - 1, -1), row)
    for s in range(0, pair.top_s() + 2):
        for p in D.degrees():
            row = _finite_row_bound(pair.residual(s, p), f"the pair residual at s={s}, p={p}")
            extra[n - p - s] = max(extra.get(n - p - s, -1), row)
    minimal = complex_bounds(D, extra)
    _close_downwards(D, minimal)
    bounds = minimal if bounds is None else _check_supplied(D, minimal, bounds)
    lifted_target = _lift_complex(D, bounds)
    f = {r: m.keep_lower_right(bounds.get(r, -1), -1) for r, m in pair.f.items()}
    delta_psi = {(s, p): m.keep_lower_right(_outside(n + 1, bounds, s, p), bounds.get(p, -1))
                 for (s, p), m in pair.delta_psi.items()}
    lifted = GradedQuadraticPair(pair.boundary, lifted_target, f, delta_psi)
    report = verify_graded_pair(lifted)
    logger.info(f"lifted quadratic pair with bounds {bounds}: valid={report['valid']}")
    return LiftResult(lifted, bounds, report)
