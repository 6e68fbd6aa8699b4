# modules/suspension_lab/complexes.py

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from core.exceptions import DimensionMismatchError, RingMismatchError
from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import ChainComplex, sign
from modules.exact_core import RingSpec
from .banded import BandedMatrix
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")

# (s, p) -> psi_s on C_p^*, landing in C_{n-s-p}
GradedFamily = Dict[Tuple[int, int], BandedMatrix]
Bounds = Dict[int, int]


def _failed(m: BandedMatrix, at_infinity: bool) -> bool:
    return not m.is_finite if at_infinity else not m.is_zero()


@dataclass(frozen=True, eq=False)
class GradedChainComplex:
    """
    Bounded chain complex in F_ℕ: objects C_r (degrees lo..hi) with
    differentials d[r]: C_r → C_{r−1} given as banded morphisms.
    """
    ring: RingSpec
    lo: int
    hi: int
    objects: Dict[int, GradedObject]
    d: Dict[int, BandedMatrix] = field(default_factory=dict)

    def __post_init__(self):
        objects = {r: self.objects.get(r, GradedObject.zero()) for r in range(self.lo, self.hi + 1)}
        object.__setattr__(self, "objects", objects)
        diffs = {}
        for r in range(self.lo + 1, self.hi + 1):
            m = self.d.get(r)
            if m is None:
                m = BandedMatrix.zero(self.ring, objects[r - 1], objects[r])
            if m.ring != self.ring:
                raise RingMismatchError(f"d_{r} lives over {m.ring.describe()}")
            if m.source != objects[r] or m.target != objects[r - 1]:
                raise DimensionMismatchError(f"d_{r} maps {m.source.describe()} → {m.target.describe()}, "
                                             f"expected {objects[r].describe()} → {objects[r - 1].describe()}")
            diffs[r] = m
        object.__setattr__(self, "d", diffs)

    def obj(self, r: int) -> GradedObject:
        return self.objects.get(r, GradedObject.zero())

    def diff(self, r: int) -> BandedMatrix:
        if r in self.d:
            return self.d[r]
        return BandedMatrix.zero(self.ring, self.obj(r - 1), self.obj(r))

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def square(self, r: int) -> BandedMatrix:
        """d_{r−1} d_r: C_r → C_{r−2}."""
        return self.diff(r - 1) @ self.diff(r)

    def truncation(self, bounds: Bounds) -> ChainComplex:
        """
        The finite complex r ↦ C_r{[0, b_r]} read off the window of each
        differential; a subcomplex when d_r never leaves the kept rows.
        """
        ranks = {r: self.obj(r).offset(bounds[r] + 1) for r in self.degrees()}
        diffs = {r: self.diff(r).window(bounds[r - 1] + 1, bounds[r] + 1) for r in range(self.lo + 1, self.hi + 1)}
        return ChainComplex(self.ring, self.lo, self.hi, ranks, diffs)

    def describe(self) -> str:
        return " ".join(f"{r}:{self.obj(r).describe()}" for r in self.degrees())


def verify_graded_complex(C: GradedChainComplex, at_infinity: bool = False) -> Dict[str, Any]:
    """d² = 0 exactly, or only up to finitely many blocks when at_infinity is set."""
    failures = []
    for r in range(C.lo + 2, C.hi + 1):
        sq = C.square(r)
        if _failed(sq, at_infinity):
            failures.append({"degree": r, "blocks": len(sq.exceptional), "periodic": not sq.is_finite})
            logger.warning(f"d² ≠ 0 at degree {r} ({'at infinity' if at_infinity else 'exactly'})")
    logger.debug(f"verify_graded_complex {C.lo}..{C.hi}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


def graded_family_block(C: GradedChainComplex, n: int, family: GradedFamily, s: int, p: int) -> BandedMatrix:
    if (s, p) in family:
        return family[(s, p)]
    return BandedMatrix.zero(C.ring, C.obj(n - s - p), C.obj(p))


def graded_top_s(family: GradedFamily) -> int:
    nonzero = [s for (s, _), m in family.items() if not m.is_zero()]
    return max(nonzero) if nonzero else -1


def graded_residual(C: GradedChainComplex, n: int, family: GradedFamily, s: int, p: int) -> BandedMatrix:
    """The four-term quadratic relation at (s, p), blockwise: a morphism C_p^* → C_{n−p−s−1}."""
    r0 = n - p - s - 1
    out = C.diff(r0 + 1) @ graded_family_block(C, n, family, s, p)
    out = out - (graded_family_block(C, n, family, s, p + 1) @ C.diff(p + 1).dual()).scale(sign(r0))
    out = out + graded_family_block(C, n, family, s + 1, r0).dual().scale(sign((r0 + 1) * (n + s)))
    return out + graded_family_block(C, n, family, s + 1, p).scale(sign(s))


def _check_family(C: GradedChainComplex, n: int, family: GradedFamily, name: str):
    for (s, p), m in family.items():
        if s < 0:
            raise DimensionMismatchError(f"{name}_{s} has negative index")
        if m.source != C.obj(p) or m.target != C.obj(n - s - p):
            raise DimensionMismatchError(f"{name}_{s}[{p}] maps {m.source.describe()} → {m.target.describe()}")


@dataclass(frozen=True, eq=False)
class GradedQuadraticComplex:
    """n-dimensional quadratic complex in F_ℕ; a complex of F_{ℕ,b} when only checked at infinity."""
    complex: GradedChainComplex
    n: int
    psi: GradedFamily = field(default_factory=dict)

    def __post_init__(self):
        _check_family(self.complex, self.n, self.psi, "psi")

    @property
    def ring(self) -> RingSpec:
        return self.complex.ring

    @property
    def top_s(self) -> int:
        return graded_top_s(self.psi)

    def block(self, s: int, p: int) -> BandedMatrix:
        return graded_family_block(self.complex, self.n, self.psi, s, p)

    def residual(self, s: int, p: int) -> BandedMatrix:
        return graded_residual(self.complex, self.n, self.psi, s, p)


def verify_graded_quadratic(q: GradedQuadraticComplex, at_infinity: bool = False) -> Dict[str, Any]:
    """Differential and four-term relation, exactly or modulo finite morphisms."""
    failures = [{"kind": "complex", **f} for f in verify_graded_complex(q.complex, at_infinity)["failures"]]
    for s in range(0, q.top_s + 2):
        for p in q.complex.degrees():
            if _failed(q.residual(s, p), at_infinity):
                failures.append({"kind": "quadratic", "s": s, "p": p, "r": q.n - p - s - 1})
                logger.warning(f"graded quadratic relation fails at s={s}, source degree {p}")
    logger.debug(f"verify_graded_quadratic n={q.n}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


@dataclass(frozen=True, eq=False)
class GradedQuadraticPair:
    """(n+1)-dimensional quadratic pair (f: C → D, (δψ, ψ)) in F_ℕ."""
    boundary: GradedQuadraticComplex
    target: GradedChainComplex
    f: Dict[int, BandedMatrix]
    delta_psi: GradedFamily = field(default_factory=dict)

    def __post_init__(self):
        C = self.boundary.complex
        for r, m in self.f.items():
            if m.source != C.obj(r) or m.target != self.target.obj(r):
                raise DimensionMismatchError(f"f_{r} maps {m.source.describe()} → {m.target.describe()}")
        _check_family(self.target, self.n + 1, self.delta_psi, "delta_psi")

    @property
    def n(self) -> int:
        return self.boundary.n

    @property
    def source(self) -> GradedChainComplex:
        return self.boundary.complex

    @property
    def ring(self) -> RingSpec:
        return self.target.ring

    def map_at(self, r: int) -> BandedMatrix:
        if r in self.f:
            return self.f[r]
        return BandedMatrix.zero(self.ring, self.target.obj(r), self.source.obj(r))

    def chain_map_defect(self, r: int) -> BandedMatrix:
        """d_D f_r − f_{r−1} d_C on C_r."""
        return self.target.diff(r) @ self.map_at(r) - self.map_at(r - 1) @ self.source.diff(r)

    def top_s(self) -> int:
        return max(graded_top_s(self.delta_psi), self.boundary.top_s)

    def residual(self, s: int, p: int) -> BandedMatrix:
        """Q_{n+1}(δψ)_s[p] + (−1)^s f ψ_s[p] f^*."""
        n = self.n
        out = graded_residual(self.target, n + 1, self.delta_psi, s, p)
        push = self.map_at(n - s - p) @ self.boundary.block(s, p) @ self.map_at(p).dual()
        return out + push.scale(sign(s) * SignManifest.sign("pair.relation"))


def verify_graded_pair(pair: GradedQuadraticPair, at_infinity: bool = False) -> Dict[str, Any]:
    failures = [{"kind": "boundary", **f} for f in verify_graded_quadratic(pair.boundary, at_infinity)["failures"]]
    failures += [{"kind": "target", **f} for f in verify_graded_complex(pair.target, at_infinity)["failures"]]
    for r in range(pair.source.lo, pair.source.hi + 2):
        if _failed(pair.chain_map_defect(r), at_infinity):
            failures.append({"kind": "chain_map", "degree": r})
            logger.warning(f"pair map is not a chain map at degree {r}")
    for s in range(0, pair.top_s() + 2):
        for p in pair.target.degrees():
            if _failed(pair.residual(s, p), at_infinity):
                failures.append({"kind": "pair", "s": s, "p": p, "r": pair.n - p - s})
                logger.warning(f"graded pair relation fails at s={s}, source degree {p}")
    logger.debug(f"verify_graded_pair n+1={pair.n + 1}: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


def addnull_witness(ring: RingSpec, r: int, n: int, rank: int = 1) -> GradedQuadraticComplex:
    """n-dimensional quadratic complex with C_r = underline R^rank, all other C_k = 0 and ψ = 0."""
    C = GradedChainComplex(ring, r, r, {r: GradedObject.constant(rank)})
    return GradedQuadraticComplex(C, n, {})


def graded_complex_from_maps(ring: RingSpec, objects: Mapping[int, GradedObject],
                             diffs: Optional[Mapping[int, BandedMatrix]] = None) -> GradedChainComplex:
    if not objects:
        return GradedChainComplex(ring, 0, -1, {}, {})
    return GradedChainComplex(ring, min(objects), max(objects), dict(objects), dict(diffs or {}))
