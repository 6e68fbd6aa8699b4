# modules/suspension_lab/reindex.py

from typing import Any, Dict, List, Sequence

from core.exceptions import DimensionMismatchError, RingMismatchError, SuspensionError
from core.logger import get_surgery_logger
from modules.exact_core import ExactMatrix, RingSpec
from .banded import BandedMatrix, SuspensionElement, common_frame
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")

Grid = List[List[BandedMatrix]]
ClassGrid = List[List[SuspensionElement]]

SCALAR = GradedObject.constant(1)


def _shape(grid: Sequence[Sequence[Any]]):
    if not grid or not grid[0]:
        raise DimensionMismatchError("empty matrix of infinite matrices")
    width = len(grid[0])
    if any(len(row) != width for row in grid):
        raise DimensionMismatchError("ragged matrix of infinite matrices")
    return len(grid), width


def _check_scalar(m: BandedMatrix, ring: RingSpec):
    if m.ring != ring:
        raise RingMismatchError(f"{m.ring.describe()} vs {ring.describe()}")
    if m.target != SCALAR or m.source != SCALAR:
        raise DimensionMismatchError("entries must be endomorphisms of underline R")


def reindex_theta(grid: Sequence[Sequence[BandedMatrix]]) -> BandedMatrix:
    """
    θ: M_{r,s}(M_∞(R)) → M_∞(M_{r,s}(R)), θ(X)[i, j] = (X_kl[i, j])_{k,l}.
    The result is a morphism underline R^s → underline R^r.
    """
    r, s = _shape(grid)
    ring = grid[0][0].ring
    flat = [m for row in grid for m in row]
    for m in flat:
        _check_scalar(m, ring)
    rh, ch, period = common_frame(flat)
    aligned = [m.reanchored(rh, ch, period) for m in flat]
    cells = [aligned[k * s:(k + 1) * s] for k in range(r)]

    def gather(get) -> ExactMatrix:
        return ExactMatrix.from_rows(ring, [[get(cells[k][l]) for l in range(s)] for k in range(r)])

    keys = set()
    for m in aligned:
        keys |= set(m.exceptional)
    exc = {(i, j): gather(lambda m: m.entry(i, j)[0, 0]) for (i, j) in keys}
    tail = []
    for rho in range(period[0]):
        cs = set()
        for m in aligned:
            cs |= set(m.tail[rho])
        zero = ring.zero()
        tail.append({c: gather(lambda m: m.tail[rho][c][0, 0] if c in m.tail[rho] else zero) for c in cs})
    out = BandedMatrix(ring, GradedObject.constant(r), GradedObject.constant(s), rh, ch, period, exc, tuple(tail))
    logger.debug(f"theta_{r},{s}: period {period}, {len(exc)} exceptional blocks")
    return out


def reindex_theta_inverse(m: BandedMatrix) -> Grid:
    """Split an infinite matrix of r×s blocks back into an r×s matrix of infinite matrices."""
    if not m.target.is_constant or not m.source.is_constant:
        raise SuspensionError("θ⁻¹ needs constant ranks on both sides")
    r, s = m.target.tail_rank, m.source.tail_rank
    ring = m.ring

    def scalar(b: ExactMatrix, k: int, l: int) -> ExactMatrix:
        return ExactMatrix.from_rows(ring, [[b[k, l]]])

    grid = []
    for k in range(r):
        row = []
        for l in range(s):
            exc = {key: scalar(b, k, l) for key, b in m.exceptional.items()}
            tail = tuple({c: scalar(b, k, l) for c, b in tr.items()} for tr in m.tail)
            row.append(BandedMatrix(ring, SCALAR, SCALAR, m.row_head, m.col_head, m.period, exc, tail))
        grid.append(row)
    return grid


def grid_product(x: Sequence[Sequence[Any]], y: Sequence[Sequence[Any]]) -> List[List[Any]]:
    """Matrix product of matrices whose entries are banded matrices or suspension classes."""
    r, s = _shape(x)
    s2, t = _shape(y)
    if s != s2:
        raise DimensionMismatchError(f"cannot multiply {r}×{s} by {s2}×{t}")
    out = []
    for i in range(r):
        row = []
        for j in range(t):
            acc = x[i][0] @ y[0][j]
            for k in range(1, s):
                acc = acc + x[i][k] @ y[k][j]
            row.append(acc)
        out.append(row)
    return out


def grid_dual(x: Sequence[Sequence[Any]]) -> List[List[Any]]:
    """Involution on matrices: transpose and dualize every entry."""
    r, s = _shape(x)
    return [[x[k][l].dual() for k in range(r)] for l in range(s)]


def grid_identity(ring: RingSpec, r: int) -> Grid:
    one = GradedObject.constant(1)
    return [[BandedMatrix.identity(ring, one) if k == l else BandedMatrix.zero(ring, one, one) for l in range(r)]
            for k in range(r)]


def theta_classes(grid: Sequence[Sequence[SuspensionElement]]) -> SuspensionElement:
    """θ_{r,s}: M_{r,s}(ΣR) → ΣM_{r,s}(R) on class representatives."""
    return SuspensionElement(reindex_theta([[x.representative for x in row] for row in grid]))


def check_reindex_laws(x: Sequence[Sequence[BandedMatrix]], y: Sequence[Sequence[BandedMatrix]]) -> Dict[str, Any]:
    """Multiplicativity, unit and involution of θ, exactly, for composable x (r×s) and y (s×t)."""
    failures = []
    ring = x[0][0].ring
    if reindex_theta(grid_product(x, y)) != reindex_theta(x) @ reindex_theta(y):
        failures.append({"law": "multiplicative"})
    r = len(x)
    if reindex_theta(grid_identity(ring, r)) != BandedMatrix.identity(ring, GradedObject.constant(r)):
        failures.append({"law": "unit"})
    if reindex_theta(grid_dual(x)) != reindex_theta(x).dual():
        failures.append({"law": "involution"})
    back = reindex_theta_inverse(reindex_theta(x))
    if any(back[k][l] != x[k][l] for k in range(len(x)) for l in range(len(x[0]))):
        failures.append({"law": "inverse"})
    for f in failures:
        logger.warning(f"reindexing law fails: {f['law']}")
    return {"valid": not failures, "failures": failures}


# the identification of Hom(underline R^r, underline R^s) in the category at infinity with ΣM_{s,r}(R)

def hom_as_suspension(f: BandedMatrix) -> SuspensionElement:
    """𝔽_{r,s}: F[j, i] = f(j, i) read as an element of ΣM_{s,r}(R)."""
    if not f.source.is_constant or not f.target.is_constant:
        raise SuspensionError(f"𝔽 needs constant ranks, got {f.source.describe()} → {f.target.describe()}")
    return SuspensionElement(f)


def suspension_as_hom(x: SuspensionElement) -> BandedMatrix:
    """𝔽⁻¹: the tail-only representative as a morphism underline R^r → underline R^s."""
    if not x.source.is_constant or not x.target.is_constant:
        raise SuspensionError("suspension classes live between constant objects")
    return x.representative


def check_identification_laws(f: BandedMatrix, g: BandedMatrix) -> Dict[str, Any]:
    """𝔽(g ∘ f) = 𝔽(g)𝔽(f), 𝔽(Id) = I, 𝔽(f*) = 𝔽(f)*, and 𝔽⁻¹𝔽 = id on classes."""
    failures = []
    if hom_as_suspension(g @ f) != hom_as_suspension(g) @ hom_as_suspension(f):
        failures.append({"law": "composition"})
    ident = BandedMatrix.identity(f.ring, f.source)
    if hom_as_suspension(ident) != SuspensionElement.identity(f.ring, f.source):
        failures.append({"law": "unit"})
    if hom_as_suspension(f.dual()) != hom_as_suspension(f).dual():
        failures.append({"law": "involution"})
    if not suspension_as_hom(hom_as_suspension(f)).equivalent(f):
        failures.append({"law": "round_trip"})
    return {"valid": not failures, "failures": failures}


# the functor Θ from free ΣR-modules to the category at infinity

def theta_object(s: int) -> GradedObject:
    """Θ((ΣR)^s) = underline R^s."""
    return GradedObject.constant(s)


def theta_functor(matrix: Sequence[Sequence[SuspensionElement]]) -> SuspensionElement:
    """
    Θ(f) = 𝔽⁻¹θ(M_f) for f: (ΣR)^r → (ΣR)^s given by its s×r matrix M_f of
    suspension classes; a morphism class underline R^r → underline R^s.
    """
    for row in matrix:
        for x in row:
            if x.source != SCALAR or x.target != SCALAR:
                raise SuspensionError("Θ takes matrices over ΣR")
    return hom_as_suspension(suspension_as_hom(theta_classes(matrix)))


def class_identity(ring: RingSpec, r: int) -> ClassGrid:
    return [[SuspensionElement.identity(ring, SCALAR) if k == l else SuspensionElement.zero(ring, SCALAR, SCALAR)
             for l in range(r)] for k in range(r)]


def class_zero(ring: RingSpec, s: int, r: int) -> ClassGrid:
    return [[SuspensionElement.zero(ring, SCALAR, SCALAR) for _ in range(r)] for _ in range(s)]


def check_theta_functor(f: Sequence[Sequence[SuspensionElement]],
                        g: Sequence[Sequence[SuspensionElement]],
                        f2: Sequence[Sequence[SuspensionElement]] = None) -> Dict[str, Any]:
    """Θ(g∘f) = Θ(g)∘Θ(f), Θ(id) = id, Θ(0) = 0, Θ(f + f2) = Θ(f) + Θ(f2), Θ(f*) = Θ(f)*."""
    failures = []
    ring = f[0][0].ring
    s, r = len(f), len(f[0])
    if theta_functor(grid_product(g, f)) != theta_functor(g) @ theta_functor(f):
        failures.append({"law": "composition"})
    if theta_functor(class_identity(ring, r)) != SuspensionElement.identity(ring, theta_object(r)):
        failures.append({"law": "identity"})
    if not theta_functor(class_zero(ring, s, r)).is_zero():
        failures.append({"law": "zero"})
    if f2 is not None:
        summed = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(f, f2)]
        if theta_functor(summed) != theta_functor(f) + theta_functor(f2):
            failures.append({"law": "additive"})
    if theta_functor(grid_dual(f)) != theta_functor(f).dual():
        failures.append({"law": "involution"})
    for fail in failures:
        logger.warning(f"Θ law fails: {fail['law']}")
    return {"valid": not failures, "failures": failures}
