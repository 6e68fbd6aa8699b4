# modules/structured_forms/w_tensor.py

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from core.exceptions import DimensionMismatchError, InvalidStructureError, UnsupportedRingError
from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import ChainComplex, ChainMap, sign
from modules.exact_core import ExactMatrix, RingSpec
from .pairs import QuadraticPair
from .quadratic import QuadraticComplex, require_valid

logger = get_surgery_logger("surgerykit.w_tensor", "FORMS")

# (p, q) -> matrix of shape rank C_p x rank D_q
TensorElement = Dict[Tuple[int, int], ExactMatrix]


@dataclass(frozen=True, eq=False)
class TensorComplex:
    """C ⊗ D with basis x_i ⊗ y_j ordered by p, then i, then j."""
    left: ChainComplex
    right: ChainComplex
    complex: ChainComplex
    offsets: Dict[int, Dict[int, int]]


def tensor_complex(C: ChainComplex, D: ChainComplex) -> TensorComplex:
    """d(x ⊗ y) = dx ⊗ y + (-1)^{|x|} x ⊗ dy."""
    if C.ring != D.ring:
        raise DimensionMismatchError("tensor product over different rings")
    if not C.ring.is_commutative:
        raise UnsupportedRingError("tensor products need a commutative ring")
    ring = C.ring
    lo, hi = C.lo + D.lo, C.hi + D.hi
    offsets: Dict[int, Dict[int, int]] = {}
    ranks = {}
    for k in range(lo, hi + 1):
        offsets[k] = {}
        o = 0
        for p in C.degrees():
            offsets[k][p] = o
            o += C.rank(p) * D.rank(k - p)
        ranks[k] = o
    diffs = {}
    for k in range(lo + 1, hi + 1):
        rows = [[ring.zero()] * ranks[k] for _ in range(ranks[k - 1])]
        for p in C.degrees():
            a = k - p
            nc, nd = C.rank(p), D.rank(a)
            dc, dd = C.diff(p), D.diff(a)
            for i in range(nc):
                for j in range(nd):
                    col = offsets[k][p] + i * nd + j
                    if p - 1 >= C.lo:
                        for i2 in range(C.rank(p - 1)):
                            if dc[i2, i] != 0:
                                rows[offsets[k - 1][p - 1] + i2 * D.rank(a) + j][col] += dc[i2, i]
                    for j2 in range(D.rank(a - 1)):
                        if dd[j2, j] != 0:
                            rows[offsets[k - 1][p] + i * D.rank(a - 1) + j2][col] += sign(p) * dd[j2, j]
        diffs[k] = ExactMatrix.from_rows(ring, rows, cols=ranks[k])
    return TensorComplex(C, D, ChainComplex(ring, lo, hi, ranks, diffs), offsets)


def kron(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    ring = A.ring
    if A.rows == 0 or A.cols == 0 or B.rows == 0 or B.cols == 0:
        return ExactMatrix.zeros(ring, A.rows * B.rows, A.cols * B.cols)
    return ExactMatrix.block(ring, [[B.scale(A[i, j]) for j in range(A.cols)] for i in range(A.rows)])


# tensor calculus on C ⊗ C

def _add(X: TensorElement, Y: TensorElement, a: int = 1, b: int = 1) -> TensorElement:
    out = {}
    for k in set(X) | set(Y):
        if k in X and k in Y:
            out[k] = X[k].scale(a) + Y[k].scale(b)
        elif k in X:
            out[k] = X[k].scale(a)
        else:
            out[k] = Y[k].scale(b)
    return out


def tensor_is_zero(X: TensorElement) -> bool:
    return all(m.is_zero() for m in X.values())


def tensor_differential(X: TensorElement, C: ChainComplex, D: ChainComplex) -> TensorElement:
    out: TensorElement = {}

    def put(key, m):
        out[key] = out[key] + m if key in out else m

    for (p, q), M in X.items():
        if C.rank(p - 1):
            put((p - 1, q), C.diff(p) @ M)
        if D.rank(q - 1):
            put((p, q - 1), (M @ D.diff(q).dual()).scale(sign(p)))
    return out


def transpose_t(X: TensorElement) -> TensorElement:
    """x ⊗ y -> (-1)^{|x||y|} y ⊗ x."""
    return {(q, p): M.dual().scale(sign(p * q)) for (p, q), M in X.items()}


def quadratic_boundary(psi: List[TensorElement], C: ChainComplex, n: int) -> List[TensorElement]:
    """b_s = d psi_s - (-1)^n (psi_{s+1} + (-1)^{s+1} T psi_{s+1})."""
    out = []
    for s in range(len(psi)):
        t = tensor_differential(psi[s], C, C)
        nxt = psi[s + 1] if s + 1 < len(psi) else {}
        out.append(_add(t, _add(nxt, transpose_t(nxt), 1, sign(s + 1)), 1, -sign(n)))
    return out


def symmetric_boundary(phi: List[TensorElement], C: ChainComplex, m: int) -> List[TensorElement]:
    """b_s = d phi_s - (-1)^m (phi_{s-1} + (-1)^s T phi_{s-1})."""
    out = []
    for s in range(len(phi) + 1):
        t = tensor_differential(phi[s], C, C) if s < len(phi) else {}
        if s >= 1:
            prev = phi[s - 1]
            t = _add(t, _add(prev, transpose_t(prev), 1, sign(s)), 1, -sign(m))
        out.append(t)
    return out


# conversions between structure families and tensor blocks

def quadratic_to_tensor(q: QuadraticComplex) -> List[TensorElement]:
    """X_s[(r, p)] = (-1)^{s(s-1)/2 + r + ns} psi_s[p], r = n-s-p."""
    C, n = q.complex, q.n
    out = []
    for s in range(q.top_s + 1):
        X = {}
        for p in C.degrees():
            r = n - s - p
            M = q.block(s, p)
            if M.rows and M.cols:
                X[(r, p)] = M.scale(sign(s * (s - 1) // 2 + r + n * s))
        out.append(X)
    return out


def tensor_to_quadratic(X: List[TensorElement], C: ChainComplex, n: int) -> QuadraticComplex:
    psi = {}
    for s, blocks in enumerate(X):
        for (r, p), M in blocks.items():
            if r + p != n - s:
                raise DimensionMismatchError(f"tensor block ({r},{p}) has the wrong degree for s={s}")
            if M.rows and M.cols and not M.is_zero():
                psi[(s, p)] = M.scale(sign(s * (s - 1) // 2 + r + n * s))
    return QuadraticComplex(C, n, psi)


@dataclass(frozen=True, eq=False)
class SymmetricStructure:
    """m-dimensional symmetric family phi_s (tensor blocks of degree m + s)."""
    complex: ChainComplex
    m: int
    phi: List[TensorElement] = field(default_factory=list)

    def component(self, s: int, r: int) -> ExactMatrix:
        """phi_s^r: C^{m+s-r} -> C_r, read as (-1)^{s(s+1)/2} times the tensor block."""
        C = self.complex
        blocks = self.phi[s] if s < len(self.phi) else {}
        key = (r, self.m + s - r)
        if key in blocks:
            return blocks[key].scale(sign(s * (s + 1) // 2))
        return ExactMatrix.zeros(C.ring, C.rank(r), C.rank(self.m + s - r))

    def boundary(self) -> List[TensorElement]:
        return symmetric_boundary(self.phi, self.complex, self.m)

    def is_cycle(self) -> bool:
        return all(tensor_is_zero(b) for b in self.boundary())


def verify_symmetric(phi: SymmetricStructure) -> Dict[str, Any]:
    failures = [{"s": s, "blocks": sorted(k for k, m in b.items() if not m.is_zero())}
                for s, b in enumerate(phi.boundary()) if not tensor_is_zero(b)]
    return {"valid": not failures, "failures": failures}


def unit_structure(ring: RingSpec = None) -> SymmetricStructure:
    """nu: the 0-dimensional symmetric structure (1) on Z in degree 0."""
    ring = ring or RingSpec.integers()
    point = ChainComplex.concentrated(ring, 0, 1)
    return SymmetricStructure(point, 0, [{(0, 0): ExactMatrix.identity(ring, 1)}])


def w_product_blocks(X: List[TensorElement], phi: SymmetricStructure, T: TensorComplex,
                     n: int) -> List[TensorElement]:
    """Tensor blocks of X ⊗ phi for an n-dimensional family X written in C ⊗ C."""
    m = phi.m
    eps = sign(n * m) * SignManifest.sign("tensor.normalization")
    out = []
    for s in range(len(X)):
        acc: TensorElement = {}
        for r in range(len(phi.phi)):
            if s + r >= len(X):
                break
            x = X[s + r]
            if r % 2:
                x = transpose_t(x)
            acc = _add(acc, _sw_tensor(x, phi.phi[r], T, eps * sign(r + m * (s + r))))
        out.append(acc)
    return out


def _w_product(q: QuadraticComplex, phi: SymmetricStructure) -> Tuple[TensorComplex, List[TensorElement]]:
    T = tensor_complex(q.complex, phi.complex)
    return T, w_product_blocks(quadratic_to_tensor(q), phi, T, q.n)


def _sw_tensor(X: TensorElement, Y: TensorElement, T: TensorComplex, coef: int) -> TensorElement:
    """(x1 ⊗ x2) · (y1 ⊗ y2) -> (-1)^{|x2||y1|} (x1 ⊗ y1) ⊗ (x2 ⊗ y2)."""
    C, D, E = T.left, T.right, T.complex
    ring = E.ring
    out: TensorElement = {}
    for (p, q), A in X.items():
        for (a, b), B in Y.items():
            k1, k2 = p + a, q + b
            if k1 not in T.offsets or k2 not in T.offsets:
                continue
            M = kron(A, B).scale(coef * sign(q * a))
            if M.is_zero():
                continue
            rows = [[ring.zero()] * E.rank(k2) for _ in range(E.rank(k1))]
            r0, c0 = T.offsets[k1][p], T.offsets[k2][q]
            for (i, j), v in M.nonzero_entries():
                rows[r0 + i][c0 + j] = v
            block = ExactMatrix.from_rows(ring, rows, cols=E.rank(k2))
            out[(k1, k2)] = out[(k1, k2)] + block if (k1, k2) in out else block
    return out


def w_tensor(q: QuadraticComplex, phi: SymmetricStructure, check: bool = True) -> QuadraticComplex:
    """(n+m)-dimensional quadratic structure psi ⊗ phi on C ⊗ D."""
    if check:
        require_valid(q)
        report = verify_symmetric(phi)
        if not report["valid"]:
            raise InvalidStructureError("symmetric input is not a cycle", report["failures"])
    T, blocks = _w_product(q, phi)
    return tensor_to_quadratic(blocks, T.complex, q.n + phi.m)


@dataclass(frozen=True, eq=False)
class IntervalWitness:
    """
    The interval I (sigma_0, sigma_1 in degree 0; sigma_01 in degree 1), its end
    inclusions and the symmetric chain omega with d omega = i1 nu - i0 nu.
    """
    interval: ChainComplex
    omega: SymmetricStructure
    nu: SymmetricStructure
    i0: ChainMap
    i1: ChainMap

    def component(self, s: int, r: int) -> ExactMatrix:
        return self.omega.component(s, r)

    def boundary_defect(self) -> List[TensorElement]:
        """d omega - (i1 nu - i0 nu); zero when the witness is correct."""
        ring = self.interval.ring
        pushed = {(0, 0): ExactMatrix.from_rows(ring, [[-1, 0], [0, 1]])}
        b = self.omega.boundary()
        out = [_add(b[0], pushed, 1, -1)] + b[1:]
        return out

    def verify(self) -> Dict[str, Any]:
        defect = self.boundary_defect()
        failures = [s for s, x in enumerate(defect) if not tensor_is_zero(x)]
        return {"valid": not failures, "failures": failures}


def omega_i() -> IntervalWitness:
    ring = RingSpec.integers()
    interval = ChainComplex(ring, 0, 1, {0: 2, 1: 1}, {1: ExactMatrix.from_rows(ring, [[-1], [1]])})
    omega = SymmetricStructure(interval, 1, [
        {(0, 1): ExactMatrix.from_rows(ring, [[1], [0]]), (1, 0): ExactMatrix.from_rows(ring, [[0, 1]])},
        {(1, 1): ExactMatrix.from_rows(ring, [[1]])},
    ])
    nu = unit_structure(ring)
    i0 = ChainMap(nu.complex, interval, 0, {0: ExactMatrix.from_rows(ring, [[1], [0]])})
    i1 = ChainMap(nu.complex, interval, 0, {0: ExactMatrix.from_rows(ring, [[0], [1]])})
    witness = IntervalWitness(interval, omega, nu, i0, i1)
    logger.debug(f"omega_I boundary check: {witness.verify()['valid']}")
    return witness


def interval_pair(q: QuadraticComplex) -> QuadraticPair:
    """
    (C ⊗ dI -> C ⊗ I, (psi ⊗ omega, -psi + psi)): the cylinder on psi as an
    (n+1)-dimensional pair. The boundary basis interleaves the two ends.
    """
    require_valid(q)
    witness = omega_i()
    C, ring = q.complex, q.ring
    T, blocks = _w_product(q, witness.omega)
    E = T.complex
    delta = tensor_to_quadratic(blocks, E, q.n + 1)
    ends = ChainComplex(ring, C.lo, C.hi, {r: 2 * C.rank(r) for r in C.degrees()},
                        {r: kron(C.diff(r), ExactMatrix.identity(ring, 2)) for r in range(C.lo + 1, C.hi + 1)})
    maps = {}
    for k in C.degrees():
        rows = [[0] * ends.rank(k) for _ in range(E.rank(k))]
        for idx in range(ends.rank(k)):
            rows[T.offsets[k][k] + idx][idx] = 1
        maps[k] = ExactMatrix.from_rows(ring, rows, cols=ends.rank(k))
    f = ChainMap(ends, E, 0, maps)
    end_signs = ExactMatrix.from_rows(ring, [[-1, 0], [0, 1]])
    psi = {key: kron(M, end_signs) for key, M in q.psi.items()}
    return QuadraticPair(f, q.n, dict(delta.psi), psi)
