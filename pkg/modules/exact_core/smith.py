# modules/exact_core/smith.py

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from core.exceptions import DimensionMismatchError, UnsupportedRingError
from core.logger import get_surgery_logger
from .matrices import ExactMatrix
from .rings import RingSpec

logger = get_surgery_logger("surgerykit.exact_core", "EXACT")


@dataclass(frozen=True)
class SmithDecomposition:
    """U·A·V = D with U, V unimodular and d₁ | d₂ | … on the diagonal."""
    U: ExactMatrix
    D: ExactMatrix
    V: ExactMatrix

    @property
    def diagonal(self) -> List[int]:
        return [int(self.D[i, i]) for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def torsion(self) -> List[int]:
        """Invariant factors larger than one (the torsion of the cokernel)."""
        return [d for d in self.diagonal if d > 1]


@dataclass
class SolveResult:
    """Outcome of an integer linear solve; `witness` explains a failure."""
    solution: Optional[ExactMatrix]
    witness: dict = field(default_factory=dict)

    @property
    def solvable(self) -> bool:
        return self.solution is not None


def _require_integers(m: ExactMatrix, op: str):
    if not m.ring.is_integers:
        raise UnsupportedRingError(f"{op} needs an integer matrix, got {m.ring.describe()}")


def smith_normal_form(m: ExactMatrix) -> SmithDecomposition:
    _require_integers(m, "smith_normal_form")
    ring = RingSpec.integers()
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return SmithDecomposition(ExactMatrix.identity(ring, rows), ExactMatrix.zeros(ring, rows, cols),
                                  ExactMatrix.identity(ring, cols))
    smf, s, t = smith_normal_decomp(Matrix(m.to_int_list()), domain=ZZ)
    u_rows = [[int(x) for x in s.row(i)] for i in range(rows)]
    d_rows = [[int(x) for x in smf.row(i)] for i in range(rows)]
    # invariant factors are only defined up to units
    for i in range(min(rows, cols)):
        if d_rows[i][i] < 0:
            d_rows[i][i] = -d_rows[i][i]
            u_rows[i] = [-x for x in u_rows[i]]
    U = ExactMatrix.integer(u_rows)
    D = ExactMatrix.integer(d_rows)
    V = ExactMatrix.integer([[int(x) for x in t.row(i)] for i in range(cols)])
    return SmithDecomposition(U, D, V)


def integer_rank(m: ExactMatrix) -> int:
    return smith_normal_form(m).rank


def kernel_basis(m: ExactMatrix) -> ExactMatrix:
    """Columns form a ℤ-basis of the (saturated) kernel of m."""
    _require_integers(m, "kernel_basis")
    cols = m.cols
    if cols == 0:
        return ExactMatrix.zeros(m.ring, 0, 0)
    snf = smith_normal_form(m)
    keep = list(range(snf.rank, cols))
    return snf.V.submatrix(range(cols), keep)


def solve_linear(A: ExactMatrix, b: ExactMatrix) -> SolveResult:
    """Find an integer x with A·x = b, or report the offending SNF coordinate."""
    _require_integers(A, "solve_linear")
    if b.rows != A.rows:
        raise DimensionMismatchError(f"right-hand side has {b.rows} rows, matrix has {A.rows}")
    ring = A.ring
    if A.rows == 0:
        return SolveResult(ExactMatrix.zeros(ring, A.cols, b.cols))
    snf = smith_normal_form(A)
    c = snf.U @ b
    diag = snf.diagonal
    y_rows = []
    for i in range(A.cols):
        row = []
        for j in range(b.cols):
            if i < len(diag) and diag[i] != 0:
                q, rem = divmod(int(c[i, j]), diag[i])
                if rem:
                    logger.debug(f"solve_linear: {c[i, j]} not divisible by {diag[i]} at ({i},{j})")
                    return SolveResult(None, {"row": i, "column": j, "residue": int(c[i, j]),
                                              "invariant_factor": diag[i]})
                row.append(q)
            else:
                row.append(0)
        y_rows.append(row)
    for i in range(snf.rank, A.rows):
        for j in range(b.cols):
            if c[i, j] != 0:
                return SolveResult(None, {"row": i, "column": j, "residue": int(c[i, j]),
                                          "invariant_factor": 0})
    y = ExactMatrix.from_rows(ring, y_rows, cols=b.cols)
    return SolveResult(snf.V @ y)


def is_unimodular(m: ExactMatrix) -> bool:
    if m.rows != m.cols:
        return False
    if m.rows == 0:
        return True
    return smith_normal_form(m).diagonal == [1] * m.rows


def describe_cokernel(m: ExactMatrix) -> Tuple[int, List[int]]:
    """(free rank, torsion) of ℤ^rows / image(m)."""
    snf = smith_normal_form(m)
    return m.rows - snf.rank, snf.torsion
