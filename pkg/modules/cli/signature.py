# modules/cli/signature.py

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from sympy import Matrix, QQ, Rational, ilcm
from sympy.polys.matrices import DomainMatrix

from core.exceptions import DimensionMismatchError, SimplicialError
from core.logger import get_surgery_logger
from modules.simplicial_geometry import OrderedComplex, Simplex, incidence_number

logger = get_surgery_logger("surgerykit.cli", "CLI")


@dataclass(frozen=True)
class SignatureReport:
    """Inertia of a symmetric pairing; `middle_betti` is the rank the pairing should have."""
    signature: int
    positive: int
    negative: int
    middle_betti: int

    @property
    def rank(self) -> int:
        return self.positive + self.negative

    @property
    def degenerate(self) -> bool:
        return self.rank < self.middle_betti

    def negated(self) -> "SignatureReport":
        return SignatureReport(-self.signature, self.negative, self.positive, self.middle_betti)

    def to_dict(self) -> Dict[str, Any]:
        return {"signature": self.signature, "positive": self.positive, "negative": self.negative,
                "middle_betti": self.middle_betti, "degenerate": self.degenerate}


# exact linear algebra over the rationals

def _rational(rows: Sequence[Sequence[int]], cols: int) -> DomainMatrix:
    return DomainMatrix.from_Matrix(Matrix(len(rows), cols, [x for row in rows for x in row])).convert_to(QQ)


def rational_rank(rows: Sequence[Sequence[int]], cols: int) -> int:
    if not rows or not cols:
        return 0
    return _rational(rows, cols).rank()


def integral_nullspace(rows: Sequence[Sequence[int]], cols: int) -> List[List[int]]:
    """A ℚ-basis of {x : rows·x = 0}, each vector scaled to integer entries."""
    if not cols:
        return []
    if not rows:
        return [[int(i == j) for j in range(cols)] for i in range(cols)]
    basis = _rational(rows, cols).nullspace().to_Matrix().tolist()
    out = []
    for vector in basis:
        scale = 1
        for x in vector:
            scale = ilcm(scale, Rational(x).q)
        out.append([int(Rational(x) * scale) for x in vector])
    return out


def congruence_inertia(matrix: Sequence[Sequence[Any]]) -> Tuple[int, int]:
    """
    Numbers of positive and negative squares of a symmetric matrix, by
    symmetric Gaussian elimination over ℚ.
    """
    A = [[Rational(x) for x in row] for row in matrix]
    live = list(range(len(A)))
    positive = negative = 0
    while live:
        pivot = next((i for i in live if A[i][i] != 0), None)
        if pivot is None:
            pair = next(((i, j) for i in live for j in live if i != j and A[i][j] != 0), None)
            if pair is None:
                break
            # e_i -> e_i + e_j turns a hyperbolic pair into a nonzero diagonal 2 A[i][j]
            i, j = pair
            for t in live:
                A[i][t] += A[j][t]
            for t in live:
                A[t][i] += A[t][j]
            continue
        d = A[pivot][pivot]
        if d > 0:
            positive += 1
        else:
            negative += 1
        live.remove(pivot)
        for i in live:
            if A[i][pivot] != 0:
                f = A[i][pivot] / d
                for t in live:
                    A[i][t] -= f * A[pivot][t]
    return positive, negative


def form_signature(matrix: Sequence[Sequence[int]]) -> SignatureReport:
    """Signature of a symmetric integer matrix, computed exactly over ℚ."""
    size = len(matrix)
    if any(len(row) != size for row in matrix):
        raise DimensionMismatchError("a bilinear form needs a square matrix")
    if any(matrix[i][j] != matrix[j][i] for i in range(size) for j in range(i)):
        raise DimensionMismatchError("the signature is defined for symmetric forms only")
    positive, negative = congruence_inertia(matrix)
    return SignatureReport(positive - negative, positive, negative, size)


# closed oriented pseudomanifolds

def _top_adjacency(M: OrderedComplex) -> nx.Graph:
    """Top simplices, joined when they share a codimension-one face; `flip` relates their orientations."""
    n = M.dimension
    g = nx.Graph()
    top = M.of_dim(n)
    g.add_nodes_from(top)
    cofaces: Dict[Simplex, List[Simplex]] = {}
    for t in top:
        for face in M.faces(t):
            cofaces.setdefault(face, []).append(t)
    for face, around in cofaces.items():
        if len(around) != 2:
            raise SimplicialError(f"{face} lies in {len(around)} top simplices; "
                                  f"the complex is not a closed pseudomanifold")
        t, u = around
        g.add_edge(t, u, flip=-(-1) ** (incidence_number(face, t) + incidence_number(face, u)))
    return g


def fundamental_class(M: OrderedComplex, orientation: Optional[Mapping[Simplex, int]] = None) -> Dict[Simplex, int]:
    """
    Coefficients ±1 of a fundamental cycle on the top simplices. Derived
    orientations give the smallest top simplex of every component the sign +1.
    """
    n = M.dimension
    if n < 0:
        raise SimplicialError("the empty complex has no fundamental class")
    top = M.of_dim(n)
    if orientation is not None:
        eps = {tuple(t): int(v) for t, v in orientation.items()}
        if set(eps) != set(top) or any(v not in (1, -1) for v in eps.values()):
            raise SimplicialError("orientation data must give a sign ±1 to every top simplex")
    elif n == 0:
        eps = {t: 1 for t in top}
    else:
        g = _top_adjacency(M)
        eps = {}
        for component in sorted(nx.connected_components(g), key=min):
            root = min(component)
            eps[root] = 1
            for parent, child in nx.bfs_edges(g, root):
                eps[child] = eps[parent] * g.edges[parent, child]["flip"]
        for t, u, flip in g.edges(data="flip"):
            if eps[u] != eps[t] * flip:
                raise SimplicialError(f"no coherent orientation: {t} and {u} disagree")
    chain = np.array([eps[t] for t in top], dtype=object)
    if n > 0 and any((M.boundary_matrix(n).entries.dot(chain)) != 0):
        raise SimplicialError("the orientation data is not a cycle")
    return eps


def cup_form(M: OrderedComplex, cocycles: Sequence[Sequence[int]], eps: Mapping[Simplex, int]) -> List[List[int]]:
    """⟨a ∪ b, [M]⟩ on degree-m cocycles: Σ_t ε_t a(t[0..m]) b(t[m..2m]) over top simplices t."""
    m = M.dimension // 2
    if not cocycles:
        return []
    pos = {s: i for i, s in enumerate(M.of_dim(m))}
    top = M.of_dim(M.dimension)
    Z = np.array(cocycles, dtype=object)
    front = Z[:, [pos[t[:m + 1]] for t in top]] * np.array([eps[t] for t in top], dtype=object)
    back = Z[:, [pos[t[m:]] for t in top]]
    return front.dot(back.T).tolist()


def intersection_signature(M: OrderedComplex, orientation: Optional[Mapping[Simplex, int]] = None,
                           reverse: bool = False) -> SignatureReport:
    """
    Signature of the cup-product pairing on H^{2k}(M; ℚ) of a closed oriented
    triangulated 4k-manifold. Links are not checked; the pairing is evaluated
    on all of Z^{2k}, whose radical contains the coboundaries.
    """
    n = M.dimension
    if n < 0 or n % 4:
        raise SimplicialError(f"an intersection form needs dimension 4k, got {n}")
    eps = fundamental_class(M, orientation)
    m = n // 2
    coboundary = M.boundary_matrix(m + 1).transpose().to_int_list() if M.of_dim(m + 1) else []
    cocycles = integral_nullspace(coboundary, len(M.of_dim(m)))
    form = cup_form(M, cocycles, eps)
    if any(form[i][j] != form[j][i] for i in range(len(form)) for j in range(i)):
        raise SimplicialError("the cup pairing is not symmetric; the orientation is not a fundamental cycle")
    positive, negative = congruence_inertia(form)
    below = M.boundary_matrix(m).to_int_list() if m > 0 else []
    betti = len(cocycles) - rational_rank(below, len(M.of_dim(m)))
    report = SignatureReport(positive - negative, positive, negative, betti)
    if report.degenerate:
        logger.warning(f"middle pairing of rank {report.rank} on H^{m} of rank {betti}: degenerate")
    logger.debug(f"intersection signature of a {n}-complex with {len(M)} simplices: {report.signature}")
    return report.negated() if reverse else report
