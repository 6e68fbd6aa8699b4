# modules/k_based/cylinder.py

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Tuple

from core.exceptions import InvalidStructureError, SimplicialError
from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import sign
from modules.exact_core import ExactMatrix
from modules.simplicial_geometry import ProductDecomposition, Simplex, incidence_number, is_face, j_all, simplex_dim
from modules.structured_forms import omega_i, tensor_complex, w_product_blocks
from .complexes import KBasedComplex, Variance, keyed_chain_complex
from .product_pairs import delta_psi
from .quadratic import KQuadraticStructure, dual_form_boundary, relative_duality_check
from .sparse import Dual, Key, KeyedMatrix, undual

logger = get_surgery_logger("surgerykit.k_based", "KBASED")

Family = Dict[int, KeyedMatrix]

END0, END1, COLLAR = "0", "1", "I"


@dataclass(frozen=True, eq=False)
class CylinderCell:
    """
    One cell of the cylinder family. kind "Q" sits over an interior simplex
    of L⊗[0,1], "Z" over σ ∈ L at the collar end, and "Y" over σ × Δ¹.
    """
    kind: str
    simplex: Simplex
    dimension: int
    degrees: Dict[Key, int]
    d: KeyedMatrix
    psi: Family
    quotient: FrozenSet[Key] = field(default_factory=frozenset)

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.psi.values())


def _family_scale(psi: Family, k: int) -> Family:
    return {u: m.scale(k) for u, m in psi.items()}


def _tag(psi: KeyedMatrix, tag: str) -> KeyedMatrix:
    return psi.relabel(lambda a: (tag, a), lambda b: Dual((tag, undual(b))))


class CylinderAd:
    """
    Per-cell quadratic data of the cylinder on (D, θ) over L⊗[0,1] embedded in
    ∂Δ^{l+1}, l = 2·offset. Families are written on dual keys (a, x*) and
    cached per simplex.
    """

    def __init__(self, theta: KQuadraticStructure, decomp: ProductDecomposition, orientation: int = 1):
        D = theta.complex
        if D.variance is not Variance.COVARIANT:
            raise InvalidStructureError("cylinders are built on covariant structures")
        missing = [s for s in D.host if s not in decomp.product]
        if missing:
            raise SimplicialError(f"{missing[0]} is not in the product decomposition")
        if orientation not in (1, -1):
            raise InvalidStructureError("orientation must be ±1")
        self.theta = theta
        self.decomp = decomp
        self.orientation = orientation
        self.l = 2 * decomp.offset
        self.top = max(theta.top, 0)
        self._q: Dict[Simplex, Family] = {}
        self._z: Dict[Simplex, Family] = {}
        self._y: Dict[Simplex, Family] = {}
        self._witness = omega_i()

    # signs

    def r_sign(self, s: Simplex) -> int:
        sd = simplex_dim(s)
        return j_all(s, self.l) + sd * (sd - 1) // 2

    def n_sign(self, s: Simplex, t: Simplex) -> int:
        return j_all(s, self.l) - j_all(t, self.l) - incidence_number(s, t)

    # key sets

    def _keys(self, keep: Callable[[Simplex], bool]) -> List[Key]:
        return [g.key for g in self.theta.complex.generators if keep(g.simplex)]

    def _a_keys(self, sigma: Simplex) -> List[Key]:
        A = set(self.decomp.a_sigma(sigma))
        return self._keys(lambda s: s in A)

    def _restricted_d(self, keys) -> KeyedMatrix:
        chosen = set(keys)
        return self.theta.complex.d.restrict(lambda r: r in chosen, lambda c: c in chosen)

    # families

    def psi_q(self, sigma: Simplex) -> Family:
        """Interior cell: θ read off the generators T(σ|e), weighted by (−1)^{r_σ + |σ| deg a}."""
        sigma = tuple(sigma)
        if sigma not in self._q:
            D, TD = self.theta.complex, self.theta.dual
            sd, rs = simplex_dim(sigma), self.r_sign(sigma)
            out = {}
            for u in range(0, self.top + 2):
                m = KeyedMatrix()
                for a, b, v in self.theta.component(u).items():
                    t = TD.generator(b)
                    if t.simplex == sigma and is_face(sigma, D.simplex(a)):
                        m.add(a, Dual(t.source.key), sign(rs + sd * D.degree(a)) * v)
                out[u] = m
            self._q[sigma] = _family_scale(out, self.orientation)
        return self._q[sigma]

    def psi_z(self, sigma: Simplex) -> Family:
        sigma = tuple(sigma)
        if sigma not in self._z:
            rs = self.r_sign(sigma)
            self._z[sigma] = {u: delta_psi(self.theta, self.decomp, sigma, u).scale(sign(rs) * self.orientation)
                              for u in range(0, self.top + 2)}
        return self._z[sigma]

    def psi_y(self, sigma: Simplex) -> Family:
        """(−1)^{r_σ+1} (δψ[σ] ⊗ ω_I) on the collar D(A_σ) ⊗ I."""
        sigma = tuple(sigma)
        if sigma in self._y:
            return self._y[sigma]
        D = self.theta.complex
        keys = self._a_keys(sigma)
        M = self.theta.n - simplex_dim(sigma) - 1
        out: Family = {u: KeyedMatrix() for u in range(0, self.top + 2)}
        if keys:
            F, by_degree = keyed_chain_complex({k: D.degree(k) for k in keys}, self._restricted_d(keys))
            X = []
            for s in range(0, self.top + 3):
                dp = delta_psi(self.theta, self.decomp, sigma, s)
                blocks = {}
                for r, rows in by_degree.items():
                    cols = by_degree.get(M - s - r)
                    if not cols:
                        continue
                    data = [[sign(s * (s - 1) // 2) * dp.get(a, Dual(b)) for b in cols] for a in rows]
                    mat = ExactMatrix.integer(data, cols=len(cols))
                    if not mat.is_zero():
                        blocks[(r, M - s - r)] = mat
                X.append(blocks)
            interval = self._witness.interval
            T = tensor_complex(F, interval)
            product = w_product_blocks(X, self._witness.omega, T, M)

            def basis_key(k: int, idx: int) -> Tuple[Key, int]:
                for p in F.degrees():
                    width = interval.rank(k - p)
                    o = T.offsets[k][p]
                    if o <= idx < o + F.rank(p) * width:
                        i, j = divmod(idx - o, width)
                        f = by_degree[p][i]
                        if k - p == 0:
                            return ((END0 if j == 0 else END1), f), 1
                        return (COLLAR, f), sign(p)
                raise InvalidStructureError(f"index {idx} outside degree {k} of the collar")

            coef = sign(self.r_sign(sigma) + 1) * self.orientation
            for s in range(0, self.top + 2):
                for (k1, k2), mat in product[s].items():
                    for (i, j), v in mat.nonzero_entries():
                        ka, sa = basis_key(k1, i)
                        kb, sb = basis_key(k2, j)
                        out[s].add(ka, Dual(kb), coef * sign(s * (s - 1) // 2) * sa * sb * int(v))
        self._y[sigma] = out
        return out

    # cells

    def y_degrees(self, sigma: Simplex) -> Dict[Key, int]:
        D = self.theta.complex
        out = {}
        for k in self._a_keys(sigma):
            out[(END0, k)] = D.degree(k)
            out[(END1, k)] = D.degree(k)
        for k in self._a_keys(sigma):
            out[(COLLAR, k)] = D.degree(k) + 1
        return out

    def y_differential(self, sigma: Simplex) -> KeyedMatrix:
        keys = self._a_keys(sigma)
        out = KeyedMatrix()
        for x, y, v in self._restricted_d(keys).items():
            out.add((END0, x), (END0, y), v)
            out.add((END1, x), (END1, y), v)
            out.add((COLLAR, x), (COLLAR, y), -v)
        for k in keys:
            out.add((END0, k), (COLLAR, k), -1)
            out.add((END1, k), (COLLAR, k), 1)
        return out

    def cell(self, kind: str, sigma: Simplex) -> CylinderCell:
        sigma = tuple(sigma)
        D, n, sd = self.theta.complex, self.theta.n, simplex_dim(sigma)
        if kind == "Q":
            if sigma not in self.decomp.product or self.decomp.at_ends(sigma):
                raise SimplicialError(f"{sigma} is not an interior simplex of the product")
            keys = self._keys(lambda s: is_face(sigma, s))
            quotient = frozenset(k for k in keys if D.simplex(k) == sigma)
            return CylinderCell("Q", sigma, n - sd, {k: D.degree(k) for k in keys},
                                self._restricted_d(keys), self.psi_q(sigma), quotient)
        if sigma not in self.decomp.L:
            raise SimplicialError(f"{sigma} is not a simplex of L")
        B = set(self.decomp.b_sigma(sigma))
        if kind == "Z":
            keys = self._a_keys(sigma)
            quotient = frozenset(k for k in keys if D.simplex(k) in B)
            return CylinderCell("Z", sigma, n - sd - 1, {k: D.degree(k) for k in keys},
                                self._restricted_d(keys), self.psi_z(sigma), quotient)
        if kind == "Y":
            degrees = self.y_degrees(sigma)
            quotient = frozenset(k for k in degrees if k[0] == COLLAR and D.simplex(k[1]) in B)
            return CylinderCell("Y", sigma, n - sd, degrees, self.y_differential(sigma), self.psi_y(sigma), quotient)
        raise InvalidStructureError(f"unknown cell kind {kind!r}")

    def cells(self) -> List[CylinderCell]:
        out = [self.cell("Q", s) for s in self.decomp.interior()]
        for sigma in self.decomp.L:
            out.append(self.cell("Z", sigma))
            out.append(self.cell("Y", sigma))
        return out

    # closure: the dual-form boundary of each cell equals the signed sum of its cofaces

    def closure_residual(self, cell: CylinderCell) -> Family:
        sigma = cell.simplex
        degree = cell.degrees.__getitem__
        res = dual_form_boundary(cell.psi, cell.d, degree, cell.dimension, self.top)
        if cell.kind == "Q":
            for tau in self.decomp.product.cofaces(sigma):
                k = sign(self.n_sign(sigma, tau))
                for u in res:
                    res[u] = res[u] + self.psi_q(tau)[u].scale(k)
        elif cell.kind == "Z":
            for tau in self.decomp.cofaces_in_l(sigma):
                k = -sign(self.n_sign(sigma, tau))
                for u in res:
                    res[u] = res[u] + self.psi_z(tau)[u].scale(k)
        else:
            for u in res:
                res[u] = res[u] + _tag(self.psi_z(sigma)[u], END1)
            for tau in self.decomp.product.cofaces(sigma):
                k = sign(self.n_sign(sigma, tau))
                if tau in self.decomp.L:
                    for u in res:
                        res[u] = res[u] + self.psi_y(tau)[u].scale(k)
                elif not self.decomp.at_ends(tau):
                    for u in res:
                        res[u] = res[u] + _tag(self.psi_q(tau)[u], END0).scale(k)
        return res

    def verify(self) -> Dict[str, Any]:
        failures = []
        cells = self.cells()
        for cell in cells:
            for u, m in self.closure_residual(cell).items():
                if not m.is_zero():
                    failures.append({"kind": "closure", "cell": cell.kind, "simplex": list(cell.simplex), "u": u})
                    break
            keys = list(cell.degrees)
            if keys:
                rel = relative_duality_check(cell.psi.get(0, KeyedMatrix()), cell.d, cell.degrees.__getitem__,
                                             cell.dimension, keys, lambda k: k in cell.quotient)
                if not rel["valid"]:
                    failures.append({"kind": "relative_duality", "cell": cell.kind, "simplex": list(cell.simplex)})
        logger.info(f"cylinder: {len(cells)} cells, {len(failures)} failures")
        return {"valid": not failures, "failures": failures, "cells": len(cells)}


def cylinder_ad(theta: KQuadraticStructure, decomp: ProductDecomposition, orientation: int = 1) -> CylinderAd:
    return CylinderAd(theta, decomp, orientation * SignManifest.sign("cylinder.cell_sign"))
