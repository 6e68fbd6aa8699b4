# modules/k_based/complexes.py

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from core.exceptions import DimensionMismatchError, InvalidStructureError, SimplicialError
from core.logger import get_surgery_logger
from modules.chain_algebra import ChainComplex, is_acyclic_z
from modules.exact_core import ExactMatrix, RingSpec, kernel_basis
from modules.simplicial_geometry import OrderedComplex, Simplex, is_face, simplex_order
from .sparse import Key, KeyedMatrix

logger = get_surgery_logger("surgerykit.k_based", "KBASED")


class Variance(Enum):
    """Direction in which a K-based differential may move along the face order"""
    COVARIANT = "covariant"
    CONTRAVARIANT = "contravariant"

    def flipped(self) -> "Variance":
        return Variance.CONTRAVARIANT if self is Variance.COVARIANT else Variance.COVARIANT


def allowed(variance: Variance, source: Simplex, target: Simplex) -> bool:
    """Covariant maps go up the face order (σ ≤ τ), contravariant maps go down."""
    if variance is Variance.COVARIANT:
        return is_face(source, target)
    return is_face(target, source)


@dataclass(frozen=True)
class Generator:
    """
    A basis element sitting over one simplex. Generators of a duality complex
    T(C) remember the simplex height y and the generator of C they dualize.
    """
    key: Key
    simplex: Simplex
    degree: int
    height: int = 0
    source: Optional["Generator"] = None


def host_simplices(host: Any) -> Tuple[Simplex, ...]:
    if isinstance(host, OrderedComplex):
        return host.simplices
    return tuple(sorted({tuple(s) for s in host}, key=simplex_order))


@dataclass(frozen=True, eq=False)
class KBasedComplex:
    """
    Finite based chain complex over ℤ whose generators each sit over a
    simplex of `host`. The differential is stored sparsely, lowers degree by
    one and is triangular in the direction given by `variance`.
    """
    host: Tuple[Simplex, ...]
    variance: Variance
    generators: Tuple[Generator, ...]
    d: KeyedMatrix = field(default_factory=KeyedMatrix)
    _info: Dict[Key, Generator] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        host = host_simplices(self.host)
        present = set(host)
        info: Dict[Key, Generator] = {}
        for g in self.generators:
            if g.key in info:
                raise InvalidStructureError(f"duplicate generator key {g.key!r}")
            if g.simplex not in present:
                raise SimplicialError(f"generator {g.key!r} sits over {g.simplex}, which is not in the host")
            info[g.key] = g
        for r, c, _ in self.d.items():
            if r not in info or c not in info:
                raise InvalidStructureError(f"differential entry ({r!r}, {c!r}) names an unknown generator")
        object.__setattr__(self, "host", host)
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "_info", info)

    @classmethod
    def zero(cls, host: Any, variance: Variance = Variance.COVARIANT) -> "KBasedComplex":
        return cls(host_simplices(host), variance, ())

    def __contains__(self, key: Key) -> bool:
        return key in self._info

    def __len__(self) -> int:
        return len(self.generators)

    def generator(self, key: Key) -> Generator:
        try:
            return self._info[key]
        except KeyError:
            raise InvalidStructureError(f"unknown generator {key!r}") from None

    def degree(self, key: Key) -> int:
        return self.generator(key).degree

    def simplex(self, key: Key) -> Simplex:
        return self.generator(key).simplex

    def keys(self) -> List[Key]:
        return [g.key for g in self.generators]

    def degrees(self) -> List[int]:
        return sorted({g.degree for g in self.generators})

    def in_degree(self, r: int) -> List[Key]:
        return [g.key for g in self.generators if g.degree == r]

    def over(self, sigma: Simplex) -> List[Generator]:
        return [g for g in self.generators if g.simplex == tuple(sigma)]

    def allows(self, source: Simplex, target: Simplex) -> bool:
        return allowed(self.variance, source, target)

    def degree_map(self) -> Dict[Key, int]:
        return {g.key: g.degree for g in self.generators}

    def verify(self) -> Dict[str, Any]:
        """d² = 0, degree −1 and triangularity."""
        failures = []
        for r, c, v in self.d.items():
            if self.degree(r) != self.degree(c) - 1:
                failures.append({"kind": "degree", "entry": [repr(r), repr(c)]})
            if not self.allows(self.simplex(c), self.simplex(r)):
                failures.append({"kind": "triangular", "entry": [repr(r), repr(c)]})
        square = self.d @ self.d
        if not square.is_zero():
            r, c, v = square.first_nonzero()
            failures.append({"kind": "d_squared", "entry": [repr(r), repr(c)], "value": v})
        return {"valid": not failures, "failures": failures}

    def require_valid(self):
        report = self.verify()
        if not report["valid"]:
            raise InvalidStructureError("not a K-based chain complex", report["failures"])

    def restrict(self, keep: Callable[[Generator], bool]) -> "KBasedComplex":
        """Generators passing `keep`, with the differential restricted to them."""
        gens = tuple(g for g in self.generators if keep(g))
        chosen = {g.key for g in gens}
        return KBasedComplex(self.host, self.variance, gens,
                             self.d.restrict(lambda r: r in chosen, lambda c: c in chosen))

    def chain_complex(self) -> Tuple[ChainComplex, Dict[int, List[Key]]]:
        """Forget the simplices: the underlying based ℤ-complex and its basis order."""
        return keyed_chain_complex(self.degree_map(), self.d)

    def describe(self) -> str:
        counts = {r: len(self.in_degree(r)) for r in self.degrees()}
        return f"{self.variance.value} " + " ".join(f"{r}:{n}" for r, n in counts.items())


def keyed_chain_complex(degrees: Mapping[Key, int], d: KeyedMatrix) -> Tuple[ChainComplex, Dict[int, List[Key]]]:
    """Dense integer complex from keyed data; generator order follows `degrees`."""
    ring = RingSpec.integers()
    by_degree: Dict[int, List[Key]] = {}
    for k, r in degrees.items():
        by_degree.setdefault(r, []).append(k)
    for r, c, _ in d.items():
        if r not in degrees or c not in degrees:
            raise DimensionMismatchError(f"differential entry ({r!r}, {c!r}) leaves the basis")
        if degrees[r] != degrees[c] - 1:
            raise DimensionMismatchError(f"differential entry ({r!r}, {c!r}) does not lower degree by one")
    if not by_degree:
        return ChainComplex.zero(ring), {}
    lo, hi = min(by_degree), max(by_degree)
    ranks = {r: len(by_degree.get(r, [])) for r in range(lo, hi + 1)}
    diffs = {r: d.to_exact(by_degree.get(r - 1, []), by_degree.get(r, [])) for r in range(lo + 1, hi + 1)}
    return ChainComplex(ring, lo, hi, ranks, diffs), by_degree


def is_acyclic_keyed(degrees: Mapping[Key, int], d: KeyedMatrix) -> bool:
    C, _ = keyed_chain_complex(degrees, d)
    return is_acyclic_z(C)


def mapping_cone_keyed(f: KeyedMatrix, source_degrees: Mapping[Key, int], d_source: KeyedMatrix,
                       target_degrees: Mapping[Key, int], d_target: KeyedMatrix) -> Tuple[Dict[Key, int], KeyedMatrix]:
    """
    Cone of f: source → target. The source is shifted up by one and enters
    with −d; keys are tagged ("t", x) and ("s", x).
    """
    degrees: Dict[Key, int] = {}
    for k, r in target_degrees.items():
        degrees[("t", k)] = r
    for k, r in source_degrees.items():
        degrees[("s", k)] = r + 1
    d = KeyedMatrix()
    for r, c, v in d_target.items():
        d.add(("t", r), ("t", c), v)
    for r, c, v in d_source.items():
        d.add(("s", r), ("s", c), -v)
    for r, c, v in f.items():
        d.add(("t", r), ("s", c), v)
    return degrees, d


def cone_is_acyclic(f: KeyedMatrix, source_degrees: Mapping[Key, int], d_source: KeyedMatrix,
                    target_degrees: Mapping[Key, int], d_target: KeyedMatrix) -> bool:
    degrees, d = mapping_cone_keyed(f, source_degrees, d_source, target_degrees, d_target)
    if not degrees:
        return True
    return is_acyclic_keyed(degrees, d)


def random_keyed_solution(rng: random.Random, variables: Sequence[Tuple[Key, Key]],
                          evaluate: Callable[[KeyedMatrix], KeyedMatrix], bound: int = 2) -> KeyedMatrix:
    """
    Random integer point of the kernel of a linear condition on the entries
    listed in `variables`; `evaluate` must be linear.
    """
    if not variables:
        return KeyedMatrix()
    positions: Dict[Tuple[Key, Key], int] = {}
    columns = []
    for r, c in variables:
        unit = KeyedMatrix()
        unit.add(r, c, 1)
        col = {}
        for a, b, v in evaluate(unit).items():
            col[positions.setdefault((a, b), len(positions))] = v
        columns.append(col)
    if positions:
        M = ExactMatrix.integer([[col.get(i, 0) for col in columns] for i in range(len(positions))],
                                cols=len(variables))
        K = kernel_basis(M)
        coeffs = [rng.randint(-bound, bound) for _ in range(K.cols)]
        values = [sum(int(K[i, j]) * coeffs[j] for j in range(K.cols)) for i in range(len(variables))]
    else:
        values = [rng.randint(-bound, bound) for _ in variables]
    out = KeyedMatrix()
    for (r, c), v in zip(variables, values):
        out.add(r, c, v)
    return out


def random_k_based_complex(rng: random.Random, host: Any, variance: Variance = Variance.COVARIANT,
                           lo: int = 0, hi: int = 1, max_rank: int = 1, bound: int = 2) -> KBasedComplex:
    """
    Up to `max_rank` generators per simplex and degree; each d_p is a random
    triangular solution of d_{p-1} d_p = 0.
    """
    simplices = host_simplices(host)
    gens = []
    for p in range(lo, hi + 1):
        for s in simplices:
            for i in range(rng.randint(0, max_rank)):
                gens.append(Generator(("c", p, s, i), s, p))
    d = KeyedMatrix()
    for p in range(lo + 1, hi + 1):
        variables = [(b.key, a.key) for a in gens if a.degree == p
                     for b in gens if b.degree == p - 1 and allowed(variance, a.simplex, b.simplex)]
        below = d.restrict(cols=lambda c: c[1] == p - 1)
        step = random_keyed_solution(rng, variables, lambda A: below @ A, bound)
        for r, c, v in step.items():
            d.add(r, c, v)
    C = KBasedComplex(simplices, variance, tuple(gens), d)
    logger.debug(f"random K-based complex {C.describe()}")
    return C


def random_k_morphism(rng: random.Random, source: KBasedComplex, target: KBasedComplex,
                      degree: int = 0, bound: int = 2) -> KeyedMatrix:
    """Random triangular graded map source → target raising degree by `degree`."""
    out = KeyedMatrix()
    for a in source.generators:
        for b in target.generators:
            if b.degree == a.degree + degree and allowed(target.variance, a.simplex, b.simplex):
                out.add(b.key, a.key, rng.randint(-bound, bound))
    return out
