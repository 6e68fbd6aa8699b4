# modules/simplicial_geometry/complexes.py

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

import networkx as nx

from core.exceptions import SimplicialError
from core.logger import get_surgery_logger
from modules.chain_algebra import ChainComplex
from modules.exact_core import ExactMatrix, RingSpec

logger = get_surgery_logger("surgerykit.simplicial", "SIMPLICIAL")

Simplex = Tuple[int, ...]


def as_simplex(vertices: Iterable[int]) -> Simplex:
    """Sorted vertex tuple; repeated vertices are rejected."""
    s = tuple(sorted(int(v) for v in vertices))
    if len(set(s)) != len(s):
        raise SimplicialError(f"repeated vertex in {s}")
    return s


def simplex_dim(s: Sequence[int]) -> int:
    return len(s) - 1


def is_face(sigma: Sequence[int], tau: Sequence[int]) -> bool:
    """sigma <= tau."""
    return set(sigma) <= set(tau)


def all_faces(s: Simplex) -> List[Simplex]:
    """Every nonempty face of s, including s."""
    return [c for k in range(1, len(s) + 1) for c in combinations(s, k)]


def simplex_order(s: Simplex):
    return (len(s), s)


def incidence_number(sigma: Sequence[int], tau: Sequence[int]) -> int:
    """Position n in tau of the vertex deleted to obtain sigma, i.e. ∂_n tau = sigma."""
    sigma, tau = tuple(sigma), tuple(tau)
    if len(tau) != len(sigma) + 1 or not is_face(sigma, tau):
        raise SimplicialError(f"{sigma} is not a codimension-one face of {tau}")
    for i, v in enumerate(tau):
        if v not in sigma:
            return i
    raise SimplicialError(f"{sigma} is not a codimension-one face of {tau}")


@dataclass(frozen=True)
class OrderedComplex:
    """
    Finite simplicial complex on totally ordered integer vertices. Simplices
    are sorted vertex tuples, stored sorted by (dimension, vertices).
    """
    simplices: Tuple[Simplex, ...]
    _index: Dict[Simplex, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        simplices = tuple(sorted({as_simplex(s) for s in self.simplices}, key=simplex_order))
        if () in simplices:
            raise SimplicialError("the empty simplex is implicit and cannot be listed")
        present = set(simplices)
        for s in simplices:
            for k in range(len(s)):
                face = s[:k] + s[k + 1:]
                if face and face not in present:
                    raise SimplicialError(f"complex not closed under faces: {face} missing below {s}")
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(simplices)})

    @classmethod
    def from_facets(cls, facets: Iterable[Iterable[int]]) -> "OrderedComplex":
        """Downward closure of the given simplices."""
        out: Set[Simplex] = set()
        for f in facets:
            out.update(all_faces(as_simplex(f)))
        return cls(tuple(out))

    @classmethod
    def simplex_boundary(cls, n: int) -> "OrderedComplex":
        """∂Δ^n on vertices 0..n."""
        full = tuple(range(n + 1))
        return cls.from_facets(full[:k] + full[k + 1:] for k in range(n + 1))

    @classmethod
    def path(cls, edges: int) -> "OrderedComplex":
        return cls.from_facets((i, i + 1) for i in range(edges)) if edges else cls(((0,),))

    @classmethod
    def cycle(cls, n: int) -> "OrderedComplex":
        """Boundary of an n-gon on vertices 0..n-1."""
        if n < 3:
            raise SimplicialError("a simplicial circle needs at least 3 vertices")
        return cls.from_facets([(i, i + 1) for i in range(n - 1)] + [(0, n - 1)])

    def __contains__(self, s) -> bool:
        return tuple(s) in self._index

    def __iter__(self):
        return iter(self.simplices)

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(s[0] for s in self.simplices if len(s) == 1)

    def index(self, s: Simplex) -> int:
        try:
            return self._index[tuple(s)]
        except KeyError:
            raise SimplicialError(f"{tuple(s)} is not a simplex of the complex") from None

    def of_dim(self, k: int) -> List[Simplex]:
        return [s for s in self.simplices if len(s) == k + 1]

    def facets(self) -> List[Simplex]:
        return [s for s in self.simplices if not self.cofaces(s)]

    def faces(self, s: Simplex) -> List[Simplex]:
        """Codimension-one faces ∂_0 s, ..., ∂_k s in index order."""
        return [s[:i] + s[i + 1:] for i in range(len(s))] if len(s) > 1 else []

    def cofaces(self, s: Simplex) -> List[Simplex]:
        """Simplices of one higher dimension containing s."""
        return [t for t in self.simplices if len(t) == len(s) + 1 and is_face(s, t)]

    def star(self, s: Simplex) -> List[Simplex]:
        """All simplices tau >= s."""
        return [t for t in self.simplices if is_face(s, t)]

    def below(self, s: Simplex) -> List[Simplex]:
        """All simplices sigma <= s."""
        return [t for t in self.simplices if is_face(t, s)]

    def is_subcomplex(self, subset: Iterable[Simplex]) -> bool:
        chosen = {tuple(s) for s in subset}
        return all(f in chosen for s in chosen for f in all_faces(s))

    def subcomplex(self, subset: Iterable[Simplex]) -> "OrderedComplex":
        chosen = [tuple(s) for s in subset]
        for s in chosen:
            if s not in self:
                raise SimplicialError(f"{s} is not a simplex of the complex")
        return OrderedComplex(tuple(chosen))

    def one_skeleton(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(s for s in self.simplices if len(s) == 2)
        return g

    def boundary_matrix(self, k: int) -> ExactMatrix:
        """∂_k: C_k -> C_{k-1}, entry (-1)^i for the i-th face."""
        rows, cols = self.of_dim(k - 1), self.of_dim(k)
        pos = {s: i for i, s in enumerate(rows)}
        data = [[0] * len(cols) for _ in rows]
        for j, s in enumerate(cols):
            for i, f in enumerate(self.faces(s)):
                data[pos[f]][j] += -1 if i % 2 else 1
        return ExactMatrix.from_rows(RingSpec.integers(), data, cols=len(cols))

    def chain_complex(self) -> ChainComplex:
        """Simplicial chain complex in degrees 0..dim."""
        top = self.dimension
        if top < 0:
            return ChainComplex.zero(RingSpec.integers())
        ranks = {k: len(self.of_dim(k)) for k in range(top + 1)}
        return ChainComplex(RingSpec.integers(), 0, top, ranks,
                            {k: self.boundary_matrix(k) for k in range(1, top + 1)})

    def serialize(self) -> str:
        """One simplex per line, vertices separated by spaces."""
        return "\n".join(" ".join(str(v) for v in s) for s in self.facets())

    @classmethod
    def parse(cls, text: str) -> "OrderedComplex":
        facets = []
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                facets.append([int(x) for x in line.split()])
        return cls.from_facets(facets)

    def relabel(self, vertex_map: Dict[int, int]) -> "OrderedComplex":
        """Image under an injective vertex map; simplices are re-sorted."""
        return OrderedComplex(tuple(tuple(vertex_map[v] for v in s) for s in self.simplices))


def closure_of(simplices: Iterable[Simplex]) -> FrozenSet[Simplex]:
    out: Set[Simplex] = set()
    for s in simplices:
        out.update(all_faces(tuple(s)))
    return frozenset(out)


def random_ordered_complex(rng, vertices: int, max_dim: int, facets: int) -> OrderedComplex:
    """Closure of `facets` random simplices of dimension <= max_dim."""
    tops = []
    for _ in range(facets):
        d = rng.randint(0, max_dim)
        tops.append(sorted(rng.sample(range(vertices), min(d + 1, vertices))))
    return OrderedComplex.from_facets(tops)
