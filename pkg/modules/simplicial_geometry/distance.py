# modules/simplicial_geometry/distance.py

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List

import networkx as nx

from core.exceptions import SimplicialError
from core.logger import get_surgery_logger
from .complexes import OrderedComplex, Simplex

logger = get_surgery_logger("surgerykit.simplicial", "SIMPLICIAL")


@dataclass(frozen=True)
class DistanceFiltration:
    """Vertex distances d_∞ to a boundary subcomplex and the induced bands."""
    complex: OrderedComplex
    distances: Dict[int, int]

    @property
    def max_distance(self) -> int:
        return max(self.distances.values(), default=0)

    def band_of(self, s: Simplex) -> int:
        """Smallest b with s ∈ K^b."""
        return max(self.distances[v] for v in s)

    def sublevel(self, b: int) -> List[Simplex]:
        """K^b: simplices all of whose vertices have d_∞ ≤ b."""
        return [s for s in self.complex if self.band_of(s) <= b]

    def band(self, b: int) -> List[Simplex]:
        """K_b = K^b ∖ K^{b−1}."""
        return [s for s in self.complex if self.band_of(s) == b]

    def bands(self) -> Dict[int, List[Simplex]]:
        return {b: self.band(b) for b in range(self.max_distance + 1)}

    def check(self) -> Dict[str, Any]:
        """Adjacent vertices differ by at most one; faces sit in the same or the previous band."""
        failures = []
        for s in self.complex.of_dim(1):
            a, b = (self.distances[v] for v in s)
            if abs(a - b) > 1:
                failures.append({"kind": "lipschitz", "edge": list(s), "values": [a, b]})
        for s in self.complex:
            for f in self.complex.faces(s):
                if self.band_of(s) - self.band_of(f) not in (0, 1):
                    failures.append({"kind": "band", "simplex": list(s), "face": list(f)})
        for b in range(self.max_distance + 1):
            if not self.complex.is_subcomplex(self.sublevel(b)):
                failures.append({"kind": "sublevel", "band": b})
        return {"valid": not failures, "failures": failures}


def distance_function(K: OrderedComplex, boundary: Iterable[Simplex]) -> DistanceFiltration:
    """Graph distance on the 1-skeleton from the vertices of the boundary subcomplex."""
    sources = sorted({v for s in boundary for v in s})
    if not sources:
        raise SimplicialError("distance function needs a nonempty boundary")
    missing = [v for v in sources if v not in K.vertices]
    if missing:
        raise SimplicialError(f"boundary vertices {missing} are not in the complex")
    graph = K.one_skeleton()
    lengths = nx.multi_source_dijkstra_path_length(graph, sources)
    unreachable = [v for v in K.vertices if v not in lengths]
    if unreachable:
        raise SimplicialError(f"vertices {unreachable} cannot be reached from the boundary")
    logger.debug(f"distance function from {len(sources)} boundary vertices, max {max(lengths.values())}")
    return DistanceFiltration(K, {v: int(lengths[v]) for v in K.vertices})
