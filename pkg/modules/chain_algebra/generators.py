# modules/chain_algebra/generators.py

import random
from typing import Callable, Dict, Hashable, List, Sequence, Tuple

from modules.exact_core import ExactMatrix, RingSpec, kernel_basis
from .complexes import ChainComplex, ChainMap, mapping_cone

Slot = Tuple[Hashable, int, int]


def random_matrix(rng: random.Random, rows: int, cols: int, bound: int = 2) -> ExactMatrix:
    ring = RingSpec.integers()
    return ExactMatrix.from_rows(ring, [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)],
                                 cols=cols)


def unpack(slots: Sequence[Slot], vector: Sequence[int]) -> Dict[Hashable, ExactMatrix]:
    ring = RingSpec.integers()
    out, i = {}, 0
    for key, rows, cols in slots:
        out[key] = ExactMatrix.from_rows(ring, [[vector[i + a * cols + b] for b in range(cols)]
                                                for a in range(rows)], cols=cols)
        i += rows * cols
    return out


def random_kernel_element(rng: random.Random, slots: Sequence[Slot],
                          evaluate: Callable[[Dict[Hashable, ExactMatrix]], List[ExactMatrix]],
                          bound: int = 2) -> Dict[Hashable, ExactMatrix]:
    """
    Random integer solution of a homogeneous linear condition on a family of
    matrices. `evaluate` must be linear; its outputs are flattened into rows.
    """
    size = sum(rows * cols for _, rows, cols in slots)
    if size == 0:
        return unpack(slots, [])
    columns = []
    for j in range(size):
        unit = [0] * size
        unit[j] = 1
        flat = []
        for m in evaluate(unpack(slots, unit)):
            flat.extend(int(x) for x in m.entries.flat)
        columns.append(flat)
    height = len(columns[0])
    if height == 0:
        return unpack(slots, [rng.randint(-bound, bound) for _ in range(size)])
    M = ExactMatrix.integer([[columns[j][i] for j in range(size)] for i in range(height)])
    K = kernel_basis(M)
    coeffs = random_matrix(rng, K.cols, 1, bound)
    v = K @ coeffs if K.cols else ExactMatrix.zeros(M.ring, size, 1)
    return unpack(slots, [int(v[i, 0]) for i in range(size)])


def random_complex(rng: random.Random, lo: int, hi: int, max_rank: int = 2, bound: int = 2) -> ChainComplex:
    """d_k = K·R with K a kernel basis of d_{k-1}, so d^2 = 0 by construction."""
    ring = RingSpec.integers()
    ranks = {k: rng.randint(0, max_rank) for k in range(lo, hi + 1)}
    diffs: Dict[int, ExactMatrix] = {}
    for k in range(lo + 1, hi + 1):
        rows, cols = ranks[k - 1], ranks[k]
        if k - 1 > lo:
            K = kernel_basis(diffs[k - 1])
            diffs[k] = K @ random_matrix(rng, K.cols, cols, bound) if K.cols else ExactMatrix.zeros(ring, rows, cols)
        else:
            diffs[k] = random_matrix(rng, rows, cols, bound)
    return ChainComplex(ring, lo, hi, ranks, diffs)


def random_chain_map(rng: random.Random, C: ChainComplex, D: ChainComplex, bound: int = 2) -> ChainMap:
    """Random integer degree-0 chain map, sampled from the kernel of f -> d f - f d."""
    slots = [(r, D.rank(r), C.rank(r)) for r in C.degrees() if D.rank(r) and C.rank(r)]

    def defect(maps):
        f = ChainMap(C, D, 0, maps)
        lo, hi = min(C.lo, D.lo), max(C.hi, D.hi)
        return [D.diff(r) @ f.at(r) - f.at(r - 1) @ C.diff(r) for r in range(lo, hi + 2)]

    return ChainMap(C, D, 0, random_kernel_element(rng, slots, defect, bound))


def random_acyclic_complex(rng: random.Random, lo: int, hi: int, max_rank: int = 2) -> ChainComplex:
    """Cone of the identity of a random complex."""
    C = random_complex(rng, lo, hi, max_rank)
    return mapping_cone(C.identity())
