# modules/structured_forms/generators.py

import random
from typing import Optional

from modules.chain_algebra import ChainComplex, ChainMap, random_chain_map, random_complex, random_kernel_element
from .pairs import QuadraticPair, pair_residual
from .quadratic import QuadraticComplex, quadratic_residual


def structure_slots(C: ChainComplex, n: int, top: int, tag: str = "psi"):
    return [((tag, s, p), C.rank(n - s - p), C.rank(p))
            for s in range(top + 1) for p in C.degrees() if C.rank(n - s - p) and C.rank(p)]


def default_top(C: ChainComplex, n: int) -> int:
    return max(0, n - 2 * C.lo + 1)


def random_quadratic(rng: random.Random, C: ChainComplex, n: int, top: Optional[int] = None,
                     bound: int = 2) -> QuadraticComplex:
    """Random integer cycle of the four-term relation on C."""
    top = default_top(C, n) if top is None else top
    slots = structure_slots(C, n, top)

    def residuals(blocks):
        family = {(s, p): m for (_, s, p), m in blocks.items()}
        return [quadratic_residual(C, n, family, s, p) for s in range(top + 1) for p in C.degrees()]

    blocks = random_kernel_element(rng, slots, residuals, bound)
    return QuadraticComplex(C, n, {(s, p): m for (_, s, p), m in blocks.items()})


def random_quadratic_on_random_complex(rng: random.Random, n: int, lo: int = 0, hi: int = 2,
                                       max_rank: int = 2) -> QuadraticComplex:
    return random_quadratic(rng, random_complex(rng, lo, hi, max_rank), n)


def random_pair(rng: random.Random, C: ChainComplex, D: ChainComplex, f: ChainMap, n: int,
                bound: int = 2) -> QuadraticPair:
    """Random (n+1)-dimensional pair on a fixed chain map."""
    top = max(0, n + 1 - 2 * min(C.lo, D.lo) + 1)
    slots = structure_slots(D, n + 1, top, "delta") + structure_slots(C, n, top, "psi")

    def split(blocks):
        delta = {(s, p): m for (tag, s, p), m in blocks.items() if tag == "delta"}
        psi = {(s, p): m for (tag, s, p), m in blocks.items() if tag == "psi"}
        return delta, psi

    def residuals(blocks):
        delta, psi = split(blocks)
        pair = QuadraticPair(f, n, delta, psi)
        out = [pair_residual(pair, s, p) for s in range(top + 2) for p in D.degrees()]
        out += [quadratic_residual(C, n, psi, s, p) for s in range(top + 2) for p in C.degrees()]
        return out

    delta, psi = split(random_kernel_element(rng, slots, residuals, bound))
    return QuadraticPair(f, n, delta, psi)


def random_pair_on_random_map(rng: random.Random, n: int, lo: int = -1) -> QuadraticPair:
    C = random_complex(rng, lo, lo + 2)
    D = random_complex(rng, lo, lo + 3)
    return random_pair(rng, C, D, random_chain_map(rng, C, D), n)
