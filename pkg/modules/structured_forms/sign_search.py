# modules/structured_forms/sign_search.py

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Tuple

from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import chain_contraction_z, random_complex, verify_complex
from .generators import random_quadratic
from .pairs import verify_quadratic_pair
from .quadratic import QuadraticComplex, direct_sum_quadratic, hyperbolic_form, is_poincare_z, verify_quadratic
from .thickening import ThickeningSigns, boundary_complex, boundary_thickening

logger = get_surgery_logger("surgerykit.sign_search", "SIGNS")

THICKENING_KEYS = ("thickening.phi_block", "thickening.dual_block", "thickening.identity_block",
                   "thickening.higher_s", "thickening.pair_map")


@dataclass
class SignSearchResult:
    """Assignments surviving every check of the battery."""
    survivors: List[ThickeningSigns]
    battery_size: int
    rejected: Dict[str, int] = field(default_factory=dict)

    @property
    def unique(self) -> bool:
        return len(self.survivors) == 1


def thickening_battery(seed: int, size: int) -> List[QuadraticComplex]:
    """Random quadratic complexes on degrees 0..2 plus one Poincaré instance."""
    battery = []
    for t in range(size):
        rng = random.Random(seed + t)
        C = random_complex(rng, 0, 2, 2)
        battery.append(random_quadratic(rng, C, t % 4))
    battery.append(direct_sum_quadratic([hyperbolic_form(1, 1), hyperbolic_form(1, 1)]))
    return battery


def _passes(q: QuadraticComplex, signs: ThickeningSigns) -> Tuple[bool, str]:
    B = boundary_complex(q, signs)
    if not verify_complex(B)["valid"]:
        return False, "d_squared"
    pair = boundary_thickening(q, signs, check=False)
    if not verify_quadratic(pair.boundary)["valid"]:
        return False, "boundary_relation"
    if not verify_quadratic_pair(pair)["valid"]:
        return False, "pair_relation"
    if is_poincare_z(q).is_poincare and not chain_contraction_z(B).contractible:
        return False, "poincare_boundary"
    return True, ""


def search_thickening_signs(seed: int = 900, size: int = 24) -> SignSearchResult:
    """
    Enumerate the free signs of the thickening with the cone and identity
    normalizations fixed, keeping assignments that pass the whole battery.
    """
    battery = thickening_battery(seed, size)
    survivors, rejected = [], {}
    for dual_block, a, b, c in product((1, -1), (0, 1), (0, 1), (0, 1)):
        signs = ThickeningSigns(phi_block=1, dual_block=dual_block, identity_block=1, higher_s=(a, b, c))
        ok = True
        for q in battery:
            passed, reason = _passes(q, signs)
            if not passed:
                rejected[reason] = rejected.get(reason, 0) + 1
                ok = False
                break
        if ok:
            survivors.append(signs)
    logger.info(f"Sign search over {len(battery)} instances: {len(survivors)} survivors")
    return SignSearchResult(survivors, len(battery), rejected)


def manifest_entries(signs: ThickeningSigns) -> Dict[str, Any]:
    return {
        "thickening.phi_block": signs.phi_block,
        "thickening.dual_block": signs.dual_block,
        "thickening.identity_block": signs.identity_block,
        "thickening.higher_s": list(signs.higher_s),
        "thickening.pair_map": signs.pair_map,
    }


def reproduces_manifest(result: SignSearchResult) -> bool:
    if not result.unique:
        return False
    shipped = SignManifest.list()
    return all(shipped[k] == v for k, v in manifest_entries(result.survivors[0]).items())
