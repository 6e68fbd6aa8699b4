#!/usr/bin/env python3
"""Chain complexes, duals, Hom complexes, cones, homology and contractions."""

import random

import pytest
from hypothesis import given, strategies as st

from core.exceptions import DimensionMismatchError, UnsupportedRingError
from modules.chain_algebra import (ChainComplex, ChainMap, HomComplex, chain_complex_of_lists, chain_contraction_z,
                                   chain_map_as_cycle, cone_inclusion, cycle_as_chain_map, direct_sum, dual_complex,
                                   dual_map, double_dual_identification, homology_z, is_acyclic_z,
                                   is_quasi_isomorphism_z, mapping_cone, random_acyclic_complex, random_chain_map,
                                   random_complex, verify_complex)
from modules.exact_core import ExactMatrix, RingSpec


def triangle_boundary():
    """Boundary of a 2-simplex: edges 01, 02, 12."""
    return chain_complex_of_lists({0: 3, 1: 3}, {1: [[-1, -1, 0], [1, 0, -1], [0, 1, 1]]})


def test_verify_complex_flags_nonzero_square():
    C = chain_complex_of_lists({0: 1, 1: 1, 2: 1}, {1: [[2]], 2: [[3]]})
    report = verify_complex(C)
    assert not report["valid"]
    assert report["failures"] == [{"degree": 2, "product": [[6]]}]


def test_verify_complex_accepts_random_complexes(rng):
    for _ in range(5):
        assert verify_complex(random_complex(rng, -1, 3))["valid"]


def test_differential_shape_is_checked():
    with pytest.raises(DimensionMismatchError):
        ChainComplex.from_data(RingSpec.integers(), {0: 1, 1: 2}, {1: ExactMatrix.integer([[1]])})


def test_homology_of_triangle_boundary():
    H = homology_z(triangle_boundary())
    assert H[0].describe() == "Z"
    assert H[1].describe() == "Z"


def test_homology_detects_torsion():
    H = homology_z(chain_complex_of_lists({0: 1, 1: 1}, {1: [[2]]}))
    assert H[0].torsion == (2,)
    assert H[0].free_rank == 0
    assert H[1].is_zero


def test_homology_refuses_group_rings(z3):
    C = ChainComplex.concentrated(z3, 0, 1)
    with pytest.raises(UnsupportedRingError):
        homology_z(C)


def test_mapping_cone_of_zero_map():
    Z = chain_complex_of_lists({0: 1}, {})
    cone = mapping_cone(ChainMap(Z, Z, 0, {}))
    H = homology_z(cone)
    assert H[0].describe() == "Z"
    assert H[1].describe() == "Z"


def test_mapping_cone_of_multiplication_by_two():
    Z = chain_complex_of_lists({0: 1}, {})
    H = homology_z(mapping_cone(ChainMap(Z, Z, 0, {0: ExactMatrix.integer([[2]])})))
    assert H[0].describe() == "Z/2"
    assert H[1].is_zero


def test_cone_of_random_chain_map_is_a_complex(rng):
    for _ in range(4):
        C, D = random_complex(rng, 0, 2), random_complex(rng, 0, 3)
        f = random_chain_map(rng, C, D)
        assert f.is_chain_map()
        assert verify_complex(mapping_cone(f))["valid"]
        assert cone_inclusion(f).is_chain_map()


@given(st.integers(0, 10_000), st.integers(-2, 3))
def test_dual_complex_squares_to_zero(seed, n):
    C = random_complex(random.Random(seed), -1, 2)
    assert verify_complex(dual_complex(C, n))["valid"]
    assert double_dual_identification(C, n).is_chain_map()


def test_dual_map_is_a_chain_map(rng):
    C, D = random_complex(rng, 0, 2), random_complex(rng, 0, 2)
    f = random_chain_map(rng, C, D)
    assert dual_map(f, 3).is_chain_map()


def test_hom_complex_differential_squares_to_zero(rng):
    C, D = random_complex(rng, 0, 2), random_complex(rng, -1, 1)
    flat = HomComplex(C, D).as_chain_complex()
    assert verify_complex(flat)["valid"]


def test_chain_maps_are_hom_cycles(rng):
    C, D = random_complex(rng, 0, 2), random_complex(rng, 0, 2)
    f = random_chain_map(rng, C, D)
    hom = HomComplex(C, D)
    cycle = chain_map_as_cycle(f)
    assert hom.is_cycle(cycle, 0)
    assert cycle_as_chain_map(hom, cycle).equals(f)


def test_contraction_of_acyclic_complex(rng):
    C = random_acyclic_complex(rng, 0, 2)
    result = chain_contraction_z(C)
    assert result.contractible
    assert result.homotopy.verifies(C.identity(), ChainMap(C, C, 0, {}))


def test_contraction_reports_homology_witness():
    result = chain_contraction_z(chain_complex_of_lists({0: 1, 1: 1}, {1: [[2]]}))
    assert not result.contractible
    assert result.witness.degree == 0
    assert result.witness.torsion == (2,)


def test_identity_is_a_quasi_isomorphism(rng):
    C = random_complex(rng, 0, 3)
    assert is_quasi_isomorphism_z(C.identity())
    assert is_acyclic_z(mapping_cone(C.identity()))


def test_direct_sum_adds_ranks(rng):
    A, B = random_complex(rng, 0, 2), triangle_boundary()
    S = direct_sum([A, B])
    assert all(S.rank(r) == A.rank(r) + B.rank(r) for r in range(0, 3))
    assert verify_complex(S)["valid"]


def test_shift_keeps_homology():
    C = triangle_boundary().shift(2)
    H = homology_z(C)
    assert H[2].describe() == "Z" and H[3].describe() == "Z"
