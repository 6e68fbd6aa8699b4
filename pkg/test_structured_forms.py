#!/usr/bin/env python3
"""Quadratic complexes, pairs, Thom and thickening, W-tensor pairing and the sign search."""

import random

import pytest

from core.exceptions import InvalidStructureError, UnsupportedRingError
from core.signs import SignManifest
from modules.chain_algebra import (ChainComplex, ChainMap, chain_contraction_z, homology_z, random_chain_map,
                                   random_complex, verify_complex)
from modules.exact_core import ExactMatrix, RingSpec
from modules.structured_forms import (QuadraticComplex, QuadraticPair, algebraic_thom, boundary_thickening,
                                      direct_sum_quadratic, form_complex, hyperbolic_form, interval_pair,
                                      is_poincare_pair_z, is_poincare_z, omega_i, random_pair, random_quadratic,
                                      reproduces_manifest, search_thickening_signs, symmetrize, t_dual, unit_structure,
                                      verify_quadratic, verify_quadratic_pair, w_tensor, zero_source_pair)

E8 = [[2, -1, 0, 0, 0, 0, 0, 0], [-1, 2, -1, 0, 0, 0, 0, 0], [0, -1, 2, -1, 0, 0, 0, -1],
      [0, 0, -1, 2, -1, 0, 0, 0], [0, 0, 0, -1, 2, -1, 0, 0], [0, 0, 0, 0, -1, 2, -1, 0],
      [0, 0, 0, 0, 0, -1, 2, 0], [0, 0, -1, 0, 0, 0, 0, 2]]


def upper_half(matrix):
    """psi with psi + psi^T = matrix (diagonal halved)."""
    n = len(matrix)
    return [[matrix[i][j] if j > i else (matrix[i][i] // 2 if i == j else 0) for j in range(n)] for i in range(n)]


def small_quadratics(seed=7, count=6):
    out = []
    for t in range(count):
        rng = random.Random(seed + t)
        out.append(random_quadratic(rng, random_complex(rng, 0, 2, 2), t % 4))
    return out


def test_random_quadratics_are_valid():
    for q in small_quadratics():
        assert verify_quadratic(q)["valid"]


def test_junk_psi1_fails_at_s_zero():
    ring = RingSpec.integers()
    C = ChainComplex.concentrated(ring, 0, 2)
    q = QuadraticComplex(C, 1, {(1, 0): ExactMatrix.integer([[0, 1], [0, 0]])})
    report = verify_quadratic(q)
    assert not report["valid"]
    first = report["failures"][0]
    assert (first["s"], first["p"]) == (0, 0)
    assert first["residual"] == [[0, 1], [-1, 0]]


def test_t_dual_is_an_involution(rng):
    C = random_complex(rng, 0, 2)
    family = {p: ExactMatrix.integer([[rng.randint(-2, 2) for _ in range(C.rank(p))]
                                      for _ in range(C.rank(3 - p))]) if C.rank(3 - p) else
              ExactMatrix.zeros(C.ring, 0, C.rank(p)) for p in C.degrees()}
    twice = t_dual(C, 3, t_dual(C, 3, family))
    assert all(twice[p] == family[p] for p in C.degrees())


def test_symmetrization_is_a_chain_map():
    for q in small_quadratics(seed=31):
        assert symmetrize(q).is_chain_map()


def test_symmetrization_of_unit_form():
    q = form_complex([[1]])
    phi = symmetrize(q)
    assert phi.at(0).to_int_list() == [[2]]
    report = is_poincare_z(q)
    assert not report.is_poincare
    assert report.witness.degree == 0
    assert report.witness.torsion == (2,)


def test_hyperbolic_form_is_poincare():
    q = hyperbolic_form()
    assert symmetrize(q).at(0).to_int_list() == [[0, 1], [1, 0]]
    assert is_poincare_z(q).is_poincare


def test_e8_form_is_poincare():
    q = form_complex(upper_half(E8))
    assert symmetrize(q).at(0).to_int_list() == E8
    assert is_poincare_z(q).is_poincare


def test_symmetrize_rejects_invalid_input():
    ring = RingSpec.integers()
    q = QuadraticComplex(ChainComplex.concentrated(ring, 0, 2), 1,
                         {(1, 0): ExactMatrix.integer([[0, 1], [0, 0]])})
    with pytest.raises(InvalidStructureError) as err:
        symmetrize(q)
    assert err.value.failures


def test_poincare_over_group_ring_is_unsupported(z3):
    C = ChainComplex.concentrated(z3, 0, 1)
    q = QuadraticComplex(C, 0, {(0, 0): ExactMatrix.from_rows(z3, [[1]])})
    with pytest.raises(UnsupportedRingError):
        is_poincare_z(q)


def test_thickening_of_unit_form_has_two_torsion():
    pair = boundary_thickening(form_complex([[1]]))
    H = homology_z(pair.source)
    assert H[-1].torsion == (2,)
    assert H[0].is_zero


def test_thickening_of_skew_degree_one_form():
    # psi_0 = (1) on Z in degree 1 with n = 2 symmetrizes to zero
    q = form_complex([[1]], degree=1)
    assert symmetrize(q).at(1).is_zero()
    H = homology_z(boundary_thickening(q).source)
    assert H[0].describe() == "Z"
    assert H[1].describe() == "Z"


def test_thickening_outputs_valid_poincare_pairs():
    for q in small_quadratics(seed=53):
        pair = boundary_thickening(q)
        assert verify_complex(pair.source)["valid"]
        assert verify_quadratic_pair(pair)["valid"]
        assert is_poincare_pair_z(pair).is_poincare


def test_poincare_input_has_contractible_boundary():
    q = direct_sum_quadratic([hyperbolic_form(1, 1), hyperbolic_form(1, 1)])
    assert is_poincare_z(q).is_poincare
    assert chain_contraction_z(boundary_thickening(q).source).contractible


def test_thom_of_thickening_is_valid():
    for q in small_quadratics(seed=71, count=4):
        thom = algebraic_thom(boundary_thickening(q))
        assert verify_quadratic(thom)["valid"]


def test_thom_of_random_pair_is_valid():
    rng = random.Random(5)
    for n in (0, 1):
        C, D = random_complex(rng, 0, 1), random_complex(rng, 0, 2)
        pair = random_pair(rng, C, D, random_chain_map(rng, C, D), n)
        assert verify_quadratic_pair(pair)["valid"]
        assert verify_quadratic(algebraic_thom(pair))["valid"]


def test_zero_source_pair_round_trip():
    q = hyperbolic_form(1, 1)
    pair = zero_source_pair(q)
    assert verify_quadratic_pair(pair)["valid"]
    thom = algebraic_thom(pair)
    assert thom.complex == q.complex
    assert all(thom.block(s, p) == q.block(s, p) for (s, p) in q.psi)


def test_pair_validator_reports_broken_chain_map():
    Z = ChainComplex.from_data(RingSpec.integers(), {0: 1, 1: 1}, {1: ExactMatrix.integer([[1]])})
    point = ChainComplex.concentrated(RingSpec.integers(), 1, 1)
    f = ChainMap(point, Z, 0, {1: ExactMatrix.integer([[1]])})
    report = verify_quadratic_pair(QuadraticPair(f, 0, {}, {}))
    assert report["failures"][0]["kind"] == "chain_map"


def test_omega_interval_components():
    witness = omega_i()
    assert witness.verify()["valid"]
    assert witness.component(0, 0).to_int_list() == [[1], [0]]
    assert witness.component(1, 1).to_int_list() == [[-1]]


def test_tensor_with_unit_is_identity():
    for q in small_quadratics(seed=11, count=4):
        out = w_tensor(q, unit_structure())
        assert out.n == q.n
        assert out.complex == q.complex
        assert all(out.block(s, p) == q.block(s, p) for s in range(q.top_s + 1) for p in q.complex.degrees())


def test_interval_pair_is_valid():
    for q in small_quadratics(seed=17, count=4):
        assert verify_quadratic_pair(interval_pair(q))["valid"]


def test_sign_search_reproduces_manifest():
    result = search_thickening_signs()
    assert result.unique
    assert result.survivors[0].dual_block == -1
    assert result.survivors[0].higher_s == (1, 1, 1)
    assert reproduces_manifest(result)
    assert SignManifest.sign("thickening.dual_block") == -1
