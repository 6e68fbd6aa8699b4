#!/usr/bin/env python3
"""Ordered complexes, dual cells, upper closed sets, L⊗[0,1], distance bands and finite covers."""

import random

import pytest
from hypothesis import given, strategies as st

from core.exceptions import CoverError, SimplicialError
from modules.chain_algebra import homology_z
from modules.exact_core import RingSpec
from modules.simplicial_geometry import (OrderedComplex, SphereEmbedding, UpperClosedSet, build_cover,
                                         cyclic_cycle_cover, distance_function, dual_cell_data,
                                         dual_incidence_exhaustive, full_dual_complex, incidence_number,
                                         is_upper_closed, product_interval, random_ordered_complex, trivial_cover,
                                         upper_closed_calculus)


def test_incidence_number_examples():
    assert incidence_number([0, 2], [0, 1, 2]) == 1
    assert incidence_number([1, 2], [0, 1, 2]) == 0
    assert incidence_number([0, 1], [0, 1, 2]) == 2


def test_incidence_number_rejects_non_faces():
    with pytest.raises(SimplicialError):
        incidence_number([0, 3], [0, 1, 2])
    with pytest.raises(SimplicialError):
        incidence_number([0], [0, 1, 2])


def test_complex_must_be_closed_under_faces():
    with pytest.raises(SimplicialError):
        OrderedComplex(((0, 1),))


def test_parse_round_trip_and_homology():
    K = OrderedComplex.parse("# hollow triangle\n0 1\n1 2\n0 2\n")
    assert K == OrderedComplex.simplex_boundary(2)
    assert OrderedComplex.parse(K.serialize()) == K
    H = homology_z(K.chain_complex())
    assert H[0].describe() == "Z"
    assert H[1].describe() == "Z"


def test_boundary_of_simplex_is_a_sphere():
    H = homology_z(OrderedComplex.simplex_boundary(4).chain_complex())
    assert [H[k].free_rank for k in range(4)] == [1, 0, 0, 1]


def test_dual_cell_of_a_vertex():
    D = full_dual_complex(1)
    assert D.dual((0,)) == (1, 2)
    assert D.undual((1, 2)) == (0,)
    assert D.cell_dim((0,)) == 1


def test_j_tables():
    D = full_dual_complex(2)
    assert D.j_map((1,)) == (0, 2, 3)
    assert D.j_all((1,)) == 5
    assert incidence_number((1,), (1, 2)) == 1
    assert D.dual_incidence((1,), (1, 2)) == 1
    assert D.j_all((1,)) - D.j_all((1, 2)) == 2


def test_dual_incidence_holds_exhaustively():
    report = dual_incidence_exhaustive(5)
    assert report["valid"], report["failures"][:3]
    assert report["checked"] > 0


def test_duality_reverses_order():
    assert full_dual_complex(3).check_order_reversal()["valid"]


def test_dual_cells_of_an_embedded_path():
    emb = SphereEmbedding(OrderedComplex.path(1), 2, {0: 1, 1: 3})
    D = dual_cell_data(emb)
    assert (1, 3) in D.embedded
    assert all({1, 3} & set(s) for s in D.simplices)
    assert (0, 2) not in D.simplices
    assert D.check_dual_incidence()["valid"]


def test_embedding_must_preserve_order():
    with pytest.raises(SimplicialError):
        SphereEmbedding(OrderedComplex.path(1), 2, {0: 3, 1: 1})
    with pytest.raises(SimplicialError):
        SphereEmbedding(OrderedComplex.path(1), 0, {0: 0, 1: 1})


def test_upper_closed_calculus_on_a_vertex_star():
    host = OrderedComplex.from_facets([(0, 1, 2)])
    S = UpperClosedSet.generated_by(host, [(0,)])
    assert S.simplices == {(0,), (0, 1), (0, 2), (0, 1, 2)}
    calc = upper_closed_calculus(S)
    assert calc.closure == frozenset(host.simplices)
    assert calc.boundary == {(1,), (2,), (1, 2)}
    assert calc.interior == {(0,)}
    assert calc.complement == calc.boundary


def test_upper_closed_rejects_missing_cofaces():
    host = OrderedComplex.from_facets([(0, 1, 2)])
    assert not is_upper_closed(host, [(0,), (0, 1)])
    with pytest.raises(SimplicialError):
        UpperClosedSet(host, frozenset({(0,), (0, 1)}))


def test_product_with_interval():
    P = product_interval(OrderedComplex.path(1))
    assert P.offset == 2
    assert set(P.product.facets()) == {(0, 2, 3), (0, 1, 3)}
    assert set(P.b_sigma((0,))) == {(0, 2), (0, 3), (0, 2, 3)}
    assert P.b_sigma((0, 1)) == [(0, 1, 3)]
    assert P.level1((0, 1, 3)) == (1,)
    assert P.check_partition()["valid"]
    assert (2, 3, 4) in P.capped()


def test_product_partition_on_random_complexes(rng):
    for _ in range(4):
        L = random_ordered_complex(rng, 5, 2, 3)
        assert product_interval(L).check_partition()["valid"]


def test_product_offset_must_clear_vertices():
    with pytest.raises(SimplicialError):
        product_interval(OrderedComplex.path(2), offset=2)


def test_distance_on_one_edge():
    F = distance_function(OrderedComplex.path(1), [(0,)])
    assert (F.distances[0], F.distances[1]) == (0, 1)
    assert F.band(1) == [(1,), (0, 1)]


def test_distance_along_a_path():
    F = distance_function(OrderedComplex.path(3), [(0,)])
    assert [F.distances[v] for v in range(4)] == [0, 1, 2, 3]
    assert F.check()["valid"]
    assert F.sublevel(1) == [(0,), (1,), (0, 1)]


@given(st.integers(min_value=0, max_value=10_000))
def test_distance_bands_are_lipschitz(seed):
    rng = random.Random(seed)
    K = OrderedComplex.from_facets([(0, 1)] + [sorted(rng.sample(range(6), 2)) for _ in range(8)]
                                   + [(i, i + 1) for i in range(5)])
    assert distance_function(K, [(0,)]).check()["valid"]


def test_distance_needs_reachable_boundary():
    K = OrderedComplex.from_facets([(0, 1), (2, 3)])
    with pytest.raises(SimplicialError):
        distance_function(K, [(0,)])
    with pytest.raises(SimplicialError):
        distance_function(K, [])


def test_trivial_cover():
    cover = trivial_cover(OrderedComplex.simplex_boundary(2))
    assert cover.order == 1
    assert cover.lifts((0, 1)) == {0: (0, 1)}
    assert cover.gamma((0,), (0, 1)) == [0]


def test_hexagon_over_triangle():
    cover = cyclic_cycle_cover(3, 2)
    assert cover.order == 2
    assert len(cover.total) == 12
    for tau in cover.base:
        for sigma in cover.base.faces(tau):
            assert len(cover.gamma(sigma, tau)) == 1
        for g, lift in cover.lifts(tau).items():
            assert cover.project(lift) == tau
            assert cover.locate(lift) == (tau, g)


def test_cover_rejects_fixed_simplices():
    action = {0: {0: 0, 1: 1, 2: 2}, 1: {0: 2, 1: 1, 2: 0}}
    with pytest.raises(CoverError):
        build_cover(OrderedComplex.path(1), OrderedComplex.path(2), RingSpec.cyclic(2), action,
                    {0: 0, 1: 1, 2: 0})


def test_cover_needs_a_finite_group():
    K = OrderedComplex.path(1)
    with pytest.raises(CoverError):
        build_cover(K, K, RingSpec.integers(), {0: {0: 0, 1: 1}}, {0: 0, 1: 1})
