#!/usr/bin/env python3
"""K-based complexes: duality T, quadratic structures, local duals, L⊗[0,1] pairs, cylinders, covers and assembly."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from core.exceptions import CoverError, InvalidStructureError, SimplicialError, SuspensionError
from modules.chain_algebra import homology_z
from modules.simplicial_geometry import (OrderedComplex, SphereEmbedding, UpperClosedSet, complement,
                                         cyclic_cycle_cover, distance_function, product_interval,
                                         random_ordered_complex, split_cover, trivial_cover)
from modules.k_based import (Dual, Generator, KBasedComplex, KeyedMatrix, KQuadraticStructure, Variance,
                             a_part_complex, assemble, assemble_morphism, band_blocks, check_a_part_functor,
                             check_assembled_upsilon, check_duality_axioms, check_mho_identity,
                             check_pair_relation, check_partial_functor, check_structure_transfer, check_upsilon,
                             compact_supported_dual, componentwise_poincare, cover_quadratic_pair, cylinder_ad,
                             duality_t, hyperbolic_seed, infinite_transfer_finite, is_convex, lift_structure,
                             local_dual, local_dual_inverse, mho_sigma, partial_assembly, random_k_based_complex,
                             random_k_morphism, random_k_quadratic, relative_delta_poincare, restrict_to_l,
                             structure_band_blocks, t_key, transfer_commutes_with_duality, verify_k_quadratic)


def point_complex():
    return KBasedComplex(((0,),), Variance.COVARIANT, (Generator("e", (0,), 0),))


def product_setup(seed, vertices):
    """Hyperbolic seed on L⊗[0,1] for L a point (1 vertex) or an edge (2 vertices)."""
    rng = random.Random(seed)
    decomp = product_interval(OrderedComplex.path(vertices - 1))
    D = random_k_based_complex(rng, decomp.product, Variance.COVARIANT, 0, 1, 1)
    theta = hyperbolic_seed(D, rng.randint(0, 3), rng, top=3)
    return decomp, theta


SETUPS = [(11, 1), (12, 2), (13, 1), (14, 2)]


# duality T

def test_duality_of_a_point():
    TC = duality_t(point_complex())
    assert TC.keys() == [t_key((0,), "e")]
    assert TC.degree(t_key((0,), "e")) == 0
    assert TC.d.is_zero()


def test_duality_of_an_edge_generator():
    C = KBasedComplex(OrderedComplex.path(1), Variance.COVARIANT, (Generator("e", (0, 1), 1),))
    TC = duality_t(C)
    assert {TC.simplex(k) for k in TC.keys()} == {(0,), (1,), (0, 1)}
    assert TC.degree(t_key((0, 1), "e")) == -2
    assert TC.degree(t_key((0,), "e")) == -1
    assert TC.verify()["valid"]


@pytest.mark.parametrize("variance", [Variance.COVARIANT, Variance.CONTRAVARIANT])
def test_duality_axioms_on_random_complexes(variance):
    for seed in range(3):
        rng = random.Random(seed)
        C = random_k_based_complex(rng, OrderedComplex.simplex_boundary(2), variance, 0, 1, 1)
        assert C.verify()["valid"]
        assert check_duality_axioms(C)["valid"]


@given(st.integers(0, 10**6), st.sampled_from([Variance.COVARIANT, Variance.CONTRAVARIANT]))
@settings(max_examples=100)
def test_duality_axioms_on_random_hosts(seed, variance):
    rng = random.Random(seed)
    host = random_ordered_complex(rng, rng.randint(2, 4), 2, rng.randint(1, 3))
    C = random_k_based_complex(rng, host, variance, 0, 1, 1)
    report = check_duality_axioms(C)
    assert report["valid"], report["failures"]


def test_unknown_generator_in_differential_is_rejected():
    d = KeyedMatrix()
    d.add("x", "e", 1)
    with pytest.raises(InvalidStructureError):
        KBasedComplex(((0,),), Variance.COVARIANT, (Generator("e", (0,), 1),), d)


def test_generator_off_the_host_is_rejected():
    with pytest.raises(SimplicialError):
        KBasedComplex(((0,),), Variance.COVARIANT, (Generator("e", (1,), 0),))


# quadratic structures

@given(st.integers(0, 10_000), st.integers(0, 3))
@settings(max_examples=10)
def test_random_k_quadratic_satisfies_relation(seed, n):
    rng = random.Random(seed)
    C = random_k_based_complex(rng, OrderedComplex.path(1), Variance.COVARIANT, 0, 1, 1)
    assert verify_k_quadratic(random_k_quadratic(rng, C, n, top=2))["valid"]


def test_hyperbolic_seed_is_poincare():
    for seed in range(3):
        rng = random.Random(seed)
        D = random_k_based_complex(rng, OrderedComplex.path(1), Variance.COVARIANT, 0, 1, 1)
        q = hyperbolic_seed(D, seed % 3, rng)
        assert verify_k_quadratic(q)["valid"]
        assert componentwise_poincare(q)["valid"]


def test_hyperbolic_seed_needs_covariance():
    C = random_k_based_complex(random.Random(1), OrderedComplex.path(1), Variance.CONTRAVARIANT)
    with pytest.raises(InvalidStructureError):
        hyperbolic_seed(C, 1)


# local duality

def local_setup(seed):
    rng = random.Random(seed)
    K = OrderedComplex.path(1)
    D = random_k_based_complex(rng, K, Variance.COVARIANT, 0, 1, 1)
    return hyperbolic_seed(D, 1 + seed % 2, rng), SphereEmbedding.identity(K)


def test_local_dual_round_trip():
    for seed in range(3):
        q, emb = local_setup(seed)
        back = local_dual_inverse(local_dual(q, emb), emb)
        assert back.n == q.n
        assert all(back.component(u) == q.component(u) for u in range(q.top + 1))


def test_local_dual_keeps_relation_and_poincare():
    for seed in range(3):
        q, emb = local_setup(seed)
        ld = local_dual(q, emb)
        assert ld.complex.variance is Variance.CONTRAVARIANT
        assert ld.n == q.n - emb.l
        assert verify_k_quadratic(ld)["valid"]
        assert componentwise_poincare(ld)["valid"]


def test_local_dual_of_zero_is_zero():
    K = OrderedComplex.path(1)
    C = KBasedComplex.zero(K)
    q = KQuadraticStructure(C, duality_t(C), 2, {})
    assert local_dual(q, SphereEmbedding.identity(K)).is_zero()


def test_local_dual_rejects_contravariant_input():
    q, emb = local_setup(0)
    with pytest.raises(InvalidStructureError):
        local_dual(local_dual(q, emb), emb)


LOCAL_HOSTS = [OrderedComplex.path(1), OrderedComplex.path(2), OrderedComplex.simplex_boundary(2)]


@given(st.integers(0, 10**6), st.sampled_from(LOCAL_HOSTS), st.integers(1, 3))
@settings(max_examples=50)
def test_local_dual_of_random_poincare_complexes(seed, host, n):
    rng = random.Random(seed)
    D = random_k_based_complex(rng, host, Variance.COVARIANT, 0, 1, 1)
    q = hyperbolic_seed(D, n, rng)
    emb = SphereEmbedding.identity(host)
    ld = local_dual(q, emb)
    assert verify_k_quadratic(ld)["valid"]
    assert componentwise_poincare(ld)["valid"]
    back = local_dual_inverse(ld, emb)
    assert back.n == q.n
    assert all(back.component(u) == q.component(u) for u in range(q.top + 1))


def relative_setup(seed):
    """Structure on the path 0-1-2 with nothing over the vertex 0."""
    rng = random.Random(seed)
    K = OrderedComplex.path(2)
    D = random_k_based_complex(rng, K, Variance.COVARIANT, 0, 1, 1).restrict(lambda g: g.simplex != (0,))
    return random_k_quadratic(rng, D, 1 + seed % 2, top=2), SphereEmbedding.identity(K)


def test_relative_local_dual():
    L = [(0,)]
    for seed in range(4):
        q, emb = relative_setup(seed)
        ld = local_dual(q, emb, L)
        assert verify_k_quadratic(ld)["valid"]
        assert complement(emb.image((0,)), emb.l) in ld.complex.host
        assert all(ld.component(u) == local_dual(q, emb).component(u) for u in range(q.top + 1))
        back = local_dual_inverse(ld, emb, L)
        assert all(back.component(u) == q.component(u) for u in range(q.top + 1))


def test_relative_local_dual_needs_the_complex_to_vanish_over_l():
    q = KQuadraticStructure(point_complex(), duality_t(point_complex()), 0, {})
    emb = SphereEmbedding.identity(OrderedComplex.path(0))
    with pytest.raises(SimplicialError, match="sits over L_c"):
        local_dual(q, emb, [(0,)])


def test_relative_local_dual_needs_a_subcomplex():
    q, emb = relative_setup(0)
    with pytest.raises(SimplicialError, match="closed under faces"):
        local_dual(q, emb, [(0, 1)])


# L⊗[0,1]: ℧_σ, pairs and the restriction to L

@pytest.mark.parametrize("seed,vertices", SETUPS)
def test_mho_is_a_chain_equivalence(seed, vertices):
    decomp, theta = product_setup(seed, vertices)
    for sigma in decomp.L:
        mho = mho_sigma(theta.complex, decomp, sigma, theta.dual)
        assert mho.is_chain_map()
        assert mho.cone_is_acyclic()
        assert check_mho_identity(theta, decomp, sigma)["valid"]


@pytest.mark.parametrize("seed,vertices", SETUPS)
def test_pairs_over_l(seed, vertices):
    decomp, theta = product_setup(seed, vertices)
    for sigma in decomp.L:
        assert check_pair_relation(theta, decomp, sigma)["valid"]
        assert relative_delta_poincare(theta, decomp, sigma)["valid"]


@given(st.integers(0, 10**6), st.integers(1, 2))
@settings(max_examples=50)
def test_pairs_over_l_on_random_seeds(seed, vertices):
    decomp, theta = product_setup(seed, vertices)
    for sigma in decomp.L:
        mho = mho_sigma(theta.complex, decomp, sigma, theta.dual)
        assert mho.is_chain_map() and mho.cone_is_acyclic()
        assert check_pair_relation(theta, decomp, sigma)["valid"]
        assert relative_delta_poincare(theta, decomp, sigma)["valid"]


def test_mho_needs_a_simplex_of_l():
    decomp, theta = product_setup(11, 1)
    with pytest.raises(SimplicialError):
        mho_sigma(theta.complex, decomp, (1,))


@pytest.mark.parametrize("seed,vertices", SETUPS)
def test_restriction_to_l(seed, vertices):
    decomp, theta = product_setup(seed, vertices)
    q = restrict_to_l(theta, decomp)
    assert q.n == theta.n - 1
    assert set(q.complex.host) == set(decomp.L.simplices)
    assert verify_k_quadratic(q)["valid"]
    assert componentwise_poincare(q)["valid"]


def test_a_part_is_a_functor(rng):
    decomp = product_interval(OrderedComplex.path(1))
    D0, D1, D2 = (random_k_based_complex(rng, decomp.product, Variance.COVARIANT, 0, 1, 1) for _ in range(3))
    f = random_k_morphism(rng, D0, D1)
    g = random_k_morphism(rng, D1, D2)
    assert check_a_part_functor(f, g, D0, D1, D2, decomp)["valid"]
    assert a_part_complex(D0, decomp).verify()["valid"]


def test_a_part_keeps_chain_maps(rng):
    decomp = product_interval(OrderedComplex.path(1))
    D = random_k_based_complex(rng, decomp.product, Variance.COVARIANT, 0, 1, 1)
    ident = KeyedMatrix.identity(D.keys())
    assert check_a_part_functor(ident, ident, D, D, D, decomp)["valid"]


# cylinder

@pytest.mark.parametrize("seed,vertices", SETUPS)
def test_cylinder_cells_close_up(seed, vertices):
    decomp, theta = product_setup(seed, vertices)
    report = cylinder_ad(theta, decomp).verify()
    assert report["valid"], report["failures"]
    assert report["cells"] == len(decomp.interior()) + 2 * len(decomp.L)


@given(st.integers(0, 10**6), st.integers(1, 2))
@settings(max_examples=30)
def test_cylinder_on_random_seeds(seed, vertices):
    decomp, theta = product_setup(seed, vertices)
    report = cylinder_ad(theta, decomp).verify()
    assert report["valid"], report["failures"]


def test_cylinder_on_zero_is_zero():
    decomp = product_interval(OrderedComplex.path(1))
    D = KBasedComplex.zero(decomp.product)
    cyl = cylinder_ad(KQuadraticStructure(D, duality_t(D), 2, {}), decomp)
    assert all(cell.is_zero() for cell in cyl.cells())
    assert cyl.verify()["valid"]


def test_cylinder_orientation_is_a_sign():
    decomp, theta = product_setup(11, 1)
    with pytest.raises(InvalidStructureError):
        cylinder_ad(theta, decomp, orientation=2)


# quadratic pairs from an upper closed set

@pytest.mark.parametrize("seed,vertices", SETUPS)
def test_cover_pair_off_l(seed, vertices):
    rng = random.Random(seed)
    decomp = product_interval(OrderedComplex.path(vertices - 1))
    K = decomp.capped()
    S = UpperClosedSet(K, frozenset(s for s in K if s not in decomp.L))
    D = random_k_based_complex(rng, K, Variance.COVARIANT, 0, 1, 1)
    theta = hyperbolic_seed(D, rng.randint(0, 3), rng, top=3)
    pair = cover_quadratic_pair(theta, S)
    report = pair.verify()
    assert report["valid"], report["failures"]
    assert pair.boundary_keys | pair.interior_keys == pair.all_keys


def test_cover_pair_needs_matching_host():
    decomp, theta = product_setup(11, 1)
    K = OrderedComplex.path(2)
    with pytest.raises(SimplicialError):
        cover_quadratic_pair(theta, UpperClosedSet.generated_by(K, [(0,)]))


@pytest.mark.parametrize("seed,vertices", SETUPS)
def test_cover_pair_over_two_sheets(seed, vertices):
    rng = random.Random(seed)
    decomp = product_interval(OrderedComplex.path(vertices - 1))
    K = decomp.capped()
    S = UpperClosedSet(K, frozenset(s for s in K if s not in decomp.L))
    D = random_k_based_complex(rng, K, Variance.COVARIANT, 0, 1, 1)
    theta = hyperbolic_seed(D, rng.randint(0, 3), rng, top=3)
    pair = cover_quadratic_pair(theta, S, split_cover(K, 2))
    report = pair.verify()
    assert report["valid"], report["failures"]
    assert len(pair.all_keys) == 2 * len(pair.assembly_basis())


def test_cover_pair_over_the_hexagon():
    cover = cyclic_cycle_cover(3, 2)
    S = UpperClosedSet(cover.base, frozenset(s for s in cover.base if s != (1,)))
    for seed in range(3):
        rng = random.Random(seed)
        theta = hyperbolic_seed(random_base_complex(seed), seed % 3, rng, top=3)
        pair = cover_quadratic_pair(theta, S, cover)
        report = pair.verify()
        assert report["valid"], report["failures"]
        assert pair.S.simplices == cover.preimage(S.simplices)
        psi, delta = pair.base_families()
        assert pair.augmented(pair.assembled_psi()[0]) == psi[0]
        assert all(pair.augmented(m) == delta[u] for u, m in pair.assembled_delta().items())


def test_cover_pair_with_the_trivial_cover_matches_the_base():
    decomp, theta = product_setup(12, 2)
    K = decomp.product
    S = UpperClosedSet.generated_by(K, [(0,)])
    pair = cover_quadratic_pair(theta, S)
    assert pair.cover.order == 1
    assert pair.verify()["valid"]
    psi, _ = pair.base_families()
    assert all(pair.augmented(m) == psi[u] for u, m in pair.assembled_psi().items())


def test_cover_pair_needs_a_cover_of_the_host():
    decomp, theta = product_setup(11, 1)
    K = decomp.capped()
    D = random_k_based_complex(random.Random(1), K, Variance.COVARIANT, 0, 1, 1)
    S = UpperClosedSet(K, frozenset(s for s in K if s not in decomp.L))
    with pytest.raises(CoverError):
        cover_quadratic_pair(hyperbolic_seed(D, 1), S, cyclic_cycle_cover(3, 2))


# assembly and transfer

def random_base_complex(seed, variance=Variance.COVARIANT, base=None):
    rng = random.Random(seed)
    return random_k_based_complex(rng, base or OrderedComplex.cycle(3), variance, 0, 1, 1)


def homology_table(C):
    return {r: h.describe() for r, h in homology_z(C).items()}


def test_trivial_cover_assembly_is_the_complex():
    for seed in range(3):
        C = random_base_complex(seed)
        A = assemble(C, trivial_cover(OrderedComplex.cycle(3)))
        assert homology_table(A.underlying()) == homology_table(C.chain_complex()[0])


def test_assembly_over_the_hexagon_is_the_transfer():
    cover = cyclic_cycle_cover(3, 2)
    for seed in range(3):
        C = random_base_complex(seed)
        A = assemble(C, cover)
        X = infinite_transfer_finite(C, cover)
        assert X.verify()["valid"]
        assert len(X) == cover.order * len(C)
        assert homology_table(A.underlying()) == homology_table(X.chain_complex()[0])


def test_assembled_identity_is_a_chain_map():
    cover = cyclic_cycle_cover(3, 2)
    C = random_base_complex(4)
    A = assemble(C, cover)
    f = assemble_morphism(KeyedMatrix.identity(C.keys()), A, A)
    assert f.is_chain_map()
    assert f.equals(A.complex.identity())


def test_assembly_commutes_with_compact_dual():
    cover = cyclic_cycle_cover(3, 2)
    for seed in range(3):
        C = random_base_complex(seed)
        left = assemble(C, cover).compact_dual()
        right = assemble(compact_supported_dual(C), cover).complex
        assert (left.lo, left.hi) == (right.lo, right.hi)
        assert all(left.diff(r) == right.diff(r) for r in range(left.lo + 1, left.hi + 1))


def test_upsilon_on_one_edge():
    C = KBasedComplex(OrderedComplex.path(1), Variance.COVARIANT, (Generator("e", (0, 1), 0),))
    assert check_upsilon(C)["valid"]


def test_upsilon_is_an_equivalence():
    cover = cyclic_cycle_cover(3, 2)
    for seed in range(3):
        C = random_base_complex(seed)
        assert check_upsilon(C)["valid"]
        assert check_assembled_upsilon(C, cover)["valid"]


SMALL_COMPLEXES = {
    "circle3": OrderedComplex.simplex_boundary(2),
    "circle4": OrderedComplex.cycle(4),
    "circle5": OrderedComplex.cycle(5),
    "circle6": OrderedComplex.cycle(6),
    "interval": OrderedComplex.path(3),
    "point": OrderedComplex.path(0),
    "cone_on_interval": OrderedComplex.from_facets([(0, 1, 3), (1, 2, 3)]),
    "cone_on_three_points": OrderedComplex.from_facets([(0, 3), (1, 3), (2, 3)]),
    "disk": OrderedComplex.from_facets([(0, 1, 2)]),
}


@pytest.mark.parametrize("name", sorted(SMALL_COMPLEXES))
def test_upsilon_over_small_complexes(name):
    K = SMALL_COMPLEXES[name]
    assert len(K) <= 12
    cover = trivial_cover(K)
    for seed in range(4):
        C = random_base_complex(seed, base=K)
        assert check_upsilon(C)["valid"]
        assert check_assembled_upsilon(C, cover)["valid"]


@pytest.mark.parametrize("variance", [Variance.COVARIANT, Variance.CONTRAVARIANT])
def test_transfer_commutes_with_duality(variance):
    cover = cyclic_cycle_cover(3, 2)
    for seed in range(2):
        assert transfer_commutes_with_duality(random_base_complex(seed, variance), cover)


def test_assembly_needs_matching_base():
    C = random_base_complex(0, base=OrderedComplex.path(1))
    with pytest.raises(CoverError):
        assemble(C, cyclic_cycle_cover(3, 2))


def test_convex_sets():
    K = OrderedComplex.from_facets([(0, 1, 2)])
    assert is_convex(K, [(0,), (0, 1)])
    assert is_convex(K, [(0, 1), (0, 1, 2)])
    assert not is_convex(K, [(0,), (0, 1, 2)])


def test_partial_assembly_rejects_non_convex_sets():
    K = OrderedComplex.from_facets([(0, 1, 2)])
    C = random_base_complex(0, base=K)
    with pytest.raises(SimplicialError):
        partial_assembly(C, [(0,), (0, 1, 2)], trivial_cover(K))


def test_partial_assembly_is_a_functor(rng):
    cover = cyclic_cycle_cover(3, 2)
    C0, C1, C2 = (random_k_based_complex(rng, cover.base, Variance.COVARIANT, 0, 1, 1) for _ in range(3))
    f = random_k_morphism(rng, C0, C1)
    g = random_k_morphism(rng, C1, C2)
    for S in ([(0,), (0, 1)], list(cover.base)):
        assert check_partial_functor(f, g, C0, C1, C2, S, cover)["valid"]


def test_partial_assembly_of_everything_is_assembly():
    cover = cyclic_cycle_cover(3, 2)
    C = random_base_complex(5)
    whole = partial_assembly(C, list(cover.base), cover).complex
    full = assemble(C, cover).complex
    assert all(whole.diff(r) == full.diff(r) for r in range(full.lo + 1, full.hi + 1))


def test_band_blocks_along_a_path():
    K = OrderedComplex.path(3)
    F = distance_function(K, [(0,)])
    C = random_base_complex(2, base=K)
    bands = band_blocks(C, F, 3)
    assert bands.is_bidiagonal()
    assert sum(len(keys) for keys in bands.bands.values()) == len(C)
    assert bands.block(0, 3).is_zero()


def test_band_blocks_over_the_hexagon():
    cover = cyclic_cycle_cover(3, 2)
    F = distance_function(cover.base, [(0,)])
    cutoff = F.max_distance
    for seed in range(3):
        C = random_base_complex(seed)
        over = band_blocks(C, F, cutoff, cover)
        assert not over.ring.is_integers
        assert over.is_bidiagonal()
        assert over.augmented().blocks == band_blocks(C, F, cutoff).blocks
        theta = hyperbolic_seed(C, 1, random.Random(seed))
        for u in range(theta.top + 1):
            blocks = structure_band_blocks(theta, u, F, cutoff, cover).augmented().blocks
            assert blocks == structure_band_blocks(theta, u, F, cutoff).blocks


def test_structure_transfer_to_the_hexagon():
    cover = cyclic_cycle_cover(3, 2)
    for seed in range(3):
        theta = hyperbolic_seed(random_base_complex(seed), seed % 3, random.Random(seed))
        report = check_structure_transfer(theta, cover)
        assert report["valid"], report["failures"]
        lifted = lift_structure(theta, cover)
        assert len(lifted.complex) == cover.order * len(theta.complex)
        assert componentwise_poincare(lifted)["valid"]


def test_band_blocks_reject_generators_past_the_cutoff():
    K = OrderedComplex.path(3)
    C = KBasedComplex(K, Variance.COVARIANT, (Generator("e", (3,), 0),))
    with pytest.raises(SuspensionError):
        band_blocks(C, distance_function(K, [(0,)]), 2)


def test_compact_supported_dual_flips_variance():
    C = random_base_complex(3)
    Ccd = compact_supported_dual(C)
    assert Ccd.variance is Variance.CONTRAVARIANT
    assert Ccd.verify()["valid"]
    assert all(Ccd.degree(Dual(k)) == -C.degree(k) for k in C.keys())
