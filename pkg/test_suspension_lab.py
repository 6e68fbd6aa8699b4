#!/usr/bin/env python3
"""Suspension ring, graded categories, reindexing, flasque shift, lifting, domination and transfer."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from core.exceptions import DimensionMismatchError, SuspensionError
from modules.chain_algebra import is_acyclic_z
from modules.exact_core import ExactMatrix, RingSpec
from modules.suspension_lab import (BandedMatrix, CosetMove, GradedChainComplex, GradedObject,
                                    GradedQuadraticComplex, GradedQuadraticPair, SuspensionElement, TransferData,
                                    addnull_witness, check_flasque, check_identification_laws, check_reindex_laws,
                                    check_theta_functor, check_transfer_homomorphism, class_identity, class_zero,
                                    cone_of_identity, cyclic_datum, essential_image_witness, finite_domination, fold,
                                    format_word, hom_as_suspension, integer_line_datum, lift_from_infinity, lift_pair,
                                    parse_word, plane_datum, random_banded, random_block, random_contractible,
                                    random_word_pairs, reindex_theta, reorder_to_standard, shift_up, sigma,
                                    sigma_inverse, suspension_morphism, suspension_object, theta_functor,
                                    transfer_matrix, transfer_rho, unfold, verify_graded_complex,
                                    verify_graded_pair, verify_graded_quadratic, verify_transfer_data)

ZZ = RingSpec.integers()
ONE = GradedObject.constant(1)


def scalar(v):
    return ExactMatrix.integer([[v]])


def corner(obj=ONE):
    """E_00 on obj."""
    return BandedMatrix.finite(ZZ, obj, obj, {(0, 0): ExactMatrix.identity(ZZ, obj.rank(0))})


def dense_product_entry(a, b, i, j, reach=40):
    acc = ExactMatrix.zeros(ZZ, a.target.rank(i), b.source.rank(j))
    for k in range(reach):
        acc = acc + a.entry(i, k) @ b.entry(k, j)
    return acc


# graded objects

def test_graded_object_folds_trailing_tail_entries():
    assert GradedObject((1, 2, 2), 2) == GradedObject((1,), 2)
    assert GradedObject((1,), 2).stable_from == 1
    assert GradedObject((1, 0, 3), 0).ranks(5) == [1, 0, 3, 0, 0]


def test_offsets_shift_and_truncation():
    M = GradedObject((1, 0, 2), 1)
    assert [M.offset(i) for i in range(6)] == [0, 1, 1, 3, 4, 5]
    assert M.shifted().ranks(5) == [0, 1, 0, 2, 1]
    assert M.truncate(2) == GradedObject.finite([1, 0, 2])
    assert GradedObject.finite([0, 2, 0]).max_support() == 1
    assert GradedObject.zero().max_support() == -1


def test_infinite_support_has_no_total_rank():
    with pytest.raises(SuspensionError):
        GradedObject.constant(1).total_rank()


# banded matrices

def test_product_agrees_with_blockwise_sums(rng):
    for _ in range(5):
        a, b = random_banded(rng), random_banded(rng)
        ab = a @ b
        for i in range(10):
            for j in range(10):
                assert ab.entry(i, j) == dense_product_entry(a, b, i, j)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_product_is_associative_and_dual_reverses_it(seed):
    rng = random.Random(seed)
    a, b, c = random_banded(rng), random_banded(rng), random_banded(rng)
    assert (a @ b) @ c == a @ (b @ c)
    assert (a @ b).dual() == b.dual() @ a.dual()
    assert a.dual().dual() == a


def test_reanchoring_keeps_every_entry(rng):
    a = random_banded(rng)
    moved = a.reanchored(a.row_head + 3, a.col_head + 1, (2, 2))
    assert moved == a
    assert all(moved.entry(i, j) == a.entry(i, j) for i in range(12) for j in range(12))


def test_mixed_slopes_cannot_be_compared_by_adding():
    a = BandedMatrix.identity(ZZ, ONE)
    steep = BandedMatrix(ZZ, ONE, ONE, 0, 0, (1, 2), {}, ({0: scalar(1)},))
    assert a != steep
    with pytest.raises(SuspensionError):
        a + steep


def test_keep_lower_right_zeroes_the_corner(rng):
    a = random_banded(rng)
    cut = a.keep_lower_right(2, 1)
    for i in range(10):
        for j in range(10):
            want = a.entry(i, j) if i > 2 and j > 1 else a.zero_block(i, j)
            assert cut.entry(i, j) == want
    assert cut.differs_only_within(a, 2, 1)
    assert cut.equivalent(a)


def test_suspension_classes_forget_finite_blocks(rng):
    a = random_banded(rng)
    E = BandedMatrix.finite(ZZ, ONE, ONE, {(3, 1): scalar(5)})
    assert SuspensionElement(a) == SuspensionElement(a + E)
    assert SuspensionElement(E).is_zero()
    assert SuspensionElement(a) != SuspensionElement(a + BandedMatrix.identity(ZZ, ONE))


def test_shift_is_an_isometry_up_to_a_corner():
    S = shift_up(ZZ)
    ident = BandedMatrix.identity(ZZ, ONE)
    assert S.dual() @ S == ident
    assert S @ S.dual() == ident - corner()


# reindexing and the identification with ΣM_{s,r}(R)

def test_theta_of_a_single_entry_is_the_entry(rng):
    a = random_banded(rng)
    assert reindex_theta([[a]]) == a


def test_theta_of_the_identity_grid_is_the_identity():
    ident, zero = BandedMatrix.identity(ZZ, ONE), BandedMatrix.zero(ZZ, ONE, ONE)
    theta = reindex_theta([[ident, zero], [zero, ident]])
    assert theta == BandedMatrix.identity(ZZ, GradedObject.constant(2))


def test_reindexing_laws_on_random_grids(rng):
    for _ in range(4):
        x = [[random_banded(rng) for _ in range(2)] for _ in range(2)]
        y = [[random_banded(rng)] for _ in range(2)]
        assert check_reindex_laws(x, y)["valid"]


def test_reindexing_laws_with_a_period_two_entry(rng):
    rho = transfer_matrix(integer_line_datum(), parse_word("x"))
    x = [[rho, random_banded(rng)], [random_banded(rng), rho.dual()]]
    y = [[random_banded(rng), rho], [rho, random_banded(rng)]]
    assert check_reindex_laws(x, y)["valid"]


def test_identity_class_maps_to_the_identity():
    obj = GradedObject.constant(2)
    assert hom_as_suspension(BandedMatrix.identity(ZZ, obj)) == SuspensionElement.identity(ZZ, obj)


def test_identification_laws_on_random_pairs(rng):
    obj = GradedObject.constant(2)
    for _ in range(4):
        f = random_banded(rng, target=obj, source=obj)
        g = random_banded(rng, target=obj, source=obj)
        assert check_identification_laws(f, g)["valid"]


def test_identification_needs_constant_ranks(rng):
    M = GradedObject((2,), 1)
    with pytest.raises(SuspensionError):
        hom_as_suspension(random_banded(rng, target=M, source=M))


def test_theta_functor_laws(rng):
    def grid(rows, cols):
        return [[SuspensionElement(random_banded(rng)) for _ in range(cols)] for _ in range(rows)]

    for _ in range(3):
        assert check_theta_functor(grid(2, 2), grid(1, 2), grid(2, 2))["valid"]
    assert theta_functor(class_identity(ZZ, 2)) == SuspensionElement.identity(ZZ, GradedObject.constant(2))
    assert theta_functor(class_zero(ZZ, 1, 3)).is_zero()


# flasque shift

def test_sigma_components_are_identities_below_the_diagonal():
    M = GradedObject.finite([1, 2])
    s = sigma(ZZ, M)
    for i in range(7):
        for j in range(7):
            block = s.entry(i, j)
            if i == j + 1:
                assert block == ExactMatrix.identity(ZZ, s.source.rank(j))
            else:
                assert block.is_zero()


def test_suspension_of_zero_is_zero():
    zero = GradedObject.zero()
    assert suspension_object(zero) == zero
    assert sigma(ZZ, zero).is_zero()


def test_suspension_object_accumulates_ranks():
    assert suspension_object(GradedObject.finite([1, 0, 2])).ranks(5) == [0, 1, 1, 3, 3]


def test_suspension_of_a_point_morphism_is_diagonal():
    M = GradedObject.finite([1])
    f = BandedMatrix.finite(ZZ, M, M, {(0, 0): scalar(2)})
    Sf = suspension_morphism(f)
    assert Sf.source == GradedObject((0,), 1)
    assert all(Sf.entry(i, i) == scalar(2) for i in range(1, 6))
    assert Sf.entry(3, 2).is_zero()


def test_sigma_is_inverted_by_the_transpose_shift():
    M = GradedObject.finite([2, 0, 1])
    s, s_inv = sigma(ZZ, M), sigma_inverse(ZZ, M)
    assert s_inv @ s == BandedMatrix.identity(ZZ, s.source)
    assert s @ s_inv == BandedMatrix.identity(ZZ, s.target)


@pytest.mark.parametrize("M,N", [
    ([1, 2], [0, 1, 1]),
    ([1], [1]),
    ([], [2]),
    ([0, 0, 1], []),
])
def test_flasque_identities(rng, M, N):
    M, N = GradedObject.finite(M), GradedObject.finite(N)
    entries = {(i, j): random_block(rng, ZZ, N.rank(i), M.rank(j))
               for i in range(N.stable_from) for j in range(M.stable_from) if N.rank(i) and M.rank(j)}
    f = BandedMatrix.finite(ZZ, N, M, entries)
    report = check_flasque(ZZ, M, N, f)
    assert report["valid"], report["failures"]


def test_flasque_needs_finite_support():
    with pytest.raises(SuspensionError):
        suspension_object(GradedObject.constant(1))


# reordering onto the standard object

def test_reordering_the_standard_object_is_the_identity():
    out = reorder_to_standard(ZZ, ONE)
    assert out.forward == BandedMatrix.identity(ZZ, ONE)
    assert out.verify()["valid"]


def test_rank_two_object_is_interleaved():
    out = reorder_to_standard(ZZ, GradedObject.constant(2))
    assert out.forward.period == (2, 1)
    assert out.forward.entry(4, 2) == ExactMatrix.integer([[1, 0]])
    assert out.forward.entry(5, 2) == ExactMatrix.integer([[0, 1]])
    assert out.forward.entry(5, 3).is_zero()
    assert out.verify()["valid"]


def test_reordering_an_irregular_head():
    out = reorder_to_standard(ZZ, GradedObject((1, 0, 2), 1))
    assert out.standard == ONE
    assert out.forward.entry(2, 2) == ExactMatrix.integer([[0, 1]])
    assert out.verify()["valid"]


def test_finite_support_collapses_to_index_zero():
    out = reorder_to_standard(ZZ, GradedObject.finite([1, 0, 2]))
    assert out.standard == GradedObject.finite([3])
    assert out.forward.entry(0, 2) == ExactMatrix.integer([[0, 0], [1, 0], [0, 1]])
    assert out.verify()["valid"]


def test_every_object_is_a_summand_of_the_standard_one():
    for M in (GradedObject.finite([2]), GradedObject((1, 3), 2)):
        out = essential_image_witness(ZZ, M)
        assert out.standard == ONE
        assert out.verify()["valid"]


# graded complexes and lifting

def bad_corner_complex():
    """C_2 = C_1 = C_0 = underline ℤ with d_2 = Id and d_1 = E_00: d² = E_00 is finite."""
    return GradedChainComplex(ZZ, 0, 2, {0: ONE, 1: ONE, 2: ONE},
                              {2: BandedMatrix.identity(ZZ, ONE), 1: corner()})


def test_corner_complex_is_a_complex_only_at_infinity():
    C = bad_corner_complex()
    assert not verify_graded_complex(C)["valid"]
    assert verify_graded_complex(C, at_infinity=True)["valid"]


def test_error_free_input_is_left_alone():
    C = GradedChainComplex(ZZ, 0, 1, {0: ONE, 1: ONE}, {1: shift_up(ZZ)})
    result = lift_from_infinity(GradedQuadraticComplex(C, 1))
    assert result.bounds == {0: -1, 1: -1}
    assert result.valid
    assert result.lifted.complex.diff(1) == C.diff(1)
    assert result.report["same_class"]


def test_bad_corner_is_cut_away():
    C = bad_corner_complex()
    result = lift_from_infinity(GradedQuadraticComplex(C, 2))
    assert result.bounds == {0: 0, 1: -1, 2: -1}
    assert result.valid
    assert result.report["same_class"]
    lifted = result.lifted.complex
    assert lifted.diff(1).is_zero()
    assert lifted.diff(2) == C.diff(2)


def test_bounds_that_are_too_small_are_rejected():
    with pytest.raises(SuspensionError):
        lift_from_infinity(GradedQuadraticComplex(bad_corner_complex(), 2), bounds={0: -1, 1: -1, 2: -1})


def test_periodic_square_cannot_be_lifted():
    ident = BandedMatrix.identity(ZZ, ONE)
    C = GradedChainComplex(ZZ, 0, 2, {0: ONE, 1: ONE, 2: ONE}, {2: ident, 1: ident})
    with pytest.raises(SuspensionError):
        lift_from_infinity(GradedQuadraticComplex(C, 2))


def test_lifting_a_pair_keeps_the_boundary():
    boundary = GradedQuadraticComplex(GradedChainComplex(ZZ, 0, 0, {0: ONE}), 0)
    pair = GradedQuadraticPair(boundary, bad_corner_complex(), {0: BandedMatrix.identity(ZZ, ONE)})
    assert not verify_graded_pair(pair)["valid"]
    result = lift_pair(pair)
    assert result.valid
    assert result.bounds == {0: 0, 1: -1, 2: -1}
    assert result.lifted.boundary is boundary
    f0 = result.lifted.map_at(0)
    assert f0.entry(0, 0).is_zero()
    assert f0.entry(3, 3) == scalar(1)


def test_addnull_witness_is_nonzero_in_the_chosen_degree():
    for r, n in ((0, 0), (1, 3), (2, 2)):
        q = addnull_witness(ZZ, r, n, rank=2)
        assert q.complex.obj(r) == GradedObject.constant(2)
        assert verify_graded_quadratic(q)["valid"]


def test_graded_complex_checks_differential_objects():
    with pytest.raises(DimensionMismatchError):
        GradedChainComplex(ZZ, 0, 1, {0: ONE, 1: GradedObject.constant(2)}, {1: BandedMatrix.identity(ZZ, ONE)})


# finite domination

def test_zero_complex_is_dominated_by_zero():
    result = finite_domination(GradedChainComplex(ZZ, 0, 1, {}), {})
    assert result.valid
    assert result.bounds == {0: -1, 1: -1}
    assert result.finite.total_rank() == 0


def test_cone_of_identity_is_dominated_by_a_contractible_finite_complex():
    C, T = cone_of_identity(ZZ)
    result = finite_domination(C, T)
    assert result.valid, result.report["failures"]
    assert result.bounds == {0: 0, 1: 0}
    assert result.finite.diff(1) == scalar(1)
    assert is_acyclic_z(result.finite)


def test_random_contractible_complexes_are_finitely_dominated():
    for seed in range(6):
        rng = random.Random(seed)
        C, T = random_contractible(rng, rank=1 + seed % 2)
        result = finite_domination(C, T)
        assert result.valid, result.report["failures"]


def test_domination_needs_a_contraction_at_infinity():
    C, _ = cone_of_identity(ZZ)
    with pytest.raises(SuspensionError):
        finite_domination(C, {})


def test_contraction_shape_is_checked():
    C, _ = cone_of_identity(ZZ)
    two = GradedObject.constant(2)
    with pytest.raises(DimensionMismatchError):
        finite_domination(C, {0: BandedMatrix.identity(ZZ, two)})


# transfer

def test_words_parse_and_reduce():
    assert parse_word("x^2 y^-1 y") == (("x", 1), ("x", 1))
    assert parse_word("1") == ()
    assert format_word(parse_word("x*y^-1")) == "x y^-1"
    with pytest.raises(SuspensionError):
        parse_word("x^y")


@given(st.integers(min_value=-500, max_value=500))
def test_fold_is_a_bijection(k):
    assert unfold(fold(k)) == k
    assert fold(unfold(abs(k))) == abs(k)


def test_line_generator_is_the_folded_shift():
    rho = transfer_matrix(integer_line_datum(), parse_word("x"))
    for i in range(20):
        for j in range(20):
            assert rho.entry(i, j) == scalar(1 if i == fold(unfold(j) + 1) else 0)
    expected = BandedMatrix(ZZ, ONE, ONE, 2, 2, (2, 2), {(0, 2): scalar(1), (1, 0): scalar(1), (3, 1): scalar(1)},
                            ({2: scalar(1)}, {-1: scalar(1)}))
    assert rho == expected


def test_powers_and_inverses_of_the_line_generator():
    data = integer_line_datum()
    square = transfer_matrix(data, parse_word("x^2"))
    assert all(square.entry(i, j) == scalar(1 if i == fold(unfold(j) + 2) else 0)
               for i in range(16) for j in range(16))
    assert transfer_matrix(data, (("x", 1), ("x", -1))) == BandedMatrix.identity(ZZ, ONE)


def test_identity_word_goes_to_the_identity_class():
    for data in (integer_line_datum(), plane_datum()):
        assert transfer_rho(data, [(1, ())]) == SuspensionElement.identity(data.pi_ring, ONE)


def test_plane_datum_sends_the_fibre_generator_to_t():
    data = plane_datum()
    ring = data.pi_ring
    assert verify_transfer_data(data)["valid"]
    t = BandedMatrix.scalar_band(ring, {0: ring.group_element((1,))})
    assert transfer_matrix(data, parse_word("y")) == t


def test_finite_coset_space_gives_the_zero_map():
    data = cyclic_datum(3)
    assert verify_transfer_data(data)["valid"]
    assert transfer_rho(data, [(1, parse_word("x")), (2, ())]).is_zero()
    with pytest.raises(SuspensionError):
        transfer_matrix(data, parse_word("x"))


@pytest.mark.parametrize("factory", [integer_line_datum, plane_datum, cyclic_datum])
def test_transfer_is_multiplicative_on_random_words(rng, factory):
    data = factory()
    report = check_transfer_homomorphism(data, random_word_pairs(rng, data, 15))
    assert report["valid"], report["failures"]


def test_rho_is_additive_in_the_coefficients():
    data = integer_line_datum()
    x = parse_word("x")
    twice = transfer_rho(data, [(1, x), (1, x)])
    assert twice == transfer_rho(data, [(2, x)])
    assert transfer_rho(data, [(1, x), (-1, x)]).is_zero()


def test_broken_relator_is_reported():
    moves = {"x": CosetMove({0: (1, ())}, reach=0, shift=1)}
    data = TransferData(("x",), moves, relators=(parse_word("x"),))
    assert not verify_transfer_data(data)["valid"]
    with pytest.raises(SuspensionError, match="cocycle inconsistency"):
        transfer_rho(data, [(1, ())])


def test_e_t_must_act_as_the_identity_class():
    moves = {"x": CosetMove({0: (1, ())}, reach=0, shift=1)}
    data = TransferData(("x",), moves, e_t=parse_word("x"))
    assert verify_transfer_data(data)["failures"] == [{"kind": "e_t", "word": "x"}]


def test_non_bijective_move_is_rejected():
    data = TransferData(("x",), {"x": CosetMove({0: (1, ())}, reach=0, shift=0)})
    with pytest.raises(SuspensionError):
        transfer_matrix(data, parse_word("x"))


def test_unknown_generators_are_rejected():
    with pytest.raises(SuspensionError):
        TransferData(("x",), {"x": CosetMove({0: (1, ())}, shift=1)}, relators=(parse_word("y"),))
    with pytest.raises(SuspensionError):
        TransferData(("x",), {"x": CosetMove({0: (1, (("h", 1),))}, shift=1)})
