#!/usr/bin/env python3
"""Exact matrices, group rings, Smith normal forms and integer solving."""

import pytest
from hypothesis import given, strategies as st

from core.exceptions import DimensionMismatchError, RingMismatchError, SurgeryKitError, UnsupportedRingError
from modules.exact_core import (ExactMatrix, RingSpec, describe_cokernel, integer_rank, involution_dual,
                                is_unimodular, kernel_basis, smith_normal_form, solve_linear)


def small_matrices(max_side=4, bound=6):
    return st.integers(1, max_side).flatmap(
        lambda r: st.integers(1, max_side).flatmap(
            lambda c: st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c),
                               min_size=r, max_size=r)))


def test_group_ring_arithmetic(z3):
    g = z3.group_element(1)
    assert g * g * g == z3.one()
    assert g.conj() == z3.group_element(2)
    x = z3.element({0: 2, 1: -1})
    assert (x + x.conj()).as_dict() == {0: 4, 1: -1, 2: -1}
    assert z3.augmentation(x) == 1


def test_bad_group_table_rejected():
    with pytest.raises(SurgeryKitError):
        RingSpec.finite_group([[0, 1], [1, 1]])


def test_laurent_ring_inverts_exponents():
    ring = RingSpec.laurent(2)
    t = ring.group_element((1, -2))
    assert t.conj() == ring.group_element((-1, 2))
    assert t * t.conj() == ring.one()


def test_involution_dual_over_group_ring(z3):
    g = z3.group_element(1)
    m = ExactMatrix.from_rows(z3, [[g, 2]])
    dual = involution_dual(m)
    assert dual.shape == (2, 1)
    assert dual[0, 0] == z3.group_element(2)
    assert dual[1, 0] == z3.coerce(2)
    assert involution_dual(dual) == m


def test_involution_dual_over_integers_is_transpose():
    m = ExactMatrix.integer([[1, 2, 3], [4, 5, 6]])
    assert m.dual().to_int_list() == [[1, 4], [2, 5], [3, 6]]


def test_ring_mismatch_raises(z3):
    a = ExactMatrix.integer([[1]])
    b = ExactMatrix.from_rows(z3, [[1]])
    with pytest.raises(RingMismatchError):
        a @ b


def test_shape_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        ExactMatrix.integer([[1, 2]]) @ ExactMatrix.integer([[1, 2]])


def test_empty_products_have_the_right_shape():
    a = ExactMatrix.zeros(RingSpec.integers(), 3, 0)
    b = ExactMatrix.zeros(RingSpec.integers(), 0, 2)
    assert (a @ b).shape == (3, 2)
    assert (a @ b).is_zero()


def test_block_assembly():
    ring = RingSpec.integers()
    m = ExactMatrix.block(ring, [[ExactMatrix.integer([[1]]), ExactMatrix.integer([[2, 3]])],
                                 [ExactMatrix.integer([[4]]), ExactMatrix.integer([[5, 6]])]])
    assert m.to_int_list() == [[1, 2, 3], [4, 5, 6]]


def test_smith_normal_form_example():
    A = ExactMatrix.integer([[2, 4], [6, 8]])
    snf = smith_normal_form(A)
    assert snf.diagonal == [2, 4]
    assert snf.U @ A @ snf.V == snf.D
    assert is_unimodular(snf.U) and is_unimodular(snf.V)


def test_smith_normal_form_rejects_group_rings(z3):
    with pytest.raises(UnsupportedRingError):
        smith_normal_form(ExactMatrix.from_rows(z3, [[1]]))


@given(small_matrices())
def test_smith_decomposition_properties(rows):
    A = ExactMatrix.integer(rows)
    snf = smith_normal_form(A)
    assert snf.U @ A @ snf.V == snf.D
    diag = snf.diagonal
    assert all(d >= 0 for d in diag)
    nonzero = [d for d in diag if d]
    assert diag[:len(nonzero)] == nonzero
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
    for i in range(A.rows):
        for j in range(A.cols):
            if i != j:
                assert snf.D[i, j] == 0


def test_solve_linear_examples():
    ok = solve_linear(ExactMatrix.integer([[2]]), ExactMatrix.integer([[4]]))
    assert ok.solvable
    assert ok.solution.to_int_list() == [[2]]

    bad = solve_linear(ExactMatrix.integer([[2]]), ExactMatrix.integer([[3]]))
    assert not bad.solvable
    assert bad.witness["invariant_factor"] == 2
    assert abs(bad.witness["residue"]) == 3


def test_solve_linear_outside_the_image():
    res = solve_linear(ExactMatrix.integer([[1], [0]]), ExactMatrix.integer([[0], [1]]))
    assert not res.solvable
    assert res.witness["invariant_factor"] == 0


@given(small_matrices(), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_solve_linear_recovers_consistent_systems(rows, coeffs):
    A = ExactMatrix.integer(rows)
    x = ExactMatrix.integer([[c] for c in coeffs[:A.cols]])
    b = A @ x
    res = solve_linear(A, b)
    assert res.solvable
    assert A @ res.solution == b


@given(small_matrices())
def test_kernel_basis_is_annihilated(rows):
    A = ExactMatrix.integer(rows)
    K = kernel_basis(A)
    assert K.cols == A.cols - integer_rank(A)
    if K.cols:
        assert (A @ K).is_zero()


def test_cokernel_description():
    assert describe_cokernel(ExactMatrix.integer([[2, 0], [0, 0]])) == (1, [2])
