import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperkappa.curve import curve_from_roots, elementary_symmetric as S
from hyperkappa.errors import NumericalError, ValidationError
from hyperkappa.lambda_exact import (Partition, antidiagonal_sum_coefficient,
                                     enumerate_partitions, extract_coefficients,
                                     first_row_coefficient, first_row_sum, integer_table,
                                     lambda_matrix, m_matrix, partition_sum, q_expansion,
                                     q_value, q_vector, random_circle_curve,
                                     random_rational_curve, solve_exact,
                                     solve_partition_lambda, vandermonde,
                                     verify_lemma_identity)

LAMBDA_5 = [[210, 84, 28, 7, 1],
            [84, 280, 119, 38, 7],
            [28, 119, 300, 119, 28],
            [7, 38, 119, 280, 84],
            [1, 7, 28, 84, 210]]

rational_points = st.lists(st.integers(-24, 24), min_size=6, max_size=6, unique=True).map(
    lambda v: [Fraction(x, 4) for x in v])


@pytest.mark.parametrize("g, count", [(1, 3), (2, 10), (3, 35), (5, 462)])
def test_partition_counts(g, count):
    parts = enumerate_partitions(g)
    assert len(parts) == count == math.comb(2 * g + 1, g)
    assert all(2 * g + 2 in p.J0 and len(p.I0) == g + 1 for p in parts)


def test_partition_canonical_form():
    p = Partition.from_subset([4, 5, 6], 2)
    assert p.I0 == (1, 2, 3) and p.J0 == (4, 5, 6)
    with pytest.raises(ValidationError):
        Partition.from_subset([1, 2], 2)


def test_q_value_symmetry_and_dual(g2_curve):
    for i, j in itertools.combinations(range(1, 7), 2):
        assert q_value(g2_curve, i, j) == q_value(g2_curve, j, i)
        assert q_value(g2_curve, i, j, cross_check=False) == q_expansion(g2_curve, i, j)
    with pytest.raises(ValidationError):
        q_value(g2_curve, 2, 2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=8, max_size=8))
def test_q_dual_formula_float(points):
    try:
        c = curve_from_roots(points)
    except ValidationError:
        return
    for i, j in [(1, 2), (3, 7), (5, 8)]:
        a = complex(q_value(c, i, j, cross_check=False))
        b = complex(q_expansion(c, i, j))
        assert abs(a - b) <= 1e-9 * max(1.0, abs(b))


def test_m_matrix_g3_rows():
    c = random_rational_curve(3, seed=4)
    e = c.branch_points
    M = m_matrix(c, Partition.from_subset([1, 2, 3, 4], 3))
    # columns (1,1) (1,2) (1,3) (2,2) (2,3) (3,3)
    for row, (r, s) in zip(M, itertools.combinations(range(4), 2)):
        a, b = e[r], e[s]
        assert list(row) == [1, a + b, a * a + b * b, a * b, a * b * (a + b), a * a * b * b]


def test_m_matrix_determinant_is_squared_vandermonde():
    c = random_rational_curve(3, seed=4)
    M = m_matrix(c, Partition.from_subset([1, 2, 3, 4], 3))
    # Fraction determinant by cofactor-free elimination
    det = _fraction_det([list(r) for r in M])
    assert det == vandermonde(c.branch_points[:4]) ** 2


def _fraction_det(rows):
    n = len(rows)
    rows = [[Fraction(v) for v in r] for r in rows]
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if rows[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            rows[k], rows[piv] = rows[piv], rows[k]
            det = -det
        det *= rows[k][k]
        for i in range(k + 1, n):
            f = rows[i][k] / rows[k][k]
            rows[i] = [a - f * b for a, b in zip(rows[i], rows[k])]
    return det


def test_m_matrix_genus_one():
    c = curve_from_roots([-2, -1, 1, 2])
    assert m_matrix(c, enumerate_partitions(1)[0]).tolist() == [[1]]


@settings(max_examples=20, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4), min_size=4, max_size=4),
       st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_bareiss_solver(A, b):
    det = _fraction_det(A)
    if det == 0:
        with pytest.raises(NumericalError):
            solve_exact(A, b)
        return
    x = solve_exact(A, b)
    for row, rhs in zip(A, b):
        assert sum(a * v for a, v in zip(row, x)) == rhs


def test_g3_per_partition_entry():
    c = random_rational_curve(3, seed=1)
    e = dict(enumerate(c.branch_points, 1))
    L = solve_partition_lambda(c, Partition.from_subset([1, 2, 3, 4], 3))
    ref = (e[1] * e[2] + e[3] * e[4] + e[5] * e[6] + e[7] * e[8]
           + (e[1] + e[2]) * (e[3] + e[4]) + (e[5] + e[6]) * (e[7] + e[8]))
    assert L[2, 2] == ref
    assert (L == L.T).all()


@settings(max_examples=10, deadline=None)
@given(rational_points)
def test_g2_rational_part(points):
    c = curve_from_roots(points)
    if any(c.coefficients[k] == 0 for k in (2, 3, 4)):
        return
    e = c.branch_points
    for part in enumerate_partitions(2):
        I = [e[i - 1] for i in part.I0]
        J = [e[i - 1] for i in part.J0]
        L = solve_partition_lambda(c, part)
        off = -S(I, 3) - S(J, 3)
        assert L[0, 0] == S(I, 3) * S(J, 1) + S(J, 3) * S(I, 1)
        assert L[0, 1] == L[1, 0] == off
        assert L[1, 1] == S(I, 2) + S(J, 2)


def test_g5_entry_and_its_sum():
    c = random_rational_curve(5, seed=2)
    e = c.branch_points
    I, J = list(e[:6]), list(e[6:])
    L = solve_partition_lambda(c, Partition.from_subset([1, 2, 3, 4, 5, 6], 5))
    assert L[1, 3] == 2 * S(I, 6) + 2 * S(J, 6) + S(I, 1) * S(J, 5) + S(I, 5) * S(J, 1)


def test_float_and_exact_partition_agree():
    c = random_rational_curve(3, seed=0)
    cf = curve_from_roots([float(x) for x in c.branch_points])
    for part in enumerate_partitions(3)[:5]:
        ex = np.array(solve_partition_lambda(c, part), dtype=complex)
        fl = solve_partition_lambda(cf, part, exact=False)
        assert np.max(np.abs(ex - fl)) <= 1e-9 * np.max(np.abs(ex))


def test_exact_needs_rational_points():
    c = random_circle_curve(2, seed=0)
    with pytest.raises(ValidationError):
        solve_partition_lambda(c, enumerate_partitions(2)[0], exact=True)


@pytest.mark.parametrize("g, expected", [
    (1, [[1]]),
    (2, [[4, 1], [1, 4]]),
    (3, [[15, 5, 1], [5, 18, 5], [1, 5, 15]]),
])
def test_exact_small_tables(g, expected):
    t = integer_table(g, seed=0, exact=True)
    assert t.coefficients.tolist() == expected
    assert t.extraction_residual == 0


def test_float_g5_table():
    t = integer_table(5, seed=0, exact=False)
    assert t.coefficients.tolist() == LAMBDA_5
    assert t.extraction_residual < 1e-6


def test_float_g8_table_structure():
    t = integer_table(8, seed=0, exact=False)
    C = t.coefficients
    assert (C == C.T).all() and (C == C[::-1, ::-1]).all()
    assert [int(v) for v in C[0]] == [first_row_coefficient(8, k) for k in range(1, 9)]
    for k in range(2, 17):
        assert sum(C[i, k - 2 - i] for i in range(8) if 0 <= k - 2 - i < 8) \
            == antidiagonal_sum_coefficient(8, k)


def test_lambda_matrix_requires_monic():
    c = curve_from_roots([-2, -1, 1, 2, 3, 5], leading=2)
    with pytest.raises(ValidationError):
        lambda_matrix(2, c)


def test_degenerate_lambda_detected():
    # all odd coefficients vanish for a symmetric root set
    c = curve_from_roots([-3, -2, -1, 1, 2, 3])
    total = partition_sum(c)
    with pytest.raises(NumericalError):
        extract_coefficients(c, total)


def test_genus_out_of_range():
    with pytest.raises(ValidationError):
        integer_table(9)


@pytest.mark.parametrize("g, k, value", [(3, 4, 20), (5, 6, 378), (2, 2, 4), (6, 2, 792)])
def test_antidiagonal_values(g, k, value):
    assert antidiagonal_sum_coefficient(g, k) == value


def test_antidiagonal_range():
    with pytest.raises(ValidationError):
        antidiagonal_sum_coefficient(2, 1)


@pytest.mark.parametrize("g, k, value", [(4, 1, 56), (6, 2, 330), (2, 2, 1)])
def test_first_row_values(g, k, value):
    assert first_row_coefficient(g, k) == value


@pytest.mark.parametrize("g", range(2, 7))
def test_first_row_sums(g):
    assert sum(first_row_coefficient(g, k) for k in range(1, g + 1)) == first_row_sum(g)
    assert first_row_sum(g) == math.comb(2 * g + 1, g - 1)


def test_first_row_sum_g4():
    assert first_row_sum(4) == 84


@pytest.mark.parametrize("g", [2, 3, 4])
def test_lemma_identity(g, tables):
    c = random_rational_curve(g, seed=10 + g)
    assert verify_lemma_identity(c, tables[g], samples=10) < 1e-9


def test_q_vector_matches_q_value():
    c = random_rational_curve(2, seed=3)
    part = enumerate_partitions(2)[4]
    Q = q_vector(c, part)
    pairs = list(itertools.combinations(part.I0, 2))
    assert list(Q) == [q_value(c, i, j) for i, j in pairs]
