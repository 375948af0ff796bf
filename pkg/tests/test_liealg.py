import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohomone.errors import InputError
from cohomone.liealg import AlgElement, QFormParams, basis_element, bracket, q_inner


def exact_elements(n):
    small = st.fractions(min_value=-5, max_value=5, max_denominator=7)
    npairs = n * (n - 1) // 2

    def build(vals):
        so2, upper = vals[0], vals[1:]
        m = np.empty((n, n), dtype=object)
        m.fill(Fraction(0))
        it = iter(upper)
        for i in range(n):
            for j in range(i + 1, n):
                v = next(it)
                m[i, j], m[j, i] = v, -v
        return AlgElement.from_matrix(m, so2=so2)

    return st.lists(small, min_size=npairs + 1, max_size=npairs + 1).map(build)


triples = st.integers(2, 5).flatmap(lambda n: st.tuples(exact_elements(n), exact_elements(n), exact_elements(n)))


# -- basis elements ------------------------------------------------------------


def test_basis_element_e12_in_so3():
    e = basis_element(1, 2, 3)
    assert e.mat_part.tolist() == [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]
    assert e.so2_part == 0


def test_basis_element_has_two_unit_entries():
    m = np.asarray(basis_element(2, 3, 4).mat_part, dtype=float)
    assert np.count_nonzero(m) == 2
    assert sorted(m[m != 0]) == [-1.0, 1.0]


def test_basis_element_sum():
    s = basis_element(1, 3, 3) + basis_element(1, 3, 3)
    assert s.mat_part[0, 2] == 2 and s.mat_part[2, 0] == -2


def test_e_ij_action_on_standard_vectors():
    m = np.asarray(basis_element(1, 3, 4).mat_part, dtype=float)
    e1, e3 = np.eye(4)[0], np.eye(4)[2]
    assert np.array_equal(m @ e3, e1)
    assert np.array_equal(m @ e1, -e3)


@pytest.mark.parametrize("ij", [(0, 1), (2, 2), (3, 2), (1, 5)])
def test_basis_element_rejects_bad_indices(ij):
    with pytest.raises(InputError):
        basis_element(*ij, 4)


def test_non_antisymmetric_matrix_rejected():
    with pytest.raises(InputError):
        AlgElement.from_matrix([[0, 1], [1, 0]])


# -- bracket --------------------------------------------------------------------


def test_bracket_e12_e23_is_e13():
    assert bracket(basis_element(1, 2, 3), basis_element(2, 3, 3)) == basis_element(1, 3, 3)


def test_bracket_with_self_vanishes():
    x = basis_element(1, 2, 4) + basis_element(2, 4, 4).scale(Fraction(3, 2))
    assert bracket(x, x).is_zero()


def test_so2_is_central():
    assert bracket(AlgElement.so2(4), basis_element(1, 2, 4)).is_zero()


def test_bracket_mismatched_sizes():
    with pytest.raises(InputError):
        bracket(basis_element(1, 2, 3), basis_element(1, 2, 4))


def test_mixing_exact_and_float_is_an_error():
    with pytest.raises(InputError):
        bracket(basis_element(1, 2, 3), basis_element(1, 2, 3, exact=False))


@given(triples)
def test_jacobi_exact(xyz):
    x, y, z = xyz
    jac = bracket(bracket(x, y), z) + bracket(bracket(y, z), x) + bracket(bracket(z, x), y)
    assert jac.is_zero()


@given(triples)
def test_bracket_antisymmetric(xyz):
    x, y, _ = xyz
    assert bracket(x, y) == -bracket(y, x)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_jacobi_float(n, seed):
    rng = np.random.default_rng(seed)
    els = []
    for _ in range(3):
        a = rng.normal(size=(n, n))
        els.append(AlgElement.from_matrix(a - a.T, so2=rng.normal(), exact=False))
    x, y, z = els
    jac = bracket(bracket(x, y), z) + bracket(bracket(y, z), x) + bracket(bracket(z, x), y)
    scale = max(np.abs(e.mat_part).max() for e in els) ** 3
    assert np.abs(jac.mat_part).max() <= 1e-12 * scale


# -- the form Q ---------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_x_y_orthonormal(d):
    n = 4
    q = QFormParams(d, n)
    I = AlgElement.so2(n, exact=False).scale(1.0 / d)
    E12 = basis_element(1, 2, n, exact=False)
    X = (I + E12).scale(1 / math.sqrt(2))
    Y = (I - E12).scale(1 / math.sqrt(2))
    assert q_inner(X, X, q) == pytest.approx(1.0, abs=1e-15)
    assert q_inner(Y, Y, q) == pytest.approx(1.0, abs=1e-15)
    assert q_inner(X, Y, q) == pytest.approx(0.0, abs=1e-15)


def test_q_values_on_basis():
    q = QFormParams(3, 4)
    assert q_inner(basis_element(1, 3, 4), basis_element(1, 3, 4), q) == 1
    assert q_inner(basis_element(1, 3, 4), basis_element(1, 4, 4), q) == 0
    assert q_inner(AlgElement.so2(4), AlgElement.so2(4), q) == 9


def test_q_size_mismatch():
    with pytest.raises(InputError):
        q_inner(basis_element(1, 2, 3), basis_element(1, 2, 3), QFormParams(1, 4))


def test_qform_params_validation():
    with pytest.raises(InputError):
        QFormParams(0, 4)
    with pytest.raises(InputError):
        QFormParams(1, 1)


@given(triples, st.integers(1, 4))
def test_q_ad_invariant_exact(xyz, d):
    z, a, b = xyz
    q = QFormParams(d, z.n)
    assert q_inner(bracket(z, a), b, q) + q_inner(a, bracket(z, b), q) == 0


@given(triples, st.integers(1, 4))
def test_q_symmetric_exact(xyz, d):
    a, b, _ = xyz
    q = QFormParams(d, a.n)
    assert q_inner(a, b, q) == q_inner(b, a, q)


def test_elements_are_immutable():
    e = basis_element(1, 2, 3)
    with pytest.raises(ValueError):
        e.mat_part[0, 1] = 5
