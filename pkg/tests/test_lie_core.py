import logging

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from lie2orbits.lie_core import (
    DimensionError,
    LieAlgebra,
    RankInstabilityError,
    abelian,
    ad_matrix,
    bracket,
    change_basis,
    check_algebra,
    coad_matrix,
    derivation_algebra,
    derivation_residual,
    heisenberg,
    InvalidStructureError,
    matrix_exp,
    nullspace,
    random_lie_algebra,
    rank_from_singular_values,
    rref,
    sl2,
    so3,
    structure_residuals,
    subspace_rank,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def test_so3_bracket_and_adjoint():
    L = so3()
    assert np.array_equal(bracket(L, L.basis(0), L.basis(1)), L.basis(2))
    assert np.array_equal(ad_matrix(L, L.basis(2)),
                          np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float))


def test_coadjoint_sign():
    L = so3()
    # coad_{e1} e3* = -ad_{e1}^T e3* = -e2*
    assert np.allclose(coad_matrix(L, L.basis(0)) @ L.basis(2), -L.basis(1))


def test_abelian_ad_is_zero():
    L = abelian(4)
    assert not np.any(ad_matrix(L, np.ones(4)))
    assert L.is_abelian()


@pytest.mark.parametrize("factory", [so3, heisenberg, sl2, lambda: abelian(3)])
def test_standard_algebras_valid(factory):
    res = structure_residuals(factory())
    assert res["antisym"] == 0.0 and res["jacobi"] < 1e-14


def test_invalid_jacobi_rejected():
    c = np.zeros((3, 3, 3))
    c[0, 1, 1], c[1, 0, 1] = 1.0, -1.0
    c[1, 2, 0], c[2, 1, 0] = 1.0, -1.0
    with pytest.raises(InvalidStructureError) as exc:
        check_algebra(LieAlgebra(("a", "b", "c"), c))
    assert exc.value.residuals["jacobi"] > 0


def test_from_triples_antisymmetrizes_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        L = LieAlgebra.from_triples(["x", "y", "z"], [(0, 1, 2, 1.0), (1, 0, 2, 1.0)])
    assert "antisymmetrized" in caplog.text
    assert L.c[0, 1, 2] == 0.0 and L.c[1, 0, 2] == 0.0


def test_from_triples_fills_lower_half():
    L = LieAlgebra.from_triples(["x", "y", "z"], [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
    assert np.array_equal(L.c, so3().c)
    assert LieAlgebra.from_triples(L.basis_names, L.to_triples()).c.tolist() == L.c.tolist()


def test_dimension_errors():
    with pytest.raises(DimensionError):
        LieAlgebra(("a", "b"), np.zeros((3, 3, 3)))
    with pytest.raises(DimensionError):
        bracket(so3(), np.zeros(2), np.zeros(3))
    with pytest.raises(DimensionError):
        matrix_exp(np.zeros((2, 3)))


@given(st.lists(finite, min_size=9, max_size=9))
def test_matrix_exp_matches_scipy(entries):
    m = np.array(entries).reshape(3, 3)
    assert np.allclose(matrix_exp(m), scipy.linalg.expm(m), rtol=1e-11, atol=1e-11)


@given(st.lists(finite, min_size=16, max_size=16))
def test_matrix_exp_inverse(entries):
    m = np.array(entries).reshape(4, 4)
    prod = matrix_exp(m) @ matrix_exp(-m)
    assert np.max(np.abs(prod - np.eye(4))) < 1e-9 * max(1.0, np.linalg.norm(matrix_exp(m)) ** 2)


def test_matrix_exp_tolerance_controls_accuracy():
    m = np.array([[0.0, 1.0], [-1.0, 0.0]])
    exact = scipy.linalg.expm(m)
    assert np.max(np.abs(matrix_exp(m, tol=1e-4) - exact)) < 1e-4
    assert np.max(np.abs(matrix_exp(m, tol=1e-14) - exact)) < 1e-14


@pytest.mark.parametrize("L, dim", [(heisenberg(), 6), (so3(), 3), (abelian(3), 9), (sl2(), 3)])
def test_derivation_algebra_dimension(L, dim):
    der, mats = derivation_algebra(L)
    assert der.dim == dim
    assert max(derivation_residual(L, d) for d in mats) < 1e-12
    assert structure_residuals(der)["jacobi"] < 1e-10


def test_heisenberg_derivation_basis_is_canonical():
    _, mats = derivation_algebra(heisenberg())
    E = lambda i, j: np.eye(3)[:, [i]] @ np.eye(3)[[j], :]  # noqa: E731
    expected = [E(0, 0) + E(2, 2), E(0, 1), E(1, 0), E(1, 1) + E(2, 2), E(2, 0), E(2, 1)]
    for got, want in zip(mats, expected):
        assert np.array_equal(got, want)


def test_rref_is_basis_independent(rng):
    rows = rng.normal(size=(2, 5))
    mix = np.array([[2.0, 1.0], [-1.0, 3.0]])
    assert np.allclose(rref(rows), rref(mix @ rows))


def test_nullspace_and_rank(rng):
    a = rng.normal(size=(3, 2)) @ rng.normal(size=(2, 5))
    ker = nullspace(a)
    assert ker.shape == (5, 3)
    assert np.max(np.abs(a @ ker)) < 1e-12
    assert subspace_rank(list(a.T)) == 2
    with pytest.raises(ValueError):
        subspace_rank([])


def test_rank_instability_is_reported():
    with pytest.raises(RankInstabilityError):
        rank_from_singular_values(np.array([1.0, 1.5e-9]), rel_tol=1e-9, margin=10.0)
    assert rank_from_singular_values(np.array([1.0, 1e-3]), 1e-9, margin=10.0) == 2


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_random_algebras_satisfy_jacobi(dim, seed):
    L = random_lie_algebra(np.random.default_rng(seed), dim)
    res = structure_residuals(L)
    scale = max(1.0, float(np.max(np.abs(L.c)))) ** 2
    assert res["antisym"] < 1e-14 * scale and res["jacobi"] < 1e-10 * scale


@given(st.integers(0, 10_000))
def test_change_basis_preserves_validity(seed):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    L = change_basis(so3(), p)
    assert structure_residuals(L)["jacobi"] < 1e-9 * max(1.0, np.max(np.abs(L.c))) ** 2
