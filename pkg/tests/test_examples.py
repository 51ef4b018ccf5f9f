import numpy as np
import pytest

from lie2orbits.coadjoint import lie_poisson_matrix, unit_covector
from lie2orbits.crossed_module import semidirect, validate
from lie2orbits.examples import (
    BUILTIN_NAMES,
    Fact,
    ExampleBundle,
    base_orbit_rank,
    builtin,
    example_heisenberg,
    example_pair,
    example_zero,
    group_model_fd_residuals,
)
from lie2orbits.lie_core import abelian, heisenberg, so3, subspace_rank


def test_expected_facts_rederive(bundle):
    assert bundle.check_expected()


def test_stale_fact_is_caught():
    cm = builtin("pair-so3").cm
    stale = ExampleBundle("stale", cm, None, (Fact("rank", 3, "DERIVED", lambda: 2),))
    with pytest.raises(AssertionError, match="stale"):
        stale.check_expected()


def test_group_models_differentiate_to_cm(bundle):
    res = group_model_fd_residuals(bundle, step=1e-5)
    assert max(res.values()) < 1e-7, res


def test_validate_all_builtins_exact(bundle):
    assert validate(bundle.cm, tol=1e-12).passed


def test_builtin_lookup():
    assert builtin("builtin:heisenberg") is builtin("heisenberg")
    with pytest.raises(KeyError, match="unknown builtin"):
        builtin("nope")
    assert set(BUILTIN_NAMES) == {"pair-so3", "zero-so3-r3", "heisenberg"}


def test_heisenberg_shapes():
    b = example_heisenberg()
    assert (b.cm.dim_h, b.cm.dim_g, b.cm.dim) == (3, 6, 9)
    # phi(u) = ad_u on h3, read back through the evaluation action
    h = heisenberg()
    for a in range(3):
        got = b.cm.action_matrix(b.cm.phi[:, a])
        want = np.einsum("j,jik->ki", h.basis(a), h.c)
        assert np.allclose(got, want, atol=1e-14)


def test_heisenberg_orbit_ranks():
    b = builtin("heisenberg")
    assert base_orbit_rank(b.cm, b.points["default"]) == 3
    # the zero-level orbit through p*: the oracle gives 2 (an open piece of the
    # plane z* = 0 minus the origin)
    assert base_orbit_rank(b.cm, b.points["zero-level"]) == 2
    # negative z-level is open as well
    assert base_orbit_rank(b.cm, np.array([0.0, 0.0, -2.0])) == 3


def test_pair_abelian_points_only():
    b = example_pair(abelian(3))
    assert b.group_model is None
    D = semidirect(b.cm)
    xi = unit_covector(b.cm, np.array([1.0, 2.0, 3.0]))
    assert not np.any(lie_poisson_matrix(D, xi))


def test_pair_so3_base_spheres(rng):
    b = builtin("pair-so3")
    for _ in range(5):
        assert base_orbit_rank(b.cm, rng.normal(size=3)) == 2


def test_zero_rho_points():
    b = example_zero(abelian(3), so3(), np.zeros((3, 3, 3)), name="zero-trivial")
    assert b.check_expected()
    assert b.group_model is None


def test_zero_so3_base_spheres():
    b = builtin("zero-so3-r3")
    assert base_orbit_rank(b.cm, np.array([0.0, 3.0, 4.0])) == 2


def test_group_model_images_are_automorphisms(rng):
    b = builtin("heisenberg")
    h = b.cm.h
    gmat = b.group_model.g_exp(0.3 * rng.normal(size=6))
    x, y = rng.normal(size=(2, 3))
    lhs = gmat @ np.einsum("i,j,ijk->k", x, y, h.c)
    rhs = np.einsum("i,j,ijk->k", gmat @ x, gmat @ y, h.c)
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert subspace_rank(list(gmat.T)) == 3
