import numpy as np
import pytest

from lie2orbits.coadjoint import lie_poisson_matrix, unit_covector
from lie2orbits.double import MissingGroupModelError, TwoGroup, coadjoint_double, double_check
from lie2orbits.examples import builtin, example_pair
from lie2orbits.lie_core import abelian, subspace_rank
from lie2orbits.verify import orbit_unit_compose, orbit_unit_compose_check


def test_double_check_passes(bundle):
    report = double_check(coadjoint_double(bundle), n_samples=40, tol=1e-9, seed=1)
    assert report.passed, str(report)
    assert "interchange" in report and "action_multiplicative" in report


def test_missing_group_model():
    with pytest.raises(MissingGroupModelError):
        coadjoint_double(example_pair(abelian(2)))


def test_identity_acts_trivially(bundle, rng):
    dg = coadjoint_double(bundle)
    grp = dg.group
    xi = rng.normal(size=bundle.cm.dim)
    assert np.array_equal(grp.coadjoint(grp.identity(), xi), xi)
    e = grp.from_algebra(np.zeros(bundle.cm.dim_h), np.zeros(bundle.cm.dim_g))
    assert grp.arrow_distance(e, grp.identity()) < 1e-15


def test_group_laws(bundle, rng):
    grp = TwoGroup(bundle)
    k1, k2, k3 = (grp.random_arrow(rng) for _ in range(3))
    left = grp.product(grp.product(k1, k2), k3)
    right = grp.product(k1, grp.product(k2, k3))
    assert grp.arrow_distance(left, right) < 1e-12
    assert grp.arrow_distance(grp.product(k1, grp.group_inverse(k1)), grp.identity()) < 1e-12
    # source and target are group morphisms
    assert np.allclose(grp.target(grp.product(k1, k2)), grp.target(k1) @ grp.target(k2))
    assert np.allclose(grp.source(grp.product(k1, k2)), grp.source(k1) @ grp.source(k2))


def test_compose_double_units(bundle):
    dg = coadjoint_double(bundle)
    u = unit_covector(bundle.cm, bundle.default_point)
    unit = dg.h_unit(u)
    out = orbit_unit_compose(dg, unit, unit)
    assert dg.arrow_distance(out, unit) < 1e-14


def test_compose_postconditions(bundle):
    dg = coadjoint_double(bundle)
    report = orbit_unit_compose_check(dg, bundle.default_point, n_samples=30, seed=4)
    assert report.passed, str(report)


def test_compose_rejects_bad_inputs(rng):
    b = builtin("pair-so3")
    dg = coadjoint_double(b)
    u = unit_covector(b.cm, b.default_point)
    g = (dg.group.random_arrow(rng), u)
    h = (dg.group.random_arrow(rng), u)
    with pytest.raises(ValueError, match="composable"):
        orbit_unit_compose(dg, g, h)
    with pytest.raises(ValueError, match="same point"):
        orbit_unit_compose(dg, g, (h[0], 2 * u))
    not_unit = u + np.r_[np.zeros(3), 1.0, 0.0, 0.0]
    with pytest.raises(ValueError, match="not a unit"):
        orbit_unit_compose(dg, (g[0], not_unit), (h[0], not_unit))


def test_composed_arrow_stays_in_orbit(rng):
    from lie2orbits.double import unit_arrow_pair

    b = builtin("heisenberg")
    dg = coadjoint_double(b)
    g, h = unit_arrow_pair(dg, b.default_point, rng)
    l_arrow = orbit_unit_compose(dg, g, h)
    D = dg.group.D
    rank = lambda xi: subspace_rank(list(lie_poisson_matrix(D, xi).T))  # noqa: E731
    assert rank(dg.h_target(l_arrow)) == rank(unit_covector(b.cm, b.default_point))
