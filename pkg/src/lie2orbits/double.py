"""The coadjoint double groupoid

    G* x 2G  =>  G*
      ||          ||
    G x h*   =>  h*

built on a matrix model of the Lie 2-group ``2G = H x| G => G``.

A 2-group arrow carries its H-matrix, its G-matrix and its adjoint matrix on
h x| g.  The adjoint matrix is tracked multiplicatively from exponentials,
so the coadjoint action never needs a logarithm.
"""

from dataclasses import dataclass

import numpy as np

from .coadjoint import unit_covector
from .crossed_module import semidirect
from .groupoids import dual_structure, groupoid_axioms
from .lie_core import ad_matrix, matrix_exp, nullspace, subspace_rank
from .report import CheckReport


class MissingGroupModelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoArrow:
    """Arrow ``(h, g)`` of the Lie 2-group with its adjoint matrix on h x| g."""

    h: np.ndarray
    g: np.ndarray
    ad: np.ndarray


def _maxabs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


class TwoGroup:
    """Group and groupoid operations of ``H x| G => G``."""

    def __init__(self, bundle, D=None):
        if bundle.group_model is None:
            raise MissingGroupModelError(f"{bundle.name} has no group model")
        self.cm = bundle.cm
        self.model = bundle.group_model
        self.D = semidirect(self.cm) if D is None else D
        self.name = f"2group({bundle.name})"
        n, m = self.cm.dim_h, self.cm.dim_g
        self._n, self._m = n, m
        # rho(e_x) stacked as columns; G-matrices act on it by conjugation
        self._rho_basis = np.array(
            [self.cm.action_matrix(self.cm.g.basis(i)).ravel() for i in range(m)]).T
        if m and subspace_rank(list(self._rho_basis.T)) < m:
            raise MissingGroupModelError(
                f"{bundle.name}: the g-action on h is not faithful; "
                "the GL(h) model of G cannot recover Ad on g")

    # -- objects -----------------------------------------------------------
    def object_ad(self, gmat):
        """Adjoint matrix of the unit arrow ``(1, g)`` on h x| g."""
        n, m = self._n, self._m
        out = np.zeros((n + m, n + m))
        out[:n, :n] = gmat
        if m:
            ginv = np.linalg.inv(gmat)
            for y in range(m):
                conj = gmat @ self.cm.action_matrix(self.cm.g.basis(y)) @ ginv
                out[n:, n + y] = np.linalg.lstsq(self._rho_basis, conj.ravel(), rcond=None)[0]
        return out

    def object_action(self, gmat, alpha):
        """Dual action of G on h*."""
        return np.linalg.solve(gmat.T, alpha)

    # -- group structure ---------------------------------------------------
    def identity(self):
        n, m = self._n, self._m
        return TwoArrow(self.model.h_identity(), np.eye(n), np.eye(n + m))

    def from_algebra(self, a, x):
        """``(exp a, 1) . (1, exp x)``."""
        n = self._n
        a = np.asarray(a, dtype=float)
        x = np.asarray(x, dtype=float)
        ya = np.concatenate([a, np.zeros(self._m)])
        yx = np.concatenate([np.zeros(n), x])
        ad = matrix_exp(ad_matrix(self.D, ya)) @ matrix_exp(ad_matrix(self.D, yx))
        return TwoArrow(self.model.h_exp(a), self.model.g_exp(x), ad)

    def product(self, k1, k2):
        return TwoArrow(k1.h @ self.model.g_on_h(k1.g, k2.h), k1.g @ k2.g, k1.ad @ k2.ad)

    def group_inverse(self, k):
        ginv = np.linalg.inv(k.g)
        return TwoArrow(self.model.g_on_h(ginv, np.linalg.inv(k.h)), ginv, np.linalg.inv(k.ad))

    def coadjoint(self, k, xi):
        """Left coadjoint action ``Ad_k^{-T} xi`` on (h x| g)*."""
        return np.linalg.solve(k.ad.T, xi)

    # -- groupoid structure ------------------------------------------------
    def source(self, k):
        return k.g

    def target(self, k):
        return self.model.tau(k.h) @ k.g

    def unit(self, gmat):
        return TwoArrow(self.model.h_identity(), np.array(gmat, dtype=float), self.object_ad(gmat))

    def compose(self, k1, k2):
        """``k1 o k2 = k1 . u(s k1)^-1 . k2``."""
        return self.product(self.product(k1, self.group_inverse(self.unit(self.source(k1)))), k2)

    def inverse(self, k):
        """``u(t k) . k^-1 . u(s k)``."""
        return self.product(self.product(self.unit(self.target(k)), self.group_inverse(k)),
                            self.unit(self.source(k)))

    # -- sampling protocol -------------------------------------------------
    def random_arrow(self, rng, scale=0.5):
        return self.from_algebra(scale * rng.normal(size=self._n), scale * rng.normal(size=self._m))

    def random_object(self, rng, scale=0.5):
        return self.model.g_exp(scale * rng.normal(size=self._m))

    def random_left(self, rng, q, scale=0.5):
        core = self.from_algebra(scale * rng.normal(size=self._n), np.zeros(self._m))
        return self.product(core, self.unit(self.target(q)))

    @staticmethod
    def arrow_distance(k1, k2):
        return max(_maxabs(k1.h - k2.h), _maxabs(k1.g - k2.g), _maxabs(k1.ad - k2.ad))

    @staticmethod
    def object_distance(g1, g2):
        return _maxabs(g1 - g2)


class _SideAdapter:
    """Sampling protocol over explicit callables (for groupoid_axioms)."""

    def __init__(self, name, **ops):
        self.name = name
        for key, fn in ops.items():
            setattr(self, key, fn)


@dataclass(frozen=True, eq=False)
class DoubleGroupoidModel:
    """Arrows of the top-left corner are pairs ``(k, xi)``: a 2-group arrow
    and a covector on h x| g (an arrow of G*)."""

    cm: object
    group: TwoGroup
    dual: object
    name: str

    # horizontal: G* x 2G => G*, the coadjoint action groupoid
    def h_source(self, a):
        return a[1]

    def h_target(self, a):
        return self.group.coadjoint(a[0], a[1])

    def h_compose(self, a, b):
        return (self.group.product(a[0], b[0]), b[1])

    def h_unit(self, xi):
        return (self.group.identity(), np.array(xi, dtype=float))

    def h_inverse(self, a):
        return (self.group.group_inverse(a[0]), self.h_target(a))

    # vertical: G* x 2G => h* x G, the product groupoid
    def v_source(self, a):
        return (self.group.source(a[0]), self.dual.source(a[1]))

    def v_target(self, a):
        return (self.group.target(a[0]), self.dual.target(a[1]))

    def v_compose(self, a, b):
        return (self.group.compose(a[0], b[0]), self.dual.compose(a[1], b[1]))

    def v_unit(self, obj):
        gmat, alpha = obj
        return (self.group.unit(gmat), self.dual.unit(alpha))

    def v_inverse(self, a):
        return (self.group.inverse(a[0]), self.dual.inverse(a[1]))

    # bottom: h* x G => h*, the action groupoid of G on h*
    def b_source(self, obj):
        return obj[1]

    def b_target(self, obj):
        return self.group.object_action(obj[0], obj[1])

    def b_compose(self, o1, o2):
        return (o1[0] @ o2[0], o2[1])

    def b_unit(self, alpha):
        return (np.eye(self.cm.dim_h), np.array(alpha, dtype=float))

    def b_inverse(self, obj):
        return (np.linalg.inv(obj[0]), self.b_target(obj))

    # distances and sampling
    def arrow_distance(self, a, b):
        return max(self.group.arrow_distance(a[0], b[0]), _maxabs(a[1] - b[1]))

    def object_distance(self, o1, o2):
        return max(_maxabs(o1[0] - o2[0]), _maxabs(o1[1] - o2[1]))

    def random_arrow(self, rng):
        return (self.group.random_arrow(rng), rng.normal(size=self.dual.arrow_dim))

    def horizontal(self):
        return _SideAdapter(
            f"horizontal({self.name})",
            source=self.h_source, target=self.h_target, unit=self.h_unit,
            inverse=self.h_inverse, compose=self.h_compose,
            random_arrow=self.random_arrow,
            random_object=lambda rng: rng.normal(size=self.dual.arrow_dim),
            random_left=lambda rng, q: (self.group.random_arrow(rng), self.h_target(q)),
            arrow_distance=self.arrow_distance, object_distance=_maxabs_diff,
        )

    def vertical(self):
        return _SideAdapter(
            f"vertical({self.name})",
            source=self.v_source, target=self.v_target, unit=self.v_unit,
            inverse=self.v_inverse, compose=self.v_compose,
            random_arrow=self.random_arrow,
            random_object=lambda rng: (self.group.random_object(rng),
                                       rng.normal(size=self.dual.object_dim)),
            random_left=lambda rng, q: (self.group.random_left(rng, q[0]),
                                        self.dual.random_left(rng, q[1])),
            arrow_distance=self.arrow_distance, object_distance=self.object_distance,
        )

    def bottom(self):
        return _SideAdapter(
            f"bottom({self.name})",
            source=self.b_source, target=self.b_target, unit=self.b_unit,
            inverse=self.b_inverse, compose=self.b_compose,
            random_arrow=lambda rng: (self.group.random_object(rng),
                                      rng.normal(size=self.cm.dim_h)),
            random_object=lambda rng: rng.normal(size=self.cm.dim_h),
            random_left=lambda rng, q: (self.group.random_object(rng), self.b_target(q)),
            arrow_distance=self.object_distance, object_distance=_maxabs_diff,
        )


def _maxabs_diff(a, b):
    return _maxabs(np.asarray(a) - np.asarray(b))


def coadjoint_double(bundle):
    group = TwoGroup(bundle)
    return DoubleGroupoidModel(bundle.cm, group, dual_structure(bundle.cm), bundle.name)


def _interchange_sample(dg, rng):
    """Residuals for one 2x2 grid of composable squares."""
    grp, dual = dg.group, dg.dual
    k_b = grp.random_arrow(rng)
    k_d = grp.random_left(rng, k_b)
    k_b, k_d = k_d, k_b  # k_b o k_d composable
    xi_d = dual.random_arrow(rng)
    xi_b = dual.random_left(rng, xi_d)
    sq_b, sq_d = (k_b, xi_b), (k_d, xi_d)
    k_c = grp.random_arrow(rng)
    k_a = grp.random_left(rng, k_c)
    sq_a = (k_a, dg.h_target(sq_b))
    sq_c = (k_c, dg.h_target(sq_d))

    # the vertical pair (a, c) must be composable in G*
    vcomp = dual.composable_residual(sq_a[1], sq_c[1])
    left = dg.v_compose(dg.h_compose(sq_a, sq_b), dg.h_compose(sq_c, sq_d))
    top = dg.v_compose(sq_a, sq_c)
    bot = dg.v_compose(sq_b, sq_d)
    right = dg.h_compose(top, bot)
    # horizontal composability of the right-hand side uses multiplicativity
    hcomp = _maxabs(dg.h_source(top) - dg.h_target(bot))
    return {
        "interchange": dg.arrow_distance(left, right),
        "interchange_composable": max(vcomp, hcomp),
    }


def _square_sample(dg, rng):
    """Commutation of the side maps and multiplicativity of the action."""
    grp, dual = dg.group, dg.dual
    k2 = grp.random_arrow(rng)
    k1 = grp.random_left(rng, k2)
    xi2 = dual.random_arrow(rng)
    xi1 = dual.random_left(rng, xi2)
    act1, act2 = grp.coadjoint(k1, xi1), grp.coadjoint(k2, xi2)
    k12, xi12 = grp.compose(k1, k2), dual.compose(xi1, xi2)
    mult = max(_maxabs(grp.coadjoint(k12, xi12) - dual.compose(act1, act2)),
               dual.composable_residual(act1, act2))
    side = max(
        _maxabs(dual.source(act1) - grp.object_action(grp.source(k1), dual.source(xi1))),
        _maxabs(dual.target(act1) - grp.object_action(grp.target(k1), dual.target(xi1))),
    )
    # the adjoint matrix tracked from exponentials must agree with the one
    # rebuilt from the G-matrix alone
    x = 0.5 * rng.normal(size=dg.cm.dim_g)
    ad_consistency = _maxabs(grp.from_algebra(np.zeros(dg.cm.dim_h), x).ad
                             - grp.object_ad(grp.model.g_exp(x)))
    return {"action_multiplicative": mult, "side_maps_commute": side,
            "adjoint_model_consistent": ad_consistency}


def double_check(dg, n_samples=100, tol=1e-9, seed=0):
    """Axiom suites of every side groupoid plus interchange and
    multiplicativity of the coadjoint action."""
    report = CheckReport(meta={"seed": seed, "n_samples": n_samples, "example_name": dg.name})
    seq = np.random.SeedSequence(seed)
    s_h, s_v, s_b, s_g, s_i = seq.spawn(5)
    sub_seed = lambda ss: int(ss.generate_state(1)[0])  # noqa: E731
    report.extend(groupoid_axioms(dg.horizontal(), n_samples, tol, sub_seed(s_h)), "horizontal.")
    report.extend(groupoid_axioms(dg.vertical(), n_samples, tol, sub_seed(s_v)), "vertical.")
    report.extend(groupoid_axioms(dg.bottom(), n_samples, tol, sub_seed(s_b)), "bottom.")
    report.extend(groupoid_axioms(dg.group, n_samples, tol, sub_seed(s_g)), "two_group.")
    report.extend(groupoid_axioms(dg.dual, n_samples, tol, sub_seed(s_g) + 1), "right.")
    rng = np.random.default_rng(s_i)
    worst = {}
    for _ in range(n_samples):
        for key, val in {**_interchange_sample(dg, rng), **_square_sample(dg, rng)}.items():
            worst[key] = max(worst.get(key, 0.0), val)
    for key in ("interchange", "interchange_composable", "action_multiplicative",
                "side_maps_commute", "adjoint_model_consistent"):
        report.add(key, worst.get(key, 0.0), tol)
    return report


def unit_arrow_pair(dg, alpha, rng, scale=0.5):
    """Random ``g, h`` starting at the unit over ``alpha`` whose targets are
    composable in G*.  ``g`` picks up a stabilizer element of ``alpha`` so
    the correction step of the composition recipe is nontrivial."""
    grp = dg.group
    unit = unit_covector(dg.cm, alpha)
    k2 = grp.random_arrow(rng, scale)
    # stabilizer of alpha in g: x with rho(x)^T alpha = 0
    cols = np.array([grp.cm.action_matrix(grp.cm.g.basis(i)).T @ alpha
                     for i in range(dg.cm.dim_g)]).T
    stab = nullspace(cols) if cols.size else np.zeros((dg.cm.dim_g, 0))
    sigma = stab @ rng.normal(size=stab.shape[1]) * scale if stab.shape[1] else np.zeros(dg.cm.dim_g)
    gmat = grp.target(k2) @ grp.model.g_exp(sigma)
    core = grp.from_algebra(scale * rng.normal(size=dg.cm.dim_h), np.zeros(dg.cm.dim_g))
    k1 = grp.product(core, grp.unit(gmat))
    return (k1, unit.copy()), (k2, unit.copy())
