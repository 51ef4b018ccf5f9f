"""Built-in crossed modules: the pair module, zero-map modules and the
Heisenberg module, each with a matrix-group model of its Lie 2-group.

Group models realize G inside GL(h) (as automorphisms of h), so a G-matrix
acts on h-coordinates directly and on h* by the inverse transpose.
"""

import functools
from dataclasses import dataclass, field

import numpy as np

from .coadjoint import object_tangent_matrix, orbit_dimension_split
from .crossed_module import (
    CrossedModule,
    pair_module,
    require_valid,
    validate,
    zero_module,
)
from .lie_core import (
    LieAlgebra,
    abelian,
    ad_matrix,
    check_algebra,
    derivation_algebra,
    heisenberg,
    matrix_exp,
    so3,
    subspace_rank,
)


@dataclass(frozen=True)
class Fact:
    """An expected value together with the oracle that re-derives it."""

    name: str
    value: object
    tag: str
    oracle: object = field(repr=False, compare=False)

    def rederive(self):
        return self.oracle()


@dataclass(frozen=True, eq=False)
class GroupModel:
    """Matrix model of the Lie 2-group ``H x| G => G``.

    ``h_exp`` and ``g_exp`` take algebra coordinates; ``h_rep`` is the
    derivative of ``h_exp`` at 0 (the Lie algebra representation of h used by
    the H-matrices).  ``tau`` integrates phi and ``g_on_h`` is the G-action on
    H-matrices.
    """

    H_dim: int
    G_dim: int
    embed: int
    h_exp: object
    g_exp: object
    h_rep: object
    tau: object
    g_on_h: object

    def h_identity(self):
        return np.eye(self.embed)


@dataclass(frozen=True, eq=False)
class ExampleBundle:
    name: str
    cm: CrossedModule
    group_model: GroupModel = None
    expected: tuple = ()
    points: dict = field(default_factory=dict)

    @property
    def default_point(self):
        return self.points["default"]

    def check_expected(self):
        """Recompute every expected fact; raise on the first mismatch."""
        mismatches = []
        for fact in self.expected:
            got = fact.rederive()
            if got != fact.value:
                mismatches.append(f"{fact.name}: expected {fact.value!r}, oracle gives {got!r}")
        if mismatches:
            raise AssertionError(f"{self.name}: stale expected facts: " + "; ".join(mismatches))
        return True


def base_orbit_rank(cm, alpha, rel_tol=1e-9):
    """Rank of the object-level orbit tangent at ``alpha`` (oracle form)."""
    cols = object_tangent_matrix(cm, np.asarray(alpha, dtype=float))
    return subspace_rank(list(cols.T), rel_tol)


def _basis_covector(L, name):
    return L.basis(L.index(name))


def _adjoint_group_model(L):
    """H = G = adjoint group of L inside GL(L); needs a centerless L."""
    n = L.dim

    def h_exp(a):
        return matrix_exp(ad_matrix(L, np.asarray(a, dtype=float)))

    def h_rep(a):
        return ad_matrix(L, np.asarray(a, dtype=float))

    def tau(hmat):
        return np.array(hmat, dtype=float)

    def g_on_h(gmat, hmat):
        return gmat @ hmat @ np.linalg.inv(gmat)

    return GroupModel(n, n, n, h_exp, h_exp, h_rep, tau, g_on_h)


def _translation_group_model(cm):
    """H = R^n as translation matrices, G = exp(rho(g)) in GL(n), tau = 1."""
    n = cm.dim_h

    def h_rep(a):
        out = np.zeros((n + 1, n + 1))
        out[:n, n] = a
        return out

    def h_exp(a):
        return np.eye(n + 1) + h_rep(np.asarray(a, dtype=float))

    def g_exp(x):
        return matrix_exp(cm.action_matrix(np.asarray(x, dtype=float)))

    def tau(hmat):
        return np.eye(n)

    def g_on_h(gmat, hmat):
        return h_exp(gmat @ hmat[:n, n])

    return GroupModel(n, cm.dim_g, n + 1, h_exp, g_exp, h_rep, tau, g_on_h)


def example_pair(L, name=None):
    check_algebra(L)
    cm = pair_module(L, name=name or "pair")
    alpha = L.basis(L.dim - 1)
    expected = [
        Fact("validate_max_residual", 0.0, "TRIVIAL",
             lambda: validate(cm).max_residual()),
    ]
    centerless = L.dim > 0 and subspace_rank(
        [ad_matrix(L, L.basis(i)).ravel() for i in range(L.dim)]) == L.dim
    model = _adjoint_group_model(L) if centerless else None
    if name == "pair-so3":
        expected.append(Fact("base_rank_default", 2, "DERIVED",
                             lambda: base_orbit_rank(cm, alpha)))
    return ExampleBundle(cm.name, cm, model, tuple(expected), {"default": alpha})


def example_zero(h, g, rho, name="zero"):
    cm = zero_module(h, g, rho, name=name)
    require_valid(cm)
    alpha = h.basis(h.dim - 1) if h.dim else np.zeros(0)
    mats = [cm.action_matrix(g.basis(i)).ravel() for i in range(g.dim)]
    faithful = g.dim > 0 and subspace_rank(mats) == g.dim
    model = _translation_group_model(cm) if faithful else None
    expected = [
        Fact("validate_max_residual", 0.0, "TRIVIAL",
             lambda: validate(cm).max_residual()),
    ]
    if not np.any(cm.rho):
        expected.append(Fact("base_rank_default", 0, "TRIVIAL",
                             lambda: base_orbit_rank(cm, alpha)))
    elif name == "zero-so3-r3":
        expected.append(Fact("base_rank_default", 2, "DERIVED",
                             lambda: base_orbit_rank(cm, alpha)))
    return ExampleBundle(cm.name, cm, model, tuple(expected), {"default": alpha})


def _heisenberg_log(hmat):
    n_mat = hmat - np.eye(3)
    log = n_mat - 0.5 * (n_mat @ n_mat)
    return np.array([log[0, 1], log[1, 2], log[0, 2]])


def _heisenberg_rep(a):
    out = np.zeros((3, 3))
    out[0, 1], out[1, 2], out[0, 2] = a
    return out


def heisenberg_module():
    """h3 -> Der(h3), ``u -> ad_u``, with derivations acting by evaluation."""
    h = heisenberg()
    der, mats = derivation_algebra(h)
    stacked = np.array([m.ravel() for m in mats]).T
    phi = np.zeros((der.dim, h.dim))
    for a in range(h.dim):
        phi[:, a] = np.linalg.lstsq(stacked, ad_matrix(h, h.basis(a)).ravel(), rcond=None)[0]
    phi[np.abs(phi) < 1e-14] = 0.0
    rho = np.array([m.T for m in mats])
    return CrossedModule(h, der, phi, rho, name="heisenberg"), mats


def _derivation_dim_oracle():
    # independent of derivation_algebra: brute-force assembly of the
    # derivation equations and a rank count
    h = heisenberg()
    n = h.dim
    rows = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                row = np.zeros((n, n))
                for l in range(n):
                    row[k, l] += h.c[i, j, l]
                    row[l, i] -= h.c[l, j, k]
                    row[l, j] -= h.c[i, l, k]
                rows.append(row.ravel())
    return n * n - int(np.linalg.matrix_rank(np.array(rows)))


def example_heisenberg():
    cm, mats = heisenberg_module()
    h = cm.h

    def g_exp(x):
        return matrix_exp(cm.action_matrix(np.asarray(x, dtype=float)))

    def h_exp(a):
        return matrix_exp(_heisenberg_rep(np.asarray(a, dtype=float)))

    def tau(hmat):
        return matrix_exp(ad_matrix(h, _heisenberg_log(hmat)))

    def g_on_h(gmat, hmat):
        return h_exp(gmat @ _heisenberg_log(hmat))

    model = GroupModel(3, cm.dim_g, 3, h_exp, g_exp, _heisenberg_rep, tau, g_on_h)
    z_star = _basis_covector(h, "z")
    p_star = _basis_covector(h, "p")
    expected = (
        Fact("dim_g", 6, "DERIVED", _derivation_dim_oracle),
        Fact("base_rank_z", 3, "PAPER", lambda: base_orbit_rank(cm, z_star)),
        Fact("base_rank_p", 2, "DERIVED", lambda: base_orbit_rank(cm, p_star)),
        Fact("split_consistent_z", True, "DERIVED",
             lambda: _split_consistent(cm, z_star)),
    )
    return ExampleBundle("heisenberg", cm, model, expected,
                         {"default": z_star, "zero-level": p_star})


def _split_consistent(cm, alpha):
    split = orbit_dimension_split(cm, alpha)
    return split["total_rank"] == split["core_rank"] + split["base_rank"]


@functools.lru_cache(maxsize=None)
def _builtin(name):
    if name == "pair-so3":
        return example_pair(so3(), name="pair-so3")
    if name == "zero-so3-r3":
        L = so3()
        return example_zero(abelian(3, prefix="a"), L, L.c.copy(), name="zero-so3-r3")
    if name == "heisenberg":
        return example_heisenberg()
    raise KeyError(name)


BUILTIN_NAMES = ("pair-so3", "zero-so3-r3", "heisenberg")


def builtin(name):
    """Look up a built-in bundle by name (``builtin:`` prefix optional)."""
    if name.startswith("builtin:"):
        name = name[len("builtin:"):]
    try:
        return _builtin(name)
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None


def group_model_fd_residuals(bundle, step=1e-5, seed=0):
    """Central-difference derivatives of the group model against phi and rho.

    Returns a dict of max residuals: ``g_exp`` vs rho, ``tau o h_exp`` vs
    rho(phi(.)), ``h_exp`` vs ``h_rep`` and the linearized ``g_on_h`` vs the
    G-matrix acting on h-coordinates.
    """
    cm, gm = bundle.cm, bundle.group_model
    if gm is None:
        raise ValueError(f"{bundle.name} has no group model")
    rng = np.random.default_rng(seed)

    def central(fn, v):
        return (fn(step * v) - fn(-step * v)) / (2.0 * step)

    out = {"g_exp": 0.0, "tau": 0.0, "h_exp": 0.0, "g_on_h": 0.0}
    for _ in range(5):
        x = rng.normal(size=cm.dim_g)
        a = rng.normal(size=cm.dim_h)
        out["g_exp"] = max(out["g_exp"], float(np.max(np.abs(
            central(gm.g_exp, x) - cm.action_matrix(x)))))
        out["tau"] = max(out["tau"], float(np.max(np.abs(
            central(lambda v: gm.tau(gm.h_exp(v)), a) - cm.action_matrix(cm.phi @ a)))))
        out["h_exp"] = max(out["h_exp"], float(np.max(np.abs(
            central(gm.h_exp, a) - gm.h_rep(a)))))
        gmat = gm.g_exp(0.3 * rng.normal(size=cm.dim_g))
        out["g_on_h"] = max(out["g_on_h"], float(np.max(np.abs(
            central(lambda v: gm.g_on_h(gmat, gm.h_exp(v)), a) - gm.h_rep(gmat @ a)))))
    return out
