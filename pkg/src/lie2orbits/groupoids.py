"""The Lie 2-algebra groupoid h x| g => g, its dual G* => h*, and numerical
checks of groupoid axioms.

Both groupoids here are linear: every structure map is a matrix.  They are
stored as :class:`GroupoidModel`, whose multiplication lives on a global
parametrization of composable pairs ``(q, f)``: ``q`` is the right factor and
``f`` are coordinates in ``ker s`` locating the left factor ``p`` over
``t(q)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .lie_core import nullspace
from .report import CheckReport

AXIOM_NAMES = (
    "source_unit",
    "target_unit",
    "left_unit",
    "right_unit",
    "inverse",
    "associativity",
    "source_target_product",
)


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GroupoidModel:
    """Affine structure maps of a groupoid on vector spaces.

    ``s``, ``t``, ``u``, ``inv`` and ``m`` are ``(matrix, offset)`` pairs;
    ``m`` acts on the stacked parameter ``(q, f)``.
    """

    arrow_dim: int
    object_dim: int
    s: tuple
    t: tuple
    u: tuple
    inv: tuple
    m: tuple
    fiber_basis: np.ndarray = field(repr=False)
    name: str = "groupoid"

    @classmethod
    def from_linear(cls, s, t, u, inv, m_left, m_right, name="groupoid"):
        """Build from linear maps with ``m(p, q) = m_left p + m_right q``."""
        s, t, u, inv = (np.asarray(a, dtype=float) for a in (s, t, u, inv))
        m_left = np.asarray(m_left, dtype=float)
        m_right = np.asarray(m_right, dtype=float)
        n_obj, n_arr = s.shape
        kern = nullspace(s) if n_arr else np.zeros((0, 0))
        s_pinv = np.linalg.pinv(s) if s.size else np.zeros((n_arr, n_obj))
        # p(q, f) = s^+ t q + K f
        p_of = np.hstack([s_pinv @ t, kern])
        m_param = m_left @ p_of + np.hstack([m_right, np.zeros((n_arr, kern.shape[1]))])
        zeros_a, zeros_o = np.zeros(n_arr), np.zeros(n_obj)
        return cls(
            arrow_dim=n_arr,
            object_dim=n_obj,
            s=(_frozen(s), _frozen(zeros_o)),
            t=(_frozen(t), _frozen(zeros_o)),
            u=(_frozen(u), _frozen(zeros_a)),
            inv=(_frozen(inv), _frozen(zeros_a)),
            m=(_frozen(m_param), _frozen(zeros_a)),
            fiber_basis=_frozen(kern),
            name=name,
        )

    def with_multiplication(self, matrix, offset=None):
        """Copy with the parametrized multiplication replaced."""
        offset = self.m[1] if offset is None else offset
        return GroupoidModel(self.arrow_dim, self.object_dim, self.s, self.t,
                             self.u, self.inv, (_frozen(matrix), _frozen(offset)),
                             self.fiber_basis, self.name)

    @property
    def fiber_dim(self):
        return self.fiber_basis.shape[1]

    def source(self, p):
        return self.s[0] @ p + self.s[1]

    def target(self, p):
        return self.t[0] @ p + self.t[1]

    def unit(self, o):
        return self.u[0] @ o + self.u[1]

    def inverse(self, p):
        return self.inv[0] @ p + self.inv[1]

    def _particular(self, o):
        mat, off = self.s
        return np.linalg.lstsq(mat, o - off, rcond=None)[0] if mat.size else np.zeros(self.arrow_dim)

    def left_factor(self, q, f):
        """The arrow ``p`` with ``s(p) = t(q)`` and fiber coordinate ``f``."""
        return self._particular(self.target(q)) + self.fiber_basis @ f

    def fiber_coordinate(self, p, q):
        return self.fiber_basis.T @ (p - self._particular(self.target(q)))

    def compose(self, p, q):
        f = self.fiber_coordinate(p, q)
        mat, off = self.m
        return mat @ np.concatenate([q, f]) + off

    def composable_residual(self, p, q):
        return float(np.max(np.abs(self.source(p) - self.target(q)), initial=0.0))

    # sampling protocol used by groupoid_axioms
    def random_arrow(self, rng):
        return rng.normal(size=self.arrow_dim)

    def random_object(self, rng):
        return rng.normal(size=self.object_dim)

    def random_left(self, rng, q):
        return self.left_factor(q, rng.normal(size=self.fiber_dim))

    @staticmethod
    def arrow_distance(a, b):
        return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))

    object_distance = arrow_distance


def lie2_structure(cm):
    """The action groupoid h x| g => g with ``t(a, x) = phi(a) + x``."""
    n, m = cm.dim_h, cm.dim_g
    phi = cm.phi
    eye_n, eye_m = np.eye(n), np.eye(m)
    s = np.hstack([np.zeros((m, n)), eye_m])
    t = np.hstack([phi, eye_m])
    u = np.vstack([np.zeros((n, m)), eye_m])
    inv = np.block([[-eye_n, np.zeros((n, m))], [phi, eye_m]])
    # m((a, phi b + y), (b, y)) = (a + b, y)
    m_left = np.block([[eye_n, np.zeros((n, m))], [np.zeros((m, n)), np.zeros((m, m))]])
    m_right = np.eye(n + m)
    return GroupoidModel.from_linear(s, t, u, inv, m_left, m_right,
                                     name=f"lie2({cm.name})")


def dual_structure(cm):
    """The dual groupoid h* + g* => h*, ``s = alpha - phi^T theta``, ``t = alpha``."""
    n, m = cm.dim_h, cm.dim_g
    phi_t = cm.phi.T
    eye_n, eye_m = np.eye(n), np.eye(m)
    s = np.hstack([eye_n, -phi_t])
    t = np.hstack([eye_n, np.zeros((n, m))])
    u = np.vstack([eye_n, np.zeros((m, n))])
    inv = np.block([[eye_n, -phi_t], [np.zeros((m, n)), -eye_m]])
    # m((alpha, theta), (alpha - phi^T theta, theta')) = (alpha, theta + theta')
    m_left = np.eye(n + m)
    m_right = np.block([[np.zeros((n, n)), np.zeros((n, m))], [np.zeros((m, n)), eye_m]])
    return GroupoidModel.from_linear(s, t, u, inv, m_left, m_right,
                                     name=f"dual({cm.name})")


def pair_groupoid(dim):
    """``V x V => V`` with arrows ``(target, source)``."""
    eye = np.eye(dim)
    z = np.zeros((dim, dim))
    s = np.hstack([z, eye])
    t = np.hstack([eye, z])
    u = np.vstack([eye, eye])
    inv = np.block([[z, eye], [eye, z]])
    m_left = np.block([[eye, z], [z, z]])
    m_right = np.block([[z, z], [z, eye]])
    return GroupoidModel.from_linear(s, t, u, inv, m_left, m_right, name="pair")


def groupoid_axioms(gm, n_samples=100, tol=1e-12, seed=0):
    """Max residuals of the groupoid laws over random composable tuples.

    ``gm`` only needs the sampling protocol of :class:`GroupoidModel`
    (``source``, ``target``, ``unit``, ``inverse``, ``compose``,
    ``random_arrow``, ``random_object``, ``random_left`` and the two
    distance functions), so nonlinear models are checked the same way.
    """
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(AXIOM_NAMES, 0.0)
    ad, od = gm.arrow_distance, gm.object_distance
    for _ in range(n_samples):
        o = gm.random_object(rng)
        worst["source_unit"] = max(worst["source_unit"], od(gm.source(gm.unit(o)), o))
        worst["target_unit"] = max(worst["target_unit"], od(gm.target(gm.unit(o)), o))

        r = gm.random_arrow(rng)
        q = gm.random_left(rng, r)
        p = gm.random_left(rng, q)

        worst["left_unit"] = max(worst["left_unit"],
                                 ad(gm.compose(gm.unit(gm.target(p)), p), p))
        worst["right_unit"] = max(worst["right_unit"],
                                  ad(gm.compose(p, gm.unit(gm.source(p))), p))
        pinv = gm.inverse(p)
        worst["inverse"] = max(worst["inverse"],
                               ad(gm.compose(p, pinv), gm.unit(gm.target(p))),
                               ad(gm.compose(pinv, p), gm.unit(gm.source(p))))
        pq = gm.compose(p, q)
        worst["associativity"] = max(worst["associativity"],
                                     ad(gm.compose(pq, r), gm.compose(p, gm.compose(q, r))))
        worst["source_target_product"] = max(worst["source_target_product"],
                                             od(gm.source(pq), gm.source(q)),
                                             od(gm.target(pq), gm.target(p)))
    report = CheckReport(meta={"seed": seed, "n_samples": n_samples,
                               "example_name": getattr(gm, "name", "")})
    for name in AXIOM_NAMES:
        report.add(name, worst[name], tol)
    return report


def pair_isomorphism_residual(cm, n_samples=100, seed=0):
    """For ``phi = id``: max residual of ``(a, x) -> (a + x, x)`` intertwining
    lie2_structure(cm) with the pair groupoid."""
    lie2 = lie2_structure(cm)
    pair = pair_groupoid(cm.dim_g)
    n = cm.dim_h
    iso = np.block([[np.eye(n), np.eye(n)], [np.zeros((n, n)), np.eye(n)]])
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        q = lie2.random_arrow(rng)
        p = lie2.random_left(rng, q)
        o = rng.normal(size=lie2.object_dim)
        diffs = [
            pair.source(iso @ p) - lie2.source(p),
            pair.target(iso @ p) - lie2.target(p),
            pair.compose(iso @ p, iso @ q) - iso @ lie2.compose(p, q),
            pair.unit(o) - iso @ lie2.unit(o),
            pair.inverse(iso @ p) - iso @ lie2.inverse(p),
        ]
        worst = max(worst, max(float(np.max(np.abs(d))) for d in diffs))
    return worst


def _pairing(covector, vector):
    return float(np.dot(covector, vector))


def cotangent_mult_check(cm, n_samples=100, tol=1e-12, seed=0):
    """Pairing identity of the cotangent groupoid multiplication, linear case.

    With ``T*G* = G* x (h + g)``, covectors compose by the Lie 2-algebra
    multiplication.  Two residuals are reported: the pairing identity
    ``<m^(X, Y), Tm(u, v)> = <X, u> + <Y, v>`` on random composable data, and
    the distance between ``m^(X, Y)`` obtained from the Lie 2-algebra and the
    unique covector solving that identity over the whole space of composable
    tangent pairs.
    """
    dual = dual_structure(cm)
    lie2 = lie2_structure(cm)
    n_arr = dual.arrow_dim
    # composable tangent pairs (u, v): s u - t v = 0
    constraint = np.hstack([dual.s[0], -dual.t[0]])
    pairs = nullspace(constraint) if n_arr else np.zeros((0, 0))
    m_left = np.eye(n_arr)
    n = cm.dim_h
    m_right = np.zeros((n_arr, n_arr))
    m_right[n:, n:] = np.eye(cm.dim_g)
    tm_on_pairs = np.hstack([m_left, m_right]) @ pairs

    rng = np.random.default_rng(seed)
    worst_pair = worst_solve = worst_match = 0.0
    for _ in range(n_samples):
        v = dual.random_arrow(rng)
        u = dual.random_left(rng, v)
        big_y = lie2.random_arrow(rng)
        big_x = lie2.random_left(rng, big_y)
        big_z = lie2.compose(big_x, big_y)
        tm_uv = dual.compose(u, v)
        lhs = _pairing(big_z, tm_uv)
        rhs = _pairing(big_x, u) + _pairing(big_y, v)
        worst_pair = max(worst_pair, abs(lhs - rhs))

        if pairs.shape[1]:
            rhs_vec = pairs.T @ np.concatenate([big_x, big_y])
            z_ls = np.linalg.lstsq(tm_on_pairs.T, rhs_vec, rcond=None)[0]
            worst_solve = max(worst_solve,
                              float(np.max(np.abs(tm_on_pairs.T @ z_ls - rhs_vec))))
            worst_match = max(worst_match, float(np.max(np.abs(z_ls - big_z))))
    report = CheckReport(meta={"seed": seed, "n_samples": n_samples,
                               "example_name": cm.name})
    report.add("cotangent_pairing", worst_pair, tol)
    report.add("cotangent_solvable", worst_solve, tol)
    report.add("cotangent_mult_matches_lie2", worst_match, max(tol, 1e-10))
    return report
