"""Numerical certificates for unit orbits of the dual groupoid G* => h*.

Every check samples independent points from child seeds of one
``SeedSequence`` and merges per-sample residuals by maximum, so reports are
identical whatever the number of worker threads (``LIE2_ORBITS_THREADS``).
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .coadjoint import (
    exact_flow,
    flow,
    kks_closedness_residual,
    kks_value,
    lie_poisson_matrix,
    object_tangent_matrix,
    orbit_chart,
    orbit_rank,
    unit_covector,
)
from .crossed_module import semidirect
from .groupoids import cotangent_mult_check, dual_structure, lie2_structure
from .lie_core import DEFAULT_RANK_TOL, coad_matrix, matrix_exp, nullspace, subspace_rank
from .report import CheckReport, merge_max

__all__ = [
    "CheckReport",
    "merge_max",
    "multiplicative_form_check",
    "coisotropic_graph_check",
    "pi_sharp_morphism_check",
    "target_poisson_check",
    "orbit_unit_compose",
    "orbit_unit_compose_check",
    "kks_check",
    "flow_check",
    "sample_orbit_pair",
    "sample_orbit_point",
    "VACUOUS_NOTE",
]

log = logging.getLogger(__name__)

AFFINE_TOL = 1e-9
KKS_TOL = 1e-8
FD_TOL = 1e-6
DEFAULT_STEP = 0.2
DEFAULT_MAX_STEPS = 8
VACUOUS_NOTE = "degenerate (omega=0), coisotropy vacuous"


def _threads():
    try:
        return max(1, int(os.environ.get("LIE2_ORBITS_THREADS", "1")))
    except ValueError:
        return 1


def _maxabs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _sample_max(sample_fn, n_samples, seed):
    """Run ``sample_fn(rng)`` on independent child streams; max-merge the dicts.

    Notes (strings) are kept from the sample with the largest residual of the
    same key; ties resolve to the lowest sample index.
    """
    children = np.random.SeedSequence(seed).spawn(n_samples)
    rngs = [np.random.default_rng(c) for c in children]
    n_threads = min(_threads(), max(1, n_samples))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(sample_fn, rngs))
    else:
        results = [sample_fn(r) for r in rngs]
    worst, notes = {}, {}
    for res in results:
        for key, val in res.items():
            if isinstance(val, tuple):
                val, note = val
            else:
                note = ""
            if key not in worst or val > worst[key]:
                worst[key] = val
                notes[key] = note
    return worst, notes


# -- orbit sampling -------------------------------------------------------------

def _joint_scale(vectors, step):
    norm = np.sqrt(sum(float(v @ v) for v in vectors))
    return step / norm if norm > 0 else 0.0


def sample_orbit_point(cm, xi_unit, rng, D=None, step=DEFAULT_STEP, max_steps=DEFAULT_MAX_STEPS):
    """A point of the coadjoint orbit through the unit over ``xi_unit``,
    reached by 1..max_steps exact flows of length ``step``."""
    D = semidirect(cm) if D is None else D
    xi = unit_covector(cm, xi_unit)
    for _ in range(int(rng.integers(1, max_steps + 1))):
        X = rng.normal(size=D.dim)
        xi = matrix_exp(_joint_scale([X], step) * coad_matrix(D, X)) @ xi
    return xi


def sample_orbit_pair(cm, xi_unit, rng, D=None, lie2=None,
                      step=DEFAULT_STEP, max_steps=DEFAULT_MAX_STEPS):
    """A composable pair ``(p, q)`` of orbit points.

    Both start at the unit; each step moves them by the flows of a composable
    pair of Lie 2-algebra elements, which keeps ``s(p) = t(q)`` exactly since
    the infinitesimal coadjoint action is a groupoid morphism.
    """
    D = semidirect(cm) if D is None else D
    lie2 = lie2_structure(cm) if lie2 is None else lie2
    p = unit_covector(cm, xi_unit)
    q = p.copy()
    for _ in range(int(rng.integers(1, max_steps + 1))):
        y2 = lie2.random_arrow(rng)
        y1 = lie2.random_left(rng, y2)
        lam = _joint_scale([y1, y2], step)
        p = matrix_exp(lam * coad_matrix(D, y1)) @ p
        q = matrix_exp(lam * coad_matrix(D, y2)) @ q
    return p, q


class _OrbitContext:
    """Shared data for checks at one unit."""

    def __init__(self, cm, xi_unit, groupoid=None, rel_tol=DEFAULT_RANK_TOL):
        self.cm = cm
        self.D = semidirect(cm)
        self.dual = dual_structure(cm) if groupoid is None else groupoid
        self.lie2 = lie2_structure(cm)
        self.xi_unit = np.asarray(xi_unit, dtype=float)
        self.unit = unit_covector(cm, self.xi_unit)
        self.rel_tol = rel_tol
        self.unit_chart = orbit_chart(self.D, self.unit, rel_tol)
        self.orbit_dim = self.unit_chart.dim
        obj = object_tangent_matrix(cm, self.xi_unit)
        self.base_dim = subspace_rank(list(obj.T), rel_tol) if obj.size else 0

    def chart(self, xi):
        return orbit_chart(self.D, xi, self.rel_tol)

    def tangent_graph(self, p, q):
        """Charts at p, q, m(p, q) and a basis of composable tangent pairs.

        Returns ``(charts, pairs, tm)`` where ``pairs`` has columns
        ``(c_p, c_q)`` in chart coordinates and ``tm`` holds the ambient
        images under the differential of the multiplication.
        """
        r = self.dual.compose(p, q)
        cp, cq, cr = self.chart(p), self.chart(q), self.chart(r)
        s_mat, t_mat = self.dual.s[0], self.dual.t[0]
        constraint = np.hstack([s_mat @ cp.tangent_basis, -(t_mat @ cq.tangent_basis)])
        if constraint.shape[1] == 0:
            pairs = np.zeros((0, 0))
        else:
            pairs = nullspace(constraint, self.rel_tol)
        dp, dq = cp.dim, cq.dim
        tm = np.zeros((self.D.dim, pairs.shape[1]))
        for j in range(pairs.shape[1]):
            vp = cp.tangent_basis @ pairs[:dp, j]
            vq = cq.tangent_basis @ pairs[dp:dp + dq, j]
            # m is affine, so its differential is an exact difference
            tm[:, j] = self.dual.compose(p + vp, q + vq) - r
        return (cp, cq, cr), pairs, tm

    def rank_note(self, charts, points):
        bad = [(c.dim, pt) for c, pt in zip(charts, points) if c.dim != self.orbit_dim]
        if not bad:
            return 0.0, ""
        dim, pt = bad[0]
        return float(abs(dim - self.orbit_dim)), (
            f"orbit rank {dim} != {self.orbit_dim} at point "
            + ",".join(f"{v:.6g}" for v in pt))


def _base_meta(cm, xi_unit, seed, n_samples, **extra):
    meta = {"seed": seed, "n_samples": n_samples, "example_name": cm.name,
            "xi_unit": [float(v) for v in np.asarray(xi_unit, dtype=float)]}
    meta.update(extra)
    return meta


def multiplicative_form_check(cm, xi_unit, n_samples=100, tol=AFFINE_TOL, seed=0,
                              step=DEFAULT_STEP, max_steps=DEFAULT_MAX_STEPS,
                              groupoid=None):
    """``m^* omega - pr_1^* omega - pr_2^* omega`` on composable tangent pairs
    of the orbit through the unit over ``xi_unit``.

    ``groupoid`` overrides the multiplication (used to test that a corrupted
    structure is detected); sampling always follows the true structure.
    """
    ctx = _OrbitContext(cm, xi_unit, groupoid)
    expected_pairs = 2 * ctx.orbit_dim - ctx.base_dim

    def sample(rng):
        p, q = sample_orbit_pair(cm, ctx.xi_unit, rng, ctx.D, ctx.lie2, step, max_steps)
        charts, pairs, tm = ctx.tangent_graph(p, q)
        cp, cq, cr = charts
        rank_res = ctx.rank_note(charts, (p, q, ctx.dual.compose(p, q)))
        out = {"orbit_rank_stable": rank_res,
               "composable_pair_dimension": float(abs(pairs.shape[1] - expected_pairs))}
        if ctx.orbit_dim == 0 or pairs.shape[1] == 0:
            out["multiplicativity"] = 0.0
            out["tangent_closure"] = 0.0
            return out
        dp = cp.dim
        ap, aq = pairs[:dp], pairs[dp:]
        coords_r = cr.tangent_basis.T @ tm
        closure = tm - cr.tangent_basis @ coords_r
        omega_p = ap.T @ cp.kks @ ap
        omega_q = aq.T @ cq.kks @ aq
        omega_r = coords_r.T @ cr.kks @ coords_r
        out["multiplicativity"] = _maxabs(omega_r - omega_p - omega_q)
        out["tangent_closure"] = _maxabs(closure)
        return out

    worst, notes = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta=_base_meta(cm, xi_unit, seed, n_samples,
                                         orbit_dim=ctx.orbit_dim, base_dim=ctx.base_dim))
    degenerate = ctx.orbit_dim == 0
    report.add("multiplicativity", worst["multiplicativity"], tol,
               note="degenerate (omega=0)" if degenerate else "")
    report.add("tangent_closure", worst["tangent_closure"], tol)
    report.add("composable_pair_dimension", worst["composable_pair_dimension"], 0.0)
    report.add("orbit_rank_stable", worst["orbit_rank_stable"], 0.0,
               note=notes.get("orbit_rank_stable", ""))
    return report


def coisotropic_graph_check(cm, xi_unit, n_samples=100, tol=AFFINE_TOL, seed=0,
                            step=DEFAULT_STEP, max_steps=DEFAULT_MAX_STEPS,
                            groupoid=None):
    """Coisotropy of the graph of m inside O x O x O-bar.

    Two formulations: containment of the symplectic orthogonal of the graph
    tangent (``coisotropy``), and the bivector form: the orbit Poisson
    bivectors map the annihilator of the graph tangent into it
    (``coisotropy_bivector``).  When the form vanishes identically the first
    one is recorded as vacuous.
    """
    ctx = _OrbitContext(cm, xi_unit, groupoid)
    expected_dim = 2 * ctx.orbit_dim - ctx.base_dim
    n_amb = ctx.D.dim

    def sample(rng):
        p, q = sample_orbit_pair(cm, ctx.xi_unit, rng, ctx.D, ctx.lie2, step, max_steps)
        charts, pairs, tm = ctx.tangent_graph(p, q)
        cp, cq, cr = charts
        rank_res = ctx.rank_note(charts, (p, q, ctx.dual.compose(p, q)))
        k = pairs.shape[1]
        out = {"orbit_rank_stable": rank_res,
               "graph_dimension": float(abs(k - expected_dim))}
        dp, dq = cp.dim, cq.dim
        # ambient tangent of the graph in R^{3N}
        amb = np.vstack([cp.tangent_basis @ pairs[:dp], cq.tangent_basis @ pairs[dp:dp + dq], tm]) \
            if k else np.zeros((3 * n_amb, 0))
        big_pi = np.zeros((3 * n_amb, 3 * n_amb))
        big_pi[:n_amb, :n_amb] = cp.poisson_bivector()
        big_pi[n_amb:2 * n_amb, n_amb:2 * n_amb] = cq.poisson_bivector()
        big_pi[2 * n_amb:, 2 * n_amb:] = -cr.poisson_bivector()
        q_graph = np.linalg.qr(amb)[0] if k else np.zeros((3 * n_amb, 0))
        annihilator = nullspace(amb.T, ctx.rel_tol) if k else np.eye(3 * n_amb)
        image = big_pi @ annihilator
        out["coisotropy_bivector"] = _maxabs(image - q_graph @ (q_graph.T @ image))

        if ctx.orbit_dim == 0 or k == 0:
            out["coisotropy"] = 0.0
            return out
        # the same test in chart coordinates with omega + omega - omega
        coords = np.vstack([pairs[:dp], pairs[dp:dp + dq], cr.tangent_basis.T @ tm])
        dr = cr.dim
        omega = np.zeros((dp + dq + dr, dp + dq + dr))
        omega[:dp, :dp] = cp.kks
        omega[dp:dp + dq, dp:dp + dq] = cq.kks
        omega[dp + dq:, dp + dq:] = -cr.kks
        orth = nullspace(coords.T @ omega, ctx.rel_tol)
        qc = np.linalg.qr(coords)[0]
        out["coisotropy"] = _maxabs(orth - qc @ (qc.T @ orth)) if orth.size else 0.0
        return out

    worst, notes = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta=_base_meta(cm, xi_unit, seed, n_samples,
                                         orbit_dim=ctx.orbit_dim, base_dim=ctx.base_dim))
    if ctx.orbit_dim == 0:
        report.add("coisotropy", 0.0, tol, note=VACUOUS_NOTE, passed=True)
    else:
        report.add("coisotropy", worst["coisotropy"], tol)
    report.add("coisotropy_bivector", worst["coisotropy_bivector"], tol)
    report.add("graph_dimension", worst["graph_dimension"], 0.0)
    report.add("orbit_rank_stable", worst["orbit_rank_stable"], 0.0,
               note=notes.get("orbit_rank_stable", ""))
    return report


def pi_sharp_morphism_check(cm, n_samples=100, tol=AFFINE_TOL, seed=0, scale=1.0,
                            pairing_tol=1e-12):
    """``(xi, X) -> (xi, coad_X xi)`` as a map from G* x (h x| g) to the
    tangent groupoid of G*: residuals for source, target, multiplication, unit
    and inverse.

    Base covectors are multiplied by ``scale``; the source and target
    residuals are reported relative to ``|scale|``.
    """
    if scale == 0:
        raise ValueError("scale must be nonzero")
    D = semidirect(cm)
    dual, lie2 = dual_structure(cm), lie2_structure(cm)
    s_d, t_d, u_d, i_d = dual.s[0], dual.t[0], dual.u[0], dual.inv[0]

    def pi_sharp(xi, X):
        return coad_matrix(D, X) @ xi

    def pi_sharp_base(alpha, x):
        return -cm.action_matrix(x).T @ alpha

    def sample(rng):
        xi2 = scale * dual.random_arrow(rng)
        xi1 = dual.random_left(rng, xi2 / scale) * scale
        X2 = lie2.random_arrow(rng)
        X1 = lie2.random_left(rng, X2)
        v1 = pi_sharp(xi1, X1)
        src = _maxabs(s_d @ v1 - pi_sharp_base(s_d @ xi1, lie2.source(X1)))
        tgt = _maxabs(t_d @ v1 - pi_sharp_base(t_d @ xi1, lie2.target(X1)))
        v2 = pi_sharp(xi2, X2)
        lhs = pi_sharp(dual.compose(xi1, xi2), lie2.compose(X1, X2))
        rhs = dual.compose(xi1 + v1, xi2 + v2) - dual.compose(xi1, xi2)
        alpha = scale * rng.normal(size=cm.dim_h)
        x = rng.normal(size=cm.dim_g)
        unit = _maxabs(pi_sharp(u_d @ alpha, lie2.unit(x)) - u_d @ pi_sharp_base(alpha, x))
        inv = _maxabs(pi_sharp(i_d @ xi1, lie2.inverse(X1)) - i_d @ v1)
        return {"pi_sharp_source": src / abs(scale), "pi_sharp_target": tgt / abs(scale),
                "pi_sharp_multiplication": _maxabs(lhs - rhs),
                "pi_sharp_unit": unit, "pi_sharp_inverse": inv}

    worst, _ = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta={"seed": seed, "n_samples": n_samples,
                               "example_name": cm.name, "scale": float(scale)})
    for key in ("pi_sharp_source", "pi_sharp_target", "pi_sharp_multiplication",
                "pi_sharp_unit", "pi_sharp_inverse"):
        report.add(key, worst[key], tol)
    report.extend(cotangent_mult_check(cm, n_samples, pairing_tol, seed))
    return report


def target_poisson_check(cm, xi_unit, n_samples=100, tol=KKS_TOL, seed=0,
                         step=DEFAULT_STEP, max_steps=DEFAULT_MAX_STEPS):
    """Push the orbit Poisson bivector forward along the target map and
    compare with the Lie-Poisson bivector of h* at the image point."""
    ctx = _OrbitContext(cm, xi_unit)
    t_mat = ctx.dual.t[0]
    h = cm.h

    def sample(rng):
        p = sample_orbit_point(cm, ctx.xi_unit, rng, ctx.D, step, max_steps)
        chart = ctx.chart(p)
        push = t_mat @ chart.poisson_bivector() @ t_mat.T
        alpha = t_mat @ p
        base = np.einsum("ijk,k->ij", h.c, alpha) if h.dim else np.zeros((0, 0))
        return {"target_poisson": _maxabs(push - base),
                "pushforward_norm": float(np.linalg.norm(push)) if push.size else 0.0,
                "orbit_rank_stable": ctx.rank_note([chart], [p])}

    worst, notes = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta=_base_meta(cm, xi_unit, seed, n_samples,
                                         orbit_dim=ctx.orbit_dim,
                                         max_pushforward_norm=worst["pushforward_norm"]))
    report.add("target_poisson", worst["target_poisson"], tol)
    report.add("orbit_rank_stable", worst["orbit_rank_stable"], 0.0,
               note=notes.get("orbit_rank_stable", ""))
    return report


# -- orbits of the double groupoid ------------------------------------------------

def orbit_unit_compose(dg, g, h, tol=AFFINE_TOL):
    """Compose two orbit arrows of the double groupoid starting at one unit.

    ``g`` and ``h`` are arrows ``(k, xi)`` of G* x 2G with the same horizontal
    source ``u`` (a unit of G*) and with horizontal targets composable in G*.
    Returns ``l`` with horizontal source ``u`` and horizontal target the
    product of the two targets.
    """
    u = dg.h_source(g)
    if _maxabs(u - dg.h_source(h)) > tol:
        raise ValueError("g and h do not start at the same point")
    if _maxabs(dg.dual.unit(dg.dual.source(u)) - u) > tol:
        raise ValueError("the common source is not a unit of the dual groupoid")
    x, y = dg.h_target(g), dg.h_target(h)
    if dg.dual.composable_residual(x, y) > tol:
        raise ValueError("horizontal targets are not composable")
    # correction square: moves the vertical source of g onto the vertical target of h
    k = dg.h_compose(dg.h_inverse(dg.v_unit(dg.v_source(g))), dg.v_unit(dg.v_target(h)))
    g_prime = dg.h_compose(g, k)
    return dg.v_compose(g_prime, h)


def orbit_unit_compose_check(dg, xi_unit, n_samples=100, tol=AFFINE_TOL, seed=0):
    """Postconditions of :func:`orbit_unit_compose` on random orbit arrows,
    plus orbit-rank preservation at the composed target."""
    from .double import unit_arrow_pair

    cm = dg.cm
    D = dg.group.D
    alpha = np.asarray(xi_unit, dtype=float)
    unit = unit_covector(cm, alpha)
    unit_rank = subspace_rank(list(lie_poisson_matrix(D, unit).T)) if np.any(unit) else 0

    def rank_at(xi):
        lp = lie_poisson_matrix(D, xi)
        return subspace_rank(list(lp.T)) if np.any(lp) else 0

    def sample(rng):
        g, h = unit_arrow_pair(dg, alpha, rng)
        x, y = dg.h_target(g), dg.h_target(h)
        l_arrow = orbit_unit_compose(dg, g, h, tol)
        return {
            "compose_source_unit": _maxabs(dg.h_source(l_arrow) - unit),
            "compose_target_product": _maxabs(dg.h_target(l_arrow) - dg.dual.compose(x, y)),
            "compose_orbit_rank": float(abs(rank_at(dg.h_target(l_arrow)) - unit_rank)),
        }

    worst, _ = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta=_base_meta(cm, alpha, seed, n_samples, orbit_dim=unit_rank))
    report.add("compose_source_unit", worst["compose_source_unit"], tol)
    report.add("compose_target_product", worst["compose_target_product"], tol)
    report.add("compose_orbit_rank", worst["compose_orbit_rank"], 0.0)
    return report


# -- single-point checks ----------------------------------------------------------

def kks_check(D, xi, n_samples=20, tol=KKS_TOL, seed=0, fd_tol=FD_TOL, fd_step=1e-4):
    """Antisymmetry, nondegeneracy, agreement with the bracket, independence
    of the generator choice and closedness of the KKS form at ``xi``."""
    xi = np.asarray(xi, dtype=float)
    chart = orbit_chart(D, xi)
    lp = lie_poisson_matrix(D, xi)
    kernel = nullspace(lp) if lp.size else np.zeros((0, 0))
    kks = chart.kks
    rank = int(np.linalg.matrix_rank(kks)) if kks.size else 0

    def sample(rng):
        X, Y, Z = (v / np.linalg.norm(v) for v in rng.normal(size=(3, D.dim)))
        if chart.dim == 0:
            return {"kks_bracket": 0.0, "kks_well_defined": 0.0, "kks_closedness": 0.0}
        u, v = lp @ X, lp @ Y
        bracket = abs(kks_value(D, xi, u, v) - float(X @ lp @ Y))
        shift = kernel @ rng.normal(size=kernel.shape[1]) if kernel.shape[1] else np.zeros(D.dim)
        well = abs(float(shift @ lp @ Y))
        closed = kks_closedness_residual(D, xi, X, Y, Z, step=fd_step)
        return {"kks_bracket": bracket, "kks_well_defined": well, "kks_closedness": closed}

    worst, _ = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta={"seed": seed, "n_samples": n_samples, "orbit_dim": chart.dim})
    report.add("kks_antisymmetry", _maxabs(kks + kks.T), tol)
    report.add("kks_nondegenerate", float(abs(rank - chart.dim)), 0.0)
    report.add("kks_bracket", worst["kks_bracket"], tol)
    report.add("kks_well_defined", worst["kks_well_defined"], 1e-10)
    report.add("kks_closedness", worst["kks_closedness"], fd_tol)
    return report


def flow_check(D, xi, n_samples=50, tol=1e-8, seed=0, T=1.0, n_steps=100):
    """RK4 endpoints against the matrix exponential for random ``|X| <= 1``,
    plus constancy of the orbit rank along the trajectory."""
    xi = np.asarray(xi, dtype=float)
    rank0 = orbit_rank(D, xi)

    def sample(rng):
        X = rng.normal(size=D.dim)
        X *= rng.uniform() / max(np.linalg.norm(X), 1e-300)
        traj = flow(D, X, xi, T, n_steps)
        err = _maxabs(traj.points[-1] - exact_flow(D, X, xi, T))
        ranks = [orbit_rank(D, pt) for pt in traj.points[:: max(1, n_steps // 10)]]
        return {"flow_exactness": err,
                "flow_orbit_rank": float(max(abs(r - rank0) for r in ranks))}

    worst, _ = _sample_max(sample, n_samples, seed)
    report = CheckReport(meta={"seed": seed, "n_samples": n_samples, "T": T, "n_steps": n_steps})
    report.add("flow_exactness", worst["flow_exactness"], tol)
    report.add("flow_orbit_rank", worst["flow_orbit_rank"], 0.0)
    return report
