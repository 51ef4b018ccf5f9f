"""Coadjoint actions, orbit tangent charts, the KKS form, Lie-Poisson bracket
and orbit flows.

Convention: ``coad_X xi = -ad_X^T xi`` and the KKS form is
``omega(coad_X xi, coad_Y xi) = <xi, [X, Y]>``.  In coordinates
``coad_X xi = P(xi) X`` with the Lie-Poisson matrix
``P(xi)[k, i] = <xi, [e_k, e_i]>``.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .crossed_module import semidirect
from .lie_core import (
    DEFAULT_RANK_TOL,
    DimensionError,
    RankInstabilityError,
    coad_matrix,
    image_basis,
    matrix_exp,
    min_norm_solve,
    rank_from_singular_values,
)

# relative residual above which a least-squares generator solve is rejected
_GENERATOR_TOL = 1e-8


def _dual_vec(D, xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (D.dim,):
        raise DimensionError(f"covector has shape {xi.shape}, dual has dim {D.dim}")
    return xi


def lie_poisson_matrix(D, xi):
    """``P[k, i] = <xi, [e_k, e_i]>``; column ``i`` is ``coad_{e_i} xi``."""
    xi = _dual_vec(D, xi)
    if D.dim == 0:
        return np.zeros((0, 0))
    return np.einsum("kij,j->ki", D.c, xi)


def coad_field(D, X, xi):
    return coad_matrix(D, X) @ _dual_vec(D, xi)


def object_coad_field(cm, x, alpha):
    """Infinitesimal dual g-action on h*: ``-rho(x)^T alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (cm.dim_h,):
        raise DimensionError(f"alpha has shape {alpha.shape}, h* has dim {cm.dim_h}")
    return -cm.action_matrix(x).T @ alpha


def object_tangent_matrix(cm, alpha):
    """Columns are ``object_coad_field(cm, e_x, alpha)`` over a basis of g."""
    alpha = np.asarray(alpha, dtype=float)
    # column x: -(R_x^T alpha)_a = -sum_b rho[x, a, b] alpha_b
    return -np.einsum("xab,b->ax", cm.rho, alpha)


def lie_poisson(D, X, Y, xi):
    """Lie-Poisson bracket of the linear functions X, Y at ``xi``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return float(X @ lie_poisson_matrix(D, xi) @ Y)


@dataclass(frozen=True, eq=False)
class OrbitChart:
    """Orthonormal tangent frame of a coadjoint orbit at ``xi`` with the KKS
    matrix in that frame.  ``generators[:, i]`` is a min-norm ``X`` with
    ``coad_X xi = tangent_basis[:, i]``."""

    xi: np.ndarray
    tangent_basis: np.ndarray = field(repr=False)
    kks: np.ndarray = field(repr=False)
    generators: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.tangent_basis.shape[1]

    def poisson_bivector(self):
        """Ambient bivector of the orbit's Poisson structure, ``-B K^-1 B^T``.

        With this sign it reproduces the Lie-Poisson matrix at ``xi``.
        """
        if self.dim == 0:
            n = self.xi.shape[0]
            return np.zeros((n, n))
        b = self.tangent_basis
        return -b @ np.linalg.solve(self.kks, b.T)


def orbit_chart(D, xi, rel_tol=DEFAULT_RANK_TOL, margin=None):
    xi = _dual_vec(D, xi)
    lp = lie_poisson_matrix(D, xi)
    if D.dim == 0 or not np.any(lp):
        empty = np.zeros((D.dim, 0))
        return OrbitChart(xi, empty, np.zeros((0, 0)), empty, np.zeros(0))
    u, s, _ = np.linalg.svd(lp, full_matrices=False)
    r = rank_from_singular_values(s, rel_tol, margin)
    basis = u[:, :r]
    gens = min_norm_solve(lp, basis, rel_tol)
    miss = float(np.max(np.abs(lp @ gens - basis), initial=0.0))
    if miss > _GENERATOR_TOL:
        raise RankInstabilityError(
            f"generator solve misses the tangent frame by {miss:.3e}; "
            "retry with a different rel_tol")
    kks = gens.T @ lp @ gens
    return OrbitChart(xi, basis, kks, gens, s)


def tangent_generator(D, xi, v, rel_tol=DEFAULT_RANK_TOL):
    """Min-norm ``X`` with ``coad_X xi = v`` and the solve residual."""
    lp = lie_poisson_matrix(D, xi)
    X = min_norm_solve(lp, np.asarray(v, dtype=float), rel_tol)
    return X, float(np.max(np.abs(lp @ X - v), initial=0.0))


def kks_value(D, xi, u, v, rel_tol=DEFAULT_RANK_TOL):
    """KKS form at ``xi`` on two orbit tangent vectors, via generator solves."""
    lp = lie_poisson_matrix(D, xi)
    X = min_norm_solve(lp, np.asarray(u, dtype=float), rel_tol)
    Y = min_norm_solve(lp, np.asarray(v, dtype=float), rel_tol)
    return float(X @ lp @ Y)


def orbit_rank(D, xi, rel_tol=DEFAULT_RANK_TOL):
    lp = lie_poisson_matrix(D, xi)
    if lp.size == 0:
        return 0
    return rank_from_singular_values(np.linalg.svd(lp, compute_uv=False), rel_tol)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    points: np.ndarray

    def __len__(self):
        return len(self.times)

    def to_csv(self, names=None):
        names = names or [f"x{i}" for i in range(self.points.shape[1])]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", *names])
        for t, row in zip(self.times, self.points):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
        return buf.getvalue()


def flow(D, X, xi0, T, n_steps):
    """Fixed-step RK4 for ``xi' = coad_X xi``."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    xi0 = _dual_vec(D, xi0)
    cmat = coad_matrix(D, X)
    dt = float(T) / n_steps
    pts = _kernels.rk4_linear(cmat, xi0, dt, n_steps)
    times = np.linspace(0.0, float(T), n_steps + 1)
    return Trajectory(times, pts)


def exact_flow(D, X, xi0, T):
    return matrix_exp(float(T) * coad_matrix(D, X)) @ _dual_vec(D, xi0)


def unit_covector(cm, alpha):
    """The unit ``(alpha, 0)`` of the dual groupoid as a covector on h x| g."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (cm.dim_h,):
        raise DimensionError(f"alpha has shape {alpha.shape}, h* has dim {cm.dim_h}")
    return np.concatenate([alpha, np.zeros(cm.dim_g)])


def orbit_dimension_split(cm, xi_unit, rel_tol=DEFAULT_RANK_TOL, margin=1e3, D=None):
    """Ranks of the orbit tangent at a unit: core (h-directions, the kernel of
    the source on the algebra), base (object-level action) and total.

    Raises :class:`RankInstabilityError` when a singular value sits within a
    factor ``margin`` of the cutoff.
    """
    D = semidirect(cm) if D is None else D
    xi = unit_covector(cm, xi_unit)
    lp = lie_poisson_matrix(D, xi)
    n = cm.dim_h

    def _rank(a):
        if a.size == 0:
            return 0
        return rank_from_singular_values(np.linalg.svd(a, compute_uv=False), rel_tol, margin)

    total = _rank(lp)
    core = _rank(lp[:, :n])
    base = _rank(object_tangent_matrix(cm, xi_unit))
    return {"core_rank": core, "base_rank": base, "total_rank": total}


def kks_closedness_residual(D, xi, X, Y, Z, step=1e-4, rel_tol=DEFAULT_RANK_TOL):
    """|d omega (V_X, V_Y, V_Z)| at ``xi`` by central finite differences.

    ``V_X`` is the coadjoint vector field of ``X``; the KKS form is evaluated
    numerically through generator solves at points moved along the orbit.
    """
    xi = _dual_vec(D, xi)
    fields = {k: coad_matrix(D, v) for k, v in (("X", X), ("Y", Y), ("Z", Z))}

    def omega_fields(point, a, b):
        return kks_value(D, point, fields[a] @ point, fields[b] @ point, rel_tol)

    def derivative(along, a, b):
        fwd = matrix_exp(step * fields[along]) @ xi
        bwd = matrix_exp(-step * fields[along]) @ xi
        return (omega_fields(fwd, a, b) - omega_fields(bwd, a, b)) / (2.0 * step)

    def field_bracket(a, b):
        # [V_a, V_b] = DV_b . V_a - DV_a . V_b, derivatives by central differences
        va, vb = fields[a] @ xi, fields[b] @ xi
        dvb = (fields[b] @ (xi + step * va) - fields[b] @ (xi - step * va)) / (2.0 * step)
        dva = (fields[a] @ (xi + step * vb) - fields[a] @ (xi - step * vb)) / (2.0 * step)
        return dvb - dva

    def omega_vec(u, b):
        return kks_value(D, xi, u, fields[b] @ xi, rel_tol)

    d_omega = (derivative("X", "Y", "Z") - derivative("Y", "X", "Z")
               + derivative("Z", "X", "Y")
               - omega_vec(field_bracket("X", "Y"), "Z")
               + omega_vec(field_bracket("X", "Z"), "Y")
               - omega_vec(field_bracket("Y", "Z"), "X"))
    return abs(d_omega)
