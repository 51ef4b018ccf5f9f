"""Differential crossed modules and the semidirect sum h x| g."""

from dataclasses import dataclass, field

import numpy as np

from .lie_core import (
    DEFAULT_VALIDATION_TOL,
    DimensionError,
    InvalidStructureError,
    LieAlgebra,
)
from .report import CheckReport


@dataclass(frozen=True, eq=False)
class CrossedModule:
    """``phi: h -> g`` together with a g-action on h by derivations.

    ``phi`` has shape ``(dim g, dim h)``.  ``rho[x, a, b]`` is the
    coefficient of ``e_b`` in ``e_x . e_a``.
    """

    h: LieAlgebra
    g: LieAlgebra
    phi: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    name: str = "crossed-module"

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float, copy=True).reshape(self.g.dim, self.h.dim)
        rho = np.array(self.rho, dtype=float, copy=True)
        if rho.size == 0:
            rho = np.zeros((self.g.dim, self.h.dim, self.h.dim))
        if rho.shape != (self.g.dim, self.h.dim, self.h.dim):
            raise DimensionError(
                f"rho has shape {rho.shape}, expected {(self.g.dim, self.h.dim, self.h.dim)}")
        phi.setflags(write=False)
        rho.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "rho", rho)

    @property
    def dim_h(self):
        return self.h.dim

    @property
    def dim_g(self):
        return self.g.dim

    @property
    def dim(self):
        return self.h.dim + self.g.dim

    def action_matrix(self, x):
        """Matrix of ``a -> x . a`` on h."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.g.dim,):
            raise DimensionError(f"x has shape {x.shape}, g has dim {self.g.dim}")
        return np.einsum("x,xab->ba", x, self.rho)

    def act(self, x, a):
        return self.action_matrix(x) @ np.asarray(a, dtype=float)

    def semidirect_names(self):
        return self.h.basis_names + self.g.basis_names

    def dual_names(self):
        return tuple(n + "*" for n in self.semidirect_names())


def validate(cm, tol=DEFAULT_VALIDATION_TOL):
    """Residuals of the four crossed-module axioms, maxed over basis tuples."""
    h, g = cm.h, cm.g
    rho, phi = cm.rho, cm.phi
    report = CheckReport(meta={"example_name": cm.name})
    if h.dim == 0 or g.dim == 0:
        for name in ("derivation", "action_morphism", "equivariance", "peiffer"):
            report.add(name, 0.0, tol)
        return report

    # x.[a,b] - [x.a, b] - [a, x.b]
    lhs = np.einsum("abl,xlk->xabk", h.c, rho)
    rhs = np.einsum("xal,lbk->xabk", rho, h.c) + np.einsum("xbl,alk->xabk", rho, h.c)
    derivation = float(np.max(np.abs(lhs - rhs)))

    # rho([x,y]) - [rho x, rho y] as matrices R[x][b, a] = rho[x, a, b]
    mats = np.transpose(rho, (0, 2, 1))
    bracket_rho = np.einsum("xyz,zba->xyba", g.c, mats)
    commutator = (np.einsum("xbc,yca->xyba", mats, mats)
                  - np.einsum("ybc,xca->xyba", mats, mats))
    morphism = float(np.max(np.abs(bracket_rho - commutator)))

    # phi(x.a) - [x, phi(a)]
    lhs = np.einsum("xab,kb->xak", rho, phi)
    rhs = np.einsum("ma,xmk->xak", phi, g.c)
    equivariance = float(np.max(np.abs(lhs - rhs)))

    # phi(a).b - [a,b]
    lhs = np.einsum("xa,xbk->abk", phi, rho)
    peiffer = float(np.max(np.abs(lhs - h.c)))

    report.add("derivation", derivation, tol)
    report.add("action_morphism", morphism, tol)
    report.add("equivariance", equivariance, tol)
    report.add("peiffer", peiffer, tol)
    return report


def phi_morphism_residual(cm):
    """``phi([a,b]) - [phi a, phi b]``; implied by equivariance + Peiffer."""
    if cm.h.dim == 0:
        return 0.0
    lhs = np.einsum("abl,kl->abk", cm.h.c, cm.phi)
    rhs = np.einsum("xa,yb,xyk->abk", cm.phi, cm.phi, cm.g.c)
    return float(np.max(np.abs(lhs - rhs)))


def require_valid(cm, tol=DEFAULT_VALIDATION_TOL):
    report = validate(cm, tol)
    if not report.passed:
        raise InvalidStructureError(
            f"{cm.name} is not a crossed module", report.residuals())
    return report


def semidirect(cm, tol=DEFAULT_VALIDATION_TOL, check=True):
    """Lie algebra on h + g with
    ``[(a,x),(b,y)] = ([a,b] + x.b - y.a, [x,y])``; h coordinates come first.
    """
    if check:
        require_valid(cm, tol)
    n, m = cm.h.dim, cm.g.dim
    c = np.zeros((n + m,) * 3)
    c[:n, :n, :n] = cm.h.c
    c[n:, n:, n:] = cm.g.c
    # [(0,x),(b,0)] = (x.b, 0)
    c[n:, :n, :n] = cm.rho
    c[:n, n:, :n] = -np.transpose(cm.rho, (1, 0, 2))
    return LieAlgebra(cm.semidirect_names(), c)


def dual_transpose(phi):
    """``-phi^T``, the map g* -> h*."""
    return -np.asarray(phi, dtype=float).T


def pair_module(L, name=None):
    """``id: L -> L`` with the adjoint action."""
    return CrossedModule(L, L, np.eye(L.dim), L.c.copy(),
                         name=name or "pair")


def zero_module(h, g, rho, name="zero"):
    """``0: h -> g``; Peiffer forces h to be abelian."""
    if not h.is_abelian():
        raise InvalidStructureError(
            "the zero map needs an abelian h (Peiffer: [a,b] = 0.b = 0)",
            {"peiffer": float(np.max(np.abs(h.c)))})
    return CrossedModule(h, g, np.zeros((g.dim, h.dim)), rho, name=name)
