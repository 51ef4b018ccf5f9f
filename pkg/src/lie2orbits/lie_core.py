"""Structure-constant Lie algebras and the small linear-algebra toolkit shared
by every other module.

Elements of an algebra (and of its dual) are plain 1-d ``numpy`` arrays in
the basis order of the algebra; linear maps are 2-d arrays acting on column
vectors.  The bracket convention is ``[e_i, e_j] = sum_k c[i, j, k] e_k``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

log = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-9
DEFAULT_VALIDATION_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when an element or map does not fit the declared space."""


class InvalidStructureError(ValueError):
    """Raised when structure data fails validation.

    ``residuals`` carries the offending numbers so callers can report them.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class RankInstabilityError(ArithmeticError):
    """A singular value sits too close to the rank cutoff to decide the rank."""


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Finite-dimensional real Lie algebra given by structure constants."""

    basis_names: tuple
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        names = tuple(str(n) for n in self.basis_names)
        c = np.array(self.c, dtype=float, copy=True)
        n = len(names)
        if n == 0:
            c = np.zeros((0, 0, 0))
        if c.shape != (n, n, n):
            raise DimensionError(
                f"structure tensor has shape {c.shape}, expected {(n, n, n)}")
        c.setflags(write=False)
        object.__setattr__(self, "basis_names", names)
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return len(self.basis_names)

    def basis(self, i):
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def index(self, name):
        return self.basis_names.index(name)

    def is_abelian(self, tol=0.0):
        return self.c.size == 0 or float(np.max(np.abs(self.c))) <= tol

    def __repr__(self):
        return f"LieAlgebra(dim={self.dim}, basis={list(self.basis_names)})"

    @classmethod
    def from_triples(cls, basis_names, triples, *, warn=True):
        """Build an algebra from sparse ``(i, j, k, value)`` entries.

        Only ``i < j`` entries are needed; the ``j, i`` entry is filled in by
        antisymmetry.  Inconsistent or diagonal entries are antisymmetrized
        (with a warning) rather than rejected.
        """
        n = len(basis_names)
        raw = np.zeros((n, n, n))
        seen = np.zeros((n, n, n), dtype=bool)
        for entry in triples:
            i, j, k, value = entry
            i, j, k = int(i), int(j), int(k)
            for idx in (i, j, k):
                if not 0 <= idx < n:
                    raise DimensionError(f"triple index {idx} out of range for dim {n}")
            raw[i, j, k] += float(value)
            seen[i, j, k] = True
        c = np.zeros_like(raw)
        fixed = False
        for i in range(n):
            for k in range(n):
                if raw[i, i, k] != 0.0:
                    fixed = True
            for j in range(i + 1, n):
                for k in range(n):
                    a, b = raw[i, j, k], raw[j, i, k]
                    if seen[i, j, k] and seen[j, i, k]:
                        if a != -b:
                            fixed = True
                        c[i, j, k] = 0.5 * (a - b)
                    elif seen[j, i, k]:
                        c[i, j, k] = -b
                    else:
                        c[i, j, k] = a
                    c[j, i, k] = -c[i, j, k]
        if fixed and warn:
            log.warning("structure constants were not antisymmetric; antisymmetrized on load")
        return cls(tuple(basis_names), c)

    def to_triples(self):
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(self.dim):
                    if self.c[i, j, k] != 0.0:
                        out.append([i, j, k, float(self.c[i, j, k])])
        return out


def _check_vec(L, x, what="element"):
    x = np.asarray(x, dtype=float)
    if x.shape != (L.dim,):
        raise DimensionError(f"{what} has shape {x.shape}, algebra has dim {L.dim}")
    return x


def bracket(L, x, y):
    x = _check_vec(L, x)
    y = _check_vec(L, y)
    if L.dim == 0:
        return np.zeros(0)
    return np.einsum("i,j,ijk->k", x, y, L.c)


def structure_residuals(L):
    """Max-norm residuals of antisymmetry and the Jacobi identity."""
    return {
        "antisym": _kernels.antisym_residual(L.c),
        "jacobi": _kernels.jacobi_residual(L.c),
    }


def check_algebra(L, tol=DEFAULT_VALIDATION_TOL):
    res = structure_residuals(L)
    if res["antisym"] > tol or res["jacobi"] > tol:
        raise InvalidStructureError(
            f"not a Lie algebra (antisym={res['antisym']:.3e}, jacobi={res['jacobi']:.3e})",
            res)
    return res


def ad_matrix(L, x):
    """Matrix of ``y -> [x, y]``."""
    x = _check_vec(L, x)
    if L.dim == 0:
        return np.zeros((0, 0))
    # column j is [x, e_j]
    return np.einsum("i,ijk->kj", x, L.c)


def coad_matrix(L, x):
    """Infinitesimal coadjoint action on the dual, ``-ad_x^T``."""
    return -ad_matrix(L, x).T


def _taylor_degree(tol):
    # remainder bound for the scaled core (1-norm <= 1/2), with headroom for
    # the error growth of repeated squaring
    target = max(float(tol), 1e-300) * 1e-3
    d = 4
    while 0.5 ** (d + 1) / math.factorial(d + 1) > target and d < 30:
        d += 1
    return d


def matrix_exp(m, tol=1e-13):
    """Matrix exponential by scaling-and-squaring around a Taylor core."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix_exp needs a square matrix, got shape {m.shape}")
    return _kernels.expm_taylor(m, _taylor_degree(tol))


# ---------------------------------------------------------------------------
# SVD-based rank, image and kernel
# ---------------------------------------------------------------------------

def rank_from_singular_values(s, rel_tol=DEFAULT_RANK_TOL, margin=None):
    """Rank as the count of singular values >= rel_tol * s_max.

    With ``margin`` set, raise :class:`RankInstabilityError` when any
    singular value lies within a factor ``margin`` of the cutoff.
    """
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    cut = rel_tol * s[0]
    if margin is not None:
        close = (s >= cut / margin) & (s <= cut * margin)
        if np.any(close):
            raise RankInstabilityError(
                f"singular values {s[close]} straddle the cutoff {cut:.3e}")
    return int(np.sum(s >= cut))


def image_basis(a, rel_tol=DEFAULT_RANK_TOL, margin=None):
    """Orthonormal basis (columns) of the column space of ``a``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = rank_from_singular_values(s, rel_tol, margin)
    return u[:, :r]


def nullspace(a, rel_tol=DEFAULT_RANK_TOL, margin=None):
    """Orthonormal basis (columns) of the kernel of ``a``."""
    a = np.asarray(a, dtype=float)
    ncols = a.shape[1]
    if a.size == 0:
        return np.eye(ncols)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = rank_from_singular_values(s, rel_tol, margin)
    return vh[r:].T.copy()


def subspace_rank(vectors, rel_tol=DEFAULT_RANK_TOL):
    vectors = list(vectors)
    if not vectors:
        raise ValueError("subspace_rank needs at least one vector")
    a = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if a.shape[0] == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return rank_from_singular_values(s, rel_tol)


def min_norm_solve(a, b, rel_tol=DEFAULT_RANK_TOL):
    """Minimum-norm least-squares solution with a relative SVD cutoff."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((a.shape[1],) + np.shape(b)[1:])
    return np.linalg.lstsq(a, b, rcond=rel_tol)[0]


def rref(rows, tol=1e-10):
    """Reduced row echelon form of a full-row-rank matrix.

    Used to put kernel bases in a canonical form that does not depend on the
    rotation an SVD happens to return.  Entries within ``tol`` of an integer
    are snapped to it.
    """
    a = np.array(rows, dtype=float, copy=True)
    nrows, ncols = a.shape
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        piv = r + int(np.argmax(np.abs(a[r:, col])))
        if abs(a[piv, col]) <= tol:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] /= a[r, col]
        for other in range(nrows):
            if other != r:
                a[other] -= a[other, col] * a[r]
        r += 1
    snapped = np.round(a)
    a = np.where(np.abs(a - snapped) < tol, snapped, a)
    return a + 0.0


def derivation_algebra(L, rel_tol=DEFAULT_RANK_TOL):
    """Derivations of ``L`` as a Lie algebra under the commutator.

    Returns ``(der, matrices)`` where ``matrices[a]`` is the ``dim x dim``
    matrix of the ``a``-th basis derivation.
    """
    n = L.dim
    if n == 0:
        return LieAlgebra((), np.zeros((0, 0, 0))), []
    system = _kernels.derivation_system(L.c)
    kern = nullspace(system, rel_tol)
    basis_rows = rref(kern.T)
    mats = [row.reshape(n, n) for row in basis_rows]
    d = len(mats)
    flat = basis_rows.T
    c = np.zeros((d, d, d))
    for a in range(d):
        for b in range(a + 1, d):
            comm = mats[a] @ mats[b] - mats[b] @ mats[a]
            coeffs = np.linalg.lstsq(flat, comm.ravel(), rcond=None)[0]
            # rref bases are usually integral; keep their brackets exact
            snapped = np.round(coeffs)
            coeffs = np.where(np.abs(coeffs - snapped) < 1e-12, snapped, coeffs) + 0.0
            c[a, b] = coeffs
            c[b, a] = -coeffs
    names = tuple(f"D{a}" for a in range(d))
    return LieAlgebra(names, c), mats


def derivation_residual(L, dmat):
    """Max residual of ``D[x,y] - [Dx,y] - [x,Dy]`` over basis pairs."""
    lhs = np.einsum("kl,ijl->ijk", dmat, L.c)
    rhs = np.einsum("li,ljk->ijk", dmat, L.c) + np.einsum("lj,ilk->ijk", dmat, L.c)
    return float(np.max(np.abs(lhs - rhs))) if L.dim else 0.0


# ---------------------------------------------------------------------------
# standard algebras
# ---------------------------------------------------------------------------

def abelian(n, prefix="e"):
    return LieAlgebra(tuple(f"{prefix}{i + 1}" for i in range(n)), np.zeros((n, n, n)))


def so3():
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    return LieAlgebra(("e1", "e2", "e3"), c)


def heisenberg():
    """h3 with ``[p, q] = z``."""
    return LieAlgebra.from_triples(("p", "q", "z"), [(0, 1, 2, 1.0)])


def sl2():
    """sl(2) in the ``h, e, f`` basis."""
    return LieAlgebra.from_triples(
        ("h", "e", "f"), [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)])


def direct_sum(a, b):
    n, m = a.dim, b.dim
    c = np.zeros((n + m,) * 3)
    c[:n, :n, :n] = a.c
    c[n:, n:, n:] = b.c
    return LieAlgebra(a.basis_names + b.basis_names, c)


def change_basis(L, p):
    """Same algebra in the basis given by the columns of invertible ``p``."""
    p = np.asarray(p, dtype=float)
    pinv = np.linalg.inv(p)
    c = np.einsum("ia,jb,ijk,ck->abc", p, p, L.c, pinv)
    return LieAlgebra(tuple(f"f{i + 1}" for i in range(L.dim)), c)


def semidirect_line(a):
    """``R x_A R^n``: one generator acting on an abelian ideal by ``a``."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    c = np.zeros((n + 1,) * 3)
    c[0, 1:, 1:] = a.T
    c[1:, 0, 1:] = -a.T
    return LieAlgebra(("t",) + tuple(f"v{i + 1}" for i in range(n)), c)


def random_lie_algebra(rng, dim):
    """A random valid Lie algebra of the given dimension.

    Drawn from a few families that satisfy Jacobi by construction and then
    moved to a random well-conditioned basis, so the structure constants are
    dense but of moderate size.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    choices = ["line_ext", "abelian_sum"]
    if dim >= 3:
        choices += ["so3_sum", "h3_sum", "sl2_sum"]
    kind = choices[int(rng.integers(len(choices)))]
    if kind == "line_ext":
        base = semidirect_line(rng.normal(size=(dim - 1, dim - 1))) if dim > 1 else abelian(1)
    elif kind == "abelian_sum":
        base = abelian(dim)
    else:
        core = {"so3_sum": so3, "h3_sum": heisenberg, "sl2_sum": sl2}[kind]()
        base = direct_sum(core, abelian(dim - 3)) if dim > 3 else core
    # well-conditioned change of basis: rotation times scales in [1/2, 2]
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    p = q @ np.diag(rng.uniform(0.5, 2.0, size=dim))
    return change_basis(base, p)
