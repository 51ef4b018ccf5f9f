"""Numeric inner loops, each with a numba and a pure-numpy implementation.

The active implementation is chosen once at import time.  Set
``LIE2_ORBITS_NUMBA=0`` to force the numpy path (numba is also skipped when
it is not importable).  Both variants stay importable under explicit names
(``*_numba`` / ``*_numpy``) so tests and the benchmark can compare them.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

__all__ = [
    "USE_NUMBA",
    "antisym_residual",
    "jacobi_residual",
    "derivation_system",
    "rk4_linear",
    "expm_taylor",
]


def _numba_requested():
    flag = os.environ.get("LIE2_ORBITS_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off", "")


USE_NUMBA = numba is not None and _numba_requested()

# scaled 1-norm bound for the Taylor core of the exponential
_SCALE_TARGET = 0.5


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def antisym_residual_numpy(c):
    if c.size == 0:
        return 0.0
    return float(np.max(np.abs(c + np.transpose(c, (1, 0, 2)))))


def jacobi_residual_numpy(c):
    if c.size == 0:
        return 0.0
    # J[i,j,k,m] = sum_l c[i,j,l] c[l,k,m] + cyclic(i,j,k)
    t = np.einsum("ijl,lkm->ijkm", c, c)
    jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(jac)))


def derivation_system_numpy(c):
    n = c.shape[0]
    eye = np.eye(n)
    # unknown D[p, q] flattened as p * n + q; equation row (i, j, k)
    # sum_l c[i,j,l] D[k,l] - sum_l D[l,i] c[l,j,k] - sum_l D[l,j] c[i,l,k] = 0
    a = np.einsum("ijq,kp->ijkpq", c, eye)
    a -= np.einsum("pjk,iq->ijkpq", c, eye)
    a -= np.einsum("ipk,jq->ijkpq", c, eye)
    return a.reshape(n * n * n, n * n)


def rk4_linear_numpy(cmat, x0, dt, n_steps):
    out = np.empty((n_steps + 1, x0.shape[0]))
    out[0] = x0
    x = x0.copy()
    for step in range(n_steps):
        k1 = cmat @ x
        k2 = cmat @ (x + 0.5 * dt * k1)
        k3 = cmat @ (x + 0.5 * dt * k2)
        k4 = cmat @ (x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[step + 1] = x
    return out


def _squarings(m):
    norm = np.max(np.sum(np.abs(m), axis=0)) if m.size else 0.0
    if norm <= _SCALE_TARGET:
        return 0
    return int(np.ceil(np.log2(norm / _SCALE_TARGET)))


def expm_taylor_numpy(m, degree):
    n = m.shape[0]
    s = _squarings(m)
    a = m / (2.0 ** s)
    # Horner evaluation of sum_k a^k / k!
    result = np.eye(n)
    for k in range(degree, 0, -1):
        result = np.eye(n) + (a @ result) / k
    for _ in range(s):
        result = result @ result
    return result


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

def _antisym_residual_loops(c):
    n = c.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(c.shape[2]):
                r = abs(c[i, j, k] + c[j, i, k])
                if r > worst:
                    worst = r
    return worst


def _jacobi_residual_loops(c):
    n = c.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for m in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += c[i, j, l] * c[l, k, m]
                        acc += c[j, k, l] * c[l, i, m]
                        acc += c[k, i, l] * c[l, j, m]
                    if abs(acc) > worst:
                        worst = abs(acc)
    return worst


def _derivation_system_loops(c):
    n = c.shape[0]
    a = np.zeros((n * n * n, n * n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                row = (i * n + j) * n + k
                for l in range(n):
                    a[row, k * n + l] += c[i, j, l]
                    a[row, l * n + i] -= c[l, j, k]
                    a[row, l * n + j] -= c[i, l, k]
    return a


def _rk4_linear_loops(cmat, x0, dt, n_steps):
    d = x0.shape[0]
    out = np.empty((n_steps + 1, d))
    x = x0.copy()
    out[0, :] = x
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    tmp = np.empty(d)
    for step in range(n_steps):
        for r in range(d):
            acc = 0.0
            for q in range(d):
                acc += cmat[r, q] * x[q]
            k1[r] = acc
        for r in range(d):
            tmp[r] = x[r] + 0.5 * dt * k1[r]
        for r in range(d):
            acc = 0.0
            for q in range(d):
                acc += cmat[r, q] * tmp[q]
            k2[r] = acc
        for r in range(d):
            tmp[r] = x[r] + 0.5 * dt * k2[r]
        for r in range(d):
            acc = 0.0
            for q in range(d):
                acc += cmat[r, q] * tmp[q]
            k3[r] = acc
        for r in range(d):
            tmp[r] = x[r] + dt * k3[r]
        for r in range(d):
            acc = 0.0
            for q in range(d):
                acc += cmat[r, q] * tmp[q]
            k4[r] = acc
        for r in range(d):
            x[r] = x[r] + (dt / 6.0) * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
            out[step + 1, r] = x[r]
    return out


def _expm_taylor_loops(m, degree):
    n = m.shape[0]
    norm = 0.0
    for q in range(n):
        col = 0.0
        for r in range(n):
            col += abs(m[r, q])
        if col > norm:
            norm = col
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    a = m / (2.0 ** s)
    result = np.eye(n)
    for k in range(degree, 0, -1):
        result = np.eye(n) + (a @ result) / k
    for _ in range(s):
        result = result @ result
    return result


if numba is not None:
    _jit = numba.njit(cache=True)
    antisym_residual_numba = _jit(_antisym_residual_loops)
    jacobi_residual_numba = _jit(_jacobi_residual_loops)
    derivation_system_numba = _jit(_derivation_system_loops)
    rk4_linear_numba = _jit(_rk4_linear_loops)
    expm_taylor_numba = _jit(_expm_taylor_loops)
else:  # pragma: no cover
    antisym_residual_numba = _antisym_residual_loops
    jacobi_residual_numba = _jacobi_residual_loops
    derivation_system_numba = _derivation_system_loops
    rk4_linear_numba = _rk4_linear_loops
    expm_taylor_numba = _expm_taylor_loops


def _c64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def antisym_residual(c):
    c = _c64(c)
    if c.size == 0:
        return 0.0
    if USE_NUMBA:
        return float(antisym_residual_numba(c))
    return antisym_residual_numpy(c)


def jacobi_residual(c):
    c = _c64(c)
    if c.size == 0:
        return 0.0
    if USE_NUMBA:
        return float(jacobi_residual_numba(c))
    return jacobi_residual_numpy(c)


def derivation_system(c):
    c = _c64(c)
    if USE_NUMBA and c.size:
        return derivation_system_numba(c)
    return derivation_system_numpy(c)


def rk4_linear(cmat, x0, dt, n_steps):
    cmat, x0 = _c64(cmat), _c64(x0)
    if USE_NUMBA:
        return rk4_linear_numba(cmat, x0, float(dt), int(n_steps))
    return rk4_linear_numpy(cmat, x0, float(dt), int(n_steps))


def expm_taylor(m, degree=18):
    m = _c64(m)
    if m.size == 0:
        return np.eye(m.shape[0])
    if USE_NUMBA:
        return expm_taylor_numba(m, int(degree))
    return expm_taylor_numpy(m, int(degree))
