"""Compare the numba and numpy implementations of the numeric kernels.

Run: python3 benchmarks/bench_kernels.py --repeats 200

Both variants are called on identical inputs; the script prints the mean
time per call, the speedup and the max abs difference of the outputs.
"""

import argparse
import time

import numpy as np

from lie2orbits import _kernels as K
from lie2orbits.crossed_module import semidirect
from lie2orbits.examples import builtin
from lie2orbits.lie_core import coad_matrix, random_lie_algebra


def _time(fn, args, repeats):
    fn(*args)  # warm-up (jit compile on first call)
    t0 = time.perf_counter()
    for _ in range(repeats):
        out = fn(*args)
    return (time.perf_counter() - t0) / repeats, out


def _cases(dim, rng):
    heis = semidirect(builtin("heisenberg").cm)
    rand = random_lie_algebra(rng, dim)
    c = rand.c
    x = rng.normal(size=heis.dim)
    cmat = coad_matrix(heis, x / np.linalg.norm(x))
    xi0 = rng.normal(size=heis.dim)
    return [
        ("antisym_residual", K.antisym_residual_numpy, K.antisym_residual_numba, (c,)),
        ("jacobi_residual", K.jacobi_residual_numpy, K.jacobi_residual_numba, (c,)),
        ("derivation_system", K.derivation_system_numpy, K.derivation_system_numba, (c,)),
        ("rk4_linear(1000 steps)", K.rk4_linear_numpy, K.rk4_linear_numba,
         (cmat, xi0, 1e-3, 1000)),
        ("expm_taylor", K.expm_taylor_numpy, K.expm_taylor_numba, (3.0 * cmat, 18)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--dim", type=int, default=12,
                        help="dimension of the random structure tensor")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"numba default path active: {K.USE_NUMBA}")
    print(f"{'kernel':<24}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}{'max diff':>12}")
    for name, f_np, f_nb, fargs in _cases(args.dim, rng):
        t_np, out_np = _time(f_np, fargs, args.repeats)
        t_nb, out_nb = _time(f_nb, fargs, args.repeats)
        diff = float(np.max(np.abs(np.asarray(out_np) - np.asarray(out_nb))))
        print(f"{name:<24}{1e3 * t_np:>12.4f}{1e3 * t_nb:>12.4f}"
              f"{t_np / max(t_nb, 1e-12):>9.1f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
