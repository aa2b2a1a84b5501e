"""Numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Prints best-of-``repeat`` wall times per call.  The numba column is missing
when numba is not installed or SZEGO_NUMBA=0 is set.  The cubic rows show
where the O(N²) direct sum stops beating the FFT route (the crossover is
DIRECT_CUBIC_MAX_MODES in szego._kernels).
"""

import argparse
import timeit

import numpy as np

from szego import BlaschkeProduct, SpectralData, _kernels
from szego.nlft import _side_polynomials


def best_time(fn, repeat):
    fn()  # warm up, includes JIT compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_cubic(repeat):
    rng = np.random.default_rng(0)
    print(f"{'cubic term, N':<28}{'numpy FFT':>12}{'numba loops':>14}")
    for n in (16, 32, 64, 128, 256, 512):
        c = rng.normal(size=n) + 1j * rng.normal(size=n)
        m = 4 * n
        t_np = best_time(lambda: _kernels.cubic_term_numpy(c, m), repeat)
        line = f"{n:<28}{t_np * 1e6:>10.1f}us"
        if _kernels.HAVE_NUMBA:
            t_nb = best_time(lambda: _kernels._cubic_term_jit(c), repeat)
            line += f"{t_nb * 1e6:>12.1f}us"
        print(line)


def _data(q):
    s = np.geomspace(1.0, 0.05, 2 * q)
    psi = [BlaschkeProduct(0.3 * r, [0.4 * np.exp(1j * r)] if r % 3 == 0 else []) for r in range(2 * q)]
    return SpectralData(s, psi)


def bench_linear(repeat, m=4096):
    print(f"\n{'assemble+solve, q (M=%d)' % m:<28}{'numpy':>12}{'numba':>14}")
    z = np.exp(2j * np.pi * np.arange(m) / m)
    for q in (1, 2, 4, 8, 16):
        sd = _data(q)
        parts = _side_polynomials(sd, z)
        rho, sigma = sd.rho.astype(complex), sd.sigma.astype(complex)

        def run_numpy():
            mats = _kernels.assemble_numpy(z, rho, sigma, *parts)
            return _kernels.solve_numpy(mats, parts[1], parts[2])

        line = f"{q:<28}{best_time(run_numpy, repeat) * 1e3:>10.2f}ms"
        if _kernels.HAVE_NUMBA:
            def run_numba():
                mats = _kernels.assemble(z, rho, sigma, *parts)
                return _kernels.solve(mats, parts[1], parts[2])
            line += f"{best_time(run_numba, repeat) * 1e3:>12.2f}ms"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    print(f"backend: {_kernels.backend()}\n")
    bench_cubic(args.repeat)
    bench_linear(args.repeat)


if __name__ == "__main__":
    main()
