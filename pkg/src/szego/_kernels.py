"""Hot loops with a numba implementation and a pure-numpy fallback.

Set ``SZEGO_NUMBA=0`` to force the numpy path (also used automatically when
numba is not importable).  ``SZEGO_THREADS`` caps numba's thread pool.
Both paths compute the same quantities; tests compare them directly.
"""

import os

import numpy as np

_WANT_NUMBA = os.environ.get("SZEGO_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_NUMBA:
        raise ImportError
    import numba
    from numba import njit

    HAVE_NUMBA = True
    _threads = os.environ.get("SZEGO_THREADS")
    if _threads:
        try:
            numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass
except ImportError:  # pragma: no cover - exercised with SZEGO_NUMBA=0
    HAVE_NUMBA = False
    njit = None


def backend():
    return "numba" if HAVE_NUMBA else "numpy"


DIRECT_CUBIC_MAX_MODES = 128

# --------------------------------------------------------------------------
# cubic term Π(|u|²u) on N modes

def cubic_term_numpy(c, m_grid):
    """Π(|u|²u) on the first N modes via a zero-padded grid (needs M ≥ 2N)."""
    n = c.size
    padded = np.zeros(m_grid, dtype=complex)
    padded[:n] = c
    v = np.fft.ifft(padded) * m_grid
    w = np.fft.fft(np.abs(v) ** 2 * v) / m_grid
    return w[:n]


def _cubic_term_loops(c):
    # b[k + n - 1] = Fourier mode k of |u|², k in -(n-1)..n-1
    n = c.size
    b = np.zeros(2 * n - 1, dtype=np.complex128)
    for k in range(n):
        acc = 0j
        for j in range(n - k):
            acc += c[j + k] * np.conj(c[j])
        b[n - 1 + k] = acc
        b[n - 1 - k] = np.conj(acc)
    out = np.zeros(n, dtype=np.complex128)
    for m in range(n):
        acc = 0j
        # out_m = Σ_k b_k c_{m-k}, with 0 ≤ m-k ≤ n-1
        for p in range(n):
            acc += b[n - 1 + m - p] * c[p]
        out[m] = acc
    return out


if HAVE_NUMBA:
    _cubic_term_jit = njit(cache=True)(_cubic_term_loops)

    def cubic_term(c, m_grid):
        # O(N²) direct sums beat the FFT only for short symbols (see benchmarks/)
        if c.size <= DIRECT_CUBIC_MAX_MODES:
            return _cubic_term_jit(np.ascontiguousarray(c, dtype=np.complex128))
        return cubic_term_numpy(c, m_grid)
else:
    cubic_term = cubic_term_numpy


# --------------------------------------------------------------------------
# per-grid-point q×q systems of the inverse transform

def assemble_numpy(z, rho, sigma, d_odd, b_odd, d_even, b_even):
    """C#(z_m) for all grid points, shape (M, q, q).

    C#[j, k] = (ρ_j D_{2k} D_{2j-1} - σ_k z B_{2k} B_{2j-1}) / (ρ_j² - σ_k²) with
    B_r = e^{-iψ_r} P_r.  Polynomial values are given as (q, M) arrays.
    """
    denom = rho[:, None] ** 2 - sigma[None, :] ** 2
    first = rho[None, :, None] * d_odd.T[:, :, None] * d_even.T[:, None, :]
    second = sigma[None, None, :] * z[:, None, None] * b_odd.T[:, :, None] * b_even.T[:, None, :]
    return (first - second) / denom[None, :, :]


def solve_numpy(mats, b_odd, d_even):
    """x = C#^{-1} B_odd and y = (C#^T)^{-1} D_even at every grid point."""
    x = np.linalg.solve(mats, b_odd.T[:, :, None])[:, :, 0]
    y = np.linalg.solve(np.transpose(mats, (0, 2, 1)), d_even.T[:, :, None])[:, :, 0]
    return x, y


def _assemble_loops(z, rho, sigma, d_odd, b_odd, d_even, b_even):
    q = rho.size
    m = z.size
    out = np.empty((m, q, q), dtype=np.complex128)
    for i in range(m):
        for j in range(q):
            for k in range(q):
                out[i, j, k] = (rho[j] * d_even[k, i] * d_odd[j, i]
                                - sigma[k] * z[i] * b_even[k, i] * b_odd[j, i]) \
                    / (rho[j] * rho[j] - sigma[k] * sigma[k])
    return out


def _gauss_solve(a, rhs):
    # partial pivoting, a and rhs are overwritten
    n = a.shape[0]
    for col in range(n):
        piv = col
        best = abs(a[col, col])
        for r in range(col + 1, n):
            if abs(a[r, col]) > best:
                best = abs(a[r, col])
                piv = r
        if piv != col:
            for c in range(n):
                tmp = a[col, c]
                a[col, c] = a[piv, c]
                a[piv, c] = tmp
            tmp = rhs[col]
            rhs[col] = rhs[piv]
            rhs[piv] = tmp
        d = a[col, col]
        for r in range(col + 1, n):
            f = a[r, col] / d
            if f != 0:
                for c in range(col, n):
                    a[r, c] -= f * a[col, c]
                rhs[r] -= f * rhs[col]
    for r in range(n - 1, -1, -1):
        acc = rhs[r]
        for c in range(r + 1, n):
            acc -= a[r, c] * rhs[c]
        rhs[r] = acc / a[r, r]
    return rhs


def _solve_loops(mats, b_odd, d_even):
    m, q, _ = mats.shape
    x = np.empty((m, q), dtype=np.complex128)
    y = np.empty((m, q), dtype=np.complex128)
    work = np.empty((q, q), dtype=np.complex128)
    rhs = np.empty(q, dtype=np.complex128)
    for i in range(m):
        for j in range(q):
            rhs[j] = b_odd[j, i]
            for k in range(q):
                work[j, k] = mats[i, j, k]
        x[i, :] = _gauss_solve(work, rhs)
        for j in range(q):
            rhs[j] = d_even[j, i]
            for k in range(q):
                work[j, k] = mats[i, k, j]
        y[i, :] = _gauss_solve(work, rhs)
    return x, y


if HAVE_NUMBA:
    _gauss_solve = njit(cache=True)(_gauss_solve)
    _assemble_jit = njit(cache=True)(_assemble_loops)
    _solve_jit = njit(cache=True)(_solve_loops)

    def assemble(z, rho, sigma, d_odd, b_odd, d_even, b_even):
        return _assemble_jit(*[np.ascontiguousarray(a, dtype=np.complex128)
                               for a in (z, rho, sigma, d_odd, b_odd, d_even, b_even)])

    def solve(mats, b_odd, d_even):
        return _solve_jit(np.ascontiguousarray(mats), np.ascontiguousarray(b_odd),
                          np.ascontiguousarray(d_even))
else:
    assemble = assemble_numpy
    solve = solve_numpy
