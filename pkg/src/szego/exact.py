"""High-precision rational form of u(s, Ψ).

For finite spectral data u = A/B with B = det C#(z)/det C#(0).  Both det C#
and det C# · u are polynomials of degree ≤ q + Σd_r, so they are recovered
exactly (up to working precision) by interpolation at roots of unity.  A
partial-fraction expansion u = Q + Σ c_i/(1 - w_i z) then gives any Fourier
mode, and closed forms for Sobolev norms:

    Σ_k (1+k)^{2s} |û(k)|²  with  Σ_k (1+k)^{2s} x^k = Li_{-2s}(x)/x.

This path resolves symbols whose poles sit far closer to the circle than any
FFT grid could.
"""

from dataclasses import dataclass
from functools import cached_property

import mpmath as mp
import numpy as np

from .errors import ResolutionError
from .hardy import HardySymbol

DEFAULT_DPS = 100


def _mpc(x):
    return mp.mpc(complex(x).real, complex(x).imag)


def _poly_from_roots(roots):
    coeffs = [mp.mpc(1)]
    for r in roots:
        # multiply by (1 - conj(r) z)
        nxt = coeffs + [mp.mpc(0)]
        for k in range(len(coeffs)):
            nxt[k + 1] -= mp.conj(r) * coeffs[k]
        coeffs = nxt
    return coeffs


def _polyval(coeffs, z):
    acc = mp.mpc(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _side_data(sd, extra_angles):
    """(ρ, σ, D_odd, B_odd, D_even, B_even) with mp coefficients; B = e^{-iψ}P."""
    q = sd.q
    rho = [mp.mpf(float(x)) for x in sd.s[0::2]]
    sigma = [mp.mpf(float(x)) for x in sd.s[1::2]] + ([mp.mpf(0)] if sd.odd else [])
    angles = [mp.mpf(p.angle) for p in sd.psi]
    if extra_angles is not None:
        angles = [a + mp.mpf(0) + e for a, e in zip(angles, extra_angles)]

    def parts(r):
        p = sd.psi[r]
        zeros = [_mpc(z) for z in p.zeros]
        d = _poly_from_roots(zeros)
        # P(z) = z^d conj(D)(1/z): ascending coefficients are conj of D reversed
        pnum = [mp.conj(c) for c in reversed(d)]
        phase = mp.expj(-angles[r])
        return d, [phase * c for c in pnum]

    d_odd, b_odd, d_even, b_even = [], [], [], []
    for j in range(q):
        d, b = parts(2 * j)
        d_odd.append(d)
        b_odd.append(b)
        if 2 * j + 1 < sd.n:
            d, b = parts(2 * j + 1)
        else:
            d, b = [mp.mpc(1)], [mp.mpc(1)]
        d_even.append(d)
        b_even.append(b)
    return rho, sigma, d_odd, b_odd, d_even, b_even


@dataclass(frozen=True, eq=False)
class RationalSymbol:
    """u = A/B with ascending mp coefficients, B(0) = 1."""

    numer: list
    denom: list
    dps: int = DEFAULT_DPS

    @cached_property
    def expansion(self):
        """(polynomial part Q, residues c_i, inverse poles w_i)."""
        with mp.workdps(self.dps):
            a, b = list(self.numer), list(self.denom)
            if len(b) == 1:
                return [x / b[0] for x in a], [], []
            # polynomial part
            quot = []
            rem = list(a)
            db = len(b) - 1
            if len(rem) - 1 >= db:
                quot = [mp.mpc(0)] * (len(rem) - db)
                for k in range(len(rem) - 1, db - 1, -1):
                    coef = rem[k] / b[db]
                    quot[k - db] = coef
                    for i in range(db + 1):
                        rem[k - db + i] -= coef * b[i]
                rem = rem[:db]
            roots = mp.polyroots(list(reversed(b)), maxsteps=400, extraprec=4 * self.dps)
            sep = min((abs(r1 - r2) / max(abs(r1), abs(r2))
                       for i, r1 in enumerate(roots) for r2 in roots[i + 1:]), default=mp.mpf(1))
            if sep < mp.mpf(10) ** (-(self.dps // 3)):
                raise ResolutionError(
                    f"denominator roots coincide to {mp.nstr(sep, 3)}; raise the precision")
            dcoef = [k * b[k] for k in range(1, len(b))]
            residues, winv = [], []
            for r in roots:
                val = _polyval(rem, r) if rem else mp.mpc(0)
                residues.append(-val / (r * _polyval(dcoef, r)))
                winv.append(1 / r)
            return quot, residues, winv

    def poles(self):
        with mp.workdps(self.dps):
            return [1 / w for w in self.expansion[2]]

    def pole_distance(self):
        """min over poles of |pole| - 1 (inf for polynomials)."""
        ps = self.poles()
        if not ps:
            return float("inf")
        with mp.workdps(self.dps):
            return float(min(abs(p) for p in ps) - 1)

    def mode(self, k):
        quot, res, winv = self.expansion
        with mp.workdps(self.dps):
            val = quot[k] if k < len(quot) else mp.mpc(0)
            for c, w in zip(res, winv):
                val += c * w ** k
            return val

    def modes(self, n):
        return np.array([complex(self.mode(k)) for k in range(n)])

    def to_hardy(self, n_modes):
        return HardySymbol(self.modes(n_modes))

    def evaluate(self, z):
        with mp.workdps(self.dps):
            z = _mpc(z)
            return complex(_polyval(self.numer, z) / _polyval(self.denom, z))

    def sobolev_norm_sq(self, s):
        """Σ_k (1+k)^{2s} |û(k)|² in closed form."""
        quot, res, winv = self.expansion
        with mp.workdps(self.dps):
            s2 = mp.mpf(2) * mp.mpf(s)
            total = mp.mpf(0)
            for i, (ci, wi) in enumerate(zip(res, winv)):
                for j, (cj, wj) in enumerate(zip(res, winv)):
                    if j < i:
                        continue
                    x = wi * mp.conj(wj)
                    term = ci * mp.conj(cj) * _weighted_geometric(s2, x)
                    total += term.real if i == j else 2 * term.real
            for k, qk in enumerate(quot):
                sk = sum((c * w ** k for c, w in zip(res, winv)), mp.mpc(0))
                total += (1 + k) ** s2 * (abs(qk + sk) ** 2 - abs(sk) ** 2)
            return total

    def sobolev_norm(self, s):
        with mp.workdps(self.dps):
            val = self.sobolev_norm_sq(s)
            if val < 0:
                raise ResolutionError("negative norm square; increase precision")
            return float(mp.sqrt(val))


def _weighted_geometric(s2, x):
    """Σ_{k≥0} (1+k)^{s2} x^k for |x| < 1."""
    if x == 0:
        return mp.mpf(1)
    if s2 == 0:
        return 1 / (1 - x)
    return mp.polylog(-s2, x) / x


def rational_form(sd, dps=DEFAULT_DPS, extra_angles=None):
    """Exact A/B for u(s, Ψ); ``extra_angles`` (mp numbers) are added to ψ_r.

    Adding angles in mp avoids rounding huge phase shifts through float64.
    """
    if sd.n == 0:
        raise ValueError("empty spectral data")
    with mp.workdps(dps + 20):
        rho, sigma, d_odd, b_odd, d_even, b_even = _side_data(sd, extra_angles)
        q = sd.q
        degree = q + sum(sd.degrees)
        npts = degree + 1
        pts = [mp.expj(2 * mp.pi * k / npts) for k in range(npts)]
        dets, nums = [], []
        for z in pts:
            dv_o = [_polyval(p, z) for p in d_odd]
            bv_o = [_polyval(p, z) for p in b_odd]
            dv_e = [_polyval(p, z) for p in d_even]
            bv_e = [_polyval(p, z) for p in b_even]
            mat = mp.matrix(q, q)
            for j in range(q):
                for k in range(q):
                    mat[j, k] = (rho[j] * dv_e[k] * dv_o[j] - sigma[k] * z * bv_e[k] * bv_o[j]) \
                        / (rho[j] ** 2 - sigma[k] ** 2)
            det = mp.det(mat)
            x = mp.lu_solve(mat, mp.matrix(bv_o))
            u_val = sum((x[k] * dv_e[k] for k in range(q)), mp.mpc(0))
            dets.append(det)
            nums.append(det * u_val)
        b = _interpolate(dets, pts)
        a = _interpolate(nums, pts)
        b0 = b[0]
        b = [c / b0 for c in b]
        a = [c / b0 for c in a]
        noise = mp.mpf(10) ** (-(dps - 10))
        b = _trim(b, noise)
        a = _trim(a, noise)
    return RationalSymbol(a, b, dps)


def _interpolate(values, pts):
    n = len(values)
    return [sum((v * mp.conj(z) ** k for v, z in zip(values, pts)), mp.mpc(0)) / n
            for k in range(n)]


def _trim(coeffs, rel):
    scale = max(abs(c) for c in coeffs)
    out = list(coeffs)
    while len(out) > 1 and abs(out[-1]) <= rel * scale:
        out.pop()
    return out
