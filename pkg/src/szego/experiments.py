"""Scripted reproductions built on the transform.

* traveling waves and their direct-integration check,
* the near-collapsing turbulence family u^{δ,ε}: H^s growth in ε and the
  return to the base torus at t* = 1/(2εδ²),
* Gram matrices of eigenspace bases along an isospectral torus.

The turbulence quantities go through the high-precision rational form
(``exact``): poles of u^{δ,ε} approach the circle like ε^{2(N-1)}, far beyond
what an FFT grid resolves.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import mpmath as mp
import numpy as np
from scipy.signal import lfilter

from . import _io
from .blaschke import BlaschkeProduct, normalized_denominator
from .errors import ResolutionError, StructureError, ValidationError
from .exact import DEFAULT_DPS, rational_form
from .flow import integrate_direct
from .hankel import (DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE, build_pair,
                     dominance_split, spectral_clusters)
from .hardy import DEFAULT_GRID, DEFAULT_MODES, from_rational
from .nlft import SpectralData, inverse, synthesize

# --------------------------------------------------------------------------
# traveling waves


def traveling_wave(rho, sigma, m, ell, phi=0.0, theta=0.0, n_modes=DEFAULT_MODES):
    """u0 = ((ρ²-σ²)e^{-iφ}/ρ) z^{m-1} / (1 - (σ/ρ)e^{-i(φ+θ)} z^{ℓ+m-1}).

    Returns (u0, c, ω) with u(t, e^{ix}) = e^{-iωt} u0(e^{i(x-ct)}).
    """
    if not (rho > sigma >= 0):
        raise ValidationError("need ρ > σ ≥ 0")
    if int(m) != m or int(ell) != ell or m < 1 or ell < 1:
        raise ValidationError("m and ℓ must be integers ≥ 1")
    m, ell = int(m), int(ell)
    amp = (rho ** 2 - sigma ** 2) * np.exp(-1j * phi) / rho
    numer = np.zeros(m, dtype=complex)
    numer[m - 1] = amp
    denom = np.zeros(ell + m, dtype=complex)
    denom[0] = 1.0
    denom[ell + m - 1] -= sigma / rho * np.exp(-1j * (phi + theta))
    if n_modes < m:
        raise ValidationError("n_modes too small for z^{m-1}")
    u0 = from_rational(numer, denom, n_modes)
    c = (rho ** 2 - sigma ** 2) / (m - 1 + ell)
    omega = rho ** 2 - (m - 1) * c
    return u0, float(c), float(omega)


def traveling_form(u, tol=1e-10):
    """Match u = α z^ℓ / (1 - p z^N); returns (α, ℓ, p, N).

    N = 0 is reported when u is a single monomial.
    """
    c = u.coeffs
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        raise StructureError("zero symbol")
    nz = np.flatnonzero(np.abs(c) > tol * scale)
    ell = int(nz[0])
    alpha = c[ell]
    if nz.size == 1:
        return complex(alpha), ell, 0j, 0
    period = int(nz[1] - ell)
    p = c[ell + period] / alpha
    idx = np.arange(ell, c.size)
    expected = np.zeros(c.size, dtype=complex)
    k = (idx - ell) // period
    on = (idx - ell) % period == 0
    expected[idx[on]] = alpha * p ** k[on]
    if np.max(np.abs(expected - c)) > tol * scale:
        raise StructureError("symbol is not of the form αz^ℓ/(1 - pz^N)")
    return complex(alpha), ell, complex(p), period


def check_traveling(u0, c, omega, T=1.0, dt=1e-3, m_grid=None, stride=None):
    """Max over samples and modes of |û(t,k) - e^{-i(ω+ck)t} û0(k)| after RK4."""
    m_grid = m_grid or max(DEFAULT_GRID, _next_pow2(4 * u0.n_modes))
    traj = integrate_direct(u0, T, dt, m_grid, stride=stride, track_spectrum=False)
    k = np.arange(u0.n_modes)
    worst = 0.0
    for t, state in zip(traj.times, traj.states):
        predicted = np.exp(-1j * (omega + c * k) * t) * u0.coeffs
        worst = max(worst, float(np.max(np.abs(state.coeffs - predicted))))
    return worst


# --------------------------------------------------------------------------
# turbulence family


@dataclass(frozen=True, eq=False)
class TurbulenceParams:
    """Base data (ρ_a, σ_b, Ψ) followed by δ(1+εξ_1), δ(1+εη_1), ..., δ(1+εξ_N), 0."""

    base: SpectralData
    delta: float
    eps: float
    xi: tuple
    eta: tuple

    def __post_init__(self):
        xi = tuple(float(x) for x in self.xi)
        eta = tuple(float(x) for x in self.eta)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)
        if len(xi) < 2 or len(eta) != len(xi) - 1:
            raise ValidationError("need N ≥ 2 values ξ and N-1 values η")
        seq = [v for pair in zip(xi, eta) for v in pair] + [xi[-1]]
        if any(a <= b for a, b in zip(seq, seq[1:])) or seq[-1] <= 0:
            raise ValidationError("need ξ_1 > η_1 > ξ_2 > ... > η_{N-1} > ξ_N > 0")
        if not (self.delta > 0 and self.eps > 0):
            raise ValidationError("δ and ε must be positive")
        if self.base.n == 0 or self.base.odd:
            raise ValidationError("base data must have even positive length")
        if self.delta * (1 + self.eps * xi[0]) >= self.base.s[-1]:
            raise ValidationError(
                f"δ(1+εξ_1) = {self.delta * (1 + self.eps * xi[0]):.6g} must stay below the "
                f"smallest base value {self.base.s[-1]:.6g}")

    @property
    def N(self):
        return len(self.xi)

    @classmethod
    def default(cls, base, N, delta, eps):
        """ξ_j = 2π(N-j+1) and η_k halfway between ξ_k and ξ_{k+1}."""
        xi = tuple(2 * np.pi * (N - j + 1) for j in range(1, N + 1))
        eta = tuple(0.5 * (a + b) for a, b in zip(xi, xi[1:]))
        return cls(base, delta, eps, xi, eta)

    def with_eps(self, eps):
        return replace(self, eps=eps)

    def jittered(self, rng, amount=0.4):
        """Move every ξ, η by up to ``amount`` times half the local spacing."""
        pts = np.empty(2 * self.N - 1)
        pts[0::2], pts[1::2] = self.xi, self.eta
        gaps = np.abs(np.diff(np.concatenate([pts, [0.0]])))
        half = 0.5 * np.minimum(gaps, np.concatenate([[gaps[0]], gaps[:-1]]))
        moved = pts + rng.uniform(-amount, amount, pts.size) * half
        return replace(self, xi=tuple(moved[0::2]), eta=tuple(moved[1::2]))

    def block(self):
        vals = []
        for j in range(self.N):
            vals.append(self.delta * (1 + self.eps * self.xi[j]))
            if j < self.N - 1:
                vals.append(self.delta * (1 + self.eps * self.eta[j]))
        return vals

    def spectral_data(self):
        s = list(self.base.s) + self.block()
        psi = list(self.base.psi) + [BlaschkeProduct() for _ in range(2 * self.N - 1)]
        return SpectralData(s, psi)

    def to_json(self):
        return {"base": self.base.to_json(), "delta": self.delta, "eps": self.eps,
                "xi": list(self.xi), "eta": list(self.eta)}


def default_base():
    """s = (1, 1/2) with Ψ = (1, 1)."""
    return SpectralData([1.0, 0.5], [BlaschkeProduct(), BlaschkeProduct()])


def turbulence_family(p, m_grid=DEFAULT_GRID, n_out=DEFAULT_MODES):
    """u^{δ,ε} through the grid inverse transform (tail energy recorded on the symbol)."""
    return inverse(p.spectral_data(), m_grid, n_out)


def turbulence_rational(p, dps=DEFAULT_DPS):
    return rational_form(p.spectral_data(), dps)


def growth_exponent(N, s):
    return (N - 1) * (2 * s - 1)


def _check_growth_s(s):
    if not 0.5 < s < 1:
        raise ValidationError("the growth bound is stated for s in (1/2, 1)")


def sobolev_norm_grid(p, s, m_grid=DEFAULT_GRID, n_out=DEFAULT_MODES, alias_tol=1e-6):
    """H^s norm from the grid synthesis.

    Raises ResolutionError when the weighted tail beyond n_out exceeds 1% of
    the norm, or when doubling the grid moves the norm by more than
    ``alias_tol`` (relative): aliasing hides modes a single grid cannot see.
    """
    sd = p.spectral_data()

    def weighted(m):
        u = synthesize(sd, m, m // 4).symbol
        weights = (1.0 + np.arange(u.n_modes)) ** (2 * s)
        return weights * np.abs(u.coeffs) ** 2

    dens = weighted(m_grid)
    fine = weighted(2 * m_grid)
    total = float(np.sum(dens))
    beyond = float(np.sum(dens[n_out:]))
    if beyond > 0.01 * total:
        raise ResolutionError(
            f"H^{s} tail beyond {n_out} modes is {beyond / total:.3g} of the norm; raise N_out/M")
    coarse_norm = float(np.sqrt(np.sum(dens[:n_out])))
    fine_norm = float(np.sqrt(np.sum(fine[:n_out])))
    if abs(coarse_norm - fine_norm) > alias_tol * fine_norm:
        raise ResolutionError(
            f"H^{s} norm changes by {abs(coarse_norm - fine_norm) / fine_norm:.3g} when the grid "
            f"is doubled; the symbol is not resolved on {m_grid} points")
    return fine_norm


def _norm_exact(args):
    p, s, dps = args
    return turbulence_rational(p, dps).sobolev_norm(s)


@dataclass(frozen=True, eq=False)
class GrowthSweep:
    params: TurbulenceParams
    s: float
    eps: np.ndarray
    norms: np.ndarray
    slope: float
    predicted: float
    accepted: bool
    attempts: tuple = field(default=())

    @property
    def local_slopes(self):
        """Slopes between consecutive ε values, largest ε first."""
        return np.diff(np.log(self.norms)) / np.diff(np.log(1 / self.eps))

    def csv(self):
        rows = [[float(e), self.params.delta, self.s, float(n), self.predicted]
                for e, n in zip(self.eps, self.norms)]
        return _io.csv_text(["eps", "delta", "sobolev_s", "norm", "predicted_exponent"], rows)


def fit_slope(eps, norms):
    """Least-squares slope of log‖u‖ against log(1/ε)."""
    return float(np.polyfit(np.log(1 / np.asarray(eps)), np.log(np.asarray(norms)), 1)[0])


def growth_sweep(template, s, eps_list, method="exact", m_grid=DEFAULT_GRID, n_out=DEFAULT_MODES,
                 dps=DEFAULT_DPS, rel_tol=0.15, retries=5, seed=0, workers=None):
    """‖u^{δ,ε}‖_{H^s} over ``eps_list`` and the fitted growth exponent.

    The first attempt uses ``template``'s (ξ, η).  When the slope misses
    (N-1)(2s-1) by more than ``rel_tol`` (relative), up to ``retries`` seeded
    jitters of (ξ, η) are tried; the closest attempt is returned with
    ``accepted`` telling whether any attempt met the tolerance.
    """
    _check_growth_s(s)
    eps = np.asarray(eps_list, dtype=float)
    if eps.size < 2 or np.any(np.diff(eps) >= 0) or eps[-1] <= 0:
        raise ValidationError("eps_list must be positive and strictly decreasing")
    if method not in ("exact", "grid"):
        raise ValidationError(f"unknown method {method!r}")
    predicted = growth_exponent(template.N, s)
    rng = np.random.default_rng(seed)
    attempts = []
    best = None
    current = template
    for attempt in range(retries + 1):
        family = [current.with_eps(e) for e in eps]
        if method == "exact":
            jobs = [(p, s, dps) for p in family]
            if workers and workers > 1:
                with ProcessPoolExecutor(workers) as pool:
                    norms = list(pool.map(_norm_exact, jobs))
            else:
                norms = [_norm_exact(j) for j in jobs]
        else:
            norms = [sobolev_norm_grid(p, s, m_grid, n_out) for p in family]
        norms = np.array(norms)
        slope = fit_slope(eps, norms)
        ok = abs(slope - predicted) <= rel_tol * abs(predicted)
        result = GrowthSweep(current, s, eps, norms, slope, predicted, ok)
        attempts.append((current.xi, current.eta, slope))
        if best is None or abs(slope - predicted) < abs(best.slope - predicted):
            best = result
        if ok:
            best = result
            break
        current = template.jittered(rng)
    return replace(best, attempts=tuple(attempts))


# --------------------------------------------------------------------------
# return to the base torus


def return_time(delta, eps):
    return 1 / (2 * mp.mpf(eps) * mp.mpf(delta) ** 2)


def _flow_angles(sd, t):
    """Extra angles -(-1)^r s_r² t reduced mod 2π in high precision."""
    two_pi = 2 * mp.pi
    return [mp.fmod(-((-1) ** r) * mp.mpf(float(x)) ** 2 * t, two_pi)
            for r, x in zip(range(1, sd.n + 1), sd.s)]


def _probe_modes(symbols, dense=512, sparse=200):
    ks = set(range(dense))
    kmax = dense
    for sym in symbols:
        for w in sym.expansion[2]:
            r = float(abs(w))
            if 0 < r < 1:
                # (1+k)^4 r^k peaks near k = -4/log r
                peak = -4.0 / np.log(r)
                kmax = max(kmax, 20 * peak)
                for f in (0.5, 0.8, 1.0, 1.25, 2.0):
                    ks.add(int(f * peak))
    if kmax > dense:
        ks.update(int(k) for k in np.geomspace(dense, kmax, sparse))
    return sorted(k for k in ks if k >= 0)


def limit_zeros(xi, eta):
    """Zeros of P(z) = lim (2ε)^{N-1} det C̃_ε(z), the block matrix at t* as ε → 0.

    P(z) = det[(1 - z e^{-i(ξ_j-η_k)})/(ξ_j-η_k) | 1], a polynomial of degree
    N-1.  Its zeros lie in |z| ≥ 1; the return to the base torus is smooth
    only when they are strictly outside (at ξ_j ∈ 2πℤ they sit on the circle).
    """
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    n = xi.size
    if n < 2:
        return np.zeros(0, complex)
    diff = xi[:, None] - eta[None, :]
    pts = np.exp(2j * np.pi * np.arange(n) / n)
    vals = []
    for z in pts:
        mat = np.ones((n, n), dtype=complex)
        mat[:, :n - 1] = (1 - z * np.exp(-1j * diff)) / diff
        vals.append(np.linalg.det(mat))
    coeffs = np.fft.fft(vals) / n
    coeffs = np.trim_zeros(coeffs, "b") if np.any(coeffs) else coeffs
    return np.roots(coeffs[::-1])


def return_margin(p):
    """min |z_k| - 1 over the limit zeros."""
    zeros = limit_zeros(p.xi, p.eta)
    return float(np.min(np.abs(zeros)) - 1) if zeros.size else float("inf")


def admissible_params(template, min_margin=1e-2, seed=0, retries=5):
    """``template`` or the first seeded jitter whose limit zeros clear the circle."""
    rng = np.random.default_rng(seed)
    current = template
    for _ in range(retries + 1):
        if return_margin(current) > min_margin:
            return current
        current = template.jittered(rng)
    raise ValidationError(
        f"no (ξ, η) with limit-zero margin > {min_margin} after {retries} jitters")


def return_distance(initial, predicted, t, phase_shift=0.0, dps=DEFAULT_DPS):
    """max_k (1+k)⁴ |û(t,k) - v̂(t,k)| for the exact flows of two spectral data.

    Both are evolved to time ``t`` (an mp number) by phase rotation;
    ``phase_shift`` is added to every predicted angle (control experiments).
    """
    with mp.workdps(dps + 20):
        a = rational_form(initial, dps, _flow_angles(initial, t))
        shifted = [x + mp.mpf(phase_shift) for x in _flow_angles(predicted, t)]
        b = rational_form(predicted, dps, shifted)
    ks = _probe_modes([a, b])
    with mp.workdps(dps):
        worst = mp.mpf(0)
        for k in ks:
            worst = max(worst, (1 + k) ** 4 * abs(a.mode(k) - b.mode(k)))
    return float(worst)


def return_check(p, phase_shift=0.0, dps=DEFAULT_DPS):
    """C∞-surrogate distance between Z(t*)u^{δ,ε} and u(s, Ψ̃) at t* = 1/(2εδ²)."""
    with mp.workdps(dps + 20):
        t = return_time(p.delta, p.eps)
    return return_distance(p.spectral_data(), p.base, t, phase_shift, dps)


# --------------------------------------------------------------------------
# Gram matrices on isospectral tori


def _skeleton(u, tol_cluster, tol_dom):
    pair = build_pair(u)
    ch = spectral_clusters(pair, "H", tol_cluster, u)
    ck = spectral_clusters(pair, "K", tol_cluster, u)
    return pair, dominance_split(u, ch, ck, tol_dom, tol_match=max(tol_cluster, 1e-9))


def eigenspace_basis(u, psi, r, tol_cluster=DEFAULT_TOL_CLUSTER, tol_dom=DEFAULT_TOL_DOMINANCE):
    """Vectors (z^a/D)·g, a = 0..deg Ψ_r, as rows.

    g = H_u(u_j) for r odd (u_j the projection of u on E_u(ρ_j)) and g = u'_k,
    the projection on F_u(σ_k), for r even.  r is 1-based.
    """
    pair, skel = _skeleton(u, tol_cluster, tol_dom)
    if not 1 <= r <= skel.n:
        raise ValidationError(f"cluster index {r} out of range 1..{skel.n}")
    entry = skel.entries[r - 1]
    g = pair.apply_h(entry.u_proj) if r % 2 == 1 else entry.u_proj.coeffs
    n = u.n_modes
    impulse = np.zeros(n)
    impulse[0] = 1.0
    inv_d = lfilter([1.0], normalized_denominator(psi), impulse)
    base = np.convolve(inv_d, g)[:n]
    rows = []
    for a in range(psi.degree + 1):
        row = np.zeros(n, dtype=complex)
        row[a:] = base[:n - a]
        rows.append(row)
    return np.array(rows)


def gram_matrix(sd, r, m_grid=DEFAULT_GRID, n_out=DEFAULT_MODES):
    """G_ab = (b_a | b_b) for the basis of ``eigenspace_basis``."""
    u = inverse(sd, m_grid, n_out)
    if u.tail_energy > 1e-20:
        raise ResolutionError("symbol not resolved on the requested modes")
    b = eigenspace_basis(u, sd.psi[r - 1], r)
    return b @ b.conj().T


def gram_difference(sd_a, sd_b, r, **kw):
    return float(np.max(np.abs(gram_matrix(sd_a, r, **kw) - gram_matrix(sd_b, r, **kw))))


def gram_invariance(sd, gammas, r, **kw):
    """‖G_u - G_ũ‖_∞ where ũ has Ψ_r(ũ) = e^{iγ_r}Ψ_r(u), zeros unchanged."""
    if len(gammas) != sd.n:
        raise ValidationError("one angle shift per Blaschke product is required")
    shifted = SpectralData(sd.s, [p.rotated(g) for p, g in zip(sd.psi, gammas)])
    return gram_difference(sd, shifted, r, **kw)


def _next_pow2(n):
    return 1 << max(0, int(n) - 1).bit_length()
