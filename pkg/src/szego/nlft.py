"""Forward and inverse nonlinear Fourier transform for the cubic Szegő equation.

Spectral data are a strictly decreasing list s_1 > ... > s_n > 0 together
with n Blaschke products.  Odd positions (1-based) are the H-dominant values
ρ_j = s_{2j-1}, even positions the K-dominant values σ_k = s_{2k}; when n is
odd a final σ_q = 0 is implied.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from . import _io, _kernels
from .blaschke import (BlaschkeProduct, fit_from_boundary, monic_numerator,
                       normalized_denominator, polyval)
from .errors import (DegreeMismatchError, DomainError, GapError, InvertibilityError,
                     ResolutionError, ValidationError)
from .hankel import (DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE, build_pair,
                     dominance_split, spectral_clusters)
from .hardy import (DEFAULT_GRID, DEFAULT_MODES, GridValues, HardySymbol,
                    circle_points, eval_grid, is_power_of_two)

MIN_RELATIVE_GAP = 1e-10
RANK_RESOLUTION = 1e-10
COND_LIMIT = 1e13


@dataclass(frozen=True, eq=False)
class SpectralData:
    s: np.ndarray
    psi: tuple

    def __post_init__(self):
        s = np.array(self.s, dtype=float).ravel()
        psi = tuple(p if isinstance(p, BlaschkeProduct) else BlaschkeProduct(*p)
                    for p in self.psi)
        if s.size != len(psi):
            raise ValidationError(f"{s.size} singular values but {len(psi)} Blaschke products")
        if s.size and not np.all(np.isfinite(s)):
            raise ValidationError("singular values must be finite")
        if s.size and s[-1] <= 0:
            raise GapError("singular values must be positive")
        if s.size > 1:
            rel = (s[:-1] - s[1:]) / s[:-1]
            if np.min(rel) < MIN_RELATIVE_GAP:
                raise GapError(f"singular values not strictly decreasing "
                               f"(minimum relative gap {np.min(rel):.3g})")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "psi", psi)

    @property
    def n(self):
        return self.s.size

    @property
    def q(self):
        return (self.n + 1) // 2

    @property
    def odd(self):
        return self.n % 2 == 1

    @property
    def rho(self):
        return self.s[0::2].copy()

    @property
    def sigma(self):
        """σ_1..σ_q, with the implicit trailing 0 when n is odd."""
        sig = self.s[1::2]
        return np.concatenate([sig, [0.0]]) if self.odd else sig.copy()

    @property
    def degrees(self):
        return tuple(p.degree for p in self.psi)

    @property
    def rank(self):
        """Rank of H_u: q plus the sum of the degrees."""
        return self.q + sum(self.degrees)

    def with_angles(self, angles):
        return SpectralData(self.s, [BlaschkeProduct(a, p.zeros)
                                     for a, p in zip(angles, self.psi)])

    def to_json(self):
        return {"s": [float(x) for x in self.s], "psi": [p.to_json() for p in self.psi]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["s"], [BlaschkeProduct.from_json(p) for p in obj["psi"]])


@dataclass(frozen=True)
class NormingConstants:
    tau_sq: np.ndarray
    kappa_sq: np.ndarray
    kappa0_sq: float = None


# --------------------------------------------------------------------------
# forward transform

@dataclass(frozen=True, eq=False)
class ForwardResult:
    data: SpectralData
    skeleton: object
    fit_residuals: tuple
    ambiguous: bool
    n_modes: int


def check_rank_resolved(u, threshold=RANK_RESOLUTION):
    c = u.coeffs
    total = float(np.sum(np.abs(c) ** 2))
    quarter = c.size - c.size // 4
    last = float(np.sum(np.abs(c[quarter:]) ** 2))
    if total > 0 and c.size >= 4 and last > threshold * total:
        raise ResolutionError(
            f"last quarter of the modes carries {last / total:.3g} of the energy; "
            f"rank is not resolved with {c.size} modes")


def forward(u, tol_cluster=DEFAULT_TOL_CLUSTER, tol_dom=DEFAULT_TOL_DOMINANCE,
            m_grid=None, fit_tol=1e-6, drop_rel=1e-8, details=False):
    """Spectral data (s_r, Ψ_r) of a symbol.

    Blaschke products come from the boundary quotients s·u_s / H_u(u_s)
    (H-dominant) and K_u(u'_s) / (s·u'_s) (K-dominant), fitted with the degree
    fixed by the cluster multiplicity.
    """
    if u.norm() == 0.0:
        raise DomainError("the zero symbol has no spectral data")
    check_rank_resolved(u)
    n_modes = u.n_modes
    if m_grid is None:
        m_grid = max(DEFAULT_GRID, _next_pow2(4 * n_modes))
    if not is_power_of_two(m_grid) or m_grid < 2 * n_modes:
        raise ValidationError("fit grid must be a power of two with at least 2N points")

    pair = build_pair(u)
    ch = spectral_clusters(pair, "H", tol_cluster, u)
    ck = spectral_clusters(pair, "K", tol_cluster, u)
    skel = dominance_split(u, ch, ck, tol_dom, tol_match=max(tol_cluster, 1e-9))
    if skel.multiplicity_issues:
        raise DegreeMismatchError("; ".join(skel.multiplicity_issues))

    psis, residuals = [], []
    for side, cluster in zip(skel.sides, skel.entries):
        proj = cluster.u_proj.coeffs
        if side == "H":
            num = cluster.s * proj
            den = pair.apply_h(proj)
        else:
            num = pair.apply_k(proj)
            den = cluster.s * proj
        num_v = eval_grid(HardySymbol(num), m_grid).values
        den_v = eval_grid(HardySymbol(den), m_grid).values
        mag = np.abs(den_v)
        mask = mag > drop_rel * mag.max()
        ratio = np.where(mask, num_v / np.where(mask, den_v, 1.0), 1.0)
        psi = fit_from_boundary(GridValues(ratio, mask), cluster.mult - 1, fit_tol)
        zeta = circle_points(m_grid)[mask]
        residuals.append(float(np.max(np.abs(psi(zeta) - ratio[mask]))))
        psis.append(psi)
    sd = SpectralData(skel.s, psis)
    if details:
        return ForwardResult(sd, skel, tuple(residuals), ch.ambiguous or ck.ambiguous, n_modes)
    return sd


# --------------------------------------------------------------------------
# the matrices C(z) and C#(z)

def _side_polynomials(sd, z):
    """D and B = e^{-iψ}P evaluated at z for the H-side and K-side products.

    Returns four (q, len(z)) arrays.  The missing K-side product when n is odd
    is represented by D = 1, B = 1 (it is multiplied by σ_q = 0).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    q = sd.q
    d_odd = np.empty((q, z.size), complex)
    b_odd = np.empty((q, z.size), complex)
    d_even = np.ones((q, z.size), complex)
    b_even = np.ones((q, z.size), complex)
    for j in range(q):
        p = sd.psi[2 * j]
        d_odd[j] = polyval(normalized_denominator(p), z)
        b_odd[j] = p.phase * polyval(monic_numerator(p), z)
        if 2 * j + 1 < sd.n:
            p = sd.psi[2 * j + 1]
            d_even[j] = polyval(normalized_denominator(p), z)
            b_even[j] = p.phase * polyval(monic_numerator(p), z)
    return d_odd, b_odd, d_even, b_even


def build_C(sd, z):
    """c_{jk}(z) = (ρ_j - σ_k z Ψ_{2k}(z) Ψ_{2j-1}(z)) / (ρ_j² - σ_k²)."""
    _require_nonempty(sd)
    z = complex(z)
    rho, sigma = sd.rho, sd.sigma
    psi_odd = np.array([sd.psi[2 * j](z) for j in range(sd.q)])
    psi_even = np.array([sd.psi[2 * k + 1](z) if 2 * k + 1 < sd.n else 1.0
                         for k in range(sd.q)])
    num = rho[:, None] - sigma[None, :] * z * psi_even[None, :] * psi_odd[:, None]
    return num / (rho[:, None] ** 2 - sigma[None, :] ** 2)


def build_Csharp(sd, z):
    """Denominator-cleared matrix with C = diag(1/D_{2j-1}) C# diag(1/D_{2k})."""
    _require_nonempty(sd)
    d_odd, b_odd, d_even, b_even = _side_polynomials(sd, [complex(z)])
    return _kernels.assemble_numpy(np.array([complex(z)]), sd.rho, sd.sigma,
                                   d_odd, b_odd, d_even, b_even)[0]


def _require_nonempty(sd):
    if sd.n == 0:
        raise DomainError("empty spectral data")


# --------------------------------------------------------------------------
# inverse transform

@dataclass(frozen=True, eq=False)
class Synthesis:
    """Result of the inverse transform with its diagnostics.

    ``h_values[j]`` are the samples of h_j solving ᵗC h = 1 and
    ``u_parts[j]`` those of u_j = Ψ_{2j-1} h_j, whose sum is u.
    """

    symbol: HardySymbol
    values: np.ndarray
    h_values: np.ndarray
    u_parts: np.ndarray
    cond_max: float
    min_abs_det: float
    tail_energy: float
    m_grid: int


def synthesize(sd, m_grid=DEFAULT_GRID, n_out=DEFAULT_MODES):
    """Evaluate u(s, Ψ) on the grid by solving one q×q system per point."""
    _require_nonempty(sd)
    if not is_power_of_two(m_grid):
        raise ValidationError("grid size must be a power of two")
    if m_grid < 4 * n_out:
        raise ValidationError(f"grid {m_grid} must be at least 4*N_out = {4 * n_out}")
    z = circle_points(m_grid)
    d_odd, b_odd, d_even, b_even = _side_polynomials(sd, z)
    mats = _kernels.assemble(z, sd.rho.astype(complex), sd.sigma.astype(complex),
                             d_odd, b_odd, d_even, b_even)
    svals = np.linalg.svd(mats, compute_uv=False)
    smin = svals[:, -1]
    if not np.all(np.isfinite(svals)) or np.min(smin) <= svals[:, 0].max() / COND_LIMIT:
        raise InvertibilityError("C#(z) is numerically singular on the circle")
    cond = svals[:, 0] / smin
    dets = np.abs(np.linalg.det(mats))
    x, y = _kernels.solve(mats, b_odd, d_even)
    values = np.sum(x * d_even.T, axis=1)
    h_values = (y * d_odd.T).T
    u_parts = (y * b_odd.T).T
    c = np.fft.fft(values) / m_grid
    tail = float(np.sum(np.abs(c[n_out:]) ** 2))
    symbol = HardySymbol(c[:n_out], tail)
    return Synthesis(symbol, values, h_values, u_parts, float(cond.max()),
                     float(dets.min()), tail, m_grid)


def inverse(sd, m_grid=DEFAULT_GRID, n_out=DEFAULT_MODES):
    return synthesize(sd, m_grid, n_out).symbol


# --------------------------------------------------------------------------
# closed-form norming constants and Bateman identities

def norming_constants(sd):
    """τ_j² = ‖u_{ρ_j}‖², κ_k² = ‖u'_{σ_k}‖² (σ_k > 0) and ‖u'_0‖² when n is odd."""
    _require_nonempty(sd)
    rho2, sig2 = sd.rho ** 2, sd.sigma ** 2
    q = sd.q
    tau = np.empty(q)
    for j in range(q):
        others = [i for i in range(q) if i != j]
        tau[j] = (rho2[j] - sig2[j]) * np.prod(
            [(rho2[j] - sig2[i]) / (rho2[j] - rho2[i]) for i in others])
    n_pos = q - 1 if sd.odd else q
    kappa = np.empty(n_pos)
    for k in range(n_pos):
        others = [i for i in range(q) if i != k]
        kappa[k] = (rho2[k] - sig2[k]) * np.prod(
            [(sig2[k] - rho2[i]) / (sig2[k] - sig2[i]) for i in others])
    kappa0 = None
    if sd.odd:
        kappa0 = float(rho2[0] * np.prod([rho2[k + 1] / sig2[k] for k in range(q - 1)]))
    return NormingConstants(tau, kappa, kappa0)


@dataclass(frozen=True)
class BatemanReport:
    residuals: dict
    x_values: np.ndarray

    @property
    def max_residual(self):
        return max(self.residuals.values())


def bateman_check(sd, nc=None, n_points=16, seed=0):
    """Residuals of the resolvent-product identities linking ρ, σ, τ and κ.

    Families: the product form of J(x) and of 1/J(x) at random
    x ∈ (-1/s_1², 0), the simple and double partial-fraction sums in τ and
    in κ, the limit identity for Σ τ²/ρ², and (n odd) the one for Σ τ²/ρ⁴.
    Double sums are compared relative to max(1, |right side|).
    """
    _require_nonempty(sd)
    if nc is None:
        nc = norming_constants(sd)
    rng = np.random.default_rng(seed)
    x = -rng.uniform(0.0, 1.0, n_points) / sd.s[0] ** 2
    rho2, sig2 = sd.rho ** 2, sd.sigma ** 2
    tau = np.asarray(nc.tau_sq)
    pos = sig2 > 0
    sig2_pos = sig2[pos]
    kappa_all = np.concatenate([nc.kappa_sq, [nc.kappa0_sq]]) if sd.odd else np.asarray(nc.kappa_sq)
    sig2_all = sig2  # includes the trailing 0 when n is odd

    res = {}
    prod = np.prod((1 - np.outer(x, sig2)) / (1 - np.outer(x, rho2)), axis=1)
    series = 1 + x * np.sum(tau / (1 - np.outer(x, rho2)), axis=1)
    res["J_product"] = float(np.max(np.abs(prod - series)))

    inv_series = 1 - x * np.sum(kappa_all / (1 - np.outer(x, sig2_all)), axis=1)
    res["J_inverse_product"] = float(np.max(np.abs(1 / prod - inv_series)))

    if sig2_pos.size:
        simple = np.sum(tau[None, :] / (rho2[None, :] - sig2_pos[:, None]), axis=1)
        res["simple_tau"] = float(np.max(np.abs(simple - 1)))
        g = 1.0 / (rho2[None, :] - sig2_pos[:, None])
        double = (g * tau[None, :]) @ g.T
        target = np.diag(1.0 / np.asarray(nc.kappa_sq)[: sig2_pos.size])
        res["double_tau"] = float(np.max(np.abs(double - target) / np.maximum(1, np.abs(target))))
    else:
        res["simple_tau"] = 0.0
        res["double_tau"] = 0.0

    simple_k = np.sum(kappa_all[None, :] / (rho2[:, None] - sig2_all[None, :]), axis=1)
    res["simple_kappa"] = float(np.max(np.abs(simple_k - 1)))
    gk = 1.0 / (sig2_all[None, :] - rho2[:, None])
    double_k = (gk * kappa_all[None, :]) @ gk.T
    target_k = np.diag(1.0 / tau)
    res["double_kappa"] = float(np.max(np.abs(double_k - target_k) / np.maximum(1, np.abs(target_k))))

    res["sum_tau_over_rho2"] = float(abs(1 - np.sum(tau / rho2) - np.prod(sig2 / rho2)))
    if sd.odd:
        rhs = np.prod([sig2[k] / rho2[k + 1] for k in range(sd.q - 1)]) / rho2[0]
        lhs = np.sum(tau / rho2 ** 2)
        res["sum_tau_over_rho4"] = float(abs(lhs - rhs) / max(1.0, abs(rhs)))
    return BatemanReport(res, x)


@dataclass(frozen=True)
class KernelDiagnostic:
    classification: str
    sigma_over_rho: float
    sigma_over_rho_below: float


def kernel_diagnostic(sd, truncated=False):
    """Classify ker H_u from the products ∏σ(ρ)²/ρ² and ∏σ²/ρ(σ)².

    For finite data the kernel is always nontrivial (finite rank).  For data
    that are a truncation of an infinite sequence the partial products are
    returned as trend indicators and the result is ``undetermined``.
    """
    _require_nonempty(sd)
    rho2, sig2 = sd.rho ** 2, sd.sigma ** 2
    first = float(np.prod(sig2 / rho2))
    positive = sd.s[1::2] ** 2
    below = rho2[1:1 + positive.size]
    second = float(np.prod(positive[:below.size] / below)) if below.size else 1.0
    if truncated:
        return KernelDiagnostic("undetermined", first, second)
    return KernelDiagnostic("nontrivial-kernel", first, second)


def _next_pow2(n):
    p = 1
    while p < n:
        p *= 2
    return p
