"""Truncated Hankel pairs, eigen-clusters and the H/K dominance split.

For a symbol with N modes, Γ[n, p] = û(n+p) and Γ'[n, p] = û(n+p+1) with
û(k) = 0 for k ≥ N.  The antilinear operators act as H_u h = Γ conj(h) and
K_u h = Γ' conj(h), so H_u² = Γ Γ^H and K_u² = Γ' Γ'^H.  Because û vanishes
beyond the truncation, these N×N matrices carry every nonzero entry of the
operators restricted to polynomials of degree < N.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hankel as _hankel, toeplitz as _toeplitz

from .errors import InconsistentSpectrumError, ValidationError
from .hardy import HardySymbol, modulus_squared_modes

DEFAULT_TOL_CLUSTER = 1e-6
DEFAULT_TOL_DOMINANCE = 1e-8


@dataclass(frozen=True, eq=False)
class HankelPair:
    gamma: np.ndarray
    gamma_shift: np.ndarray
    source: HardySymbol

    @property
    def n_modes(self):
        return self.gamma.shape[0]

    def h_squared(self):
        return self.gamma @ self.gamma.conj().T

    def k_squared(self):
        return self.gamma_shift @ self.gamma_shift.conj().T

    def apply_h(self, h):
        return self.gamma @ np.conj(_coeffs(h, self.n_modes))

    def apply_k(self, h):
        return self.gamma_shift @ np.conj(_coeffs(h, self.n_modes))


def _coeffs(h, n):
    c = h.coeffs if isinstance(h, HardySymbol) else np.asarray(h, dtype=complex)
    if c.size < n:
        c = np.concatenate([c, np.zeros(n - c.size, complex)])
    elif c.size > n:
        c = c[:n]
    return c


def hankel_matrix(coeffs, n_modes=None):
    c = np.asarray(coeffs, dtype=complex)
    n = c.size if n_modes is None else n_modes
    col = np.zeros(n, dtype=complex)
    col[:min(n, c.size)] = c[:n]
    last = np.zeros(n, dtype=complex)
    if c.size > n:
        last[:min(n, c.size - n + 1)] = c[n - 1:2 * n - 1]
    return _hankel(col, last)


def build_pair(u):
    c = u.coeffs
    shifted = np.concatenate([c[1:], [0.0]])
    return HankelPair(hankel_matrix(c), hankel_matrix(shifted), u)


def toeplitz_matrix(two_sided, n_modes):
    """(T_b)[n, p] = b̂(n-p) from b̂(-(L)..L), L ≥ n_modes-1 (missing modes are 0)."""
    b = np.asarray(two_sided, dtype=complex)
    half = b.size // 2
    idx = np.arange(n_modes)
    col = np.array([b[half + k] if k <= half else 0.0 for k in idx], dtype=complex)
    row = np.array([b[half - k] if k <= half else 0.0 for k in idx], dtype=complex)
    return _toeplitz(col, row)


def modulus_toeplitz(u):
    """T_{|u|²} on the first N modes."""
    return toeplitz_matrix(modulus_squared_modes(u), u.n_modes)


@dataclass(frozen=True, eq=False)
class EigenCluster:
    s: float
    s_sq: float
    mult: int
    basis: np.ndarray
    side: str
    kernel: bool = False
    u_proj: HardySymbol = None
    norm_sq: float = float("nan")

    def with_projection(self, u):
        return project_symbol(u, self)


@dataclass(frozen=True, eq=False)
class ClusterList:
    clusters: list
    side: str
    n_modes: int
    ambiguous: bool = False
    min_relative_gap: float = float("inf")

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self):
        return len(self.clusters)

    def __getitem__(self, i):
        return self.clusters[i]

    def positive(self):
        return [c for c in self.clusters if not c.kernel]

    def kernel_cluster(self):
        for c in self.clusters:
            if c.kernel:
                return c
        return None


def spectral_clusters(pair, side="H", tol_rel=DEFAULT_TOL_CLUSTER, u=None):
    """Group eigenvalues of H² (or K²) into clusters of equal singular value.

    Consecutive singular values are merged when their gap relative to the
    larger one is below ``tol_rel``.  Values with s < tol_rel·s_max form the
    kernel cluster.  Gaps within a factor 10 of ``tol_rel`` set ``ambiguous``.
    When ``u`` is given every cluster carries its projection of ``u``.
    """
    if not 0.0 < tol_rel < 1e-2:
        raise ValidationError("tol_rel must lie in (0, 1e-2)")
    side = side.upper()
    if side not in ("H", "K"):
        raise ValidationError("side must be 'H' or 'K'")
    form = pair.h_squared() if side == "H" else pair.k_squared()
    evals, evecs = np.linalg.eigh(form)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    s = np.sqrt(np.clip(evals, 0.0, None))
    n = s.size
    s_max = s[0] if n else 0.0

    clusters = []
    ambiguous = False
    min_gap = float("inf")
    kernel_start = n
    for i in range(n):
        if s_max == 0.0 or s[i] < tol_rel * s_max:
            kernel_start = i
            break
    i = 0
    while i < kernel_start:
        j = i + 1
        while j < kernel_start:
            gap = (s[j - 1] - s[j]) / s[j - 1]
            if gap >= tol_rel:
                min_gap = min(min_gap, gap)
                if gap < 10.0 * tol_rel:
                    ambiguous = True
                break
            if gap > 0.1 * tol_rel:
                ambiguous = True
            j += 1
        block = slice(i, j)
        s_val = float(np.mean(s[block]))
        clusters.append(EigenCluster(s_val, s_val ** 2, j - i, evecs[:, block].copy(), side))
        i = j
    if kernel_start < n:
        if kernel_start > 0:
            edge = s[kernel_start] / s_max
            if edge > 0.1 * tol_rel:
                ambiguous = True
        clusters.append(EigenCluster(0.0, 0.0, n - kernel_start,
                                     evecs[:, kernel_start:].copy(), side, kernel=True))
    if u is not None:
        clusters = [project_symbol(u, c) for c in clusters]
    return ClusterList(clusters, side, n, ambiguous, min_gap)


def project_symbol(u, cluster):
    """Orthogonal projection of u onto the cluster eigenspace."""
    c = _coeffs(u, cluster.basis.shape[0])
    b = cluster.basis
    proj = b @ (b.conj().T @ c)
    return EigenCluster(cluster.s, cluster.s_sq, cluster.mult, cluster.basis, cluster.side,
                        cluster.kernel, HardySymbol(proj), float(np.vdot(proj, proj).real))


@dataclass(frozen=True, eq=False)
class SpectralSkeleton:
    """Interlaced dominant singular values ρ_1 > σ_1 > ρ_2 > ...

    ``entries[r]`` is the (H or K) cluster realising s_{r+1}.  ``odd`` means
    0 belongs to Σ_K, in which case n = 2q - 1.  ``partner_mults[r]`` is the
    multiplicity of the same value on the opposite side (0 if absent).
    """

    s: np.ndarray
    sides: tuple
    entries: tuple
    partner_mults: tuple
    odd: bool
    kernel_k: EigenCluster = None
    multiplicity_issues: tuple = field(default=())
    kernel_projection: float = 0.0

    @property
    def n(self):
        return len(self.s)

    @property
    def q(self):
        return (self.n + 1) // 2

    @property
    def mults(self):
        return tuple(c.mult for c in self.entries)


def dominance_split(u, clusters_h, clusters_k, tol_dom=DEFAULT_TOL_DOMINANCE,
                    tol_match=None):
    """Classify clusters by whether u has a visible component on them."""
    norm_u = u.norm()
    if norm_u == 0.0:
        raise ValidationError("zero symbol has no spectral data")
    if tol_match is None:
        tol_match = 1e-6

    def dominant(c):
        return c.u_proj is not None and np.sqrt(c.norm_sq) > tol_dom * norm_u

    for cl in (clusters_h, clusters_k):
        for c in cl:
            if c.u_proj is None:
                raise ValidationError("clusters must carry symbol projections")
    dom_h = [c for c in clusters_h if not c.kernel and dominant(c)]
    dom_k = [c for c in clusters_k if not c.kernel and dominant(c)]
    ker_h = clusters_h.kernel_cluster() if hasattr(clusters_h, "kernel_cluster") else None
    if ker_h is not None and dominant(ker_h):
        raise InconsistentSpectrumError("u has a component on ker H_u")
    ker_k = clusters_k.kernel_cluster() if hasattr(clusters_k, "kernel_cluster") else None
    kernel_leak = float(np.sqrt(ker_k.norm_sq)) / norm_u if ker_k is not None else 0.0

    def same(a, b):
        return abs(a - b) <= tol_match * max(a, b)

    for ch in dom_h:
        for ck in dom_k:
            if same(ch.s, ck.s):
                raise InconsistentSpectrumError(
                    f"singular value {ch.s:.12g} is dominant on both sides")

    merged = sorted([(c.s, "H", c) for c in dom_h] + [(c.s, "K", c) for c in dom_k],
                    key=lambda t: -t[0])
    for r, (_, side, _) in enumerate(merged):
        want = "H" if r % 2 == 0 else "K"
        if side != want:
            raise InconsistentSpectrumError(
                f"interlacing violated at position {r + 1}: expected {want}-dominant value")
    # Whether 0 ∈ Σ_K follows from the count: #Σ_H = #Σ_K including 0.  The
    # projection of u on the truncated kernel of K² also picks up truncation
    # leakage, so it is only used as a consistency check.
    odd = len(dom_h) == len(dom_k) + 1
    if odd and kernel_leak <= tol_dom:
        raise InconsistentSpectrumError(
            "count requires 0 in the K-spectrum but u is orthogonal to ker K_u")

    # multiplicity pairing: dim E(s) - dim F(s) = +1 (H-dominant) or -1 (K-dominant)
    partners, issues = [], []
    for s_val, side, c in merged:
        other = clusters_k if side == "H" else clusters_h
        match = [o for o in other if not o.kernel and same(o.s, s_val)]
        pm = match[0].mult if match else 0
        partners.append(pm)
        want = c.mult - 1
        if pm != want:
            issues.append(f"s={s_val:.12g} ({side}): multiplicity {c.mult} pairs with {pm}, "
                          f"expected {want}")
    return SpectralSkeleton(np.array([m[0] for m in merged]), tuple(m[1] for m in merged),
                            tuple(m[2] for m in merged), tuple(partners), odd, ker_k,
                            tuple(issues), kernel_leak)


def clusters_to_json(clusters):
    return [{"s": c.s, "mult": c.mult, "side": c.side, "kernel": c.kernel,
             "norm_sq": None if np.isnan(c.norm_sq) else c.norm_sq} for c in clusters]
