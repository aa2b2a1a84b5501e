"""Constructive best rank-k Hankel approximation.

For the k-th singular value s = λ_k(u) (counted with multiplicity, k = 0 the
largest) with λ_{k-1} > λ_k, a Schmidt pair H_u h = s f, H_u f = s h gives a
unimodular φ = f / conj(h) on the circle.  Then v = s Π(φ) has ‖H_v‖ = s and
r = u - v has a Hankel operator of rank k at distance s from H_u.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateConstructionError, IllConditionedError, ResolutionError,
                     ValidationError)
from .hankel import DEFAULT_TOL_CLUSTER, build_pair, hankel_matrix
from .hardy import (DEFAULT_GRID, GridValues, HardySymbol, eval_grid, is_power_of_two,
                    project_grid)

RANK_THRESHOLD = 1e-8
MAX_DROPPED_FRACTION = 0.05


@dataclass(frozen=True, eq=False)
class SchmidtPair:
    h: HardySymbol
    f: HardySymbol
    s: float
    k: int


def singular_values(u):
    """λ_0 ≥ λ_1 ≥ ... of H_u on the truncated space."""
    return np.linalg.svd(build_pair(u).gamma, compute_uv=False)


def schmidt_pair(u, k, tol_rel=DEFAULT_TOL_CLUSTER):
    pair = build_pair(u)
    n = u.n_modes
    if not 0 <= k < n:
        raise ValidationError(f"k={k} out of range for {n} modes")
    evals, evecs = np.linalg.eigh(pair.h_squared())
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    lam = np.sqrt(np.clip(evals, 0.0, None))
    s = lam[k]
    if s <= RANK_THRESHOLD * lam[0]:
        raise ValidationError(f"λ_{k} is numerically zero; H_u already has rank ≤ {k}")
    if k > 0 and (lam[k - 1] - s) <= tol_rel * lam[k - 1]:
        raise ValidationError(
            f"k={k} is inside a multiplicity plateau (λ_{k - 1} = λ_{k} within tolerance)")
    h = evecs[:, k]
    f = pair.gamma @ np.conj(h) / s
    return SchmidtPair(HardySymbol(h), HardySymbol(f), float(s), k)


def schmidt_residuals(u, pair):
    g = build_pair(u).gamma
    h, f = pair.h.coeffs, pair.f.coeffs
    return (float(np.linalg.norm(g @ np.conj(h) - pair.s * f)),
            float(np.linalg.norm(g @ np.conj(f) - pair.s * h)))


def unimodular_symbol(pair, m_grid=DEFAULT_GRID, drop_rel=1e-6):
    """Samples of φ = f / conj(h).  Samples where |h| is tiny are filled from neighbours."""
    hv = eval_grid(pair.h, m_grid).values
    fv = eval_grid(pair.f, m_grid).values
    mag = np.abs(hv)
    keep = mag > drop_rel * mag.max()
    if np.mean(~keep) > MAX_DROPPED_FRACTION:
        raise IllConditionedError(
            f"{np.mean(~keep):.1%} of the samples have |h| ≈ 0; φ is not determined")
    phi = np.empty(m_grid, dtype=complex)
    phi[keep] = fv[keep] / np.conj(hv[keep])
    if not np.all(keep):
        # interpolate the phase linearly across dropped samples, periodically
        good = np.flatnonzero(keep)
        ang = np.unwrap(np.angle(phi[good]))
        closing = ang[-1] + np.angle(np.exp(1j * (ang[0] - ang[-1])))
        xs = np.concatenate([good, [good[0] + m_grid]])
        ys = np.concatenate([ang, [closing]])
        missing = np.flatnonzero(~keep)
        missing = np.where(missing < good[0], missing + m_grid, missing)
        phi[~keep] = np.exp(1j * np.interp(missing, xs, ys))
    return GridValues(phi, keep)


@dataclass(frozen=True, eq=False)
class Approximation:
    r: HardySymbol
    err: float
    s: float
    rank: int
    projection_tail: float
    modulus_defect: float


def best_rank_approx(u, k, m_grid=DEFAULT_GRID, n_out=None, details=False):
    """r = u - s Π(φ) and err = ‖H_{u-r}‖; checks that H_r has numerical rank k."""
    n_out = u.n_modes if n_out is None else n_out
    if not is_power_of_two(m_grid) or m_grid < 2 * max(n_out, u.n_modes):
        raise ValidationError("grid must be a power of two ≥ 2·N")
    s_all = singular_values(u)
    if k == 0:
        r = HardySymbol(np.zeros(n_out, complex))
        res = Approximation(r, float(s_all[0]), float(s_all[0]), 0, 0.0, 0.0)
        return res if details else (res.r, res.err)
    pair = schmidt_pair(u, k)
    phi = unimodular_symbol(pair, m_grid)
    defect = float(np.max(np.abs(np.abs(phi.values[phi.mask]) - 1.0)))
    v = project_grid(GridValues(pair.s * phi.values), n_out)
    r = u.resized(n_out) - v
    err = float(np.linalg.norm(hankel_matrix(v.coeffs), 2))
    sv_r = np.linalg.svd(hankel_matrix(r.coeffs), compute_uv=False)
    rank = int(np.sum(sv_r > RANK_THRESHOLD * s_all[0]))
    if rank != k and v.tail_energy > (RANK_THRESHOLD * s_all[0]) ** 2:
        raise ResolutionError(
            f"Π(φ) has tail energy {v.tail_energy:.3g} beyond {n_out} modes; "
            f"increase the number of output modes")
    if rank != k:
        raise DegenerateConstructionError(
            f"H_r has numerical rank {rank}, expected {k} "
            f"(next singular value {sv_r[k] if sv_r.size > k else 0:.3g})")
    res = Approximation(r, err, pair.s, rank, v.tail_energy, defect)
    return res if details else (res.r, res.err)
