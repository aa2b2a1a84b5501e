"""Cubic Szegő flow i∂_t u = Π(|u|²u) and the J^y hierarchy.

Exact evolution acts on spectral data by rotating the Blaschke products;
direct evolution integrates the equations with classical RK4 in coefficient
space.  Both produce ``TrajectoryRecord`` objects with the same invariants.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _io, _kernels
from .blaschke import BlaschkeProduct
from .errors import DriftError, StepSizeError, ValidationError
from .hankel import (DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE, build_pair,
                     dominance_split, spectral_clusters)
from .hardy import (DEFAULT_GRID, HardySymbol, energy, eval_grid, grid_coefficients,
                    is_power_of_two, sobolev_norm)
from .nlft import SpectralData, forward, inverse

DRIFT_LIMIT = 1e-4


# --------------------------------------------------------------------------
# exact flows on spectral data

def evolve_exact(sd, t):
    """Ψ_r ↦ e^{i(-1)^r s_r² t} Ψ_r (r 1-based), i.e. ψ_r ↦ ψ_r - (-1)^r s_r² t."""
    rates = szego_frequencies(sd)
    return SpectralData(sd.s, [p.rotated(w * t) for p, w in zip(sd.psi, rates)])


def szego_frequencies(sd):
    """Rotation rates (-1)^r s_r² of Ψ_r under the cubic Szegő flow."""
    r = np.arange(1, sd.n + 1)
    return (-1.0) ** r * sd.s ** 2


def j_product(sd, y):
    """J^y = ∏ (1 + y σ_k²)/(1 + y ρ_j²) (σ_q = 0 when n is odd)."""
    return float(np.prod((1 + y * sd.sigma ** 2) / (1 + y * sd.rho ** 2)))


def hierarchy_frequencies(sd, y):
    """ω_r = (-1)^{r-1} 2y J^y / (1 + y s_r²)."""
    j = j_product(sd, y)
    r = np.arange(1, sd.n + 1)
    return (-1.0) ** (r - 1) * 2 * y * j / (1 + y * sd.s ** 2)


def hierarchy_evolve_exact(sd, y, t):
    if y <= 0:
        raise ValidationError("y must be positive")
    omegas = hierarchy_frequencies(sd, y)
    return SpectralData(sd.s, [p.rotated(w * t) for p, w in zip(sd.psi, omegas)])


@dataclass(frozen=True, eq=False)
class HierarchyEval:
    y: float
    j_value: float
    w: HardySymbol
    j_product: float = None
    omegas: np.ndarray = None


def resolvent_one(u, y):
    """w = (I + y H_u²)^{-1} 1 on the truncated space."""
    pair = build_pair(u)
    n = u.n_modes
    rhs = np.zeros(n, complex)
    rhs[0] = 1.0
    return np.linalg.solve(np.eye(n) + y * pair.h_squared(), rhs), pair


def j_y(u, y, sd=None):
    """J^y(u) = ((I + yH_u²)^{-1} 1 | 1) by linear solve, plus the product form if sd given."""
    if y <= 0:
        raise ValidationError("y must be positive")
    w, _ = resolvent_one(u, y)
    prod = omegas = None
    if sd is not None:
        prod = j_product(sd, y)
        omegas = hierarchy_frequencies(sd, y)
    return HierarchyEval(float(y), float(w[0].real), HardySymbol(w), prod, omegas)


# --------------------------------------------------------------------------
# right-hand sides

def _check_grid(u, m_grid, factor):
    if not is_power_of_two(m_grid) or m_grid < factor * u.n_modes:
        raise ValidationError(f"grid must be a power of two ≥ {factor}·N = {factor * u.n_modes}")


def szego_rhs(u, m_grid=DEFAULT_GRID):
    """-i Π(|u|²u) truncated to the modes of u."""
    _check_grid(u, m_grid, 4)
    return HardySymbol(-1j * _kernels.cubic_term(u.coeffs, m_grid))


def _szego_field(c, m_grid):
    return -1j * _kernels.cubic_term(c, m_grid)


def hierarchy_rhs(u, y, m_grid=DEFAULT_GRID):
    """2iy · w · H_u(w) with w = (I + yH_u²)^{-1} 1, truncated to the modes of u."""
    _check_grid(u, m_grid, 2)
    return HardySymbol(_hierarchy_field(u.coeffs, y, m_grid))


def _hierarchy_field(c, y, m_grid):
    u = HardySymbol(c)
    w, pair = resolvent_one(u, y)
    hw = pair.gamma @ np.conj(w)
    n = c.size
    wv = eval_grid(HardySymbol(w), m_grid).values
    hv = eval_grid(HardySymbol(hw), m_grid).values
    prod = grid_coefficients(wv * hv)[:n]
    return 2j * y * prod


# --------------------------------------------------------------------------
# trajectories

def spectral_values(u, tol_cluster=DEFAULT_TOL_CLUSTER, tol_dom=DEFAULT_TOL_DOMINANCE):
    """Interlaced dominant singular values s_1 > s_2 > ... of u (no Blaschke fitting)."""
    pair = build_pair(u)
    ch = spectral_clusters(pair, "H", tol_cluster, u)
    ck = spectral_clusters(pair, "K", tol_cluster, u)
    return dominance_split(u, ch, ck, tol_dom, tol_match=max(tol_cluster, 1e-9)).s


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    times: np.ndarray
    states: tuple
    mass: np.ndarray
    energy: np.ndarray
    h_half: np.ndarray
    singular_values: tuple
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size != len(self.states):
            raise ValidationError("one state per time is required")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        object.__setattr__(self, "times", t)

    @property
    def final(self):
        return self.states[-1]

    def csv(self, include_modes=0):
        n_s = max((len(s) for s in self.singular_values), default=0)
        header = ["time", "mass", "energy", "h_half_norm"] + [f"s_{r + 1}" for r in range(n_s)]
        header += [f"abs_mode_{k}" for k in range(include_modes)]
        rows = []
        for i, t in enumerate(self.times):
            s = list(self.singular_values[i]) + [float("nan")] * (n_s - len(self.singular_values[i]))
            row = [float(t), float(self.mass[i]), float(self.energy[i]), float(self.h_half[i])]
            row += [float(x) for x in s]
            row += [float(abs(c)) for c in self.states[i].coeffs[:include_modes]]
            rows.append(["" if isinstance(v, float) and np.isnan(v) else v for v in row])
        return _io.csv_text(header, rows)


def _observe(u, m_energy, track_spectrum):
    e = energy(u, max(m_energy, _next_pow2(4 * u.n_modes)))
    s = tuple(spectral_values(u)) if track_spectrum else ()
    return u.norm() ** 2, e, sobolev_norm(u, 0.5), s


def _record(times, states, track_spectrum, m_grid, extra=None):
    obs = [_observe(u, m_grid, track_spectrum) for u in states]
    return TrajectoryRecord(np.array(times), tuple(states), np.array([o[0] for o in obs]),
                            np.array([o[1] for o in obs]), np.array([o[2] for o in obs]),
                            tuple(o[3] for o in obs), extra or {})


def exact_trajectory(sd, times, m_grid=DEFAULT_GRID, n_out=256, track_spectrum=True):
    """Sample the exact cubic Szegő flow at the given times."""
    states = [inverse(evolve_exact(sd, t), max(m_grid, 4 * n_out), n_out) for t in times]
    return _record(times, states, track_spectrum, m_grid)


def _rk4(field_fn, u0, T, dt, stride, on_sample):
    n_steps = int(round(T / dt))
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValidationError(f"T={T} must be a positive multiple of dt={dt}")
    c = np.array(u0.coeffs, dtype=complex)
    times, states = [0.0], [u0]
    on_sample(0.0, u0)
    for step in range(1, n_steps + 1):
        k1 = field_fn(c)
        k2 = field_fn(c + 0.5 * dt * k1)
        k3 = field_fn(c + 0.5 * dt * k2)
        k4 = field_fn(c + dt * k3)
        c = c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % stride == 0 or step == n_steps:
            t = step * dt
            state = HardySymbol(c.copy())
            on_sample(t, state)
            times.append(t)
            states.append(state)
    return times, states


def _step_check(u0, dt, m_grid):
    peak = np.max(np.abs(eval_grid(u0, m_grid).values))
    if dt * peak ** 2 > 0.1:
        raise StepSizeError(f"dt·max|u0|² = {dt * peak ** 2:.3g} exceeds 0.1")


def _drift_guard(reference):
    ref = {}

    def check(t, state):
        vals = {"mass": state.norm() ** 2, "h_half": sobolev_norm(state, 0.5)}
        if not ref:
            ref.update(vals)
            return
        for key, v in vals.items():
            base = ref[key]
            drift = abs(v - base) / base if base else abs(v)
            if drift > DRIFT_LIMIT:
                raise DriftError(f"{key} drifted by {drift:.3g} (relative) at t={t:.6g}")
        if reference is not None:
            reference(t, state)
    return check


def integrate_direct(u0, T, dt=1e-3, m_grid=DEFAULT_GRID, stride=None, track_spectrum=True):
    """Classical RK4 for i∂_t u = Π(|u|²u) with 4× zero-padded products."""
    if not is_power_of_two(m_grid) or m_grid < 4 * u0.n_modes:
        raise ValidationError("grid must be a power of two ≥ 4N")
    _step_check(u0, dt, m_grid)
    n_steps = int(round(T / dt))
    stride = stride or max(1, n_steps // 10)
    times, states = _rk4(lambda c: _szego_field(c, m_grid), u0, T, dt, stride,
                         _drift_guard(None))
    return _record(times, states, track_spectrum, m_grid)


def integrate_hierarchy_direct(u0, y, T, dt=1e-3, m_grid=DEFAULT_GRID, stride=None,
                               track_spectrum=True):
    """RK4 for du/dt = 2iy·w^y·H_u(w^y), w^y recomputed at every stage."""
    if y <= 0:
        raise ValidationError("y must be positive")
    if not is_power_of_two(m_grid) or m_grid < 4 * u0.n_modes:
        raise ValidationError("grid must be a power of two ≥ 4N")
    _step_check(u0, dt, m_grid)
    n_steps = int(round(T / dt))
    stride = stride or max(1, n_steps // 10)
    times, states = _rk4(lambda c: _hierarchy_field(c, y, m_grid), u0, T, dt, stride,
                         _drift_guard(None))
    jvals = np.array([j_y(s, y).j_value for s in states])
    return _record(times, states, track_spectrum, m_grid, {"j_y": jvals, "y": y})


def invariant_report(traj):
    """Maximum relative drift of every logged conserved quantity."""

    def drift(arr):
        arr = np.asarray(arr, dtype=float)
        base = arr[0]
        scale = abs(base) if base != 0 else 1.0
        return float(np.max(np.abs(arr - base)) / scale)

    out = {"mass": drift(traj.mass), "energy": drift(traj.energy), "h_half": drift(traj.h_half)}
    sv = traj.singular_values
    if sv and len(sv[0]):
        lengths = {len(s) for s in sv}
        if len(lengths) != 1:
            out["singular_values"] = float("inf")
        else:
            mat = np.array(sv)
            out["singular_values"] = max(drift(mat[:, r]) for r in range(mat.shape[1]))
    if "j_y" in traj.extra:
        out["j_y"] = drift(traj.extra["j_y"])
    return out


def measure_phase_rates(traj, **forward_opts):
    """Least-squares rate ω_r with Ψ_r(t) ≈ e^{iω_r t}Ψ_r(0), from sampled states.

    The stored angle satisfies ψ_r(t) = ψ_r(0) - ω_r t; samples must be dense
    enough for unwrapping (|ω_r|·Δt < π).
    """
    angles = np.array([[p.angle for p in forward(s, **forward_opts).psi] for s in traj.states])
    unwrapped = np.unwrap(angles, axis=0)
    t = traj.times
    tc = t - t.mean()
    slopes = (tc @ (unwrapped - unwrapped.mean(axis=0))) / (tc @ tc)
    return -slopes


def l2_distance(u, v):
    return (u - v).norm()


def _next_pow2(n):
    p = 1
    while p < n:
        p *= 2
    return p
