"""Symbols in the Hardy space L²₊ of the circle.

A symbol is stored by its first N Taylor coefficients û(0..N-1).  Grid
evaluation is a zero-padded inverse DFT on M equispaced points, with
values[m] = Σ_k û(k) e^{2πikm/M}.
"""

from dataclasses import dataclass, field
import json

import numpy as np
from scipy.signal import lfilter

from . import _io
from .errors import AliasError, UnstableDenominatorError, ValidationError

DEFAULT_MODES = 256
DEFAULT_GRID = 1024


@dataclass(frozen=True, eq=False)
class HardySymbol:
    """Truncated nonnegative-mode Fourier series.

    ``tail_energy`` records the discarded Σ_{k≥N}|û(k)|² when the symbol was
    obtained by truncating something longer (0 when nothing was dropped).
    """

    coeffs: np.ndarray
    tail_energy: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValidationError("a symbol needs at least one mode")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "tail_energy", float(self.tail_energy))

    @property
    def n_modes(self):
        return self.coeffs.size

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def resized(self, n_modes):
        """Zero-pad or truncate to ``n_modes`` (dropped energy goes to the tail)."""
        c = self.coeffs
        if n_modes >= c.size:
            return HardySymbol(np.concatenate([c, np.zeros(n_modes - c.size, complex)]),
                               self.tail_energy)
        dropped = float(np.sum(np.abs(c[n_modes:]) ** 2))
        return HardySymbol(c[:n_modes], self.tail_energy + dropped)

    def __add__(self, other):
        a, b = _common(self, other)
        return HardySymbol(a + b)

    def __sub__(self, other):
        a, b = _common(self, other)
        return HardySymbol(a - b)

    def __mul__(self, scalar):
        return HardySymbol(self.coeffs * complex(scalar), self.tail_energy * abs(scalar) ** 2)

    __rmul__ = __mul__

    def __neg__(self):
        return HardySymbol(-self.coeffs, self.tail_energy)

    def to_json(self):
        return {"coeffs": _io.complex_pairs(self.coeffs)}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(_io.pairs_to_complex(obj["coeffs"]))


def _common(a, b):
    n = max(a.n_modes, b.n_modes)
    return a.resized(n).coeffs, b.resized(n).coeffs


@dataclass(frozen=True, eq=False)
class GridValues:
    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        if not is_power_of_two(v.size):
            raise AliasError(f"grid of {v.size} samples is not a power of two")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.mask is not None:
            m = np.array(self.mask, dtype=bool).ravel()
            if m.size != v.size:
                raise ValidationError("mask length differs from number of samples")
            m.setflags(write=False)
            object.__setattr__(self, "mask", m)

    @property
    def m_grid(self):
        return self.values.size

    def points(self):
        return circle_points(self.m_grid)


def circle_points(m_grid):
    return np.exp(2j * np.pi * np.arange(m_grid) / m_grid)


def is_power_of_two(m):
    m = int(m)
    return m > 0 and (m & (m - 1)) == 0


def szego_project(two_sided):
    """Keep the modes k ≥ 0 of a vector indexed -K..K (length 2K+1)."""
    b = np.asarray(two_sided, dtype=complex).ravel()
    if b.size % 2 != 1:
        raise ValidationError("two-sided coefficient vector must have odd length 2K+1")
    return HardySymbol(b[b.size // 2:])


def sobolev_norm(u, s):
    """(Σ_ℓ (1+ℓ)^{2s} |û(ℓ)|²)^{1/2}."""
    if s < 0:
        raise ValidationError("Sobolev index must be nonnegative")
    weights = (1.0 + np.arange(u.n_modes)) ** (2.0 * s)
    return float(np.sqrt(np.sum(weights * np.abs(u.coeffs) ** 2)))


def inner(u, v):
    """(u|v) = Σ û(k) conj(v̂(k))."""
    a, b = _common(u, v)
    return complex(np.vdot(b, a))


def eval_grid(u, m_grid=DEFAULT_GRID):
    if not is_power_of_two(m_grid):
        raise AliasError(f"grid size {m_grid} is not a power of two")
    if m_grid < 2 * u.n_modes:
        raise AliasError(f"grid size {m_grid} < 2*{u.n_modes} modes")
    padded = np.zeros(m_grid, dtype=complex)
    padded[:u.n_modes] = u.coeffs
    return GridValues(np.fft.ifft(padded) * m_grid)


def grid_coefficients(values):
    """All M discrete Fourier coefficients (index k means mode k mod M)."""
    v = values.values if isinstance(values, GridValues) else np.asarray(values, dtype=complex)
    return np.fft.fft(v) / v.size


def project_grid(values, n_modes):
    """Szegő projection of grid samples, truncated to ``n_modes``.

    Modes in [M/2, M) are read as negative frequencies and discarded.  The
    energy of nonnegative modes beyond ``n_modes`` is stored as the tail.
    """
    c = grid_coefficients(values)
    half = c.size // 2
    if n_modes > half:
        raise AliasError(f"cannot resolve {n_modes} modes on a grid of {c.size}")
    tail = float(np.sum(np.abs(c[n_modes:half]) ** 2))
    return HardySymbol(c[:n_modes], tail)


def from_rational(numer, denom, n_modes=DEFAULT_MODES):
    """Taylor coefficients of A/B at 0 by long division.

    ``numer`` and ``denom`` are ascending coefficient lists.  B(0) must be 1
    and B must have no root in the closed disc.  The energy of the modes
    beyond ``n_modes`` is obtained by continuing the recursion until the terms
    are negligible, and is stored as ``tail_energy``.
    """
    a = np.atleast_1d(np.asarray(numer, dtype=complex))
    b = np.trim_zeros(np.atleast_1d(np.asarray(denom, dtype=complex)), "b")
    if b.size == 0 or abs(b[0] - 1.0) > 1e-14:
        raise ValidationError("denominator must satisfy B(0) = 1")
    if b.size > 1:
        roots = np.roots(b[::-1])
        if np.min(np.abs(roots)) <= 1.0:
            raise UnstableDenominatorError(
                f"denominator root of modulus {np.min(np.abs(roots)):.6g} inside closed disc")
        decay = 1.0 / np.min(np.abs(roots))
    else:
        decay = 0.0
    coeffs = _long_division(a, b, n_modes)
    tail = 0.0
    if decay > 0:
        # run the recursion on until the geometric envelope is far below round-off
        extra = n_modes + a.size + int(min(1e6, np.ceil(2 * 40.0 / -np.log10(decay))))
        longer = _long_division(a, b, extra)
        tail = float(np.sum(np.abs(longer[n_modes:]) ** 2))
    elif a.size > n_modes:
        tail = float(np.sum(np.abs(a[n_modes:]) ** 2))
    return HardySymbol(coeffs, tail)


def _long_division(a, b, n):
    impulse = np.zeros(n, dtype=complex)
    impulse[0] = 1.0
    return lfilter(a, b, impulse)


def energy(u, m_grid=DEFAULT_GRID):
    """E(u) = ¼ · mean of |u|⁴ over the circle."""
    if m_grid < 4 * u.n_modes:
        raise AliasError(f"energy needs a grid of at least 4*{u.n_modes} points")
    v = eval_grid(u, m_grid).values
    return float(np.mean(np.abs(v) ** 4) / 4.0)


def modulus_squared_modes(u, m_grid=None):
    """Two-sided coefficients b̂(-(N-1)..N-1) of |u|², computed alias-free."""
    n = u.n_modes
    if m_grid is None:
        m_grid = _next_pow2(4 * n)
    v = eval_grid(u, m_grid).values
    c = grid_coefficients(np.abs(v) ** 2)
    return np.concatenate([c[m_grid - (n - 1):], c[:n]]) if n > 1 else c[:1]


def shift(u, k=1):
    """Multiplication by z^k (k ≥ 0) or the adjoint shift S*^{|k|} (k < 0)."""
    c = u.coeffs
    if k >= 0:
        return HardySymbol(np.concatenate([np.zeros(k, complex), c]))
    return HardySymbol(c[-k:] if -k < c.size else np.zeros(1, complex))


def _next_pow2(n):
    p = 1
    while p < n:
        p *= 2
    return p
