"""Finite Blaschke products Ψ(z) = e^{-iψ} ∏ (z - p_j)/(1 - conj(p_j) z).

With P(z) = ∏(z - p_j) monic and D(z) = z^d conj(P)(1/z) = ∏(1 - conj(p_j) z)
we have Ψ = e^{-iψ} P/D and D(0) = 1.  Polynomials are stored with
ascending coefficients unless stated otherwise.
"""

from dataclasses import dataclass
import json

import numpy as np

from . import _io
from .errors import DegreeMismatchError, StructureError, ValidationError

TWO_PI = 2.0 * np.pi
BOUNDARY_MARGIN = 1e-12


def wrap_angle(angle):
    a = float(np.mod(angle, TWO_PI))
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    angle: float = 0.0
    zeros: np.ndarray = ()

    def __post_init__(self):
        z = np.array(self.zeros, dtype=complex).ravel()
        if z.size and np.max(np.abs(z)) > 1.0 - BOUNDARY_MARGIN:
            raise ValidationError(
                f"Blaschke zero of modulus {np.max(np.abs(z)):.17g} is not inside the open disc")
        z.setflags(write=False)
        object.__setattr__(self, "zeros", z)
        object.__setattr__(self, "angle", wrap_angle(self.angle))

    @property
    def degree(self):
        return self.zeros.size

    @property
    def phase(self):
        """The unimodular constant e^{-iψ}."""
        return np.exp(-1j * self.angle)

    def __call__(self, z):
        return evaluate(self, z)

    def rotated(self, factor_angle):
        """Ψ multiplied by e^{i·factor_angle} (zeros unchanged)."""
        return BlaschkeProduct(self.angle - factor_angle, self.zeros)

    def to_json(self):
        return {"angle": self.angle, "zeros": _io.complex_pairs(self.zeros)}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(float(obj["angle"]), _io.pairs_to_complex(obj.get("zeros", [])))


def evaluate(psi, z):
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, psi.phase, dtype=complex)
    for p in psi.zeros:
        out = out * (z - p) / (1.0 - np.conj(p) * z)
    return out if out.ndim else complex(out)


def monic_numerator(psi):
    """Ascending coefficients of P(z) = ∏(z - p_j)."""
    return np.poly(psi.zeros)[::-1].astype(complex) if psi.degree else np.ones(1, complex)


def normalized_denominator(psi):
    """Ascending coefficients of D(z) = ∏(1 - conj(p_j) z); D(0) = 1."""
    # P has descending coefficients (1, a_1, ..., a_d); D = Σ conj(a_k) z^k
    return np.conj(np.poly(psi.zeros)).astype(complex) if psi.degree else np.ones(1, complex)


def polyval(coeffs, z):
    """Horner evaluation for ascending coefficients."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for c in coeffs[::-1]:
        out = out * z + c
    return out


def schur_cohn(a):
    """True iff z^d + a_1 z^{d-1} + ... + a_d has all roots in the open disc.

    Recursive reduction: the polynomial is Schur iff |a_d| < 1 and the
    degree d-1 polynomial with coefficients
    b_k = (a_k - a_d conj(a_{d-k})) / (1 - |a_d|²) is Schur.
    """
    a = [complex(x) for x in np.atleast_1d(np.asarray(a, dtype=complex))]
    while a:
        d = len(a)
        last = a[-1]
        if not abs(last) < 1.0:
            return False
        scale = 1.0 - abs(last) ** 2
        # a_0 = 1 implicitly; a[k-1] holds a_k
        a = [(a[k - 1] - last * np.conj(a[d - k - 1] if d - k >= 1 else 1.0)) / scale
             for k in range(1, d)]
    return True


def from_monic(a_desc_tail, angle=0.0):
    """Blaschke product with numerator z^d + a_1 z^{d-1} + ... + a_d."""
    a = np.atleast_1d(np.asarray(a_desc_tail, dtype=complex))
    zeros = np.roots(np.concatenate([[1.0], a])) if a.size else np.zeros(0, complex)
    return BlaschkeProduct(angle, zeros)


def fit_from_boundary(ratio, degree, tol=1e-8):
    """Recover a Blaschke product of the given degree from boundary samples.

    Solves min ‖P(ζ_m) - r_m Q(ζ_m)‖ over (P, Q) of degree ≤ d through the
    smallest right singular vector, checks that Q is proportional to the
    reversed conjugate of P, and reads the angle off the leading coefficient.
    Samples with ``ratio.mask`` False are ignored.
    """
    if degree < 0:
        raise ValidationError("degree must be nonnegative")
    zeta = ratio.points()
    r = ratio.values
    if ratio.mask is not None:
        zeta, r = zeta[ratio.mask], r[ratio.mask]
    if zeta.size < 2 * degree + 2:
        raise ValidationError("not enough boundary samples for the requested degree")

    if degree == 0:
        const = np.mean(r)
        psi = BlaschkeProduct(-np.angle(const))
    else:
        vander = zeta[:, None] ** np.arange(degree + 1)[None, :]
        system = np.hstack([vander, -r[:, None] * vander])
        _, _, vh = np.linalg.svd(system, full_matrices=False)
        null = np.conj(vh[-1])
        p_coef, q_coef = null[:degree + 1], null[degree + 1:]
        if abs(q_coef[0]) < 1e-8 * np.max(np.abs(q_coef)):
            raise StructureError("fitted denominator vanishes at the origin")
        p_coef, q_coef = p_coef / q_coef[0], q_coef / q_coef[0]
        # Blaschke structure: D = Σ conj(a_k) z^k  ⇔  monic P has a_k = conj(D_k)
        monic_desc = np.conj(q_coef)
        lead = p_coef[degree]
        expected = lead * monic_desc[::-1]
        mismatch = np.max(np.abs(p_coef - expected)) / max(1.0, np.max(np.abs(p_coef)))
        if abs(abs(lead) - 1.0) > max(1e3 * tol, 1e-6) or mismatch > max(1e3 * tol, 1e-6):
            raise StructureError(
                f"fitted quotient is not a Blaschke product (|lead|={abs(lead):.3g}, "
                f"mismatch={mismatch:.3g})")
        if not schur_cohn(monic_desc[1:]):
            raise StructureError("fitted numerator has a root outside the open disc")
        zeros = np.roots(monic_desc)
        if np.max(np.abs(zeros)) > 1.0 - BOUNDARY_MARGIN:
            raise StructureError("fitted zero too close to the unit circle")
        psi = BlaschkeProduct(0.0, zeros)
        # angle from the best unimodular constant, more robust than the lead alone
        const = np.mean(r * np.conj(evaluate(psi, zeta)))
        psi = BlaschkeProduct(-np.angle(const), zeros)

    residual = float(np.max(np.abs(evaluate(psi, zeta) - r)))
    if residual > tol:
        raise DegreeMismatchError(
            f"degree-{degree} Blaschke fit leaves boundary residual {residual:.3g} > {tol:.3g}")
    return psi


def boundary_distance(psi_a, psi_b, m_grid=256):
    """max over the circle of |Ψ_a - Ψ_b|; the comparison used for equality."""
    zeta = np.exp(2j * np.pi * np.arange(m_grid) / m_grid)
    return float(np.max(np.abs(evaluate(psi_a, zeta) - evaluate(psi_b, zeta))))
