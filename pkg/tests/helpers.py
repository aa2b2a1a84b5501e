"""Random symbols and spectral data shared by the test modules."""

import numpy as np

from szego import BlaschkeProduct, SpectralData, from_rational
from szego.flow import spectral_values
from szego.nlft import synthesize


def random_rational(rng, rank, n_modes=256, max_pole=0.8, min_gap=1e-2):
    """Taylor data of A/B with ``rank`` poles 1/p, |p| ≤ max_pole.

    Redraws until the dominant singular values are separated by ``min_gap``
    (relative).  The gap is read from the Hankel spectrum, not from the
    transform under test.
    """
    while True:
        radii = max_pole * np.sqrt(rng.uniform(0, 1, rank))
        poles = radii * np.exp(2j * np.pi * rng.uniform(0, 1, rank))
        denom = np.array([1.0 + 0j])
        for p in poles:
            denom = np.convolve(denom, [1.0, -p])
        numer = rng.normal(size=rank) + 1j * rng.normal(size=rank)
        u = from_rational(numer, denom, n_modes)
        s = spectral_values(u)
        if s.size > 1 and np.min((s[:-1] - s[1:]) / s[:-1]) < min_gap:
            continue
        return u


def random_spectral_data(rng, n, max_degree=2, min_gap=5e-2, zero_radius=0.7):
    while True:
        s = np.sort(rng.uniform(0.05, 1.5, n))[::-1]
        if n < 2 or np.min((s[:-1] - s[1:]) / s[:-1]) >= min_gap:
            break
    psi = []
    for _ in range(n):
        d = int(rng.integers(0, max_degree + 1))
        zeros = zero_radius * np.sqrt(rng.uniform(0, 1, d)) * np.exp(2j * np.pi * rng.uniform(0, 1, d))
        psi.append(BlaschkeProduct(rng.uniform(0, 2 * np.pi), zeros))
    return SpectralData(s, psi)


def resolved_synthesis(sd, sizes=(256, 512), tail=1e-20):
    """Synthesis on the first mode count whose tail energy is below ``tail``, else None."""
    for n in sizes:
        syn = synthesize(sd, 4 * n, n)
        if syn.tail_energy < tail:
            return syn
    return None


def random_blaschke(rng, max_degree=4, radius=0.9):
    d = int(rng.integers(0, max_degree + 1))
    zeros = radius * np.sqrt(rng.uniform(0, 1, d)) * np.exp(2j * np.pi * rng.uniform(0, 1, d))
    return BlaschkeProduct(rng.uniform(0, 2 * np.pi), zeros)


def band_limited(rng, n_active, n_modes=64):
    c = np.zeros(n_modes, complex)
    c[:n_active] = rng.normal(size=n_active) + 1j * rng.normal(size=n_active)
    return c


# criterion number -> PASS/FAIL line, filled by test_acceptance
ACCEPTANCE = {}
