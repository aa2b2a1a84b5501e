import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_spectral_data, resolved_synthesis
from szego import BlaschkeProduct, SpectralData
from szego.errors import ResolutionError
from szego.exact import RationalSymbol, rational_form
from szego.experiments import TurbulenceParams, default_base, turbulence_rational
from szego.hardy import sobolev_norm

seeds = st.integers(0, 2**32 - 1)
ONE = BlaschkeProduct()


def _hankel_spectrum(sym, shifted=False):
    """Singular values of H_u (or K_u) for u = Q_0 + Σ c_i/(1 - w_i z), exactly.

    On the span of k_i = 1/(1 - w_i z), H_u(k_j) = Σ_i c_i/(1 - w_i conj(w_j)) k_i,
    so H_u² acts by A·conj(A).  K_u = H_{S*u} and S*k_i = w_i k_i.
    """
    quot, res, winv = sym.expansion
    assert len(quot) <= 1
    c, w = list(res), list(winv)
    if quot and not shifted:
        c.append(quot[0])
        w.append(mp.mpc(0))
    if shifted:
        c = [ci * wi for ci, wi in zip(c, w)]
    n = len(c)
    with mp.workdps(sym.dps):
        a = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                a[i, j] = c[i] / (1 - w[i] * mp.conj(w[j]))
        abar = mp.matrix([[mp.conj(a[i, j]) for j in range(n)] for i in range(n)])
        ev = mp.eig(a * abar)[0]
        return sorted((float(mp.sqrt(abs(x))) for x in ev), reverse=True)


def test_geometric_symbol():
    sym = rational_form(SpectralData([1, 0.5], [ONE, ONE]), 50)
    assert np.allclose(sym.modes(8), 0.75 * 0.5 ** np.arange(8), atol=1e-15)
    assert sym.pole_distance() == pytest.approx(1.0)


def test_polynomial_symbol():
    sym = rational_form(SpectralData([1.0], [BlaschkeProduct(0.0, [0.0])]), 50)
    assert np.allclose(sym.modes(4), [0, 1, 0, 0], atol=1e-40)
    assert sym.pole_distance() == float("inf")
    assert sym.sobolev_norm(0.5) == pytest.approx(np.sqrt(2))


def test_evaluate_matches_series():
    sym = rational_form(SpectralData([1.2, 0.6, 0.2], [BlaschkeProduct(0.4, [0.3j]), ONE,
                                                       BlaschkeProduct(2.0)]), 60)
    z = 0.4 - 0.3j
    series = np.sum(sym.modes(200) * z ** np.arange(200))
    assert sym.evaluate(z) == pytest.approx(series, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_matches_grid_inverse(seed):
    rng = np.random.default_rng(seed)
    sd = random_spectral_data(rng, int(rng.integers(1, 7)))
    syn = resolved_synthesis(sd, (256, 512, 1024))
    if syn is None:
        return
    n = syn.symbol.n_modes
    exact = rational_form(sd, 60).modes(n)
    assert np.max(np.abs(exact - syn.symbol.coeffs)) < 1e-12 * max(1, np.abs(exact).max())


@pytest.mark.parametrize("s", [0.0, 0.5, 0.75, 1.3])
def test_sobolev_norm_closed_form(s):
    # direct partial sum as an independent oracle; poles at distance ≈ 0.1
    sd = SpectralData([1.0, 0.7, 0.35, 0.2], [BlaschkeProduct(0.2, [0.4]), ONE,
                                              BlaschkeProduct(1.1), BlaschkeProduct(3.0, [-0.5j])])
    sym = rational_form(sd, 50)
    assert sym.pole_distance() > 0.05
    k = np.arange(4000)
    direct = np.sum((1 + k) ** (2 * s) * np.abs(sym.modes(4000)) ** 2)
    assert float(sym.sobolev_norm_sq(s)) == pytest.approx(direct, rel=1e-12)


def test_sobolev_norm_grid_consistency():
    sd = SpectralData([1.0, 0.5, 0.25], [ONE, BlaschkeProduct(0.3, [0.2]), ONE])
    syn = resolved_synthesis(sd)
    assert sobolev_norm(syn.symbol, 0.75) == pytest.approx(rational_form(sd).sobolev_norm(0.75),
                                                           rel=1e-12)


def test_extra_angles_equal_rotated_data():
    sd = SpectralData([1.0, 0.6, 0.3], [BlaschkeProduct(0.1, [0.2]), ONE, BlaschkeProduct(2.0)])
    shift = [0.3, -1.2, 5.0]
    a = rational_form(sd, 60, [mp.mpf(x) for x in shift])
    b = rational_form(sd.with_angles([p.angle + x for p, x in zip(sd.psi, shift)]), 60)
    assert np.allclose(a.modes(32), b.modes(32), atol=1e-14)


def test_huge_angles_reduce_exactly():
    sd = SpectralData([1.0, 0.5], [ONE, ONE])
    with mp.workdps(150):
        big = mp.mpf(10) ** 30 * 2 * mp.pi
        a = rational_form(sd, 100, [big, big + 1])
    b = rational_form(sd.with_angles([0.0, 1.0]), 100)
    assert np.allclose(a.modes(16), b.modes(16), atol=1e-14)


def test_coincident_poles_rejected():
    sym = RationalSymbol([mp.mpc(1)], [mp.mpc(1), mp.mpc(-1), mp.mpc(0.25)], 50)
    with pytest.raises(ResolutionError):
        sym.expansion


def test_turbulence_spectrum_exact():
    # poles sit within 4e-4 of the circle: only the exact path resolves this symbol
    p = TurbulenceParams.default(default_base(), 2, 0.01, 0.01)
    sym = turbulence_rational(p)
    assert 0 < sym.pole_distance() < 1e-3
    sd = p.spectral_data()
    h = _hankel_spectrum(sym)
    k = _hankel_spectrum(sym, shifted=True)
    assert h == pytest.approx(sorted(sd.rho, reverse=True), rel=1e-14)
    k_pos = [x for x in k if x > 1e-30]
    assert k_pos == pytest.approx(sorted(sd.s[1::2], reverse=True), rel=1e-14)
