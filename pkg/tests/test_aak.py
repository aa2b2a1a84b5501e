import numpy as np
import pytest

from szego import BlaschkeProduct, HardySymbol, SpectralData, inverse
from szego.aak import (SchmidtPair, best_rank_approx, schmidt_pair, schmidt_residuals,
                       singular_values, unimodular_symbol)
from szego.blaschke import fit_from_boundary
from szego.errors import IllConditionedError, ResolutionError, ValidationError
from szego.hankel import hankel_matrix
from szego.hankel import build_pair, spectral_clusters
from szego.hardy import GridValues, eval_grid, from_rational

SMALL = (np.sqrt(2) - 1) / 2


@pytest.fixture(scope="module")
def rank_three():
    # K-side product of degree 1 puts σ = 0.5 into the H-spectrum once
    sd = SpectralData([1.0, 0.5, 0.1], [BlaschkeProduct(0.3), BlaschkeProduct(1.0, [0.3]),
                                        BlaschkeProduct(2.0)])
    u = inverse(sd, 2048, 512)
    assert u.tail_energy < 1e-24
    return u


# ---- Schmidt pairs

def test_pair_of_constant():
    c = 0.6 + 0.8j
    p = schmidt_pair(HardySymbol([c, 0, 0]), 0)
    assert p.s == pytest.approx(1.0)
    assert abs(abs(p.h.coeffs[0]) - 1) < 1e-14
    # f = H_u(h)/s = c conj(h_0)
    assert p.f.coeffs[0] == pytest.approx(c * np.conj(p.h.coeffs[0]))


def test_pair_second_value():
    p = schmidt_pair(HardySymbol([1, 0.5]), 1)
    assert p.s == pytest.approx(SMALL, rel=1e-12)


def test_pair_on_plateau_left_edge():
    p = schmidt_pair(HardySymbol([0, 1]), 0)
    assert p.s == pytest.approx(1.0) and np.linalg.norm(p.h.coeffs) == pytest.approx(1.0)


def test_pair_inside_plateau_rejected():
    with pytest.raises(ValidationError):
        schmidt_pair(HardySymbol([0, 1]), 1)


def test_pair_out_of_range():
    with pytest.raises(ValidationError):
        schmidt_pair(HardySymbol([1, 0.5]), 2)


def test_pair_at_zero_value_rejected():
    with pytest.raises(ValidationError):
        schmidt_pair(HardySymbol([1, 0, 0, 0]), 1)


def test_pair_residuals(rank_three):
    for k in range(3):
        p = schmidt_pair(rank_three, k)
        assert np.linalg.norm(p.h.coeffs) == pytest.approx(np.linalg.norm(p.f.coeffs))
        assert max(schmidt_residuals(rank_three, p)) < 1e-8 * p.s


# ---- unimodular symbol

def test_unimodular_for_constant():
    c = 0.6 + 0.8j
    phi = unimodular_symbol(schmidt_pair(HardySymbol([c, 0, 0]), 0), 64)
    # h is a unit constant e^{ia}, f = c e^{-ia}, so φ = c/|c| whatever a is
    assert np.allclose(phi.values, c, atol=1e-14)


def test_unimodular_swapped_pair():
    p = schmidt_pair(HardySymbol([1, 0.5, 0.2, 0]), 1)
    swapped = SchmidtPair(p.f, p.h, p.s, p.k)
    phi = unimodular_symbol(p, 64).values
    psi = unimodular_symbol(swapped, 64).values
    assert np.max(np.abs(np.abs(psi) - 1)) < 1e-6
    assert np.allclose(psi, 1 / np.conj(phi), atol=1e-12)


def test_unimodular_second_value():
    phi = unimodular_symbol(schmidt_pair(HardySymbol([1, 0.5]), 1), 64)
    assert np.max(np.abs(np.abs(phi.values) - 1)) < 1e-6


def test_unimodular_ill_conditioned():
    # h vanishes on a whole arc when it is a trigonometric spike
    h = HardySymbol(np.r_[np.ones(8), np.zeros(8)] / np.sqrt(8))
    z = HardySymbol(np.zeros(16))
    with pytest.raises(IllConditionedError):
        unimodular_symbol(SchmidtPair(h, z, 1.0, 0), 1024, drop_rel=0.5)


# ---- best approximation

def test_rank_zero():
    r, err = best_rank_approx(HardySymbol([1, 0.5]), 0, 16)
    assert not r.coeffs.any() and err == pytest.approx((np.sqrt(2) + 1) / 2)


def test_rank_one_of_linear_polynomial():
    # φ has a pole at 1 + √2, so Π(φ) needs a few dozen modes
    res = best_rank_approx(HardySymbol(np.r_[1, 0.5, np.zeros(46)]), 1, 256, details=True)
    assert res.err == pytest.approx(SMALL, rel=1e-7)
    assert res.rank == 1


def test_short_output_reports_truncation():
    with pytest.raises(ResolutionError):
        best_rank_approx(HardySymbol(np.r_[1, 0.5, np.zeros(6)]), 1, 256)


def test_rank_two_of_rank_three(rank_three):
    sv = singular_values(rank_three)
    assert sv[:3] == pytest.approx([1.0, 0.5, 0.1], rel=1e-10)
    res = best_rank_approx(rank_three, 2, 4096, details=True)
    assert res.err == pytest.approx(0.1, rel=1e-7)
    assert res.rank == 2
    # ‖H_{u-r}‖ directly
    gap = np.linalg.norm(hankel_matrix((rank_three - res.r).coeffs), 2)
    assert gap == pytest.approx(0.1, rel=1e-7)


def test_plateau_index_rejected():
    with pytest.raises(ValidationError):
        best_rank_approx(HardySymbol([0, 1, 0, 0]), 1, 16)


def test_no_rank_k_symbol_beats_bound(rank_three):
    rng = np.random.default_rng(11)
    n = rank_three.n_modes
    bound = singular_values(rank_three)[2]
    for _ in range(50):
        poles = 0.9 * np.sqrt(rng.uniform(0, 1, 2)) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
        numer = rng.normal(size=2) + 1j * rng.normal(size=2)
        r = from_rational(numer, np.poly(poles), n)
        best = np.linalg.norm(hankel_matrix((rank_three - r).coeffs), 2)
        assert best >= bound * (1 - 1e-9)
    r, err = best_rank_approx(rank_three, 2, 4096)
    assert err <= bound * (1 + 1e-7)


def _reflection_fit_residual(num, den, degree):
    """Smallest relative singular value of P ↦ num·z^d·conj(P)(1/z) - den·P on the grid.

    Zero when num/den = P(z) / (z^d conj(P)(1/z)) for some polynomial P of degree d.
    Unknowns are the real and imaginary parts of the coefficients of P.
    """
    m = num.size
    z = np.exp(2j * np.pi * np.arange(m) / m)
    cols = []
    for k in range(degree + 1):
        for unit in (1.0, 1j):
            # P = unit·z^k, so z^d conj(P)(1/z) = conj(unit)·z^{d-k}
            col = num * np.conj(unit) * z ** (degree - k) - den * unit * z ** k
            cols.append(np.r_[col.real, col.imag])
    a = np.array(cols).T
    sv = np.linalg.svd(a, compute_uv=False)
    return sv[-1] / sv[0]


def test_top_cluster_structure():
    # H-side product of degree 1 gives λ_0 multiplicity 2
    sd = SpectralData([1.0, 0.4], [BlaschkeProduct(0.5, [0.35 - 0.2j]), BlaschkeProduct(0.0)])
    u = inverse(sd, 1024, 256)
    sv = singular_values(u)
    assert sv[0] == pytest.approx(1.0) and sv[1] == pytest.approx(1.0)
    gamma = hankel_matrix(u.coeffs)
    p = schmidt_pair(u, 0)
    num = eval_grid(HardySymbol(p.s * p.h.coeffs), 1024).values
    den = eval_grid(HardySymbol(gamma @ np.conj(p.h.coeffs)), 1024).values
    assert _reflection_fit_residual(num, den, 1) < 1e-10
    assert _reflection_fit_residual(num, den, 0) > 1e-3


def test_top_cluster_projection_is_blaschke():
    # for the projection u_ρ the quotient has its zero inside the disc
    zero = 0.35 - 0.2j
    sd = SpectralData([1.0, 0.4], [BlaschkeProduct(0.5, [zero]), BlaschkeProduct(0.0)])
    u = inverse(sd, 1024, 256)
    c = spectral_clusters(build_pair(u), "H", u=u)[0]
    num = eval_grid(HardySymbol(c.s * c.u_proj.coeffs), 1024).values
    den = eval_grid(HardySymbol(hankel_matrix(u.coeffs) @ np.conj(c.u_proj.coeffs)), 1024).values
    psi = fit_from_boundary(GridValues(num / den), 1)
    assert abs(psi.zeros[0] - zero) < 1e-8
