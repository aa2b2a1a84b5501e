import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_blaschke
from szego.blaschke import (BlaschkeProduct, boundary_distance, evaluate, fit_from_boundary,
                            monic_numerator, normalized_denominator, polyval, schur_cohn)
from szego.errors import DegreeMismatchError, StructureError, ValidationError
from szego.hardy import GridValues, circle_points

seeds = st.integers(0, 2**32 - 1)


def test_constant_product():
    assert BlaschkeProduct(np.pi / 2)(0.3 + 0.2j) == pytest.approx(-1j)


def test_identity_product():
    assert BlaschkeProduct(0.0, [0.0])(1j) == pytest.approx(1j)


def test_single_factor_at_origin():
    assert BlaschkeProduct(0.0, [0.5])(0.0) == pytest.approx(-0.5)


def test_angle_wrapped():
    assert BlaschkeProduct(-np.pi / 2).angle == pytest.approx(1.5 * np.pi)
    assert BlaschkeProduct(2 * np.pi).angle == 0.0


def test_boundary_zero_rejected():
    with pytest.raises(ValidationError):
        BlaschkeProduct(0.0, [1.0 - 1e-13])


def test_json_roundtrip():
    psi = BlaschkeProduct(1.25, [0.3 - 0.1j, -0.2j])
    back = BlaschkeProduct.from_json(psi.to_json())
    assert back.angle == psi.angle and np.array_equal(back.zeros, psi.zeros)


@settings(max_examples=50)
@given(seeds)
def test_unimodular_on_circle(seed):
    psi = random_blaschke(np.random.default_rng(seed))
    vals = psi(circle_points(256))
    assert np.max(np.abs(np.abs(vals) - 1)) < 1e-10


# ---- Schur–Cohn

def test_schur_cohn_examples():
    assert schur_cohn([-0.5])
    assert schur_cohn([0, 0.25])
    assert not schur_cohn([-2])


def test_schur_cohn_constant_polynomial():
    assert schur_cohn([])


def test_schur_cohn_against_roots():
    rng = np.random.default_rng(2024)
    agree = 0
    for _ in range(1000):
        d = int(rng.integers(1, 7))
        # mix of clearly stable, clearly unstable and borderline polynomials
        scale = rng.choice([0.5, 1.0, 1.5])
        roots = scale * np.sqrt(rng.uniform(0, 1, d)) * np.exp(2j * np.pi * rng.uniform(0, 1, d))
        margin = 1 - np.max(np.abs(roots))
        if abs(margin) < 1e-6:
            continue
        a = np.poly(roots)[1:]
        assert schur_cohn(a) == (margin > 0), (roots, a)
        agree += 1
    assert agree > 990


# ---- normalized denominator

def test_denominator_trivial():
    assert np.array_equal(normalized_denominator(BlaschkeProduct()), [1])


def test_denominator_one_zero():
    assert np.allclose(normalized_denominator(BlaschkeProduct(0, [0.5])), [1, -0.5])


def test_denominator_two_zeros():
    assert np.allclose(normalized_denominator(BlaschkeProduct(0, [0.5, -0.5])), [1, 0, -0.25])


@settings(max_examples=50)
@given(seeds)
def test_quotient_form_matches_product(seed):
    psi = random_blaschke(np.random.default_rng(seed))
    z = circle_points(128)
    quotient = psi.phase * polyval(monic_numerator(psi), z) / polyval(normalized_denominator(psi), z)
    assert np.max(np.abs(quotient - evaluate(psi, z))) < 1e-12


# ---- fitting

def _samples(psi, m=64):
    return GridValues(psi(circle_points(m)))


def test_fit_constant():
    psi = fit_from_boundary(GridValues(np.full(16, -1j)), 0)
    assert psi.degree == 0 and psi.angle == pytest.approx(np.pi / 2)


def test_fit_identity():
    psi = fit_from_boundary(GridValues(circle_points(16)), 1)
    assert abs(psi.zeros[0]) < 1e-12
    assert boundary_distance(psi, BlaschkeProduct(0.0, [0.0])) < 1e-12


def test_fit_single_factor():
    z = circle_points(32)
    psi = fit_from_boundary(GridValues((z - 0.5) / (1 - 0.5 * z)), 1)
    assert psi.zeros[0] == pytest.approx(0.5, abs=1e-12)
    assert boundary_distance(psi, BlaschkeProduct(0.0, [0.5])) < 1e-12


def test_fit_wrong_degree_raises():
    target = BlaschkeProduct(0.4, [0.5, -0.3j])
    with pytest.raises(DegreeMismatchError):
        fit_from_boundary(_samples(target), 1)


def test_fit_non_blaschke_data_raises():
    z = circle_points(32)
    with pytest.raises((StructureError, DegreeMismatchError)):
        fit_from_boundary(GridValues(z * (1 + 0.3 * z ** 2)), 2)


def test_fit_ignores_masked_samples():
    target = BlaschkeProduct(1.0, [0.4 + 0.2j])
    vals = np.array(target(circle_points(64)))
    mask = np.ones(64, bool)
    vals[::7] = 99.0
    mask[::7] = False
    psi = fit_from_boundary(GridValues(vals, mask), 1)
    assert boundary_distance(psi, target) < 1e-10


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_fit_inverts_evaluation(seed):
    rng = np.random.default_rng(seed)
    target = random_blaschke(rng, max_degree=4, radius=0.85)
    psi = fit_from_boundary(_samples(target, 128), target.degree)
    got = np.sort_complex(psi.zeros)
    want = np.sort_complex(target.zeros)
    # match zeros greedily; sorting can pair differently when real parts tie
    for w in want:
        i = np.argmin(np.abs(got - w))
        assert abs(got[i] - w) < 1e-8
        got = np.delete(got, i)
    da = np.angle(np.exp(1j * (psi.angle - target.angle)))
    assert abs(da) < 1e-8
