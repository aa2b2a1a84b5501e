import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from szego.errors import AliasError, UnstableDenominatorError, ValidationError
from szego.hardy import (GridValues, HardySymbol, energy, eval_grid, from_rational, inner,
                         modulus_squared_modes, project_grid, shift, sobolev_norm,
                         szego_project)

complex_vectors = st.lists(
    st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=24
).map(lambda pairs: np.array([a + 1j * b for a, b in pairs]))


# ---- Szegő projection

def test_projection_keeps_nonnegative_modes():
    assert np.array_equal(szego_project([1, 2, 3]).coeffs, [2, 3])


def test_projection_of_zero():
    assert szego_project(np.zeros(5)).norm() == 0.0


def test_projection_of_cosine():
    # 2cosθ has modes 1 at ±1
    assert np.array_equal(szego_project([1, 0, 1]).coeffs, [0, 1])


def test_projection_rejects_even_length():
    with pytest.raises(ValidationError):
        szego_project([1, 2])


@given(complex_vectors)
def test_projection_idempotent_and_contractive(c):
    two_sided = np.concatenate([c[::-1], c[1:]]) if c.size % 2 else np.concatenate([c, c[1:]])
    p = szego_project(two_sided)
    again = szego_project(np.concatenate([np.zeros(p.n_modes - 1), p.coeffs]))
    assert np.array_equal(again.coeffs, p.coeffs)
    assert p.norm() <= np.linalg.norm(two_sided) + 1e-12


# ---- norms

@pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 3.7])
def test_sobolev_norm_of_constant(s):
    assert sobolev_norm(HardySymbol([1.0]), s) == 1.0


def test_sobolev_half_of_z():
    assert sobolev_norm(HardySymbol([0, 1]), 0.5) == pytest.approx(np.sqrt(2), abs=1e-15)


def test_l2_norm_of_geometric_symbol():
    u = HardySymbol(0.75 * 0.5 ** np.arange(64))
    assert sobolev_norm(u, 0) == pytest.approx(np.sqrt(0.75), abs=1e-15)


def test_negative_sobolev_index_rejected():
    with pytest.raises(ValidationError):
        sobolev_norm(HardySymbol([1.0]), -0.5)


def test_inner_is_linear_in_first_argument():
    u, v = HardySymbol([1, 1j]), HardySymbol([2, 1])
    assert inner(u * 1j, v) == pytest.approx(1j * inner(u, v))
    assert inner(u, v) == pytest.approx(2 + 1j)


# ---- grids

def test_eval_constant():
    assert np.allclose(eval_grid(HardySymbol([1.0]), 8).values, 1.0)


def test_eval_z_on_fourth_roots():
    assert np.allclose(eval_grid(HardySymbol([0, 1]), 4).values, [1, 1j, -1, -1j], atol=1e-15)


def test_eval_one_plus_z():
    assert np.allclose(eval_grid(HardySymbol([1, 1]), 4).values, [2, 1 + 1j, 0, 1 - 1j],
                       atol=1e-15)


@pytest.mark.parametrize("m", [3, 6, 4])
def test_eval_rejects_bad_grids(m):
    with pytest.raises(AliasError):
        eval_grid(HardySymbol(np.ones(3)), m)


def test_grid_requires_power_of_two():
    with pytest.raises(ValidationError):
        GridValues(np.ones(6))


@settings(max_examples=50)
@given(complex_vectors, st.integers(0, 3))
def test_parseval(c, extra):
    u = HardySymbol(c)
    m = 1 << (max(1, int(np.ceil(np.log2(2 * c.size)))) + extra)
    v = eval_grid(u, m).values
    total = np.sum(np.abs(c) ** 2)
    assert abs(np.sum(np.abs(v) ** 2) / m - total) <= 1e-12 * max(total, 1e-300)


def test_project_grid_roundtrip_and_tail():
    u = HardySymbol(0.9 ** np.arange(40))
    v = project_grid(eval_grid(u, 128), 16)
    assert np.allclose(v.coeffs, u.coeffs[:16], atol=1e-14)
    assert v.tail_energy == pytest.approx(np.sum(np.abs(u.coeffs[16:]) ** 2), rel=1e-12)


def test_shift_and_adjoint():
    u = HardySymbol([1, 2, 3])
    assert np.array_equal(shift(u).coeffs, [0, 1, 2, 3])
    assert np.array_equal(shift(u, -1).coeffs, [2, 3])


# ---- rational symbols

def test_geometric_rational():
    u = from_rational([0.75], [1, -0.5], 8)
    assert np.allclose(u.coeffs, 0.75 * 0.5 ** np.arange(8), atol=1e-16, rtol=0)
    assert u.tail_energy == pytest.approx(0.75 ** 2 * 0.25 ** 8 / 0.75, rel=1e-10)


def test_polynomial_rational():
    u = from_rational([0, 1], [1], 4)
    assert np.array_equal(u.coeffs, [0, 1, 0, 0])
    assert u.tail_energy == 0.0


def test_root_inside_disc_rejected():
    # B = (1 - z/0.9)(1 + z/3) has a root at 0.9
    b = np.convolve([1, -1 / 0.9], [1, 1 / 3])
    with pytest.raises(UnstableDenominatorError):
        from_rational([1], b, 8)


def test_denominator_must_start_at_one():
    with pytest.raises(ValidationError):
        from_rational([1], [2, -1], 8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rational_times_denominator_gives_numerator(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, 5))
    poles = 0.8 * np.sqrt(rng.uniform(0, 1, q)) * np.exp(2j * np.pi * rng.uniform(0, 1, q))
    b = np.array([1.0 + 0j])
    for p in poles:
        b = np.convolve(b, [1, -p])
    a = rng.normal(size=q) + 1j * rng.normal(size=q)
    u = from_rational(a, b, 64)
    back = np.convolve(u.coeffs, b)[:64]
    expected = np.zeros(64, complex)
    expected[:a.size] = a
    assert np.max(np.abs(back - expected)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


# ---- energy

def test_energy_of_constant():
    assert energy(HardySymbol([2.0 - 1j]), 8) == pytest.approx(abs(2 - 1j) ** 4 / 4, rel=1e-14)


def test_energy_of_zero():
    assert energy(HardySymbol([0.0]), 8) == 0.0


def test_energy_of_one_plus_z():
    # mean (2 + 2cosθ)² = 6
    assert energy(HardySymbol([1, 1]), 8) == pytest.approx(1.5, rel=1e-14)


def test_energy_grid_check():
    with pytest.raises(AliasError):
        energy(HardySymbol(np.ones(4)), 8)


@settings(max_examples=40, deadline=None)
@given(complex_vectors)
def test_energy_matches_j_derivative_form(c):
    u = HardySymbol(c)
    m = 1 << int(np.ceil(np.log2(8 * c.size)))
    b = modulus_squared_modes(u)
    n = u.n_modes
    pi_b = b[n - 1:]  # Π(|u|²)
    closed = 0.25 * (2 * np.sum(np.abs(pi_b) ** 2) - u.norm() ** 4)
    e = energy(u, m)
    assert abs(e - closed) <= 1e-10 * max(e, 1e-300)


def test_json_roundtrip():
    u = HardySymbol([0.1 + 0.2j, -3e-17, 5.0])
    assert np.array_equal(HardySymbol.from_json(u.to_json()).coeffs, u.coeffs)
