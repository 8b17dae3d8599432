import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwlab.dispersion import (DomainError, SignTriple, frequency, frequency_deriv,
                              frequency_inverse, inflection_radius, nondegeneracy,
                              nondegeneracy_gradient_form, nondegeneracy_radial, phase,
                              phase_gradients, resonant_sphere_radius)

# values computed with mpmath at 30 digits
ORACLE_G0 = [0.67391890641392617553, 1.0862594899797128665, 0.0,
             4.4515741752426469641, -28.701166547987585986]
ORACLE_G1 = [2.0597671439071177558, 1.699221200975631971, 0.65798117097032928311]


def test_inflection_radius_closed_form():
    assert inflection_radius() == pytest.approx(np.sqrt((2 * np.sqrt(3) - 3) / 3), abs=1e-15)
    assert inflection_radius() == pytest.approx(0.39331989319, abs=1e-10)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_at_inflection_radius(order):
    assert frequency_deriv(inflection_radius(), order) == pytest.approx(
        ORACLE_G0[order], abs=1e-12)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_values_at_resonant_sphere(order):
    g1 = resonant_sphere_radius()
    val = frequency(g1) if order == 0 else frequency_deriv(g1, order)
    assert val == pytest.approx(ORACLE_G1[order], abs=1e-13)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("r", [0.05, 0.39, 1.0, 3.7, 40.0])
def test_derivatives_match_complex_step(order, r):
    h = 1e-30
    lower = frequency if order == 1 else (lambda x: frequency_deriv(x, order - 1))
    fd = np.imag(lower(np.array(r + 1j * h))) / h
    assert frequency_deriv(r, order) == pytest.approx(fd, rel=1e-12, abs=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        frequency(-1.0)
    with pytest.raises(DomainError):
        frequency_deriv(0.0)
    with pytest.raises(DomainError):
        frequency_inverse(-0.5)
    with pytest.raises(ValueError):
        frequency_deriv(1.0, 5)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e4))
def test_inverse_roundtrip(r):
    assert frequency_inverse(frequency(r)) == pytest.approx(r, rel=1e-9)


def test_inverse_small_arguments_keep_relative_accuracy():
    y = np.array([1e-8, 1e-5, 1e-3])
    assert np.allclose(frequency(frequency_inverse(y)), y, rtol=1e-13, atol=0)


def test_sign_triple_parsing():
    assert SignTriple.parse("+-+") == (1, -1, 1)
    assert SignTriple.parse([1, 1, -1]) == (1, 1, -1)
    with pytest.raises(ValueError):
        SignTriple.parse("+*+")
    with pytest.raises(ValueError):
        SignTriple.parse("++")


def test_spacetime_resonance_at_half_frequency():
    g1 = resonant_sphere_radius()
    xi = np.array([g1, 0.0])
    assert phase("+++", xi, xi / 2) == pytest.approx(0.0, abs=1e-14)
    _, ge, _ = phase_gradients("+++", xi, xi / 2)
    assert np.allclose(ge, 0.0, atol=1e-14)


@pytest.mark.parametrize("signs", ["+++", "++-", "+-+", "-++", "+--"])
def test_phase_gradients_match_finite_differences(signs, rng):
    xi, eta = rng.normal(size=2) * 2, rng.normal(size=2) * 2
    gx, ge, om = phase_gradients(signs, xi, eta)
    h = 1e-6
    for j in range(2):
        e = np.eye(2)[j] * h
        assert (phase(signs, xi + e, eta) - phase(signs, xi - e, eta)) / (2 * h) == \
            pytest.approx(gx[j], abs=1e-7)
        assert (phase(signs, xi, eta + e) - phase(signs, xi, eta - e)) / (2 * h) == \
            pytest.approx(ge[j], abs=1e-7)
    perp = np.array([-eta[1], eta[0]])
    assert om == pytest.approx(perp @ ge, abs=1e-12)


@pytest.mark.parametrize("signs", ["+++", "+-+", "++-"])
def test_nondegeneracy_forms_agree(signs, rng):
    xi = rng.normal(size=(50, 2)) * 2
    eta = rng.normal(size=(50, 2)) * 2
    a = nondegeneracy(signs, xi, eta)
    b = nondegeneracy_gradient_form(signs, xi, eta)
    c = nondegeneracy_radial(signs, np.hypot(*xi.T), np.hypot(*eta.T), np.hypot(*(xi - eta).T))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)
    assert np.allclose(a, c, rtol=1e-9, atol=1e-12)


def test_nondegeneracy_matches_hessian_definition(rng):
    # mixed Hessian applied to the rotated gradients, by central differences
    xi, eta = np.array([1.3, 0.4]), np.array([0.2, -0.9])
    gx, ge, _ = phase_gradients("+++", xi, eta)
    h = 1e-4
    H = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            ei, ej = np.eye(2)[i] * h, np.eye(2)[j] * h
            H[i, j] = (phase("+++", xi + ei, eta + ej) - phase("+++", xi + ei, eta - ej)
                       - phase("+++", xi - ei, eta + ej) + phase("+++", xi - ei, eta - ej)) / (4 * h * h)
    rot = lambda v: np.array([-v[1], v[0]])
    assert nondegeneracy("+++", xi, eta) == pytest.approx(rot(gx) @ H @ rot(ge), rel=1e-5)
