import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwlab import resonance as res
from wwlab.dispersion import (DomainError, frequency, frequency_deriv, inflection_radius,
                              phase, phase_gradients, resonant_sphere_radius)


def test_bisect_vectorized_and_bracket_check():
    roots = res.bisect(lambda x: x**2 - np.array([2.0, 3.0]), [0.0, 0.0], [2.0, 2.0])
    assert np.allclose(roots, np.sqrt([2.0, 3.0]), rtol=0, atol=4e-16)
    with pytest.raises(DomainError):
        res.bisect(lambda x: x**2 + 1, 0.0, 1.0)


def test_spacetime_radius_is_sqrt2():
    assert abs(res.spacetime_resonant_radius() - np.sqrt(2)) < 1e-10


def test_spacetime_radius_unique_on_scan():
    x = np.linspace(1e-3, 50, 200_001)
    f = frequency(x) - 2 * frequency(x / 2)
    assert np.count_nonzero(np.sign(f[:-1]) != np.sign(f[1:])) == 1


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3934, 200.0))
def test_conjugate_radius_properties(a):
    b = res.conjugate_radius(a)
    g0 = inflection_radius()
    assert 0 < b <= g0
    assert frequency_deriv(b) == pytest.approx(frequency_deriv(a), rel=1e-10)
    if a > g0 * 1.01:
        assert abs(res.bas1_residual(a, b, cleared=True)) < 1e-8
        assert 1 / 9 < a * b <= g0**2


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 50.0))
def test_sum_resonance_partner(a):
    b = res.sum_resonance_partner(a)
    assert 4 / 9 <= a * b <= 0.5
    assert abs(res.sum_resonance_defect(a, b)) < 1e-10 * frequency(a + b)
    assert abs(res.bas2_residual(a, b, cleared=True)) < 1e-8 * max(1, (a - b) ** 2)


def test_sum_resonance_sign_outside_product_window():
    a = np.array([0.5, 2.0, 7.0])
    assert np.all(res.sum_resonance_defect(a, 0.6 / a) > 0)
    assert np.all(res.sum_resonance_defect(a, 0.4 / a) < 0)


def test_conjugate_radius_domain():
    with pytest.raises(DomainError):
        res.conjugate_radius(0.2)
    assert res.conjugate_radius(inflection_radius()) == inflection_radius()


@pytest.mark.parametrize("signs", ["++", "--", "+-", "-+"])
@pytest.mark.parametrize("alpha", [0.3, 1.0, 5.0])
def test_critical_points_have_zero_gradient(signs, alpha):
    xi = alpha * np.array([np.cos(0.7), np.sin(0.7)])
    triple = "+" + signs
    for p in res.critical_points(signs, xi):
        _, ge, _ = phase_gradients(triple, xi, p.eta)
        assert np.hypot(*ge) < 1e-9 * max(1, frequency_deriv(alpha))


def test_critical_points_count_changes_at_twice_inflection_radius():
    g0 = inflection_radius()
    assert len(res.critical_points("++", [1.9 * g0, 0])) == 1
    assert len(res.critical_points("++", [2.5 * g0, 0])) == 3
    with pytest.raises(DomainError):
        res.critical_points("++", [0.0, 0.0])


def test_certify_g1_finds_root_near_1_94():
    rep = res.certify_positive("G1", (1.7, 3.0), 2000)
    assert rep.verdict == "sign change found"
    assert any(abs(r - 1.94) < 0.01 for r in rep.roots)


@pytest.mark.parametrize("cid", ["F1", "F2"])
def test_f_functions_positive(cid):
    g0 = inflection_radius()
    assert res.certify_positive(cid, (2 * g0, 1.0), 2000).verdict == "positive"


def test_unknown_certification_id():
    with pytest.raises(ValueError):
        res.cert_function("G7", 1.0)


def test_abs_sum_certifications_positive():
    g1 = resonant_sphere_radius()
    for cid in ("|G1|+|G11|", "|G1|+|G12|"):
        assert res.certify_positive(cid, (g1 + 0.3, 3.0), 500).min_value > 0


def test_depletion_factor_vanishes_on_perpendicular_and_far_pairs():
    xi = np.array([[1.0, 0.0], [1.0, 0.0]])
    eta = np.array([[0.0, 1.0], [-0.999, 0.0]])
    d = res.depletion_factor(xi, eta, chi_threshold=-2)
    # equal lengths make xi-eta orthogonal to xi+eta; the second pair has a huge ratio
    assert np.allclose(d, 0.0, atol=1e-15)
    assert res.depletion_factor([1.0, 0.0], [0.99, 0.0], -2) == pytest.approx(1.0)


def test_energy_multiplier_symmetry_and_zero_on_equal_lengths():
    xi, eta = np.array([1.3, 0.2]), np.array([0.4, -0.8])
    assert res.energy_multiplier(xi, eta, 4) == pytest.approx(res.energy_multiplier(eta, xi, 4))
    assert res.energy_multiplier(xi, xi[::-1], 4) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        res.energy_multiplier(xi, eta, 0)


def test_sublevel_volume_shrinks_with_eps():
    est = res.sublevel_volume("+++", 0, 0, 0, [0.2, 0.1, 0.05], 40_000, seed=3, n_xi=8)
    m = [e.measure for e in est]
    assert m[0] > m[1] > m[2] > 0
    with pytest.raises(ValueError):
        res.sublevel_volume("+++", 0, 0, 0, -1.0, 10)


def test_sublevel_volume_seed_determinism():
    a = res.sublevel_volume("+-+", 1, 0, 1, 0.1, 20_000, seed=5, n_xi=4)
    b = res.sublevel_volume("+-+", 1, 0, 1, 0.1, 20_000, seed=5, n_xi=4)
    assert a == b


def test_cubic_resonance_at_exact_configuration():
    g1 = resonant_sphere_radius()
    xi = np.array([g1 / 2, 0.0])
    sig = xi.copy()
    eta = 2 * sig
    pos, gx, grad_rest, ph = res.cubic_resonance_defect(xi, eta, sig)
    assert pos == 0.0


def test_iterated_system_jacobian_matches_finite_differences(rng):
    v = rng.normal(size=6)
    for pat in [(-1, 1, 1, 1), (1, -1, 1, -1)]:
        _, J = res._iterated_system(v, pat)
        h = 1e-6
        fd = np.column_stack([(res._iterated_system(v + h * e, pat)[0]
                               - res._iterated_system(v - h * e, pat)[0]) / (2 * h)
                              for e in np.eye(6)])
        assert np.allclose(J, fd, atol=1e-7)


def test_iterated_resonance_small_sample():
    out = res.iterated_resonance_check(1e-4, 40, seed=2)
    assert out["outcome"] == "ok"
    assert set(out["patterns"]) == {"-+++"}


def test_iterated_resonance_rejects_large_kappa():
    with pytest.raises(ValueError):
        res.iterated_resonance_check(1e-2, 10)


def test_resonant_angle_curves_solve_the_phase():
    out = res.resonant_angle_curves("+-+", 12, np.geomspace(0.1, 10, 5))
    ok = ~np.isnan(out["theta1"])
    assert ok.any()
    assert np.nanmax(out["residual"]) < 1e-8
    with pytest.raises(ValueError):
        res.resonant_angle_curves("+++", 5, [1.0])


def test_nondegeneracy_floor_positive():
    out = res.nondegeneracy_floor(n_samples=20_000, seed=1)
    assert out["min"] > 0
