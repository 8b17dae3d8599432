import numpy as np
import pytest

from wwlab import multipliers as mult
from wwlab.benchmarks import composition_benchmark
from wwlab.grid import Grid2D, GridField
from wwlab.paradiff import (Symbol, conjugation_defect, para_remainder, poisson_bracket,
                            weyl_apply)
from wwlab.spectral import derivative, product

GRID = Grid2D(32, 4 * np.pi)


def smooth_field(seed, band=4):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    j1, j2 = GRID.index
    c *= (np.abs(j1) <= band) & (np.abs(j2) <= band)
    return GridField(GRID, c, False).real_part()


def rough_field(seed):
    rng = np.random.default_rng(seed)
    c = (rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))) * GRID.dealias_mask("2/3")
    return GridField(GRID, c, False).real_part()


@pytest.mark.parametrize("w, exact", [
    (mult.abs_zeta(), lambda z1, z2: (z1 / np.hypot(z1, z2), z2 / np.hypot(z1, z2))),
    (mult.Coord(0) * mult.AbsPower(-1),
     lambda z1, z2: (z2**2 / np.hypot(z1, z2) ** 3, -z1 * z2 / np.hypot(z1, z2) ** 3)),
])
def test_multiplier_derivatives_closed_form(w, exact):
    z1, z2 = np.array([0.7, -2.0, 3.1]), np.array([1.2, 0.4, -0.5])
    d0, d1 = exact(z1, z2)
    assert np.allclose(w.d(0)(z1, z2), d0, atol=1e-14)
    assert np.allclose(w.d(1)(z1, z2), d1, atol=1e-14)


def test_dispersion_multiplier_derivative_vs_sampled():
    lam = mult.dispersion()
    sampled = mult.Sampled(lambda a, b: np.sqrt(np.hypot(a, b) + np.hypot(a, b) ** 3))
    z1, z2 = np.array([0.5, 2.0]), np.array([0.3, -1.0])
    assert np.allclose(lam.d(0)(z1, z2), sampled.d(0)(z1, z2), atol=1e-9)


def test_rotation_of_radial_multiplier_vanishes():
    z1, z2 = np.array([0.5, 2.0]), np.array([0.3, -1.0])
    assert np.allclose(mult.dispersion().rotate()(z1, z2), 0.0, atol=1e-14)


def test_quantization_of_one_is_identity():
    f = rough_field(1)
    one = Symbol.multiplier(GRID, mult.one())
    assert np.allclose(weyl_apply(one, f, -2).coeffs, f.coeffs, atol=1e-12)


def test_x_independent_symbol_is_the_multiplier():
    f = rough_field(2)
    w = mult.dispersion()
    out = weyl_apply(Symbol.multiplier(GRID, w, order=1.5), f, -2)
    assert np.allclose(out.coeffs, f.coeffs * w(*GRID.k), atol=1e-12)


@pytest.mark.parametrize("path", ["shift", "direct"])
def test_real_symbol_gives_self_adjoint_operator(path):
    h = smooth_field(3)
    a = Symbol(GRID, [(h, mult.one()), (h * 0.3, mult.Coord(0) * mult.AbsPower(-1))])
    f, g = rough_field(4), rough_field(5)
    K = 15 if path == "direct" else None
    lhs = weyl_apply(a, f, -2, K=K).inner(g)
    rhs = f.inner(weyl_apply(a, g, -2, K=K))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_direct_and_shift_paths_agree():
    h = smooth_field(6)
    a = Symbol(GRID, [(h, mult.abs_zeta())], order=1)
    f = rough_field(7)
    assert np.allclose(weyl_apply(a, f, -2).coeffs, weyl_apply(a, f, -2, K=15).coeffs, atol=1e-11)


def test_callable_symbol_matches_separable():
    h = smooth_field(8)
    hp = h.physical()
    sep = Symbol(GRID, [(h, mult.abs_zeta())], order=1)
    call = Symbol(GRID, func=lambda x1, x2, z1, z2: hp * np.hypot(z1, z2), order=1)
    f = rough_field(9)
    assert np.allclose(weyl_apply(sep, f, -2).coeffs, weyl_apply(call, f, -2).coeffs, atol=1e-11)


def test_conjugation_identity():
    h = smooth_field(10)
    a = Symbol(GRID, [(h, mult.Coord(0))], order=1)
    f = GridField(GRID, rough_field(11).coeffs * (1 + 0.5j), False)
    assert conjugation_defect(a, f, -2) < 1e-11 * f.norm()


def test_poisson_bracket_of_function_and_coordinate():
    # {h(x), zeta_1} = d_1 h
    h = smooth_field(12)
    pb = poisson_bracket(Symbol.function(h), Symbol.multiplier(GRID, mult.Coord(0), order=1))
    vals = pb.evaluate(np.array(0.7), np.array(-0.2))
    assert np.allclose(vals, derivative(h, 0).physical(), atol=1e-12)
    assert pb.order == 0


def test_paraproduct_decomposition_is_exact_for_separated_frequencies():
    # a low-frequency times a high-frequency field is entirely paraproduct
    low = GridField.from_function(GRID, lambda x, y: np.cos(x))
    high = GridField.from_function(GRID, lambda x, y: np.cos(10 * x))
    r = para_remainder(low, high, chi_threshold=-2)
    assert r.norm() < 1e-12 * product(low, high).norm()


def test_first_order_composition_remainder_decays_like_one_over_frequency():
    out = composition_benchmark(n=128, L=np.pi, ks=range(3, 7), first_order=True)
    assert -1.3 < out["slope"] < -0.7
