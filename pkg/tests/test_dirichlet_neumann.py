import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwlab.benchmarks import band_limited_field, unit_state
from wwlab.dirichlet_neumann import (SlopeError, SurfaceState, amplitude_slope, boundary_fields,
                                     cubic_kernel, diagonal_variable, dn_cubic, dn_exact,
                                     dn_quadratic, dn_symbol, ell_values,
                                     linear_diagonal_variable, lowrank_split, paralin_defect,
                                     principal_symbol_values)
from wwlab.grid import Grid2D, GridField
from wwlab.spectral import derivative, product

GRID = Grid2D(32, 16 * np.pi)


def state(seed, eps_h=0.05, eps_phi=1.0):
    s = unit_state(GRID, seed, band=4)
    return SurfaceState(s.h * eps_h, s.phi * eps_phi)


def abs_d(f):
    return f.multiply(f.grid.kabs, real=True)


def test_flat_surface_gives_abs_gradient():
    phi = band_limited_field(GRID, 1, band=4)
    s = SurfaceState(GridField.zeros(GRID), phi)
    res = dn_exact(s)
    assert np.allclose(res.G.coeffs, abs_d(phi).coeffs, atol=1e-14)


def test_constant_potential_gives_zero():
    h = band_limited_field(GRID, 2, band=4) * 0.05
    c = np.zeros((32, 32), complex)
    c[0, 0] = 3.0
    G = dn_exact(SurfaceState(h, GridField(GRID, c, True))).G
    assert G.norm() < 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_self_adjoint_positive_zero_mean(seed):
    s = state(seed)
    psi = band_limited_field(GRID, 100 + seed, band=4)
    Gphi = dn_exact(s).G
    Gpsi = dn_exact(SurfaceState(s.h, psi)).G
    a, b = Gphi.inner(psi), s.phi.inner(Gpsi)
    assert abs(a - b) <= 1e-8 * abs(a)
    assert Gphi.inner(s.phi).real > 0
    assert abs(Gphi.mean()) <= 1e-8 * Gphi.sup()


def test_quadratic_term_matches_operator_form():
    # -div(h grad phi) - |D|(h |D| phi)
    s = state(3)
    h, phi = s.h, s.phi
    flux = [product(h, derivative(phi, j)) for j in (0, 1)]
    ref = -(derivative(flux[0], 0) + derivative(flux[1], 1)) - abs_d(product(h, abs_d(phi)))
    for mode in ("separable", "direct"):
        out = dn_quadratic(s, mode=mode, K=8)
        assert np.allclose(out.coeffs, ref.coeffs, atol=1e-13 * np.abs(ref.coeffs).max())


def test_cubic_term_forms_agree():
    s = state(4)
    direct = dn_cubic(s, mode="direct", K=8)
    op = dn_cubic(s, mode="operator")
    low = dn_cubic(s, mode="lowrank", K=8, R=12)
    assert (op - direct).norm() <= 1e-12 * direct.norm()
    assert (low - direct).norm() <= 1e-6 * direct.norm()


def test_lowrank_split_error_decreases_with_rank():
    errs = [lowrank_split(0.01, 10.0, R).error_bound for R in (8, 12, 16)]
    assert errs[0] > errs[1] > errs[2]


def test_cubic_kernel_symmetric_in_outer_frequencies():
    rng = np.random.default_rng(0)
    xi, eta, sig = (rng.normal(size=(20, 2)) for _ in range(3))
    k = cubic_kernel(xi, eta, sig)
    assert np.all(np.isfinite(k))


def test_expansion_hierarchy():
    s = state(5, eps_h=1e-2, eps_phi=1e-2)
    G = dn_exact(s).G
    lin = G - abs_d(s.phi)
    after2 = lin - dn_quadratic(s)
    after3 = after2 - dn_cubic(s, mode="operator")
    assert lin.norm() > 20 * after2.norm() > 20 * 20 * after3.norm()


def test_depth_resolution_converged():
    s = state(6, eps_h=0.1)
    ref = dn_exact(s, M=160).G
    err64 = (dn_exact(s, M=64).G - ref).norm()
    err96 = (dn_exact(s, M=96).G - ref).norm()
    assert err96 < err64
    assert err96 <= 1e-12 * ref.norm()


def test_steep_surface_rejected():
    h = band_limited_field(GRID, 7, band=4) * 3.0
    with pytest.raises(SlopeError):
        dn_exact(SurfaceState(h, h))


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 31), st.integers(0, 31))
def test_translation_equivariance(a, b):
    s = state(8)
    shift = lambda f: GridField.from_physical(GRID, np.roll(f.physical(), (a, b), axis=(0, 1)))
    G = dn_exact(s).G
    Gs = dn_exact(SurfaceState(shift(s.h), shift(s.phi))).G
    assert np.allclose(Gs.coeffs, shift(G).coeffs, atol=1e-12 * np.abs(G.coeffs).max())


def test_boundary_fields_linear_limit():
    defects = []
    for eps in (1e-2, 5e-3):
        s = state(9, eps_h=eps, eps_phi=eps)
        G = dn_exact(s).G
        bf = boundary_fields(s, G, chi_threshold=-2)
        defects.append((bf.B - abs_d(bf.omega)).norm())
    assert defects[0] / defects[1] == pytest.approx(4.0, rel=0.05)


def test_principal_symbol_flat_and_closed_form():
    s = state(10, eps_h=0.1)
    sym = dn_symbol(s)
    z = (np.array(0.7), np.array(-1.1))
    assert np.allclose(sym.principal.evaluate(*z), principal_symbol_values(s, *z), atol=1e-14)
    flat = dn_symbol(SurfaceState(GridField.zeros(GRID), s.phi))
    assert np.allclose(flat.principal.evaluate(*z), np.hypot(*z))
    assert np.allclose(flat.subprincipal.evaluate(*z), 0.0)


def test_subprincipal_closed_form_matches_separable_expansion():
    s = state(11, eps_h=0.05)
    closed = dn_symbol(s).subprincipal
    sep = dn_symbol(s, separable=True, P=12).subprincipal
    for z in [(1.5, 0.3), (-0.4, 2.2)]:
        a, b = closed.evaluate(*map(np.array, z)), sep.evaluate(*map(np.array, z))
        assert np.max(np.abs(a - b)) <= 1e-7 * np.max(np.abs(a))


def test_subprincipal_linear_part():
    # the subprincipal symbol is odd in h, so its linearization is accurate to third order
    diffs = []
    for eps in (0.02, 0.01):
        s = state(12, eps_h=eps)
        sym = dn_symbol(s)
        z = (np.array(1.3), np.array(0.6))
        diffs.append(np.max(np.abs(sym.subprincipal.evaluate(*z)
                                   - sym.linear_subprincipal.evaluate(*z))))
    assert diffs[0] / diffs[1] == pytest.approx(8.0, rel=0.1)


def test_ell_flat_surface():
    s = SurfaceState(GridField.zeros(GRID), band_limited_field(GRID, 13, band=4))
    assert np.allclose(ell_values(s, 0.6, -0.8), 2.0)


def test_paralin_and_diagonal_defects_are_quadratic():
    eps = np.array([2e-2, 1e-2])
    base = state(14, eps_h=1.0)
    para, diag = [], []
    for e in eps:
        s = base.scaled(e)
        G = dn_exact(s).G
        para.append(paralin_defect(s, G, chi_threshold=-2)[0].norm())
        U, bf = diagonal_variable(s, G, chi_threshold=-2)
        diag.append((U - linear_diagonal_variable(s, bf.omega)).norm())
    assert amplitude_slope(eps, para) > 1.8
    assert amplitude_slope(eps, diag) > 1.8
