"""Weyl-quantized paradifferential operators on a periodic grid.

For a symbol ``a(x, zeta)`` with x-Fourier coefficients ``a~(theta, zeta)``
the operator acts on coefficients by

    (T_a f)^(xi) = sum_eta chi(|xi - eta| / |xi + eta|) a~(xi - eta, (xi + eta)/2) f^(eta)

with ``chi`` the low-frequency cutoff at ``2**chi_threshold`` and the
convention that the ratio is 0 on the diagonal ``xi = eta``.  Output modes
that leave the grid are dropped, never wrapped.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cutoffs
from .grid import GridField, hermitian_part
from .multipliers import Coord, Multiplier, as_multiplier, one
from .spectral import (derivative, lp_project, product, rotation_derivative)

DEFAULT_CHI = -20


class Symbol:
    """Symbol ``a(x, zeta)`` given as a sum of products or as a callable.

    Parameters
    ----------
    grid : Grid2D
    terms : list of (GridField, Multiplier)
        Separable representation ``sum_m c_m(x) w_m(zeta)``.
    func : callable, optional
        ``func(x1, x2, z1, z2)`` returning an ``(n, n)`` array for scalar
        ``zeta``; it must broadcast over ``zeta`` arrays of shape
        ``(B, 1, 1)``.  Used only by the direct quantization path.
    order : float
        Declared growth order in ``zeta``.
    """

    def __init__(self, grid, terms=None, func=None, order=0.0, name=""):
        if terms is None and func is None:
            raise ValueError("need separable terms or a callable")
        self.grid = grid
        self.terms = []
        for c, w in terms or []:
            if c.grid != grid:
                raise ValueError("symbol coefficient on a different grid")
            self.terms.append((c, as_multiplier(w)))
        self.func = func
        self.order = float(order)
        self.name = name

    # constructors
    @classmethod
    def multiplier(cls, grid, w, order=0.0, name=""):
        """x-independent symbol ``w(zeta)``."""
        return cls(grid, [(_const_field(grid, 1.0), w)], order=order, name=name)

    @classmethod
    def function(cls, f, name=""):
        """zeta-independent symbol ``f(x)``."""
        return cls(f.grid, [(f, one())], order=0.0, name=name)

    @property
    def separable(self):
        return bool(self.terms) and self.func is None

    def evaluate(self, z1, z2):
        """Physical-space values ``a(x, zeta)`` on the grid.

        Scalar ``zeta`` gives an ``(n, n)`` array; arrays of shape
        ``(B, 1, 1)`` give a stack ``(B, n, n)``.
        """
        if self.func is not None:
            x1, x2 = self.grid.x
            return self.func(x1, x2, z1, z2)
        out = 0.0
        for c, w in self.terms:
            out = out + c.physical() * w(np.array(z1), np.array(z2))
        return out

    def check_order(self, radii=(1e2, 1e3, 1e4), tol=0.1):
        """Sampled growth exponent of the multipliers, compared with ``order``."""
        if not self.separable:
            return True
        r = np.asarray(radii, float)
        ang = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        worst = -np.inf
        for _, w in self.terms:
            vals = [np.max(np.abs(w(ri * np.cos(ang), ri * np.sin(ang)))) for ri in r]
            if min(vals) > 0:
                worst = max(worst, np.polyfit(np.log(r), np.log(vals), 1)[0])
        return worst <= self.order + tol

    # algebra
    def __add__(self, other):
        return Symbol(self.grid, self.terms + other.terms, order=max(self.order, other.order))

    def scale(self, s):
        return Symbol(self.grid, [(c * s, w) for c, w in self.terms], order=self.order)

    def __mul__(self, other):
        """Pointwise product ``a(x, zeta) b(x, zeta)`` (x-products dealiased)."""
        if not (self.separable and other.separable):
            raise ValueError("products need separable symbols")
        terms = []
        for ca, wa in self.terms:
            for cb, wb in other.terms:
                terms.append((product(ca, cb), wa * wb))
        return Symbol(self.grid, terms, order=self.order + other.order)

    def dx(self, j):
        return Symbol(self.grid, [(derivative(c, j), w) for c, w in self.terms], order=self.order)

    def dzeta(self, j):
        return Symbol(self.grid, [(c, w.d(j)) for c, w in self.terms], order=self.order - 1)

    def rotate_x(self):
        """``(x1 d/dx2 - x2 d/dx1) a``."""
        return Symbol(self.grid, [(rotation_derivative(c), w) for c, w in self.terms],
                      order=self.order)

    def rotate_zeta(self):
        """``(zeta1 d/dzeta2 - zeta2 d/dzeta1) a``."""
        return Symbol(self.grid, [(c, w.rotate()) for c, w in self.terms], order=self.order)

    def reflect_conj(self):
        """Symbol ``conj(a(x, -zeta))``."""
        return Symbol(self.grid, [(c.conj(), w.reflect_conj()) for c, w in self.terms],
                      order=self.order)


def _const_field(grid, value):
    c = np.zeros((grid.n, grid.n), complex)
    c[0, 0] = value
    return GridField(grid, c, np.isreal(value))


def poisson_bracket(a, b):
    """``{a, b} = grad_x a . grad_zeta b - grad_zeta a . grad_x b``."""
    out = None
    for j in (0, 1):
        t = a.dx(j) * b.dzeta(j) + (a.dzeta(j) * b.dx(j)).scale(-1.0)
        out = t if out is None else out + t
    out.order = a.order + b.order - 1
    return out


def _chi(ratio, threshold):
    return cutoffs.le(ratio, threshold)


def _chi_reach(grid, threshold):
    """Largest ``|theta|`` for which the cutoff can be nonzero on the grid."""
    top = 2 * np.sqrt(2.0) * (grid.n // 2) * grid.dk
    return 2.0**threshold * cutoffs.SUPPORT * top


def weyl_apply(a, f, chi_threshold=DEFAULT_CHI, K=None, rel_tol=1e-15):
    """Apply the Weyl paradifferential operator ``T_a`` to ``f``.

    Separable symbols use a loop over the x-Fourier support of the
    coefficients; callable symbols (or any symbol when ``K`` is given) use a
    direct double sum over modes with ``max|j| <= K`` (default ``n/2 - 1``).

    ``rel_tol`` skips symbol coefficients (shift loop) or input modes
    (direct sum) smaller than that fraction of the largest one.
    """
    if K is not None or not a.separable:
        if K is None:
            K = f.grid.n // 2 - 1
        return _weyl_direct(a, f, chi_threshold, int(K), rel_tol)
    return _weyl_shift(a, f, chi_threshold, rel_tol)


def _weyl_shift(a, f, chi_threshold, rel_tol):
    grid = f.grid
    n = grid.n
    j1, j2 = grid.index
    k1, k2 = grid.k
    dk = grid.dk
    reach = _chi_reach(grid, chi_threshold)
    coeffs = [c.coeffs for c, _ in a.terms]
    support = np.zeros((n, n), bool)
    for c in coeffs:
        m = np.abs(c)
        if m.max() > 0:
            support |= m > rel_tol * m.max()
    support &= grid.kabs <= reach
    support[0, 0] = True
    out = np.zeros((n, n), complex)
    fc = f.coeffs
    for t1, t2 in zip(j1[support], j2[support]):
        o1, o2 = j1 + t1, j2 + t2
        inside = (o1 >= -n // 2) & (o1 < n // 2) & (o2 >= -n // 2) & (o2 < n // 2)
        if t1 == 0 and t2 == 0:
            chi = 1.0
        else:
            s_abs = np.hypot(2 * k1 + t1 * dk, 2 * k2 + t2 * dk)
            with np.errstate(divide="ignore"):
                ratio = np.where(s_abs > 0, np.hypot(t1, t2) * dk / s_abs, np.inf)
            chi = _chi(ratio, chi_threshold)
        z1 = k1 + 0.5 * t1 * dk
        z2 = k2 + 0.5 * t2 * dk
        weight = 0.0
        for c, (_, w) in zip(coeffs, a.terms):
            ct = c[t1 % n, t2 % n]
            if ct != 0:
                weight = weight + ct * w(z1, z2)
        contrib = np.where(inside, chi * weight * fc, 0.0)
        out += np.roll(contrib, (t1, t2), axis=(0, 1))
    return GridField(grid, out, False)


def _weyl_direct(a, f, chi_threshold, K, rel_tol=0.0):
    grid = f.grid
    n = grid.n
    if K >= n // 2:
        raise ValueError("K must be below n/2")
    dk = grid.dk
    r = np.arange(-K, K + 1)
    e1, e2 = np.meshgrid(r, r, indexing="ij")
    e1, e2 = e1.ravel(), e2.ravel()
    fv = f.coeffs[e1 % n, e2 % n]
    live = np.abs(fv) > rel_tol * np.abs(fv).max() if np.any(fv) else fv != 0
    e1, e2, fv = e1[live], e2[live], fv[live]
    out = np.zeros(n * n, complex)
    s2_all = np.arange(-2 * K, 2 * K + 1)
    z2 = (0.5 * dk * s2_all)[:, None, None]
    # one batch per first component of the sum index s = xi + eta
    for s1 in range(-2 * K, 2 * K + 1):
        sel = np.abs(s1 - e1) <= K
        if not np.any(sel):
            continue
        vals = np.broadcast_to(a.evaluate(np.full(z2.shape, 0.5 * s1 * dk), z2),
                               (s2_all.size, n, n))
        at = np.fft.fft2(vals) / n**2
        y1, y2, fy = e1[sel], e2[sel], fv[sel]
        x1 = np.broadcast_to((s1 - y1)[:, None], (y1.size, r.size))
        x2 = np.broadcast_to(r[None, :], x1.shape)
        t1 = x1 - y1[:, None]
        t2 = x2 - y2[:, None]
        s2 = x2 + y2[:, None]
        diff = np.hypot(t1, t2)
        s_abs = np.hypot(s1, s2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(diff == 0, 0.0, np.where(s_abs > 0, diff / s_abs, np.inf))
        chi = _chi(ratio, chi_threshold)
        keep = chi != 0
        contrib = chi[keep] * at[(s2 + 2 * K)[keep], t1[keep] % n, t2[keep] % n] \
            * np.broadcast_to(fy[:, None], x1.shape)[keep]
        idx = (x1[keep] % n) * n + (x2[keep] % n)
        out += np.bincount(idx, weights=contrib.real, minlength=n * n)
        out += 1j * np.bincount(idx, weights=contrib.imag, minlength=n * n)
    return GridField(grid, out.reshape(n, n), False)


def composition_remainder(a, b, f, chi_threshold=DEFAULT_CHI, K=None):
    """``T_a T_b f - T_ab f - (i/2) T_{a,b} f`` as a field."""
    tb = weyl_apply(b, f, chi_threshold, K)
    tatb = weyl_apply(a, tb, chi_threshold, K)
    tab = weyl_apply(a * b, f, chi_threshold, K)
    tpb = weyl_apply(poisson_bracket(a, b), f, chi_threshold, K)
    return GridField(f.grid, tatb.coeffs - tab.coeffs - 0.5j * tpb.coeffs, False)


def composition_error(a, b, f, k, chi_threshold=DEFAULT_CHI, K=None):
    """L2 norm of the dyadic piece ``P_k`` of :func:`composition_remainder`."""
    return lp_project(composition_remainder(a, b, f, chi_threshold, K), k).norm()


def para_remainder(f, g, chi_threshold=DEFAULT_CHI):
    """High-high remainder ``fg - T_f g - T_g f``."""
    fg = product(f, g)
    tf = weyl_apply(Symbol.function(f), g, chi_threshold)
    tg = weyl_apply(Symbol.function(g), f, chi_threshold)
    c = fg.coeffs - tf.coeffs - tg.coeffs
    real = f.real and g.real
    if real:
        c = hermitian_part(c)
    return GridField(f.grid, c, real)


def omega_commutation_check(a, f, chi_threshold=DEFAULT_CHI):
    """``||Omega T_a f - T_a Omega f - T_{a''} f||`` with ``a''`` the full rotation of ``a``."""
    left = rotation_derivative(weyl_apply(a, f, chi_threshold))
    right = weyl_apply(a, rotation_derivative(f), chi_threshold)
    a2 = a.rotate_x() + a.rotate_zeta()
    extra = weyl_apply(a2, f, chi_threshold)
    return GridField(f.grid, left.coeffs - right.coeffs - extra.coeffs, False).norm()


def conjugation_defect(a, f, chi_threshold=DEFAULT_CHI):
    """``||conj(T_a f) - T_{a'} conj(f)||`` with ``a'(x, zeta) = conj(a(x, -zeta))``."""
    left = weyl_apply(a, f, chi_threshold).conj()
    right = weyl_apply(a.reflect_conj(), f.conj(), chi_threshold)
    return GridField(f.grid, left.coeffs - right.coeffs, False).norm()


@dataclass
class DyadicSweep:
    """Per-band values and fitted log2 slope."""

    k: list
    values: list
    slope: float
    extra: dict = field(default_factory=dict)


def fit_log2_slope(k, values):
    k = np.asarray(k, float)
    v = np.asarray(values, float)
    return float(np.polyfit(k, np.log2(v), 1)[0])


def composition_sweep(a, b, f, ks, chi_threshold=DEFAULT_CHI, normalize=True):
    """Relative composition error per band, ``||P_k E f|| / ||P_[k-5,k+5] f||``."""
    rem = composition_remainder(a, b, f, chi_threshold)
    vals = []
    for k in ks:
        e = lp_project(rem, k).norm()
        if normalize:
            base = sum(lp_project(f, kk).coeffs for kk in range(k - 5, k + 6))
            e /= GridField(f.grid, base, False).norm()
        vals.append(e)
    return DyadicSweep(list(ks), vals, fit_log2_slope(ks, vals))


__all__ = [
    "Coord", "DEFAULT_CHI", "DyadicSweep", "Multiplier", "Symbol", "composition_error",
    "composition_remainder", "composition_sweep", "conjugation_defect", "fit_log2_slope",
    "omega_commutation_check", "para_remainder", "poisson_bracket", "weyl_apply",
]
