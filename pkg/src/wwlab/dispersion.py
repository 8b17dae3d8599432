r"""Radial dispersion relation of unit gravity-capillary waves and its phases.

The linear frequency at radial wavenumber ``r`` is

.. math:: \lambda(r) = \sqrt{r + r^3}.

Everything here is vectorized over numpy arrays.  Frequency vectors are
arrays whose last axis has length 2.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

#: Radii (and vector norms) below this value are treated as zero.
DOMAIN_GUARD = 1e-30


class DomainError(ValueError):
    """Raised when a formula is evaluated outside its domain."""


def _asarray(x):
    return np.asarray(x, dtype=float)


def frequency(r):
    """Dispersion relation ``sqrt(r + r**3)``.

    Parameters
    ----------
    r : array_like
        Nonnegative radial wavenumber(s).

    Raises
    ------
    DomainError
        If any entry is negative.
    """
    r = np.asarray(r)
    if np.iscomplexobj(r):
        return np.sqrt(r + r**3)
    r = _asarray(r)
    if np.any(r < 0):
        raise DomainError("frequency: negative radius")
    return np.sqrt(r + r**3)


def frequency_deriv(r, order=1):
    r"""Closed-form derivative of the dispersion relation.

    With :math:`q = r + r^3`,

    .. math::
        \lambda' = \frac{1 + 3r^2}{2q^{1/2}},\quad
        \lambda'' = \frac{3r^4 + 6r^2 - 1}{4q^{3/2}},\quad
        \lambda''' = \frac{3(1 + 5r^2 - 5r^4 - r^6)}{8q^{5/2}},\quad
        \lambda'''' = \frac{3(3r^8 + 28r^6 - 70r^4 - 20r^2 - 5)}{16q^{7/2}}.

    Parameters
    ----------
    r : array_like
        Strictly positive radii.  Complex input is accepted unchecked so the
        routine can be used with complex-step differentiation.
    order : int
        Derivative order, 1 through 4.
    """
    r = np.asarray(r)
    if not np.iscomplexobj(r):
        r = _asarray(r)
        if np.any(r <= DOMAIN_GUARD):
            raise DomainError("frequency_deriv: radius must be positive")
    q = r + r**3
    r2 = r * r
    if order == 1:
        return (1 + 3 * r2) / (2 * np.sqrt(q))
    if order == 2:
        return (3 * r2 * r2 + 6 * r2 - 1) / (4 * q**1.5)
    if order == 3:
        return 3 * (1 + 5 * r2 - 5 * r2**2 - r2**3) / (8 * q**2.5)
    if order == 4:
        return 3 * (3 * r2**4 + 28 * r2**3 - 70 * r2**2 - 20 * r2 - 5) / (16 * q**3.5)
    raise ValueError("order must be 1, 2, 3 or 4")


def inflection_radius():
    """Radius where the second derivative of the dispersion relation vanishes.

    Equals ``sqrt((2*sqrt(3) - 3)/3)``, roughly 0.3933.
    """
    return float(np.sqrt((2 * np.sqrt(3.0) - 3) / 3))


def resonant_sphere_radius():
    """Radius ``sqrt(2)`` where ``frequency(x) = 2*frequency(x/2)``."""
    return float(np.sqrt(2.0))


def frequency_inverse(y):
    """Inverse of :func:`frequency` by Cardano's formula.

    Solves ``x + x**3 = y**2`` through ``x = -1/Y + Y/3`` with
    ``Y = ((27 y^2 + sqrt(27) sqrt(27 y^4 + 4)) / 2) ** (1/3)``.
    The difference form loses relative accuracy for tiny ``y``; there the
    series ``x = y^2 - y^6 + ...`` is used instead.
    """
    y = np.asarray(y)
    if not np.iscomplexobj(y):
        y = _asarray(y)
        if np.any(y < 0):
            raise DomainError("frequency_inverse: negative frequency")
    y2 = y * y
    big = ((27 * y2 + np.sqrt(27.0) * np.sqrt(27 * y2 * y2 + 4)) / 2) ** (1.0 / 3)
    x = -1 / big + big / 3
    small = np.abs(y2) < 1e-4
    if np.any(small):
        series = y2 - y2**3 + 3 * y2**5 - 12 * y2**7
        x = np.where(small, series, x)
    return x[()] if np.ndim(x) == 0 else x


class SignTriple(NamedTuple):
    """Signs selecting an interaction phase; each entry is +1 or -1."""

    sigma: int
    mu: int
    nu: int

    @classmethod
    def parse(cls, signs):
        """Build from a string such as ``"+-+"`` or any length-3 iterable."""
        vals = _parse_signs(signs, 3)
        return cls(*vals)


def _parse_signs(signs, n):
    if isinstance(signs, str):
        if len(signs) != n or any(c not in "+-" for c in signs):
            raise ValueError(f"expected {n} characters from '+-', got {signs!r}")
        return tuple(1 if c == "+" else -1 for c in signs)
    vals = tuple(int(v) for v in signs)
    if len(vals) != n or any(v not in (1, -1) for v in vals):
        raise ValueError(f"signs must be {n} entries equal to +1 or -1")
    return vals


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1))


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _cross(a, b):
    """Scalar ``a . b^perp`` with ``b^perp = (-b2, b1)``."""
    return a[..., 1] * b[..., 0] - a[..., 0] * b[..., 1]


def _check_nonzero(*norms):
    for n in norms:
        if np.any(n <= DOMAIN_GUARD):
            raise DomainError("vanishing frequency argument")


def _signed_dispersion_frequency(sign, v):
    return sign * frequency(_norm(v))


def phase(signs, xi, eta):
    """Quadratic interaction phase ``s*lam|xi| - m*lam|xi-eta| - n*lam|eta|``.

    Parameters
    ----------
    signs : SignTriple or str
    xi, eta : array_like, shape (..., 2)
    """
    s, m, n = _parse_signs(signs, 3)
    xi = _asarray(xi)
    eta = _asarray(eta)
    return (s * frequency(_norm(xi)) - m * frequency(_norm(xi - eta))
            - n * frequency(_norm(eta)))


def _unit_grad(sign, v):
    r = _norm(v)
    return (sign * frequency_deriv(r) / r)[..., None] * v


def phase_gradients(signs, xi, eta, with_xi=True):
    """Exact gradients of :func:`phase` and its angular derivative.

    Returns
    -------
    grad_xi : ndarray (..., 2) or None
        Gradient in ``xi`` (None when ``with_xi`` is False).
    grad_eta : ndarray (..., 2)
    omega_eta : ndarray
        Derivative along the rotation field ``eta^perp . grad_eta`` at fixed
        ``xi``; equals ``mu*lam'(|xi-eta|) (xi . eta^perp)/|xi-eta|``.
    """
    s, m, n = _parse_signs(signs, 3)
    xi = _asarray(xi)
    eta = _asarray(eta)
    z = xi - eta
    rz, re = _norm(z), _norm(eta)
    _check_nonzero(rz, re)
    gz = _unit_grad(m, z)
    grad_eta = gz - _unit_grad(n, eta)
    omega = m * frequency_deriv(rz) * _cross(xi, eta) / rz
    grad_xi = None
    if with_xi:
        _check_nonzero(_norm(xi))
        grad_xi = _unit_grad(s, xi) - gz
    return grad_xi, grad_eta, omega


def cubic_phase(signs4, xi, eta, sig):
    """Cubic phase ``L_a(xi) - L_b(xi-eta) - L_c(eta-sig) - L_d(sig)``."""
    a, b, c, d = _parse_signs(signs4, 4)
    xi, eta, sig = (_asarray(v) for v in (xi, eta, sig))
    return (a * frequency(_norm(xi)) - b * frequency(_norm(xi - eta))
            - c * frequency(_norm(eta - sig)) - d * frequency(_norm(sig)))


def cubic_phase_gradients(signs4, xi, eta, sig):
    """Gradients of :func:`cubic_phase` in ``xi``, ``eta`` and ``sig``."""
    a, b, c, d = _parse_signs(signs4, 4)
    xi, eta, sig = (_asarray(v) for v in (xi, eta, sig))
    z1, z2 = xi - eta, eta - sig
    _check_nonzero(_norm(xi), _norm(z1), _norm(z2), _norm(sig))
    g1 = _unit_grad(b, z1)
    g2 = _unit_grad(c, z2)
    grad_xi = _unit_grad(a, xi) - g1
    grad_eta = g1 - g2
    grad_sig = g2 - _unit_grad(d, sig)
    return grad_xi, grad_eta, grad_sig


def nondegeneracy(signs, xi, eta):
    r"""Mixed Hessian of the phase evaluated on the rotated gradients.

    Computes :math:`\nabla^2_{\xi\eta}\Phi[\nabla^\perp_\xi\Phi,
    \nabla^\perp_\eta\Phi]` through the subtracted closed form (with
    :math:`z = \xi-\eta`)

    .. math::
        -\Upsilon = \frac{\lambda_\mu''(|z|)}{|z|^2}
        \frac{\lambda'_\sigma(|\xi|)}{|\xi|}\frac{\lambda'_\nu(|\eta|)}{|\eta|}
        (\eta\cdot\xi^\perp)^2 + \frac{\lambda'_\mu(|z|)}{|z|^3}
        \Big(\lambda'_\mu|z| - \frac{\lambda'_\sigma}{|\xi|}\xi\cdot z\Big)
        \Big(\lambda'_\mu|z| - \frac{\lambda'_\nu}{|\eta|}\eta\cdot z\Big).
    """
    s, m, n = _parse_signs(signs, 3)
    xi = _asarray(xi)
    eta = _asarray(eta)
    z = xi - eta
    rx, re, rz = _norm(xi), _norm(eta), _norm(z)
    _check_nonzero(rx, re, rz)
    dz1 = m * frequency_deriv(rz)
    dz2 = m * frequency_deriv(rz, 2)
    wx = s * frequency_deriv(rx) / rx
    we = n * frequency_deriv(re) / re
    first = dz2 / rz**2 * wx * we * _cross(eta, xi) ** 2
    second = (dz1 / rz**3 * (dz1 * rz - wx * _dot(xi, z))
              * (dz1 * rz - we * _dot(eta, z)))
    return -(first + second)


def nondegeneracy_gradient_form(signs, xi, eta):
    """Alternative closed form using the product of the two phase gradients.

    Algebraically identical to :func:`nondegeneracy`; kept as a cross-check.
    """
    s, m, n = _parse_signs(signs, 3)
    xi = _asarray(xi)
    eta = _asarray(eta)
    z = xi - eta
    rx, re, rz = _norm(xi), _norm(eta), _norm(z)
    gx, ge, _ = phase_gradients(signs, xi, eta)
    dz1 = m * frequency_deriv(rz)
    dz2 = m * frequency_deriv(rz, 2)
    wx = s * frequency_deriv(rx) / rx
    we = n * frequency_deriv(re) / re
    return ((dz1 - rz * dz2) / rz**3 * wx * we * _cross(eta, xi) ** 2
            + dz1 / rz * _dot(gx, ge))


def nondegeneracy_normalized(signs, xi, eta):
    """:func:`nondegeneracy` divided by the product of both gradient norms.

    Raises
    ------
    ZeroDivisionError
        If either phase gradient vanishes.
    """
    gx, ge, _ = phase_gradients(signs, xi, eta)
    denom = _norm(gx) * _norm(ge)
    if np.any(denom <= DOMAIN_GUARD):
        raise ZeroDivisionError("phase gradient vanishes; normalized value undefined")
    return nondegeneracy(signs, xi, eta) / denom


def radial_bracket(s, r, rho, signs=(1, 1, 1)):
    r"""Polynomial-like bracket expressing the nondegeneracy in the radii.

    For :math:`s=|\xi|`, :math:`r=|\eta|`, :math:`\rho=|\xi-\eta|` returns

    .. math::
        \frac{\rho\lambda''_\mu}{\lambda'_\mu}[4r^2s^2 - (r^2+s^2-\rho^2)^2]
        + \Big[2\rho s\frac{\lambda'_\mu}{\lambda'_\sigma} - (\rho^2+s^2-r^2)\Big]
          \Big[2\rho r\frac{\lambda'_\mu}{\lambda'_\nu} + (\rho^2+r^2-s^2)\Big].

    Complex arguments are accepted for complex-step differentiation.
    """
    sg, m, n = _parse_signs(signs, 3)
    d1 = frequency_deriv
    dm = m * d1(rho)
    ratio = rho * (m * d1(rho, 2)) / dm
    return (ratio * (4 * r * r * s * s - (r * r + s * s - rho * rho) ** 2)
            + (2 * rho * s * dm / (sg * d1(s)) - (rho * rho + s * s - r * r))
            * (2 * rho * r * dm / (n * d1(r)) + (rho * rho + r * r - s * s)))


def nondegeneracy_radial(signs, s, r, rho):
    """Nondegeneracy function written in terms of the three radii."""
    sg, m, n = _parse_signs(signs, 3)
    s, r, rho = (np.asarray(v) for v in (s, r, rho))
    d1 = frequency_deriv
    return (-0.25 * radial_bracket(s, r, rho, (sg, m, n))
            * (m * d1(rho)) / rho**3 * (sg * d1(s)) / s * (n * d1(r)) / r)
