"""Small expression library for frequency multipliers ``w(zeta)``.

Every multiplier can be evaluated on arrays of ``zeta = (z1, z2)`` and
differentiated in ``zeta_j``.  Closed-form derivatives are used for the
library members (constants, coordinates, powers of ``|zeta|``, radial
functions with known derivatives) and their sums and products; arbitrary
callables fall back to central differences.
"""
from __future__ import annotations

import numpy as np

from .dispersion import frequency, frequency_deriv


class Multiplier:
    """Base class; subclasses implement ``__call__`` and ``d``."""

    def __call__(self, z1, z2):
        raise NotImplementedError

    def d(self, j):
        """Partial derivative in ``zeta_j`` (``j`` in {0, 1})."""
        raise NotImplementedError

    def __add__(self, other):
        return Sum(self, as_multiplier(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Sum(self, Scaled(-1.0, as_multiplier(other)))

    def __rsub__(self, other):
        return Sum(as_multiplier(other), Scaled(-1.0, self))

    def __mul__(self, other):
        if np.isscalar(other):
            return Scaled(other, self)
        return Product(self, as_multiplier(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Scaled(-1.0, self)

    def rotate(self):
        """Angular derivative ``z1 d/dz2 - z2 d/dz1``."""
        return Coord(0) * self.d(1) - Coord(1) * self.d(0)

    def reflect_conj(self):
        """The multiplier ``conj(w(-zeta))``."""
        return ReflectConj(self)


def as_multiplier(w):
    if isinstance(w, Multiplier):
        return w
    if np.isscalar(w):
        return Const(w)
    if callable(w):
        return Sampled(w)
    raise TypeError(f"cannot interpret {w!r} as a multiplier")


class Const(Multiplier):
    def __init__(self, value):
        self.value = value

    def __call__(self, z1, z2):
        return self.value * np.ones(np.broadcast(z1, z2).shape)

    def d(self, j):
        return Const(0.0)

    def __repr__(self):
        return f"Const({self.value})"


class Coord(Multiplier):
    """``zeta_j``."""

    def __init__(self, j):
        self.j = j

    def __call__(self, z1, z2):
        return np.broadcast_to(z1 if self.j == 0 else z2, np.broadcast(z1, z2).shape).astype(float)

    def d(self, j):
        return Const(1.0 if j == self.j else 0.0)

    def __repr__(self):
        return f"Coord({self.j})"


class AbsPower(Multiplier):
    """``|zeta|**p``; negative powers are set to 0 at the origin."""

    def __init__(self, p):
        self.p = p

    def __call__(self, z1, z2):
        r = np.hypot(z1, z2)
        if self.p >= 0:
            return r**self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0, r**self.p, 0.0)

    def d(self, j):
        if self.p == 0:
            return Const(0.0)
        return Scaled(self.p, Product(AbsPower(self.p - 2), Coord(j)))

    def __repr__(self):
        return f"AbsPower({self.p})"


class Radial(Multiplier):
    """``F^(order)(|zeta|)`` for a radial profile with known derivatives.

    ``profile(r, order)`` must return the ``order``-th derivative.
    """

    def __init__(self, profile, order=0, name="F"):
        self.profile = profile
        self.order = order
        self.name = name

    def __call__(self, z1, z2):
        r = np.hypot(z1, z2)
        out = np.zeros(r.shape)
        live = r > 0
        out[live] = self.profile(r[live], self.order)
        return out

    def d(self, j):
        return Product(Radial(self.profile, self.order + 1, self.name),
                       Product(AbsPower(-1), Coord(j)))

    def __repr__(self):
        return f"Radial({self.name}, {self.order})"


class Sum(Multiplier):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, z1, z2):
        return self.a(z1, z2) + self.b(z1, z2)

    def d(self, j):
        return Sum(self.a.d(j), self.b.d(j))


class Product(Multiplier):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, z1, z2):
        return self.a(z1, z2) * self.b(z1, z2)

    def d(self, j):
        return Sum(Product(self.a.d(j), self.b), Product(self.a, self.b.d(j)))


class Scaled(Multiplier):
    def __init__(self, c, a):
        self.c, self.a = c, a

    def __call__(self, z1, z2):
        return self.c * self.a(z1, z2)

    def d(self, j):
        return Scaled(self.c, self.a.d(j))


class ReflectConj(Multiplier):
    def __init__(self, a):
        self.a = a

    def __call__(self, z1, z2):
        return np.conj(self.a(-np.asarray(z1), -np.asarray(z2)))

    def d(self, j):
        return Scaled(-1.0, ReflectConj(self.a.d(j)))


class Sampled(Multiplier):
    """Arbitrary callable, differentiated by fourth-order central differences."""

    def __init__(self, func, step=1e-3):
        self.func = func
        self.step = step

    def __call__(self, z1, z2):
        return self.func(np.asarray(z1, dtype=float), np.asarray(z2, dtype=float))

    def d(self, j):
        f, h = self.func, self.step

        def deriv(z1, z2):
            e1, e2 = (h, 0.0) if j == 0 else (0.0, h)
            return (8 * (f(z1 + e1, z2 + e2) - f(z1 - e1, z2 - e2))
                    - (f(z1 + 2 * e1, z2 + 2 * e2) - f(z1 - 2 * e1, z2 - 2 * e2))) / (12 * h)

        return Sampled(deriv, h)


# library members

def one():
    return Const(1.0)


def abs_zeta():
    return AbsPower(1)


def sqrt_abs_zeta():
    return AbsPower(0.5)


def coordinate(j):
    return Coord(j)


def _dispersion_profile(r, order):
    if order == 0:
        return frequency(r)
    return frequency_deriv(r, order)


def dispersion():
    """``lambda(|zeta|)``; derivatives beyond the fourth are not available."""
    return Radial(_dispersion_profile, 0, "lambda")
