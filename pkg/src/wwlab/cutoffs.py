"""Smooth radial cutoffs and the dyadic partitions built from them.

The base cutoff is even, equals 1 on ``[-5/4, 5/4]``, vanishes outside
``[-8/5, 8/5]`` and decreases in between along a normalized integral of the
bump ``exp(-1/(s(1-s)))``.  All dyadic pieces are differences of rescaled
copies, so every partition below telescopes exactly.
"""
from __future__ import annotations

import numpy as np

PLATEAU = 5.0 / 4.0
SUPPORT = 8.0 / 5.0

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(48)


def _bump(s):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.exp(-1.0 / (s * (1.0 - s)))
    return np.where((s > 0) & (s < 1), out, 0.0)


_HALF_MASS = float(np.sum(_WEIGHTS * _bump((_NODES + 1) / 4)) / 4)


def smooth_step(t):
    """Normalized primitive of the bump, rising from 0 at t=0 to 1 at t=1.

    Evaluated with 48-point Gauss-Legendre quadrature on the shorter of
    ``[0, t]`` and ``[t, 1]``; accurate to about 1e-15.
    """
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    out = np.where(t >= 0.5, 1.0, 0.0)
    mid = (t > 0) & (t < 1)
    if np.any(mid):
        tm = t[mid]
        short = np.minimum(tm, 1.0 - tm)
        s = (_NODES[:, None] + 1) / 2 * short
        frac = (_WEIGHTS @ _bump(s)) * short / 2 / (2 * _HALF_MASS)
        out[mid] = np.where(tm <= 0.5, frac, 1.0 - frac)
    return out


def base(x):
    """Even cutoff equal to 1 for ``|x| <= 5/4`` and 0 for ``|x| >= 8/5``."""
    ax = np.abs(np.asarray(x, dtype=float))
    return 1.0 - smooth_step((ax - PLATEAU) / (SUPPORT - PLATEAU))


def le(x, b):
    """Cutoff to ``|x| <~ 2**b`` (value 1 at the origin)."""
    return base(np.abs(x) / 2.0**b)


def gt(x, b):
    """Complement of :func:`le`."""
    return 1.0 - le(x, b)


def ge(x, b):
    """Cutoff to ``|x| >~ 2**b``; equals ``gt(x, b-1)``."""
    return 1.0 - le(x, b - 1)


def lt(x, b):
    """Cutoff to ``|x| <~ 2**(b-1)``; equals ``le(x, b-1)``."""
    return le(x, b - 1)


def shell(x, k):
    """Dyadic piece ``base(|x|/2**k) - base(|x|/2**(k-1))``.

    Vanishes at the origin, so the pieces sum to 1 only away from 0.
    """
    ax = np.abs(np.asarray(x, dtype=float))
    return base(ax / 2.0**k) - base(ax / 2.0 ** (k - 1))


def interval(x, lo, hi):
    """Sum of :func:`shell` over integers ``k`` in the closed range [lo, hi].

    ``lo`` may be ``-inf`` and ``hi`` may be ``inf``.
    """
    if lo == -np.inf and hi == np.inf:
        return np.where(np.asarray(x) == 0, 0.0, 1.0)
    if lo == -np.inf:
        out = le(x, int(np.floor(hi)))
        return np.where(np.asarray(x) == 0, 0.0, out)
    if hi == np.inf:
        return ge(x, int(np.ceil(lo)))
    lo_i, hi_i = int(np.ceil(lo)), int(np.floor(hi))
    if hi_i < lo_i:
        return np.zeros_like(np.asarray(x, dtype=float))
    return le(x, hi_i) - le(x, lo_i - 1)


def clamped(x, j, a, b):
    """Member ``j`` of the finite partition indexed by ``a <= j <= b``.

    Interior indices give :func:`shell`; the end members absorb the tails
    (``le`` at ``j == a`` and ``ge`` at ``j == b``).
    """
    if not a <= j <= b or a >= b:
        raise ValueError("need a < b and a <= j <= b")
    if j == a:
        return le(x, a)
    if j == b:
        return ge(x, b)
    return shell(x, j)


def spatial_atom(x, j, k):
    """Physical-space cutoff pairing position scale ``2**j`` with frequency ``2**k``.

    Valid for ``j >= 0`` and ``j + k >= 0``.  For fixed ``k`` these cutoffs sum
    to 1 over ``j >= max(-k, 0)``.
    """
    if j < 0 or j + k < 0:
        raise ValueError(f"(k={k}, j={j}) outside the admissible index set")
    if k + j == 0 and k <= 0:
        return le(x, -k)
    if j == 0 and k >= 0:
        return le(x, 0)
    return shell(x, j)
