"""Dirichlet-Neumann operator below a periodic graph, its expansions in the
surface height, and the paralinearized quantities built from it.

The fluid occupies ``{y < h(x)}`` (infinite depth).  In flattened
coordinates ``u(x, y) = Phi(x, h(x) + y)`` Laplace's equation reads

    (d_y^2 + Delta) u = d_y Q_a + div(d_y u grad h),
    Q_a = grad u . grad h - |grad h|^2 d_y u,

with ``u(., 0) = phi``, and ``G(h) phi = d_y u(., 0) - Q_a(., 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import cutoffs, multipliers as mult
from .dispersion import DomainError
from .grid import GridField, hermitian_part
from .paradiff import DEFAULT_CHI, Symbol, poisson_bracket, weyl_apply
from .spectral import (SeparableSymbol, bilinear_apply, derivative, padded_product_coeffs,
                       product)

SLOPE_LIMIT = 0.1
MAX_ITER = 50


class SlopeError(DomainError):
    """Surface steeper than the small-slope regime allows."""


class DivergenceError(RuntimeError):
    """Fixed-point iteration for the harmonic extension failed to converge."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


# ------------------------------------------------------------------ state

@dataclass(frozen=True)
class SurfaceState:
    """Real height ``h`` and boundary potential ``phi`` on a shared grid."""

    h: GridField
    phi: GridField

    def __post_init__(self):
        if self.h.grid != self.phi.grid:
            raise ValueError("h and phi live on different grids")
        if not (self.h.real and self.phi.real):
            raise ValueError("h and phi must be real fields")

    @property
    def grid(self):
        return self.h.grid

    def slope(self):
        """``max |grad h|`` on the grid."""
        g1 = derivative(self.h, 0).physical()
        g2 = derivative(self.h, 1).physical()
        return float(np.sqrt(np.max(g1 * g1 + g2 * g2)))

    def check_slope(self):
        s = self.slope()
        if s >= SLOPE_LIMIT:
            raise SlopeError(f"max slope {s:.3g} not below {SLOPE_LIMIT}")
        return s

    def scaled(self, eps):
        return SurfaceState(self.h * eps, self.phi * eps)


def _grad(f):
    return derivative(f, 0), derivative(f, 1)


# -------------------------------------------------------- vertical grid

@dataclass(frozen=True)
class DepthGrid:
    """Mapped Chebyshev nodes on ``(-inf, 0]``.

    ``y = beta (x - 1) / (x + 1)`` with Chebyshev-Lobatto ``x``; the node at
    ``x = -1`` (``y = -inf``) is dropped because every nonzero mode vanishes
    there.  Node 0 is the surface ``y = 0``.
    """

    y: np.ndarray
    D: np.ndarray
    weights: np.ndarray
    beta: float

    @property
    def size(self):
        return self.y.size


def _cheb(N):
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def _clenshaw_curtis(N):
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    v = np.ones(N - 1)
    inner = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(N * inner) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2 * v / N
    return w


@lru_cache(maxsize=16)
def depth_grid(M, beta):
    x, Dx = _cheb(M)
    x, Dx = x[:M], Dx[:M, :M]
    y = beta * (x - 1) / (x + 1)
    dxdy = (x + 1) ** 2 / (2 * beta)
    D = dxdy[:, None] * Dx
    w = _clenshaw_curtis(M)[:M] / dxdy
    for a in (y, D, w):
        a.setflags(write=False)
    return DepthGrid(y, D, w, float(beta))


def default_depth_scale(grid):
    kmax = float(grid.kabs.max())
    return 1.4 / np.sqrt(grid.dk * kmax)


@lru_cache(maxsize=16)
def _mode_solvers(grid, M, beta):
    """LU factors of ``D^2 - k^2`` on interior nodes, one per distinct ``|xi|``."""
    dg = depth_grid(M, beta)
    D2 = (dg.D @ dg.D)[1:, 1:]
    j1, j2 = grid.index
    key = (j1 * j1 + j2 * j2).ravel()
    order = np.argsort(key, kind="stable")
    uniq, start = np.unique(key[order], return_index=True)
    groups = []
    bounds = list(start) + [key.size]
    eye = np.eye(M - 1)
    for i, q in enumerate(uniq):
        if q == 0:
            continue
        idx = order[bounds[i]:bounds[i + 1]]
        k = grid.dk * np.sqrt(q)
        groups.append((idx, lu_factor(D2 - k * k * eye)))
    return groups


# --------------------------------------------------------- exact operator

@dataclass
class FluidPotential:
    """Harmonic extension in flattened coordinates on the depth nodes."""

    y: np.ndarray
    u: np.ndarray
    uy: np.ndarray


@dataclass
class DNResult:
    G: GridField
    potential: FluidPotential
    iterations: int
    residuals: list = field(default_factory=list)
    depth_nodes: int = 0
    depth_scale: float = 0.0


def _to_phys(c, m):
    """Physical values of a stack of coefficient arrays on an ``m x m`` grid."""
    n = c.shape[-1]
    if m == n:
        return np.fft.ifft2(c) * n * n
    h = n // 2
    pad = np.zeros(c.shape[:-2] + (m, m), complex)
    pad[..., :h, :h] = c[..., :h, :h]
    pad[..., :h, -h:] = c[..., :h, -h:]
    pad[..., -h:, :h] = c[..., -h:, :h]
    pad[..., -h:, -h:] = c[..., -h:, -h:]
    return np.fft.ifft2(pad) * m * m


def _to_coeffs(v, n):
    m = v.shape[-1]
    c = np.fft.fft2(v) / (m * m)
    if m == n:
        return c
    h = n // 2
    out = np.empty(v.shape[:-2] + (n, n), complex)
    out[..., :h, :h] = c[..., :h, :h]
    out[..., :h, -h:] = c[..., :h, -h:]
    out[..., -h:, :h] = c[..., -h:, :h]
    out[..., -h:, -h:] = c[..., -h:, -h:]
    return out


def dn_exact(state, tol=1e-14, M=96, beta=None, max_iter=MAX_ITER, dealias=True):
    """Dirichlet-Neumann operator by fixed-point iteration on the harmonic extension.

    Each sweep freezes the nonlinear terms, then solves the linear
    problem mode by mode.  The unknown is the correction
    ``w = u - exp(y|D|) phi``, so the linear part ``|D| phi`` is exact and
    only the nonlinear part carries the vertical discretization error.

    Parameters
    ----------
    tol : float
        Stop when the Dirichlet-energy norm of the change between sweeps is
        below ``tol`` times that of the correction.
    M : int
        Number of depth nodes.
    beta : float, optional
        Depth scale of the node mapping; defaults to ``1.4 / sqrt(k_min k_max)``.
    dealias : bool
        Form products on a 3/2-padded grid.

    Raises
    ------
    SlopeError
        If ``max |grad h| >= 1/10``.
    DivergenceError
        If ``max_iter`` sweeps do not reach ``tol``.
    """
    state.check_slope()
    grid = state.grid
    n = grid.n
    if beta is None:
        beta = default_depth_scale(grid)
    dg = depth_grid(M, beta)
    y = dg.y
    kabs = grid.kabs
    k1, k2 = grid.k
    phic = state.phi.coeffs.copy()
    phic[0, 0] = 0.0
    base = np.exp(y[:, None, None] * kabs) * phic
    base_y = kabs * base
    m = (3 * n) // 2 if dealias else n
    hx = np.real(_to_phys(derivative(state.h, 0).coeffs, m))
    hy = np.real(_to_phys(derivative(state.h, 1).coeffs, m))
    grad2 = hx * hx + hy * hy
    groups = _mode_solvers(grid, M, beta)

    w = np.zeros_like(base)
    wy = np.zeros_like(base)
    u0y = np.zeros(M, complex)
    residuals = []
    wts = dg.weights[:, None, None]
    if not np.any(state.h.coeffs) or not np.any(phic):
        qa0 = np.zeros((n, n), complex)
        it = 0
    else:
        for it in range(1, max_iter + 1):
            u = base + w
            uy = base_y + wy
            uy[:, 0, 0] = u0y
            ux1 = _to_phys(1j * k1 * u, m)
            ux2 = _to_phys(1j * k2 * u, m)
            uyp = _to_phys(uy, m)
            qa = _to_coeffs(ux1 * hx + ux2 * hy - grad2 * uyp, n)
            fb1 = _to_coeffs(uyp * hx, n)
            fb2 = _to_coeffs(uyp * hy, n)
            rhs = np.tensordot(dg.D, qa, axes=1) + 1j * (k1 * fb1 + k2 * fb2)
            rhs_flat = rhs[1:].reshape(M - 1, n * n)
            w_new = np.zeros((M, n * n), complex)
            for idx, lu in groups:
                w_new[1:, idx] = lu_solve(lu, rhs_flat[:, idx])
            w_new = w_new.reshape(M, n, n)
            wy_new = np.tensordot(dg.D, w_new, axes=1)
            u0y_new = qa[:, 0, 0]
            diff = (np.sum(wts * (kabs**2 * np.abs(w_new - w) ** 2 + np.abs(wy_new - wy) ** 2))
                    + np.sum(dg.weights * np.abs(u0y_new - u0y) ** 2))
            size = (np.sum(wts * (kabs**2 * np.abs(w_new) ** 2 + np.abs(wy_new) ** 2))
                    + np.sum(dg.weights * np.abs(u0y_new) ** 2))
            w, wy, u0y = w_new, wy_new, u0y_new
            res = float(np.sqrt(diff / size)) if size > 0 else 0.0
            residuals.append(res)
            if res <= tol:
                break
        else:
            raise DivergenceError(f"no convergence in {max_iter} sweeps", residuals[-1])
        # surface values of Q_a with the converged extension
        uy_s = base_y[0] + wy[0]
        uy_s[0, 0] = u0y[0]
        qa0 = _to_coeffs(_to_phys(1j * k1 * phic, m) * hx + _to_phys(1j * k2 * phic, m) * hy
                         - grad2 * _to_phys(uy_s, m), n)
    Gc = kabs * phic + wy[0] - qa0
    Gc[0, 0] = 0.0
    G = GridField(grid, hermitian_part(Gc), True)
    uy_all = base_y + wy
    uy_all[:, 0, 0] = u0y
    u_all = base + w
    u_all[:, 0, 0] = state.phi.coeffs[0, 0]
    pot = FluidPotential(np.asarray(y), u_all, uy_all)
    return DNResult(G, pot, it, residuals, M, float(beta))


# --------------------------------------------------------- expansions

def quadratic_symbol():
    """``n2(xi, eta) = xi . eta - |xi||eta|`` as a separable bilinear symbol."""
    absk = lambda a, b: np.hypot(a, b)
    return SeparableSymbol([
        (lambda a, b: a, lambda a, b: a, None),
        (lambda a, b: b, lambda a, b: b, None),
        (lambda a, b: -absk(a, b), absk, None),
    ])


def quadratic_kernel(xi1, xi2, eta1, eta2):
    return xi1 * eta1 + xi2 * eta2 - np.hypot(xi1, xi2) * np.hypot(eta1, eta2)


def dn_quadratic(state, mode="separable", K=None):
    """Quadratic term ``N2[h, phi]`` with ``h`` at ``xi - eta`` and ``phi`` at ``eta``."""
    sym = quadratic_symbol()
    if mode == "direct":
        out = bilinear_apply(quadratic_kernel, state.h, state.phi, mode="direct", K=K)
    else:
        out = bilinear_apply(sym, state.h, state.phi)
    return GridField(state.grid, hermitian_part(out.coeffs), True)


def cubic_kernel(xi, eta, sigma):
    """``n3(xi, eta, sigma)`` on arrays with a trailing axis of length 2."""
    nx = np.linalg.norm(xi, axis=-1)
    ne = np.linalg.norm(eta, axis=-1)
    ns = np.linalg.norm(sigma, axis=-1)
    den = nx + ns
    with np.errstate(invalid="ignore", divide="ignore"):
        pre = np.where(den > 0, nx * ns / den, 0.0)
    dot = np.sum((xi - eta) * (eta - sigma), axis=-1)
    return pre * ((nx - ne) * (ne - ns) - dot)


def _absd(c, grid):
    return c * grid.kabs


def _mul(a, b, n):
    return padded_product_coeffs([a, b], n)


@dataclass
class LowRankSplit:
    """``ab/(a+b) ~ sum_r alpha_r(a) beta_r(b)`` on ``[a_min, a_max]^2``."""

    nodes: np.ndarray
    lo: float
    hi: float
    error_bound: float

    def alpha(self, r, a):
        b = self.nodes[r]
        return np.where(a > 0, a * b / (a + b), 0.0)

    def beta(self, r, b):
        t = self._t(b)
        out = np.ones_like(t)
        for s, ts in enumerate(self._tn):
            if s != r:
                out = out * (t - ts) / (self._tn[r] - ts)
        return np.where(b > 0, out, 0.0)

    def _t(self, b):
        with np.errstate(divide="ignore"):
            lb = np.log(np.where(b > 0, b, self.lo))
        return (2 * lb - np.log(self.lo) - np.log(self.hi)) / (np.log(self.hi) - np.log(self.lo))

    @property
    def _tn(self):
        return self._t(self.nodes)


def lowrank_split(lo, hi, R):
    """Chebyshev interpolation of ``ab/(a+b)`` in ``log b`` at ``R`` nodes.

    The error bound is the sup error measured on a dense sample.
    """
    t = np.cos(np.pi * (np.arange(R) + 0.5) / R)
    ll, lh = np.log(lo), np.log(hi)
    nodes = np.exp(0.5 * (ll + lh) + 0.5 * (lh - ll) * t)
    split = LowRankSplit(nodes, lo, hi, 0.0)
    a = np.geomspace(lo, hi, 200)[:, None]
    b = np.geomspace(lo, hi, 400)[None, :]
    approx = sum(split.alpha(r, a) * split.beta(r, b) for r in range(R))
    split.error_bound = float(np.max(np.abs(approx - a * b / (a + b)) / (a * b / (a + b))))
    return split


def dn_cubic(state, mode="lowrank", K=12, R=12):
    """Cubic term ``N3[h, phi]``.

    Modes
    -----
    ``direct``
        Triple sum over retained modes ``max|j| <= K`` (``K <= 24``).
    ``lowrank``
        Rank-``R`` separation of ``|xi||sigma|/(|xi|+|sigma|)``; the
        remaining bracket is a sum of products, evaluated with padded FFTs.
    ``operator``
        Third-order operator form
        ``-(|D| h^2 D^2 + D^2 h^2 |D| - 2 |D| h |D| h |D|) phi / 2``, which
        equals the symmetrization of the kernel over the two height factors.
    """
    grid = state.grid
    if mode == "direct":
        if K > 24:
            raise ValueError("direct cubic sum requires K <= 24")
        return _cubic_direct(state, K)
    if mode == "operator":
        return _cubic_operator(state)
    if mode != "lowrank":
        raise ValueError(f"unknown mode {mode!r}")
    n = grid.n
    kab = grid.kabs
    lo = grid.dk
    hi = float(kab.max())
    split = lowrank_split(lo, hi, R)
    h = state.h.coeffs
    hx, hy = 1j * grid.k[0] * h, 1j * grid.k[1] * h
    gradsq = _mul(hx, hx, n) + _mul(hy, hy, n)
    hh = _mul(h, h, n)
    out = np.zeros((n, n), complex)
    for r in range(R):
        p = state.phi.coeffs * split.beta(r, kab)
        hp = _mul(h, p, n)
        t = (kab * _mul(h, kab * hp, n)
             - kab * _mul(hh, kab * p, n)
             - _mul(h, kab**2 * hp, n)
             + _mul(h, kab * _mul(h, kab * p, n), n)
             + _mul(gradsq, p, n))
        out += split.alpha(r, kab) * t
    return GridField(grid, hermitian_part(out), True)


def _cubic_operator(state):
    grid = state.grid
    n = grid.n
    kab = grid.kabs
    h = state.h.coeffs
    p = state.phi.coeffs
    hh = _mul(h, h, n)
    t1 = kab * _mul(hh, kab**2 * p, n)
    t2 = kab**2 * _mul(hh, kab * p, n)
    t3 = kab * _mul(h, kab * _mul(h, kab * p, n), n)
    return GridField(grid, hermitian_part(-0.5 * (t1 + t2 - 2 * t3)), True)


def _cubic_direct(state, K):
    grid = state.grid
    n = grid.n
    dk = grid.dk
    r = np.arange(-K, K + 1)
    a1, a2 = np.meshgrid(r, r, indexing="ij")
    a1, a2 = a1.ravel(), a2.ravel()
    hv = state.h.coeffs[a1 % n, a2 % n]
    pv = state.phi.coeffs[a1 % n, a2 % n]
    hs = np.nonzero(hv)[0]
    ps = np.nonzero(pv)[0]
    out = np.zeros(n * n, complex)
    # frequencies: sigma (phi), B = eta - sigma (second h), A = xi - eta (first h)
    A1, B1 = np.meshgrid(a1[hs], a1[hs], indexing="ij")
    A2, B2 = np.meshgrid(a2[hs], a2[hs], indexing="ij")
    HA, HB = np.meshgrid(hv[hs], hv[hs], indexing="ij")
    amp_h = (HA * HB).ravel()
    A1, A2, B1, B2 = A1.ravel(), A2.ravel(), B1.ravel(), B2.ravel()
    for s in ps:
        s1, s2 = a1[s], a2[s]
        e1, e2 = B1 + s1, B2 + s2
        x1, x2 = A1 + e1, A2 + e2
        ok = (x1 >= -n // 2) & (x1 < n // 2) & (x2 >= -n // 2) & (x2 < n // 2)
        xi = np.stack([x1[ok], x2[ok]], -1) * dk
        eta = np.stack([e1[ok], e2[ok]], -1) * dk
        sig = np.array([s1, s2]) * dk
        val = cubic_kernel(xi, eta, sig) * amp_h[ok] * pv[s]
        idx = (x1[ok] % n) * n + (x2[ok] % n)
        out += np.bincount(idx, weights=val.real, minlength=n * n)
        out += 1j * np.bincount(idx, weights=val.imag, minlength=n * n)
    return GridField(grid, hermitian_part(out.reshape(n, n)), True)


def quadratic_shell_bound(grid, ks, samples=2000, seed=0):
    """Ratio ``max |n2| / (2^min(k,k1) 2^k2)`` over dyadic shells (sampled)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    table = {}
    for k in ks:
        for k1 in ks:
            for k2 in ks:
                r1 = 2.0**k1 * rng.uniform(0.5, 2, samples)
                r2 = 2.0**k2 * rng.uniform(0.5, 2, samples)
                t1 = rng.uniform(0, 2 * np.pi, samples)
                t2 = rng.uniform(0, 2 * np.pi, samples)
                d = np.stack([r1 * np.cos(t1), r1 * np.sin(t1)], -1)
                eta = np.stack([r2 * np.cos(t2), r2 * np.sin(t2)], -1)
                xi = d + eta
                nx = np.linalg.norm(xi, axis=-1)
                keep = (nx > 2.0 ** (k - 1)) & (nx < 2.0 ** (k + 1))
                if not np.any(keep):
                    continue
                v = np.abs(quadratic_kernel(xi[keep, 0], xi[keep, 1], eta[keep, 0], eta[keep, 1]))
                ratio = float(v.max() / (2.0 ** min(k, k1) * 2.0**k2))
                table[(k, k1, k2)] = ratio
                worst = max(worst, ratio)
    return worst, table


# --------------------------------------------------- derived boundary fields

@dataclass
class BoundaryFields:
    B: GridField
    V: tuple
    omega: GridField
    chi_threshold: int


def boundary_fields(state, G, chi_threshold=DEFAULT_CHI):
    """``B``, ``V`` and the good unknown ``omega = phi - T_B h``."""
    grid = state.grid
    hx, hy = _grad(state.h)
    px, py = _grad(state.phi)
    hxp, hyp = hx.physical(), hy.physical()
    den = 1 + hxp**2 + hyp**2
    Bp = (G.physical() + hxp * px.physical() + hyp * py.physical()) / den
    B = GridField.from_physical(grid, Bp, real=True)
    V = (GridField.from_physical(grid, px.physical() - Bp * hxp, real=True),
         GridField.from_physical(grid, py.physical() - Bp * hyp, real=True))
    tb = weyl_apply(Symbol.function(B), state.h, chi_threshold)
    omega = GridField(grid, hermitian_part(state.phi.coeffs - tb.coeffs), True)
    return BoundaryFields(B, V, omega, chi_threshold)


# ----------------------------------------------------------------- symbols

def _angular_expansion(grid, func, P=8):
    """Separable form ``sum_p c_p(x) e^{i p theta}`` of ``func(x, cos, sin)``.

    ``func`` receives the physical grid arrays and one unit direction.
    """
    nth = 2 * P + 2
    th = 2 * np.pi * np.arange(nth) / nth
    vals = np.stack([func(np.cos(t), np.sin(t)) for t in th])
    coef = np.fft.fft(vals, axis=0) / nth
    terms = []
    for p in range(-P, P + 1):
        c = coef[p % nth]
        if not np.any(np.abs(c) > 1e-17 * np.abs(coef).max()):
            continue
        field_c = GridField.from_physical(grid, c, real=False)
        terms.append((field_c, _harmonic(p)))
    return terms


def _harmonic(p):
    """Multiplier ``((z1 + i z2)/|z|)**p`` built from library members."""
    if p == 0:
        return mult.one()
    z = mult.Coord(0) + mult.Scaled(1j if p > 0 else -1j, mult.Coord(1))
    out = z
    for _ in range(abs(p) - 1):
        out = out * z
    return out * mult.AbsPower(-abs(p))


def _surface_geometry(state):
    hx, hy = _grad(state.h)
    hxp, hyp = hx.physical(), hy.physical()
    return hxp, hyp, 1 + hxp**2 + hyp**2


@dataclass
class DNSymbol:
    """Principal and subprincipal parts of the paralinearized operator."""

    principal: Symbol
    subprincipal: Symbol
    linear_subprincipal: Symbol

    @property
    def full(self):
        if self.principal.separable and self.subprincipal.separable:
            return self.principal + self.subprincipal
        p, s = self.principal, self.subprincipal
        return Symbol(p.grid, func=lambda x1, x2, z1, z2: (p.evaluate(z1, z2)
                                                           + s.evaluate(z1, z2)), order=1)


def high_pass_multiplier():
    """``phi_{>=0}(|zeta|)`` with sampled derivatives."""
    return mult.Sampled(lambda z1, z2: cutoffs.ge(np.hypot(z1, z2), 0))


class _SurfaceJet:
    """First and second derivatives of ``h`` in physical space."""

    def __init__(self, state):
        h = state.h
        self.g = [derivative(h, i).physical() for i in (0, 1)]
        self.hess = [[derivative(derivative(h, i), j).physical() for j in (0, 1)]
                     for i in (0, 1)]
        self.q = 1 + self.g[0] ** 2 + self.g[1] ** 2
        self.dq = [2 * (self.g[0] * self.hess[0][j] + self.g[1] * self.hess[1][j])
                   for j in (0, 1)]
        self.lap = self.hess[0][0] + self.hess[1][1]

    def principal(self, z1, z2):
        d = z1 * self.g[0] + z2 * self.g[1]
        return np.sqrt(np.maximum(self.q * (z1 * z1 + z2 * z2) - d * d, 0.0))

    def subprincipal(self, z1, z2):
        z = (z1, z2)
        g, q = self.g, self.q
        r2 = z1 * z1 + z2 * z2
        d = z1 * g[0] + z2 * g[1]
        lam = self.principal(z1, z2)
        safe = np.where(lam > 0, lam, 1.0)
        br = 0.0
        for j in (0, 1):
            dj = z1 * self.hess[0][j] + z2 * self.hess[1][j]
            dx_lam = (r2 * self.dq[j] - 2 * d * dj) / (2 * safe)
            dx_a = dx_lam / q - lam * self.dq[j] / q**2
            dz_b = g[j] / q
            dz_a = (q * z[j] - d * g[j]) / safe / q
            dx_b = dj / q - d * self.dq[j] / q**2
            br = br + dx_a * dz_b - dz_a * dx_b
        val = q * q / (2 * safe) * br + 0.5 * self.lap
        hp = cutoffs.ge(np.sqrt(r2), 0)
        return np.where(lam > 0, val * hp, 0.0)


def dn_symbol(state, separable=False, P=8):
    """Symbol ``lambda_DN = lambda1 + lambda0`` of the paralinearized DN operator.

    ``lambda1 = sqrt((1+|grad h|^2)|zeta|^2 - (zeta . grad h)^2)`` and
    ``lambda0 = ((1+|grad h|^2)^2/(2 lambda1) {lambda1/(1+|grad h|^2),
    zeta.grad h/(1+|grad h|^2)} + Delta h / 2) phi_{>=0}(zeta)``.

    Parameters
    ----------
    separable : bool
        If False (default) both parts are closed-form callables evaluated
        pointwise, which the direct quantization path uses.  If True they are
        separable sums: the angular dependence is expanded in ``P``
        harmonics and the bracket is taken with :func:`poisson_bracket`.
    """
    state.check_slope()
    grid = state.grid
    lin = _linear_subprincipal(state)
    if not separable:
        jet = _SurfaceJet(state)
        lam1 = Symbol(grid, func=lambda x1, x2, z1, z2: jet.principal(z1, z2), order=1)
        lam0 = Symbol(grid, func=lambda x1, x2, z1, z2: jet.subprincipal(z1, z2), order=0)
        return DNSymbol(lam1, lam0, lin)
    hxp, hyp, q = _surface_geometry(state)

    def unit(c, s):
        return np.sqrt(q - (c * hxp + s * hyp) ** 2)

    ang = _angular_expansion(grid, unit, P)
    lam1 = Symbol(grid, [(c, w * mult.abs_zeta()) for c, w in ang], order=1)
    inv_q = GridField.from_physical(grid, 1.0 / q, real=True)
    first = Symbol(grid, [(product(c, inv_q, dealias="none"), w * mult.abs_zeta())
                          for c, w in ang], order=1)
    hx_q = GridField.from_physical(grid, hxp / q, real=True)
    hy_q = GridField.from_physical(grid, hyp / q, real=True)
    second = Symbol(grid, [(hx_q, mult.Coord(0)), (hy_q, mult.Coord(1))], order=1)
    br = poisson_bracket(first, second)
    pref = _angular_expansion(grid, lambda c, s: q * q / (2 * unit(c, s)), P)
    pref_sym = Symbol(grid, [(c, w * mult.AbsPower(-1)) for c, w in pref], order=-1)
    lap = derivative(derivative(state.h, 0), 0) + derivative(derivative(state.h, 1), 1)
    hp = high_pass_multiplier()
    inner = pref_sym * br + Symbol.function(lap * 0.5)
    lam0 = Symbol(grid, [(c, w * hp) for c, w in inner.terms], order=0)
    return DNSymbol(lam1, lam0, lin)


def _linear_subprincipal(state):
    """``(Delta h / 2 - zeta_j zeta_k d_j d_k h / (2|zeta|^2)) phi_{>=0}(zeta)``."""
    grid = state.grid
    hp = high_pass_multiplier()
    d = lambda i, j: derivative(derivative(state.h, i), j)
    lap = d(0, 0) + d(1, 1)
    inv2 = mult.AbsPower(-2)
    terms = [(lap * 0.5, hp)]
    for i in (0, 1):
        for j in (0, 1):
            terms.append((d(i, j) * -0.5, mult.Coord(i) * mult.Coord(j) * inv2 * hp))
    return Symbol(grid, terms, order=0)


def principal_symbol_values(state, z1, z2):
    """Direct evaluation of ``lambda1`` on the grid for one ``zeta``."""
    hxp, hyp, q = _surface_geometry(state)
    return np.sqrt(q * (z1 * z1 + z2 * z2) - (z1 * hxp + z2 * hyp) ** 2)


# ------------------------------------------------------- paralinearization

def paralin_defect(state, G=None, chi_threshold=DEFAULT_CHI, dn_kwargs=None):
    """Residual ``G(h)phi - T_lambda omega + div(T_V h)``.

    Returns
    -------
    (residual field, dict of the pieces' norms)
    """
    if G is None:
        G = dn_exact(state, **(dn_kwargs or {})).G
    bf = boundary_fields(state, G, chi_threshold)
    sym = dn_symbol(state)
    t_lam = weyl_apply(sym.full, bf.omega, chi_threshold)
    tv1 = weyl_apply(Symbol.function(bf.V[0]), state.h, chi_threshold)
    tv2 = weyl_apply(Symbol.function(bf.V[1]), state.h, chi_threshold)
    div_tv = derivative(tv1, 0).coeffs + derivative(tv2, 1).coeffs
    res = G.coeffs - t_lam.coeffs + div_tv
    out = GridField(state.grid, hermitian_part(res), True)
    info = {"G": G.norm(), "T_lambda_omega": t_lam.norm(),
            "div_TV_h": GridField(state.grid, div_tv, False).norm(),
            "residual": out.norm(), "chi_threshold": chi_threshold}
    return out, info


def curvature_coefficients(state):
    """``L_ij = (delta_ij - h_i h_j / (1+|grad h|^2)) / sqrt(1+|grad h|^2)``."""
    hxp, hyp, q = _surface_geometry(state)
    s = np.sqrt(q)
    h = (hxp, hyp)
    return [[((1.0 if i == j else 0.0) - h[i] * h[j] / q) / s for j in (0, 1)] for i in (0, 1)]


def gravity_capillary_h(state):
    """``Lambda^2 h = (|D| + |D|^3) h`` in physical space."""
    k = state.grid.kabs
    return state.h.multiply(k + k**3, real=True).physical()


def ell_values(state, z1, z2):
    """``g + ell(x, zeta) = 1 + L_ij zeta_i zeta_j - Lambda^2 h`` for one ``zeta``."""
    L = curvature_coefficients(state)
    lh = gravity_capillary_h(state)
    z = (z1, z2)
    quad = sum(L[i][j] * z[i] * z[j] for i in (0, 1) for j in (0, 1))
    return 1.0 + quad - lh


def _callable_symbol(grid, func, order):
    return Symbol(grid, func=lambda x1, x2, z1, z2: func(z1, z2), order=order)


def diagonal_variable(state, G=None, chi_threshold=DEFAULT_CHI, dn_kwargs=None, K=None):
    """Complex unknown ``U = T_{sqrt(g+l)} h + i T_Sigma T_{1/sqrt(g+l)} omega + i T_m' omega``.

    ``Sigma = sqrt(lambda_DN (g + l))`` and ``m' = (i/2) div V / sqrt(g + l)``
    with ``g = sigma = 1``.  The non-separable symbols are quantized by the
    direct double sum with truncation ``K`` (default: the full grid).
    """
    grid = state.grid
    if G is None:
        G = dn_exact(state, **(dn_kwargs or {})).G
    if K is None:
        K = grid.n // 2 - 1
    bf = boundary_fields(state, G, chi_threshold)
    sym = dn_symbol(state)
    lam = sym.full

    def gl(z1, z2):
        return ell_values(state, z1, z2)

    def sigma(z1, z2):
        return np.sqrt(np.maximum(lam.evaluate(z1, z2).real, 0.0) * gl(z1, z2))

    divV = (derivative(bf.V[0], 0) + derivative(bf.V[1], 1)).physical()
    sq = _callable_symbol(grid, lambda a, b: np.sqrt(gl(a, b)), 1)
    isq = _callable_symbol(grid, lambda a, b: 1.0 / np.sqrt(gl(a, b)), -1)
    sig = _callable_symbol(grid, sigma, 1.5)
    mprime = _callable_symbol(grid, lambda a, b: 0.5j * divV / np.sqrt(gl(a, b)), -1)
    h_part = weyl_apply(sq, state.h, chi_threshold, K=K)
    inner = weyl_apply(isq, bf.omega, chi_threshold, K=K)
    w_part = weyl_apply(sig, inner, chi_threshold, K=K)
    m_part = weyl_apply(mprime, bf.omega, chi_threshold, K=K)
    U = h_part.coeffs + 1j * w_part.coeffs + 1j * m_part.coeffs
    return GridField(grid, U, False), bf


def linear_diagonal_variable(state, omega):
    """``sqrt(1 - Delta) h + i |D|^{1/2} omega``."""
    k = state.grid.kabs
    c = np.sqrt(1 + k * k) * state.h.coeffs + 1j * np.sqrt(k) * omega.coeffs
    return GridField(state.grid, c, False)


def amplitude_slope(eps, values):
    """Least-squares slope of ``log(values)`` against ``log(eps)``."""
    return float(np.polyfit(np.log(eps), np.log(values), 1)[0])
