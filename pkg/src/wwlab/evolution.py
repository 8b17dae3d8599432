"""Time integration of the gravity-capillary water-wave system (``g = sigma = 1``).

    h_t   = G(h) phi
    phi_t = -h + div(grad h / sqrt(1+|grad h|^2)) - |grad phi|^2 / 2
            + (G(h) phi + grad h . grad phi)^2 / (2 (1+|grad h|^2))

The state is advanced in the complex variable
``U = <D> h + i |D|^{1/2} phi`` with ``(d_t + i Lambda) U = N(U)``; the
linear flow is applied exactly and the nonlinearity by classical RK4 in the
rotating frame (integrating-factor RK4).

The mean of ``phi`` does not enter the dynamics and is not carried: fields
rebuilt from ``U`` have ``mean(phi) = 0``.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cutoffs
from .dirichlet_neumann import SurfaceState, dn_cubic, dn_exact, dn_quadratic, quadratic_kernel
from .dispersion import frequency, frequency_deriv, inflection_radius
from .grid import Grid2D, GridField, hermitian_part, write_field
from .spectral import _pad, _unpad, frequency_symbol, propagate, z1_norm

DN_ORDERS = ("linear", "2", "3", "exact")
STABILITY_CONSTANT = 2.0 * np.sqrt(2.0)


class ConfigError(ValueError):
    """Invalid simulation configuration."""


class BlowUpError(RuntimeError):
    """Non-finite values produced by a step."""

    def __init__(self, message, time=None, last_norm=None):
        super().__init__(message)
        self.time = time
        self.last_norm = last_norm


def default_dealias(dn_order):
    return "2/3" if dn_order in ("linear", "2") else "1/2"


# ------------------------------------------------------ variable changes

def _jbracket(grid):
    return np.sqrt(1.0 + grid.kabs**2)


def to_complex(state):
    """``U = <D> h + i |D|^{1/2} phi``."""
    g = state.grid
    c = _jbracket(g) * state.h.coeffs + 1j * np.sqrt(g.kabs) * state.phi.coeffs
    return GridField(g, c, False)


def from_complex(U):
    """Inverse of :func:`to_complex` with ``mean(phi) = 0``."""
    g = U.grid
    c = U.coeffs
    cbar = np.conj(c[(-g.index[0]) % g.n, (-g.index[1]) % g.n])
    hc = 0.5 * (c + cbar) / _jbracket(g)
    sk = np.sqrt(g.kabs)
    with np.errstate(divide="ignore", invalid="ignore"):
        pc = np.where(g.kabs > 0, (c - cbar) / (2j * np.where(sk > 0, sk, 1.0)), 0.0)
    return SurfaceState(GridField(g, hermitian_part(hc), True),
                        GridField(g, hermitian_part(pc), True))


# --------------------------------------------------------- right-hand side

class _Padded:
    """Physical values of spectral expressions on a ``2n`` grid."""

    def __init__(self, grid):
        self.grid = grid
        self.n = grid.n
        self.m = 2 * grid.n
        j = np.fft.fftfreq(self.m, 1.0 / self.m)
        k1, k2 = np.meshgrid(j * grid.dk, j * grid.dk, indexing="ij")
        self.k = (k1, k2)
        self.kabs = np.hypot(k1, k2)

    def phys(self, c):
        return np.real(np.fft.ifft2(_pad(c, self.m))) * self.m**2

    def coeffs_m(self, v):
        return np.fft.fft2(v) / self.m**2

    def back(self, cm):
        return _unpad(cm, self.n)


def dn_apply(state, dn_order, dn_kwargs=None):
    """``G(h) phi`` at the requested order of the expansion in ``h``."""
    if dn_order not in DN_ORDERS:
        raise ConfigError(f"unknown dn order {dn_order!r}")
    g = state.grid
    lin = state.phi.multiply(g.kabs, real=True)
    if dn_order == "linear":
        return lin
    if dn_order == "exact":
        return dn_exact(state, **(dn_kwargs or {})).G
    out = lin + dn_quadratic(state)
    if dn_order == "3":
        out = out + dn_cubic(state, mode="operator")
    return out


def rhs(state, dn_order="exact", dealias=None, dn_kwargs=None, check=True):
    """Time derivatives ``(h_t, phi_t)``.

    For the truncated orders ``"2"`` and ``"3"`` the potential equation is
    the matching Taylor truncation of the full one, which makes the truncated
    system Hamiltonian for the truncated energy.  ``"exact"`` uses the full
    formula with the exact DN operator; ``"linear"`` the linearization.
    Products are formed on a doubled grid and the result is restricted to
    the retained band of ``dealias``.
    """
    if dn_order not in DN_ORDERS:
        raise ConfigError(f"unknown dn order {dn_order!r}")
    if dealias is None:
        dealias = default_dealias(dn_order)
    g = state.grid
    mask = g.dealias_mask(dealias)
    if check and dn_order != "linear":
        state.check_slope()
    k2 = g.kabs**2
    if dn_order == "linear":
        dh = state.phi.coeffs * g.kabs
        dphi = -(1 + k2) * state.h.coeffs
        return (GridField(g, dh * mask, True), GridField(g, hermitian_part(dphi * mask), True))
    G = dn_apply(state, dn_order, dn_kwargs)
    P = _Padded(g)
    hc, pc = state.h.coeffs, state.phi.coeffs
    kx, ky = g.k
    hx, hy = P.phys(1j * kx * hc), P.phys(1j * ky * hc)
    px, py = P.phys(1j * kx * pc), P.phys(1j * ky * pc)
    q = 1 + hx * hx + hy * hy
    sq = np.sqrt(q)
    fx, fy = P.coeffs_m(hx / sq), P.coeffs_m(hy / sq)
    curv = P.back(1j * P.k[0] * fx + 1j * P.k[1] * fy)
    if dn_order == "exact":
        Gp = P.phys(G.coeffs)
        nl = -0.5 * (px * px + py * py) + (Gp + hx * px + hy * py) ** 2 / (2 * q)
    else:
        dp = P.phys(g.kabs * pc)
        nl = -0.5 * (px * px + py * py) + 0.5 * dp * dp
        if dn_order == "3":
            hp = P.phys(hc)
            d2p = P.phys(k2 * pc)
            inner = P.phys(P.back(P.kabs * P.coeffs_m(hp * dp)))
            nl = nl + dp * (hp * d2p - inner)
    dphi = -hc + curv + P.back(P.coeffs_m(nl))
    return (GridField(g, hermitian_part(G.coeffs * mask), True),
            GridField(g, hermitian_part(dphi * mask), True))


def nonlinearity(U, dn_order="exact", dealias=None, dn_kwargs=None):
    """``N(U) = (d_t + i Lambda) U`` evaluated through :func:`rhs`."""
    g = U.grid
    state = from_complex(U)
    dh, dphi = rhs(state, dn_order, dealias, dn_kwargs)
    jb = _jbracket(g)
    sk = np.sqrt(g.kabs)
    # subtract the linear part term by term to avoid cancellation in U
    lin_h = g.kabs * state.phi.coeffs
    lin_p = -(1 + g.kabs**2) * state.h.coeffs
    mask = g.dealias_mask(dealias or default_dealias(dn_order))
    c = jb * (dh.coeffs - lin_h * mask) + 1j * sk * (dphi.coeffs - lin_p * mask)
    return GridField(g, c, False)


# ----------------------------------------------------------------- energy

def hamiltonian(state, dn_order="exact", dn_kwargs=None):
    """``H = <G(h) phi, phi>/2 + int h^2 / 2 + int |grad h|^2 / (1 + sqrt(1+|grad h|^2))``.

    With ``dn_order="linear"`` the surface term is its quadratic part
    ``int |grad h|^2 / 2``.
    """
    g = state.grid
    G = dn_apply(state, dn_order, dn_kwargs)
    kinetic = 0.5 * G.inner(state.phi).real
    pot = 0.5 * state.h.norm() ** 2
    P = _Padded(g)
    hx = P.phys(1j * g.k[0] * state.h.coeffs)
    hy = P.phys(1j * g.k[1] * state.h.coeffs)
    s = hx * hx + hy * hy
    dens = 0.5 * s if dn_order == "linear" else s / (1 + np.sqrt(1 + s))
    surf = g.L**2 * float(np.mean(dens))
    return float(kinetic + pot + surf)


def quadratic_energy(state):
    """``(||D|^{1/2} phi||^2 + ||h||^2 + ||grad h||^2) / 2``."""
    g = state.grid
    a = np.sum(g.kabs * np.abs(state.phi.coeffs) ** 2)
    b = np.sum((1 + g.kabs**2) * np.abs(state.h.coeffs) ** 2)
    return float(0.5 * g.L**2 * (a + b))


# ------------------------------------------------------------ integrator

def stability_number(grid, dt, dealias):
    """``|dt| * max lambda'(|xi|) * n * dk`` over retained modes."""
    mask = grid.dealias_mask(dealias)
    k = grid.kabs[mask & (grid.kabs > 0)]
    return float(abs(dt) * frequency_deriv(k, 1).max() * grid.n * grid.dk)


def step(U, dt, dn_order="exact", dealias=None, dn_kwargs=None, time=None):
    """One integrating-factor RK4 step of ``(d_t + i Lambda) U = N(U)``."""
    lam = frequency_symbol(U.grid)
    e_half = np.exp(-0.5j * dt * lam)
    e_full = e_half * e_half
    N = lambda c: nonlinearity(GridField(U.grid, c, False), dn_order, dealias,
                               dn_kwargs).coeffs
    u = U.coeffs
    k1 = N(u)
    k2 = N(e_half * (u + 0.5 * dt * k1))
    k3 = N(e_half * u + 0.5 * dt * k2)
    k4 = N(e_full * u + dt * e_half * k3)
    new = e_full * u + dt / 6.0 * (e_full * k1 + 2 * e_half * (k2 + k3) + k4)
    if not np.all(np.isfinite(new)):
        raise BlowUpError("non-finite values after step", time,
                          float(np.sqrt(np.sum(np.abs(u) ** 2))))
    return GridField(U.grid, new, False)


def linear_step_error(U, dt):
    """Distance between one linear-mode step and the exact propagator."""
    a = step(U, dt, "linear")
    b = propagate(U, dt)
    return float(np.max(np.abs(a.coeffs - b.coeffs)))


# ------------------------------------------------------------ initial data

def initial_data(grid, recipe="gaussian", eps=1e-2, seed=0, mode=(16, 0), centre=1.0,
                 width=0.25, hole_width=0.2, dealias="1/2"):
    """Initial surface state with ``max |h| = eps``.

    Recipes
    -------
    ``single_mode``
        ``h = eps cos(xi0 . x)``, ``phi = 0`` with ``xi0 = mode * dk``.
    ``gaussian``
        ``U^`` with modulus ``exp(-(|xi| - centre)^2 / (2 width^2))`` and
        random phases from ``seed``.
    ``gaussian_hole``
        As ``gaussian`` times ``1 - phi((|xi| - gamma0) / hole_width)``,
        which vanishes near the inflection radius of the dispersion relation.
    """
    if recipe == "single_mode":
        k1, k2 = mode[0] * grid.dk, mode[1] * grid.dk
        h = GridField.from_function(grid, lambda x, y: np.cos(k1 * x + k2 * y))
        phi = GridField.zeros(grid)
        s = SurfaceState(h, phi)
    elif recipe in ("gaussian", "gaussian_hole"):
        rng = np.random.default_rng(seed)
        r = grid.kabs
        amp = np.exp(-((r - centre) ** 2) / (2 * width**2))
        if recipe == "gaussian_hole":
            amp = amp * (1 - cutoffs.base((r - inflection_radius()) / hole_width))
        amp = amp * grid.dealias_mask(dealias) * (r > 0)
        phase = np.exp(2j * np.pi * rng.random(r.shape))
        s = from_complex(GridField(grid, amp * phase, False))
    else:
        raise ConfigError(f"unknown initial-data recipe {recipe!r}")
    sup = s.h.sup()
    if sup == 0:
        return s.scaled(0.0)
    return s.scaled(eps / sup)


# -------------------------------------------------------------- run loop

@dataclass
class SimConfig:
    """Simulation parameters.  ``recipe`` holds keyword arguments of :func:`initial_data`."""

    n: int = 64
    L: float = 32 * np.pi
    dt: float = 1e-2
    T_final: float = 1.0
    dn_order: str = "3"
    dealias: str | None = None
    cadence: int = 10
    seed: int = 0
    recipe: dict = field(default_factory=lambda: {"recipe": "gaussian", "eps": 1e-2})
    sobolev_orders: tuple = (0, 2)
    z_norm: bool = False
    dn_kwargs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sobolev_orders = tuple(self.sobolev_orders)
        if self.dn_order not in DN_ORDERS:
            raise ConfigError(f"unknown dn order {self.dn_order!r}")
        if self.dealias is None:
            self.dealias = default_dealias(self.dn_order)
        if self.dealias not in ("2/3", "1/2", "none"):
            raise ConfigError(f"unknown dealias rule {self.dealias!r}")
        if not (self.dt > 0 and self.T_final >= 0 and self.cadence >= 1):
            raise ConfigError("dt must be positive, T_final nonnegative, cadence >= 1")
        try:
            self.grid = Grid2D(self.n, self.L)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        num = stability_number(self.grid, self.dt, self.dealias)
        if num > STABILITY_CONSTANT:
            raise ConfigError(f"stability number {num:.3g} exceeds {STABILITY_CONSTANT:.3g}")

    @property
    def steps(self):
        return int(round(self.T_final / self.dt))

    def to_dict(self):
        d = asdict(self)
        d["sobolev_orders"] = list(self.sobolev_orders)
        d.pop("grid", None)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**d)


@dataclass
class Trajectory:
    """Snapshots and diagnostic series of a run."""

    config: SimConfig
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    failed: bool = False
    error: str = ""

    def record(self, t, state, values):
        if self.times and t <= self.times[-1]:
            raise ValueError("timestamps must increase")
        self.times.append(float(t))
        self.states.append(state)
        for k, v in values.items():
            self.diagnostics.setdefault(k, []).append(float(v))

    def columns(self):
        return ["t"] + list(self.diagnostics)

    def rows(self):
        keys = list(self.diagnostics)
        return [[t] + [self.diagnostics[k][i] for k in keys] for i, t in enumerate(self.times)]

    def save(self, directory):
        """Write ``config.json``, field snapshots and ``diagnostics.csv``."""
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "config.json"), "w") as fh:
            json.dump({"config": self.config.to_dict(), "failed": self.failed,
                       "error": self.error}, fh, indent=2, default=float)
        snap = os.path.join(directory, "snapshots")
        os.makedirs(snap, exist_ok=True)
        for i, s in enumerate(self.states):
            write_field(os.path.join(snap, f"h_{i:05d}.cwf"), s.h)
            write_field(os.path.join(snap, f"phi_{i:05d}.cwf"), s.phi)
        with open(os.path.join(directory, "diagnostics.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])


def diagnostics(state, U, t, config):
    g = state.grid
    jb = _jbracket(g)
    out = {"H": hamiltonian(state, config.dn_order, config.dn_kwargs),
           "mean_h": float(state.h.mean().real)}
    for s in config.sobolev_orders:
        out[f"H{s}"] = float(g.L * np.sqrt(np.sum(jb ** (2 * s) * np.abs(U.coeffs) ** 2)))
    out["sup_U"] = U.sup()
    if config.z_norm:
        out["z1_V"] = z1_norm(propagate(U, -t)).value
    return out


def run(config, state=None):
    """Integrate from ``state`` (default: the configured recipe) to ``T_final``.

    Step failures stop the run and return the partial trajectory with
    ``failed`` set.
    """
    g = config.grid
    if state is None:
        kw = dict(config.recipe)
        recipe = kw.pop("recipe", "gaussian")
        state = initial_data(g, recipe, seed=config.seed, **kw)
    mask = g.dealias_mask(config.dealias)
    U = GridField(g, to_complex(state).coeffs * mask, False)
    traj = Trajectory(config)
    t = 0.0
    traj.record(t, from_complex(U), diagnostics(from_complex(U), U, t, config))
    for i in range(1, config.steps + 1):
        try:
            U = step(U, config.dt, config.dn_order, config.dealias, config.dn_kwargs, t)
        except (BlowUpError, ArithmeticError, RuntimeError, ValueError) as exc:
            traj.failed = True
            traj.error = f"{type(exc).__name__}: {exc}"
            break
        t = i * config.dt
        if i % config.cadence == 0 or i == config.steps:
            s = from_complex(U)
            traj.record(t, s, diagnostics(s, U, t, config))
    return traj


def oscillation_frequency(times, values):
    """Angular frequency from the unwrapped phase of a complex time series."""
    ph = np.unwrap(np.angle(np.asarray(values)))
    return float(-np.polyfit(np.asarray(times), ph, 1)[0])


def single_mode_frequency(mode=(16, 0), eps=1e-6, periods=10, steps_per_period=64,
                          n=64, L=32 * np.pi, dn_order="3"):
    """Measured and predicted angular frequency of a single-mode solution."""
    g = Grid2D(n, L)
    s = initial_data(g, "single_mode", eps=eps, mode=mode)
    k = np.hypot(*mode) * g.dk
    omega = float(frequency(k))
    dt = 2 * np.pi / omega / steps_per_period
    U = to_complex(s)
    idx = (mode[0] % n, mode[1] % n)
    ts, vals = [0.0], [U.coeffs[idx]]
    for i in range(1, periods * steps_per_period + 1):
        U = step(U, dt, dn_order)
        ts.append(i * dt)
        vals.append(U.coeffs[idx])
    return oscillation_frequency(ts, vals), omega


# ------------------------------------------------------ reduced equation

def reduced_terms(state):
    """Quadratic and cubic terms ``(N2, N3)`` of the complex equation."""
    g = state.grid
    jb = _jbracket(g)
    sk = np.sqrt(g.kabs)
    P = _Padded(g)
    hc, pc = state.h.coeffs, state.phi.coeffs
    kx, ky = g.k
    n2 = dn_quadratic(state)
    n3 = dn_cubic(state, mode="operator")
    px, py = P.phys(1j * kx * pc), P.phys(1j * ky * pc)
    hx, hy = P.phys(1j * kx * hc), P.phys(1j * ky * hc)
    dp = P.phys(g.kabs * pc)
    q2 = P.back(P.coeffs_m(-0.5 * (px * px + py * py) + 0.5 * dp * dp))
    s = hx * hx + hy * hy
    cub_div = P.back(1j * P.k[0] * P.coeffs_m(hx * s) + 1j * P.k[1] * P.coeffs_m(hy * s))
    q3 = -0.5 * cub_div + P.back(P.coeffs_m(dp * (P.phys(n2.coeffs) + hx * px + hy * py)))
    N2 = jb * n2.coeffs + 1j * sk * q2
    N3 = jb * n3.coeffs + 1j * sk * q3
    return GridField(g, N2, False), GridField(g, N3, False)


def reduced_rhs_check(state, dn_kwargs=None):
    """Norms of ``(d_t + i Lambda) U`` and of its defect after ``N2`` and ``N3``."""
    U = to_complex(state)
    full = nonlinearity(U, "exact", "none", dn_kwargs)
    N2, N3 = reduced_terms(state)
    d2 = full.coeffs - N2.coeffs
    d3 = d2 - N3.coeffs
    L = state.grid.L
    nrm = lambda c: float(L * np.sqrt(np.sum(np.abs(c) ** 2)))
    return {"nonlinearity": nrm(full.coeffs), "N2": nrm(N2.coeffs), "N3": nrm(N3.coeffs),
            "defect_after_N2": nrm(d2), "defect_after_N3": nrm(d3)}


def reduced_quadratic_symbols(xi, eta):
    """The two quadratic symbols of the complex equation on ``(..., 2)`` arrays."""
    nx = np.linalg.norm(xi, axis=-1)
    ne = np.linalg.norm(eta, axis=-1)
    d = xi - eta
    nd = np.linalg.norm(d, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s1 = (np.sqrt(1 + nx**2) * quadratic_kernel(xi[..., 0], xi[..., 1], eta[..., 0], eta[..., 1])
              / (np.sqrt(ne) * np.sqrt(1 + nd**2)))
        s2 = np.sqrt(nx) * (np.sum(d * eta, axis=-1) + nd * ne) / np.sqrt(nd * ne)
    return s1, s2


def reduced_symbol_bound(ks, samples=2000, seed=0):
    """Max over shells of ``|m| / (2^k 2^{min(k1,k2)/2})`` for both quadratic symbols."""
    rng = np.random.default_rng(seed)
    worst = 0.0
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
            k = np.round(np.log2(np.maximum(nx, 1e-300)))
            ok = nx > 0
            s1, s2 = reduced_quadratic_symbols(xi[ok], eta[ok])
            den = 2.0 ** k[ok] * 2.0 ** (min(k1, k2) / 2)
            worst = max(worst, float(np.max(np.abs(s1) / den)), float(np.max(np.abs(s2) / den)))
    return worst
