"""Reference experiments shared by the command line, the test suite and the demos.

Each function builds its inputs deterministically from a seed and returns a
plain dict of measured quantities (fitted exponents, norms, timings).
"""
from __future__ import annotations

import time

import numpy as np

from . import cutoffs, multipliers as mult
from .dirichlet_neumann import (SurfaceState, amplitude_slope, diagonal_variable, dn_cubic,
                                dn_exact, dn_quadratic, linear_diagonal_variable,
                                paralin_defect)
from .dispersion import inflection_radius
from .evolution import (SimConfig, initial_data, reduced_rhs_check, run, single_mode_frequency,
                        step, to_complex)
from .grid import Grid2D, GridField
from .paradiff import Symbol, composition_sweep
from .spectral import decay_exponent, gaussian_bump, z1_norm

DEFAULT_EPS = tuple(2.0 ** -np.arange(7, 12))


def band_limited_field(grid, seed, band=8):
    """Real random field on modes ``max|j| <= band``, scaled to ``max |f| = 1``."""
    rng = np.random.default_rng(seed)
    c = np.zeros((grid.n, grid.n), complex)
    j1, j2 = grid.index
    m = (np.abs(j1) <= band) & (np.abs(j2) <= band)
    c[m] = rng.normal(size=m.sum()) + 1j * rng.normal(size=m.sum())
    f = GridField(grid, c, False).real_part()
    return f * (1.0 / f.sup())


def unit_state(grid, seed=0, band=8):
    """Surface state with independent unit-size height and potential."""
    return SurfaceState(band_limited_field(grid, 2 * seed + 1, band),
                        band_limited_field(grid, 2 * seed + 2, band))


# ------------------------------------------------------------ DN operator

def dn_expansion_sweep(n=64, L=32 * np.pi, eps=DEFAULT_EPS, seed=0, orders=(2, 3),
                       dn_kwargs=None):
    """Defects of the exact DN operator after the quadratic and cubic terms."""
    t0 = time.time()
    grid = Grid2D(n, L)
    base = unit_state(grid, seed)
    eps = np.asarray(eps, float)
    after = {2: [], 3: []}
    iters = []
    for e in eps:
        s = base.scaled(e)
        res = dn_exact(s, **(dn_kwargs or {}))
        iters.append(res.iterations)
        d = res.G - s.phi.multiply(grid.kabs, real=True) - dn_quadratic(s)
        after[2].append(d.norm())
        if 3 in orders:
            after[3].append((d - dn_cubic(s, mode="lowrank")).norm())
    out = {"eps": eps.tolist(), "iterations": iters, "seconds": time.time() - t0}
    for o in orders:
        out[f"defect_after_order{o}"] = after[o]
        out[f"slope_after_order{o}"] = amplitude_slope(eps, after[o])
    return out


def paralin_sweep(n=64, L=32 * np.pi, eps=DEFAULT_EPS, seed=0, chi_threshold=-2,
                  dn_kwargs=None):
    """Amplitude scaling of the paralinearization and diagonal-variable defects."""
    t0 = time.time()
    grid = Grid2D(n, L)
    base = unit_state(grid, seed)
    eps = np.asarray(eps, float)
    para, diag = [], []
    for e in eps:
        s = base.scaled(e)
        G = dn_exact(s, **(dn_kwargs or {})).G
        r, _ = paralin_defect(s, G, chi_threshold)
        para.append(r.norm())
        U, bf = diagonal_variable(s, G, chi_threshold)
        diag.append((U - linear_diagonal_variable(s, bf.omega)).norm())
    return {"eps": eps.tolist(), "chi_threshold": chi_threshold,
            "paralin_defect": para, "paralin_slope": amplitude_slope(eps, para),
            "diagonal_defect": diag, "diagonal_slope": amplitude_slope(eps, diag),
            "seconds": time.time() - t0}


# ------------------------------------------------------ paradifferential

def composition_benchmark(n=256, L=np.pi, ks=range(3, 8), chi_threshold=-2, seed=0,
                          first_order=False):
    """Dyadic sweep of the composition remainder for ``a = h(x)``, ``b = zeta_1/|zeta|``.

    The input has a flat spectrum per dyadic band (coefficients decaying
    like ``1/|xi|``).  With ``first_order`` the order-one symbol
    ``b = |zeta|`` is used instead.
    """
    t0 = time.time()
    grid = Grid2D(n, L)
    rng = np.random.default_rng(seed)
    c = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    c = c * np.where(grid.kabs > 0, 1 / np.maximum(grid.kabs, 1), 0) * grid.dealias_mask("2/3")
    f = GridField(grid, c, False).real_part()
    h = GridField.from_function(
        grid, lambda x, y: np.cos(2 * x) + 0.5 * np.sin(2 * y) + 0.3 * np.cos(2 * x + 2 * y))
    a = Symbol.function(h)
    if first_order:
        b = Symbol.multiplier(grid, mult.abs_zeta(), order=1)
    else:
        b = Symbol.multiplier(grid, mult.Coord(0) * mult.AbsPower(-1))
    sw = composition_sweep(a, b, f, list(ks), chi_threshold)
    return {"k": sw.k, "relative_error": sw.values, "slope": sw.slope,
            "chi_threshold": chi_threshold, "seconds": time.time() - t0}


# ----------------------------------------------------------- linear decay

def gaussian_spectrum(width=1.5):
    return lambda r: np.exp(-r**2 / (2 * width**2))


def excised_spectrum(width=1.5, hole=0.2):
    g0 = inflection_radius()
    return lambda r: np.exp(-r**2 / (2 * width**2)) * (1 - cutoffs.base((r - g0) / hole))


def linear_decay_benchmark(kind="gaussian", times=None, width=1.5, hole=0.2, cutoff=6.0):
    """Fitted sup-norm decay exponent of radial linear waves over ``t`` in [10, 1000]."""
    t0 = time.time()
    if times is None:
        times = np.geomspace(10, 1000, 7)
    prof = gaussian_spectrum(width) if kind == "gaussian" else excised_spectrum(width, hole)
    slope, sups = decay_exponent(prof, times, rho_max=cutoff * width)
    return {"kind": kind, "times": list(map(float, times)), "sup": sups.tolist(),
            "slope": slope, "seconds": time.time() - t0}


# ---------------------------------------------------------------- Z norm

def znorm_reference(n=128, L=16 * np.pi, centre=(1.0, 0.0), width=0.25):
    """Z1 norm of the reference Gaussian bump."""
    grid = Grid2D(n, L)
    f = gaussian_bump(grid, centre, width)
    rep = z1_norm(f)
    return {"n": n, "L": L, "value": rep.value, "argmax": rep.argmax}


# -------------------------------------------------------------- evolution

def reference_config(**kw):
    base = dict(n=64, L=32 * np.pi, dt=1e-2, T_final=10.0, dn_order="3", cadence=100,
                recipe={"recipe": "gaussian", "eps": 1e-2})
    base.update(kw)
    return SimConfig(**base)


def hamiltonian_drift(config=None):
    config = config or reference_config()
    t0 = time.time()
    tr = run(config)
    H = np.asarray(tr.diagnostics["H"])
    mean_h = np.asarray(tr.diagnostics["mean_h"])
    return {"relative_drift": float(np.max(np.abs(H - H[0])) / abs(H[0])),
            "mean_h_change": float(np.max(np.abs(mean_h - mean_h[0]))),
            "failed": tr.failed, "seconds": time.time() - t0}


def dt_convergence(dts=(1 / 8, 1 / 16, 1 / 32, 1 / 64), dt_ref=1 / 256, T=1.0, eps=5e-2,
                   dn_order="3", seed=0):
    """Self-convergence of the integrator at ``T`` against a fine reference."""
    t0 = time.time()
    grid = Grid2D(64, 32 * np.pi)
    s = initial_data(grid, "gaussian", eps=eps, seed=seed)

    def integrate(dt):
        U = to_complex(s)
        for _ in range(int(round(T / dt))):
            U = step(U, dt, dn_order)
        return U

    ref = integrate(dt_ref)
    errs = [(integrate(d) - ref).norm() for d in dts]
    return {"dt": list(dts), "error": errs,
            "slope": float(np.polyfit(np.log(dts), np.log(errs), 1)[0]),
            "seconds": time.time() - t0}


def single_mode_benchmark(**kw):
    measured, predicted = single_mode_frequency(**kw)
    return {"measured": measured, "predicted": predicted,
            "relative_error": abs(measured - predicted) / predicted}


def reduced_equation_sweep(n=64, L=32 * np.pi, eps=DEFAULT_EPS, seed=0):
    """Amplitude scaling of the complex-equation defect after the cubic terms."""
    grid = Grid2D(n, L)
    base = unit_state(grid, seed)
    eps = np.asarray(eps, float)
    d2, d3 = [], []
    for e in eps:
        r = reduced_rhs_check(base.scaled(e))
        d2.append(r["defect_after_N2"])
        d3.append(r["defect_after_N3"])
    return {"eps": eps.tolist(), "defect_after_N2": d2, "defect_after_N3": d3,
            "slope_after_N2": amplitude_slope(eps, d2),
            "slope_after_N3": amplitude_slope(eps, d3)}
