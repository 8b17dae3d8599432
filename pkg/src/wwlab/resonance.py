"""Resonant sets of the quadratic phases and related numeric certificates.

Root finding is done by bisection throughout, since every root below is
isolated inside an explicit monotonicity interval.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import cutoffs
from .dispersion import (
    DomainError,
    SignTriple,
    _parse_signs,
    cubic_phase,
    cubic_phase_gradients,
    frequency,
    frequency_deriv,
    frequency_inverse,
    inflection_radius,
    nondegeneracy,
    phase,
    radial_bracket,
    resonant_sphere_radius,
)

MERGE_TOL = 1e-6


def bisect(func, lo, hi, max_iter=2000):
    """Vectorized bisection run to full floating-point resolution.

    ``func(lo)`` and ``func(hi)`` must have opposite signs elementwise.
    Iteration stops once the midpoint coincides with an endpoint.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    flo = np.sign(func(lo))
    fhi = np.sign(func(hi))
    if np.any(flo * fhi > 0):
        raise DomainError("bisect: no sign change on the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (mid != lo) & (mid != hi)
        if not np.any(active):
            break
        fm = np.sign(func(mid))
        left = (fm == flo) & active
        right = (~left) & active
        lo = np.where(left, mid, lo)
        hi = np.where(right, mid, hi)
    out = 0.5 * (lo + hi)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- radii

def conjugate_radius(a):
    """The radius ``b`` in ``(0, gamma0]`` with ``lam'(b) == lam'(a)``.

    Parameters
    ----------
    a : float or array_like
        Radii at or above the inflection radius.
    """
    g0 = inflection_radius()
    a = np.asarray(a, dtype=float)
    if np.any(a < g0):
        raise DomainError("conjugate_radius needs a >= inflection radius")
    target = frequency_deriv(a)
    b = bisect(lambda x: frequency_deriv(x) - target, np.full_like(a, 1e-28), np.full_like(a, g0))
    return np.where(a == g0, g0, b)[()]


def bas1_residual(a, b, cleared=False):
    """Residual of the algebraic relation between conjugate radii.

    With ``p = a*b`` the relation reads
    ``(a-b)^2 = (3p+1)(3p^2+6p-1)/(1-9p)``.  When ``cleared`` is True the
    denominator is multiplied through, which removes the pole at ``p = 1/9``.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    p = a * b
    num = (3 * p + 1) * (3 * p * p + 6 * p - 1)
    if cleared:
        return (a - b) ** 2 * (1 - 9 * p) - num
    return (a - b) ** 2 - num / (1 - 9 * p)


def sum_resonance_defect(a, b):
    """``lam(a+b) - lam(a) - lam(b)``; zero exactly on the collinear resonance."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("sum_resonance_defect needs positive radii")
    big, small = np.maximum(a, b), np.minimum(a, b)
    # lam(a+b)^2 - lam(big)^2 expanded so the large terms never cancel
    gap = small * (1 + 3 * big * big + 3 * big * small + small * small)
    return gap / (frequency(a + b) + frequency(big)) - frequency(small)


def sum_resonance_partner(a):
    """Radius ``b`` with ``lam(a+b) = lam(a) + lam(b)``, bracketed by ``4/9 <= ab <= 1/2``."""
    a = np.asarray(a, float)
    return bisect(lambda b: sum_resonance_defect(a, b), 4.0 / (9 * a), 0.5 / a)


def bas2_residual(a, b, cleared=False):
    """Residual of ``(a-b)^2 = (4+8p-32p^2)/(9p-4)`` with ``p = a*b``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    p = a * b
    num = 4 + 8 * p - 32 * p * p
    if cleared:
        return (a - b) ** 2 * (9 * p - 4) - num
    return (a - b) ** 2 - num / (9 * p - 4)


def spacetime_resonant_radius():
    """Positive root of ``lam(x) - 2 lam(x/2)``, found by bisection on [0.5, 4]."""
    return float(bisect(lambda x: frequency(x) - 2 * frequency(x / 2), 0.5, 4.0))


# ------------------------------------------------------- critical points

@dataclass(frozen=True)
class ResonancePoint:
    """A zero of the eta-gradient of a quadratic phase at fixed xi."""

    eta: np.ndarray
    branch: str


def collinear_critical_offset(alpha):
    """Off-centre solution ``beta`` in ``(0, gamma0]`` of ``lam'(beta) = lam'(alpha-beta)``.

    Defined for ``alpha >= 2*gamma0``; equals ``gamma0`` at the left endpoint.
    """
    g0 = inflection_radius()
    alpha = np.asarray(alpha, float)
    if np.any(alpha < 2 * g0 * (1 - 1e-15)):
        raise DomainError("offset branch exists only for alpha >= 2*gamma0")
    edge = np.abs(alpha - 2 * g0) <= 1e-15
    safe = np.where(edge, 3 * g0, alpha)
    val = bisect(lambda b: frequency_deriv(b) - frequency_deriv(safe - b),
                 np.full_like(safe, 1e-12), np.full_like(safe, g0))
    return np.where(edge, g0, val)[()]


def antiparallel_critical_offset(alpha):
    """Root ``beta`` of ``lam'(beta) = lam'(beta - alpha)`` in ``[max(alpha, gamma0), alpha + gamma0]``."""
    g0 = inflection_radius()
    alpha = np.asarray(alpha, float)
    lo = np.maximum(alpha, g0)
    lo = np.where(lo - alpha > 0, lo, alpha * (1 + 1e-15) + 1e-28)
    return bisect(lambda b: frequency_deriv(b) - frequency_deriv(b - alpha), lo, alpha + g0)


def critical_points(mu_nu, xi):
    """All ``eta`` with vanishing eta-gradient of the phase for signs ``(mu, nu)``.

    Parameters
    ----------
    mu_nu : str or pair of signs
        ``"++"``, ``"--"``, ``"+-"`` or ``"-+"``.
    xi : array_like, shape (2,)
        Nonzero output frequency.

    Returns
    -------
    list of ResonancePoint
    """
    mu, nu = _parse_signs(mu_nu, 2)
    xi = np.asarray(xi, float)
    alpha = float(np.hypot(*xi))
    if alpha <= 1e-30:
        raise DomainError("critical_points needs xi != 0")
    e = xi / alpha
    g0 = inflection_radius()
    if mu == nu:
        pts = [ResonancePoint(xi / 2, "half")]
        if alpha >= 2 * g0:
            p2 = float(collinear_critical_offset(alpha))
            if abs(p2 - alpha / 2) >= MERGE_TOL:
                pts.append(ResonancePoint(p2 * e, "p2"))
                pts.append(ResonancePoint(xi - p2 * e, "xi_minus_p2"))
        return pts
    p = float(antiparallel_critical_offset(alpha))
    return [ResonancePoint(p * e, "pm1"), ResonancePoint(xi - p * e, "xi_minus_pm1")]


# ------------------------------------------------ certification functions

CERT_IDS = ("F1", "F2", "G1", "G1+G11", "G1+G12", "|G1|+|G11|", "|G1|+|G12|")

_STEP = 1e-30


def _complex_step(func, args, i):
    a = [complex(v) for v in args]
    a[i] += 1j * _STEP
    return func(*a).imag / _STEP


def _partner(s, rho):
    """``r(s)`` with ``lam(r) = lam(s) - lam(rho)``."""
    s = np.asarray(s, float)
    gap = frequency(s) - frequency(rho)
    if np.any(gap <= 0):
        raise DomainError("certification function evaluated below its domain")
    return frequency_inverse(gap)


def radial_nondegeneracy_plus(s, r, rho):
    """All-plus nondegeneracy in radial variables; accepts complex arguments."""
    d1 = frequency_deriv
    return -0.25 * radial_bracket(s, r, rho) * d1(rho) / rho**3 * d1(s) / s * d1(r) / r


def _g11(s):
    g1 = resonant_sphere_radius()
    r = float(_partner(s, g1))
    args = (s, r, g1)
    return (_complex_step(radial_nondegeneracy_plus, args, 1) * frequency_deriv(g1)
            - _complex_step(radial_nondegeneracy_plus, args, 2) * frequency_deriv(r))


def _g12(s):
    g1 = resonant_sphere_radius()
    r = float(_partner(s, g1))
    args = (s, r, g1)
    return (_complex_step(radial_nondegeneracy_plus, args, 0) * frequency_deriv(g1)
            + _complex_step(radial_nondegeneracy_plus, args, 2) * frequency_deriv(s))


def cert_function(cid, s):
    """Evaluate one of the auxiliary functions checked for positivity.

    ``F1``, ``F2`` pair the radius ``s`` with ``r(s)`` solving
    ``lam(r) = lam(s) - lam(gamma0)``; ``G1`` and its corrections use
    ``lam(r) = lam(s) - lam(gamma1)`` and the third radius ``gamma1``.
    The corrections ``G11``, ``G12`` are derivatives of the radial
    nondegeneracy function, computed by complex-step differentiation.  The
    ids ``|G1|+|G11|`` and ``|G1|+|G12|`` test that ``G1`` and the correction
    have no common zero.
    """
    g0, g1 = inflection_radius(), resonant_sphere_radius()
    s_arr = np.asarray(s, float)
    d1 = frequency_deriv
    if cid in ("F1", "F2"):
        r = _partner(s_arr, g0)
        if cid == "F1":
            return s_arr**2 - g0**2 - r**2 - 2 * g0 * r * d1(g0) / d1(r)
        return -2 * g0 * s_arr * d1(g0) / d1(s_arr) + g0**2 + s_arr**2 - r**2
    if cid in CERT_IDS[2:]:
        r = _partner(s_arr, g1)
        base = radial_bracket(s_arr, r, g1)
        if cid == "G1":
            return base
        corr = _g11 if "G11" in cid else _g12
        extra = np.vectorize(corr, otypes=[float])(s_arr)
        if cid.startswith("|"):
            return np.abs(base) + np.abs(extra)
        return base + extra
    raise ValueError(f"unknown certification id {cid!r}; choose from {CERT_IDS}")


@dataclass
class CertReport:
    """Outcome of a dense-sampling positivity check."""

    function_id: str
    interval: tuple
    n_samples: int
    min_value: float
    argmin: float
    verdict: str
    roots: list = field(default_factory=list)

    def to_dict(self):
        return dataclasses.asdict(self)


def certify_positive(cid, interval, n_samples):
    """Sample ``cid`` on a uniform grid and report whether it stays positive.

    Any sign change is refined by bisection and listed in ``roots``.
    """
    a, b = map(float, interval)
    if n_samples < 2 or not b > a:
        raise ValueError("need n_samples >= 2 and a nonempty interval")
    s = np.linspace(a, b, int(n_samples))
    v = np.asarray(cert_function(cid, s), float)
    i = int(np.argmin(v))
    roots = []
    sign = np.sign(v)
    for j in np.nonzero(sign[:-1] * sign[1:] <= 0)[0]:
        if v[j] == 0:
            roots.append(float(s[j]))
            continue
        if v[j + 1] == 0:
            continue
        roots.append(float(bisect(lambda x: cert_function(cid, x), s[j], s[j + 1])))
    verdict = "positive" if np.all(v > 0) else "sign change found" if roots else "not positive"
    return CertReport(cid, (a, b), int(n_samples), float(v[i]), float(s[i]), verdict, roots)


# --------------------------------------------- depletion and energy weight

def depletion_factor(xi, eta, chi_threshold=-20):
    """Angular factor ``chi(|xi-eta|/|xi+eta|) * cos^2`` of the angle between ``xi-eta`` and ``xi+eta``.

    ``chi`` is the cutoff to ratios below ``2**chi_threshold``.
    """
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    d, s = xi - eta, xi + eta
    nd = np.sqrt(np.sum(d * d, axis=-1))
    ns = np.sqrt(np.sum(s * s, axis=-1))
    if np.any(ns <= 1e-30):
        raise DomainError("depletion_factor needs xi + eta != 0")
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(nd > 0, np.sum(d * s, axis=-1) / (nd * ns), 0.0)
    return cutoffs.le(nd / ns, chi_threshold) * cos**2


def energy_multiplier(xi, eta, N):
    """Symbol of the time derivative of the weighted energy of order ``N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    a = 1 + np.sum(eta * eta, axis=-1)
    b = 1 + np.sum(xi * xi, axis=-1)
    dot = np.sum((xi - eta) * (xi + eta), axis=-1)
    # a^N - b^N over (ab)^(N/2), written to avoid overflow
    ratio = np.sqrt(a / b)
    return dot / 2 * (ratio**N - ratio**(-N))


def depletion_correlation(k_values, rho_range, n_samples=200_000, seed=0,
                          phase_bound=1.0, chi_threshold=-20, N=4):
    """Largest depletion factor (and energy weight) on near-resonant pairs.

    For each ``k`` samples ``|xi|`` in ``[0.8, 1.25] * 2**k``, ``|xi-eta|``
    log-uniformly in ``rho_range`` and a uniform relative angle; keeps
    pairs with ``|phase_{+++}| <= phase_bound``.

    Returns
    -------
    dict
        Per ``k``: number kept, ``max(depletion * 2**k)`` and
        ``max(|energy weight| * 2**k)``.
    """
    rng = np.random.default_rng(seed)
    out = {"chi_threshold": chi_threshold, "rho_range": list(rho_range), "N": N,
           "phase_bound": phase_bound, "per_k": {}}
    lo, hi = np.log(rho_range[0]), np.log(rho_range[1])
    for k in k_values:
        s = 2.0**k * rng.uniform(0.8, 1.25, n_samples)
        rho = np.exp(rng.uniform(lo, hi, n_samples))
        ang = rng.uniform(0, 2 * np.pi, n_samples)
        xi = np.stack([s, np.zeros_like(s)], -1)
        z = np.stack([rho * np.cos(ang), rho * np.sin(ang)], -1)
        eta = xi - z
        keep = np.abs(phase("+++", xi, eta)) <= phase_bound
        d = depletion_factor(xi[keep], eta[keep], chi_threshold)
        m = energy_multiplier(xi[keep], eta[keep], N)
        out["per_k"][int(k)] = {
            "kept": int(keep.sum()),
            "max_depletion_scaled": float(np.max(d) * 2.0**k) if keep.any() else 0.0,
            "max_energy_scaled": float(np.max(np.abs(m)) * 2.0**k) if keep.any() else 0.0,
        }
    vals = [v["max_depletion_scaled"] for v in out["per_k"].values()]
    out["spread"] = float(max(vals) / min(vals)) if min(vals) > 0 else float("inf")
    return out


# ------------------------------------------------------- sublevel volumes

@dataclass
class SublevelEstimate:
    """Monte-Carlo measure of a phase sublevel set at fixed output frequency."""

    k: int
    k1: int
    k2: int
    eps: float
    signs: str
    measure: float
    std_error: float
    n_samples: int
    seed: int
    xi_norm: float

    def to_dict(self):
        return dataclasses.asdict(self)


def _annulus_sample(rng, rlo, rhi, n):
    r = np.sqrt(rng.uniform(rlo**2, rhi**2, n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(t), r * np.sin(t)], -1)


def sublevel_volume(signs, k, k1, k2, eps, n_samples, seed=0, n_xi=64, chunk=250_000):
    """Largest measure of ``{eta : |phase| <= eps}`` over the dyadic region.

    ``eta`` ranges over ``|eta| in [2^(k2-4), 2^(k2+4)]`` subject to
    ``|xi-eta| in [2^(k1-4), 2^(k1+4)]``.  The supremum over ``xi`` is taken
    over ``n_xi`` log-spaced values of ``|xi|`` across ``[2^(k-4), 2^(k+4)]``
    (the measure depends on ``xi`` only through ``|xi|``).  The same ``eta``
    sample is reused for every ``|xi|`` and every ``eps``.

    Parameters
    ----------
    eps : float or sequence of float
        One or several thresholds.

    Returns
    -------
    SublevelEstimate or list of SublevelEstimate
    """
    sg = SignTriple.parse(signs)
    tag = "".join("+" if v > 0 else "-" for v in sg)
    eps_arr = np.atleast_1d(np.asarray(eps, float))
    if np.any(eps_arr <= 0):
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(seed)
    r2lo, r2hi = 2.0 ** (k2 - 4), 2.0 ** (k2 + 4)
    r1lo, r1hi = 2.0 ** (k1 - 4), 2.0 ** (k1 + 4)
    area = np.pi * (r2hi**2 - r2lo**2)
    radii = np.geomspace(2.0 ** (k - 4), 2.0 ** (k + 4), n_xi)
    hits = np.zeros((n_xi, eps_arr.size), dtype=np.int64)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        eta = _annulus_sample(rng, r2lo, r2hi, m)
        ne = np.hypot(eta[:, 0], eta[:, 1])
        lam_eta = sg.nu * frequency(ne)
        for i, a in enumerate(radii):
            nz = np.hypot(a - eta[:, 0], eta[:, 1])
            ok = (nz >= r1lo) & (nz <= r1hi)
            ph = np.abs(sg.sigma * frequency(a) - sg.mu * frequency(nz[ok]) - lam_eta[ok])
            hits[i] += np.count_nonzero(ph[:, None] <= eps_arr[None, :], axis=0)
        done += m
    p = hits / n_samples
    meas = area * p
    out = []
    for j, e in enumerate(eps_arr):
        i = int(np.argmax(meas[:, j]))
        se = area * np.sqrt(p[i, j] * (1 - p[i, j]) / n_samples)
        out.append(SublevelEstimate(k, k1, k2, float(e), tag, float(meas[i, j]), float(se),
                                    int(n_samples), int(seed), float(radii[i])))
    return out[0] if np.ndim(eps) == 0 else out


def fit_loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ---------------------------------------------------- iterated resonances

def _sign_tag(vals):
    return "".join("+" if v > 0 else "-" for v in vals)


def _grad_lam(v):
    r = np.hypot(*v)
    return frequency_deriv(r) / r * v


def _hess_lam(v):
    """Hessian of ``lam(|v|)``: ``lam'' e e^T + lam'/r (I - e e^T)``."""
    r = np.hypot(*v)
    e = v / r
    ee = np.outer(e, e)
    return frequency_deriv(r, 2) * ee + frequency_deriv(r) / r * (np.eye(2) - ee)


def _iterated_system(v, pat):
    """Residual and Jacobian of the system projected onto by :func:`iterated_resonance_check`.

    Unknowns ``v = (xi, eta, sig)``; residual is the ``(eta, sig)``-gradient of
    the cubic phase followed by the two quadratic phases.
    """
    m, n, b, g = pat
    xi, eta, sig = v[0:2], v[2:4], v[4:6]
    z1, z2 = xi - eta, eta - sig
    g1, g2, g3 = m * _grad_lam(z1), b * _grad_lam(z2), g * _grad_lam(sig)
    res = np.concatenate([g1 - g2, g2 - g3,
                          [frequency(np.hypot(*xi)) - m * frequency(np.hypot(*z1))
                           - n * frequency(np.hypot(*eta)),
                           n * frequency(np.hypot(*eta)) - b * frequency(np.hypot(*z2))
                           - g * frequency(np.hypot(*sig))]])
    H1, H2, H3 = m * _hess_lam(z1), b * _hess_lam(z2), g * _hess_lam(sig)
    ge, gx = n * _grad_lam(eta), _grad_lam(xi)
    Z = np.zeros((2, 2))
    z = np.zeros(2)
    jac = np.vstack([
        np.hstack([H1, -H1 - H2, H2]),
        np.hstack([Z, H2, -H2 - H3]),
        np.concatenate([gx - g1, g1 - ge, z])[None, :],
        np.concatenate([z, ge - g2, g2 - g3])[None, :],
    ])
    return res, jac


def iterated_resonance_check(kappa, n_samples, seed=0, phase_tol=2.0**-8,
                             max_starts=200_000, perturbations=32):
    """Sample near-critical points of the cubic phase and test their structure.

    Random starts over all sixteen sign patterns ``(mu, nu, beta, gamma)``
    are projected by least squares onto the set where both quadratic
    phases ``Phi_{+ mu nu}(xi, eta)`` and ``Phi_{nu beta gamma}(eta, sig)``
    vanish together with the ``(eta, sig)``-gradient of the cubic phase
    ``Lam(xi) - Lam_mu(xi-eta) - Lam_beta(eta-sig) - Lam_gamma(sig)``.
    Each projected point is perturbed randomly at scale ``kappa`` and
    accepted when the gradient stays below ``kappa``, both phases stay
    below ``phase_tol`` and all five frequencies ``xi, eta, xi-eta,
    eta-sig, sig`` have length in ``[2^-10, 2^10]``.  Excluding vanishing
    ``xi`` or ``eta`` removes the trivial resonances at zero output
    frequency, where both quadratic phases vanish identically.

    Returns
    -------
    dict
        ``outcome`` ("ok" or "empty sample"), accepted count, sign-pattern
        histogram, and the empirical constants
        ``max(|eta-2 sig| + |xi-sig|)/kappa`` and ``max |grad_xi|/kappa``.
    """
    if kappa > 2.0**-13:
        raise ValueError("kappa must be <= 2**-13")
    rng = np.random.default_rng(seed)
    accepted = []
    starts = 0
    patterns = [(m, n, b, g) for m in (1, -1) for n in (1, -1) for b in (1, -1) for g in (1, -1)]

    def admissible(v):
        xi, eta, sig = v[0:2], v[2:4], v[4:6]
        radii = np.array([np.hypot(*xi), np.hypot(*eta), np.hypot(*(xi - eta)),
                          np.hypot(*(eta - sig)), np.hypot(*sig)])
        return np.all((radii >= 2.0**-10) & (radii <= 2.0**10))

    def resid(v, pat):
        if not admissible(v):
            return np.full(6, 1e3)
        return _iterated_system(v, pat)[0]

    def jac(v, pat):
        if not admissible(v):
            return np.eye(6)
        return _iterated_system(v, pat)[1]

    while len(accepted) < n_samples and starts < max_starts:
        starts += 1
        pat = patterns[rng.integers(len(patterns))]
        vecs = []
        for _ in range(3):
            r = np.exp(rng.uniform(np.log(0.05), np.log(4.0)))
            t = rng.uniform(0, 2 * np.pi)
            vecs.append(r * np.array([np.cos(t), np.sin(t)]))
        sig = vecs[0]
        eta = sig + vecs[1]
        xi = eta + vecs[2]
        v0 = np.concatenate([xi, eta, sig])
        if not admissible(v0):
            continue
        sol = least_squares(resid, v0, jac=jac, args=(pat,), xtol=1e-15, ftol=1e-15,
                            gtol=1e-15, max_nfev=200)
        v = sol.x
        if not admissible(v):
            continue
        r = _iterated_system(v, pat)[0]
        if np.hypot(*r[0:2]) + np.hypot(*r[2:4]) > 1e-3 * kappa or np.max(np.abs(r[4:])) > phase_tol:
            continue
        for _ in range(perturbations):
            dv = rng.normal(size=6)
            dv *= rng.uniform(0, 1) * kappa / np.linalg.norm(dv)
            w = v + dv
            if not admissible(w):
                continue
            r = _iterated_system(w, pat)[0]
            if np.linalg.norm(r[:4]) > kappa or np.max(np.abs(r[4:])) > phase_tol:
                continue
            xi, eta, sig = w[0:2], w[2:4], w[4:6]
            gx, _, _ = cubic_phase_gradients((1, pat[0], pat[2], pat[3]), xi, eta, sig)
            accepted.append((pat, np.hypot(*(eta - 2 * sig)) + np.hypot(*(xi - sig)),
                             np.hypot(*gx)))
            if len(accepted) >= n_samples:
                break
    if not accepted:
        return {"outcome": "empty sample", "accepted": 0, "starts": starts, "kappa": kappa}
    hist = {}
    for pat, _, _ in accepted:
        tag = _sign_tag(pat)
        hist[tag] = hist.get(tag, 0) + 1
    pos = np.array([a[1] for a in accepted])
    grad = np.array([a[2] for a in accepted])
    return {
        "outcome": "ok",
        "accepted": len(accepted),
        "starts": starts,
        "kappa": kappa,
        "phase_tol": phase_tol,
        "patterns": hist,
        "position_constant": float(pos.max() / kappa),
        "gradient_constant": float(grad.max() / kappa),
    }


def cubic_resonance_defect(xi, eta, sig, signs4=(1, -1, 1, 1)):
    """Position defect ``|eta-2 sig| + |xi-sig|`` and ``|grad_xi|`` of the cubic phase."""
    xi, eta, sig = (np.asarray(v, float) for v in (xi, eta, sig))
    gx, ge, gs = cubic_phase_gradients(signs4, xi, eta, sig)
    return (float(np.hypot(*(eta - 2 * sig)) + np.hypot(*(xi - sig))), float(np.hypot(*gx)),
            float(np.hypot(*ge) + np.hypot(*gs)), float(cubic_phase(signs4, xi, eta, sig)))


# ------------------------------------------------------ resonant angles

def resonant_angle_curves(signs, k, rho_grid):
    """Angles of ``z`` on the zero set of the phase at large frequency ``2**k``.

    For each ``rho`` returns ``theta1`` solving ``Phi(xi, xi-z) = 0`` with
    ``xi = (2^k, 0)`` and ``theta2`` solving ``Phi(eta+z, eta) = 0`` with
    ``eta = (2^k, 0)``, where ``z = rho (cos t, sin t)``, ``t in [0, pi]``.
    Entries without a sign change are NaN.

    Returns
    -------
    dict of ndarray
        ``rho``, ``theta1``, ``theta2`` and ``residual`` (largest |Phi| at
        the two returned angles).
    """
    sg = SignTriple.parse(signs)
    if k < 12:
        raise ValueError("resonant_angle_curves is meant for k >= 12")
    rho = np.asarray(rho_grid, float)
    if np.any((rho < 2.0**-20) | (rho > 2.0**20)):
        raise ValueError("rho must lie in [2^-20, 2^20]")
    big = 2.0**k

    def z(t):
        return np.stack([rho * np.cos(t), rho * np.sin(t)], -1)

    def f1(t):
        xi = np.stack([np.full_like(rho, big), np.zeros_like(rho)], -1)
        return phase(sg, xi, xi - z(t))

    def f2(t):
        eta = np.stack([np.full_like(rho, big), np.zeros_like(rho)], -1)
        return phase(sg, eta + z(t), eta)

    out = {"rho": rho}
    res = np.zeros_like(rho)
    for name, f in (("theta1", f1), ("theta2", f2)):
        lo, hi = np.zeros_like(rho), np.full_like(rho, np.pi)
        ok = np.sign(f(lo)) * np.sign(f(hi)) < 0
        theta = np.full_like(rho, np.nan)
        if ok.any():
            def g(t, f=f, ok=ok):
                tt = np.zeros_like(rho)
                tt[ok] = t
                return f(tt)[ok]

            theta[ok] = bisect(g, lo[ok], hi[ok])
            tt = np.where(ok, theta, 0.0)
            res = np.maximum(res, np.where(ok, np.abs(f(tt)), np.nan))
        out[name] = theta
    out["residual"] = res
    return out


# ------------------------------------------------ nondegeneracy floor

def nondegeneracy_floor(signs="+++", n_samples=100_000, seed=0, width=2.0**-20):
    """Minimum of ``|Phi| + |Upsilon|`` over pairs with ``|xi-eta|`` within ``width`` of gamma0.

    ``|xi|`` is log-uniform in ``[2^-20, 2^10]`` and samples with ``|eta|``
    outside that range are discarded.
    """
    rng = np.random.default_rng(seed)
    g0 = inflection_radius()
    s = np.exp(rng.uniform(np.log(2.0**-20), np.log(2.0**10), n_samples))
    a = rng.uniform(0, 2 * np.pi, n_samples)
    rho = g0 + rng.uniform(-width, width, n_samples)
    t = rng.uniform(0, 2 * np.pi, n_samples)
    xi = np.stack([s * np.cos(a), s * np.sin(a)], -1)
    z = np.stack([rho * np.cos(t), rho * np.sin(t)], -1)
    eta = xi - z
    r = np.hypot(eta[:, 0], eta[:, 1])
    keep = (r >= 2.0**-20) & (r <= 2.0**10)
    val = np.abs(phase(signs, xi[keep], eta[keep])) + np.abs(nondegeneracy(signs, xi[keep], eta[keep]))
    i = int(np.argmin(val))
    return {"min": float(val[i]), "kept": int(keep.sum()),
            "at_xi_norm": float(s[keep][i]), "at_eta_norm": float(r[keep][i])}

