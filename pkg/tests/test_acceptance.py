"""Acceptance criteria, each at its stated tolerance and time budget."""
import time

import numpy as np
import pytest

from wwlab import benchmarks as bm
from wwlab import multipliers as mult
from wwlab import resonance as res
from wwlab.dirichlet_neumann import SurfaceState, dn_exact
from wwlab.dispersion import (frequency, frequency_deriv, inflection_radius,
                              resonant_sphere_radius)
from wwlab.evolution import reduced_symbol_bound
from wwlab.grid import Grid2D, GridField
from wwlab.paradiff import Symbol, weyl_apply
from wwlab.spectral import gaussian_bump, z1_norm

PRINTED_AT_INFLECTION = {0: 0.674, 1: 1.086, 3: 4.452, 4: -28.701}
PRINTED_AT_SPHERE = {0: 2.060, 1: 1.699, 2: 0.658}


def _value(r, order):
    return float(frequency(r) if order == 0 else frequency_deriv(r, order))


def test_criterion_01_constants(report):
    t0 = time.perf_counter()
    g0, g1 = inflection_radius(), resonant_sphere_radius()
    errs = [abs(_value(g0, k) - v) for k, v in PRINTED_AT_INFLECTION.items()]
    errs += [abs(_value(g1, k) - v) for k, v in PRINTED_AT_SPHERE.items()]
    closed = max(abs(_value(g1, 1) - 7 / (2 * np.sqrt(3 * np.sqrt(2)))),
                 abs(_value(g1, 2) - 23 / (4 * np.sqrt(54 * np.sqrt(2)))))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-3 and closed <= 1e-12 and dt < 1
    report(1, "constants table", ok,
           f"max printed-value error {max(errs):.2e}, closed forms {closed:.1e}, {dt:.3f}s")
    assert ok


def test_criterion_02_spacetime_radius(report):
    t0 = time.perf_counter()
    root = res.spacetime_resonant_radius()
    x = np.linspace(1e-3, 50, 200_001)
    f = frequency(x) - 2 * frequency(x / 2)
    changes = int(np.count_nonzero(np.sign(f[:-1]) != np.sign(f[1:])))
    dt = time.perf_counter() - t0
    ok = abs(root - np.sqrt(2)) < 1e-10 and changes == 1 and dt < 1
    report(2, "space-time resonant radius", ok,
           f"|root-sqrt2| = {abs(root - np.sqrt(2)):.1e}, sign changes on scan {changes}, {dt:.2f}s")
    assert ok


def test_criterion_03_certifications(report):
    t0 = time.perf_counter()
    g0, g1 = inflection_radius(), resonant_sphere_radius()
    checks = [("F1", (2 * g0, 1.0), 10_000), ("F2", (2 * g0, 1.0), 10_000),
              ("G1", (3.0, 110.0), 100_000),
              ("G1+G11", (g1 + 0.3, 3.0), 10_000), ("G1+G12", (g1 + 0.3, 3.0), 10_000)]
    outcome = {}
    for cid, iv, n in checks:
        rep = res.certify_positive(cid, iv, n)
        outcome[cid] = (rep.verdict == "positive", rep.min_value, rep.argmin)
    root_rep = res.certify_positive("G1", (1.7, 3.0), 10_000)
    root_ok = any(abs(r - 1.94) <= 0.01 for r in root_rep.roots)
    dt = time.perf_counter() - t0
    ok = all(v[0] for v in outcome.values()) and root_ok and dt < 30
    detail = ", ".join(f"{k} {'pos' if v[0] else f'min {v[1]:.3f} at {v[2]:.4f}'}"
                       for k, v in outcome.items())
    report(3, "certifications", ok, f"{detail}; G1 roots {root_rep.roots}; {dt:.1f}s")
    assert ok


def test_criterion_04_conjugate_radius_algebra(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    g0 = inflection_radius()
    a1 = np.exp(rng.uniform(np.log(g0 * 1.01), np.log(100.0), 1000))
    b1 = res.conjugate_radius(a1)
    r1 = np.max(np.abs(res.bas1_residual(a1, b1, cleared=True)))
    p1 = a1 * b1
    a2 = np.exp(rng.uniform(np.log(0.01), np.log(100.0), 1000))
    b2 = res.sum_resonance_partner(a2)
    r2 = np.max(np.abs(res.bas2_residual(a2, b2, cleared=True)))
    p2 = a2 * b2
    r1_div = np.max(np.abs(res.bas1_residual(a1, b1)))
    r2_div = np.max(np.abs(res.bas2_residual(a2, b2)))
    window = bool(np.all((p1 > 1 / 9) & (p1 <= g0**2)) and np.all((p2 >= 4 / 9) & (p2 <= 0.5)))
    dt = time.perf_counter() - t0
    ok = r1 < 1e-8 and r2 < 1e-8 and window and dt < 10
    report(4, "resonance algebra", ok,
           f"cleared residuals {r1:.1e} / {r2:.1e} (divided forms {r1_div:.1e} / {r2_div:.1e}), "
           f"product windows hold: {window}, {dt:.1f}s")
    assert ok


def test_criterion_05_dn_expansion_orders(report):
    out = bm.dn_expansion_sweep()
    s2, s3 = out["slope_after_order2"], out["slope_after_order3"]
    ok = abs(s2 - 3) <= 0.2 and abs(s3 - 4) <= 0.3 and out["seconds"] < 300
    report(5, "DN expansion orders", ok,
           f"slopes {s2:.3f} (after quadratic), {s3:.3f} (after cubic), {out['seconds']:.0f}s")
    assert ok


def test_criterion_06_dn_structure(report):
    t0 = time.perf_counter()
    grid = Grid2D(32, 16 * np.pi)
    worst = {"adjoint": 0.0, "positivity": 0.0, "mean": 0.0}
    for seed in range(20):
        h = bm.band_limited_field(grid, 3 * seed + 1)
        target = 0.02 + 0.06 * (seed % 4) / 3
        h = h * (target / SurfaceState(h, h).slope())
        phi = bm.band_limited_field(grid, 3 * seed + 2)
        psi = bm.band_limited_field(grid, 3 * seed + 3)
        Gphi = dn_exact(SurfaceState(h, phi)).G
        Gpsi = dn_exact(SurfaceState(h, psi)).G
        a, b = Gphi.inner(psi).real, phi.inner(Gpsi).real
        scale = Gphi.norm() * psi.norm()
        worst["adjoint"] = max(worst["adjoint"], abs(a - b) / scale)
        energy = Gphi.inner(phi).real
        worst["positivity"] = max(worst["positivity"], max(0.0, -energy) / (Gphi.norm() * phi.norm()))
        worst["mean"] = max(worst["mean"], abs(Gphi.mean()) / np.sqrt(np.mean(Gphi.physical() ** 2)))
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and dt < 60
    report(6, "DN structure", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {dt:.0f}s")
    assert ok


def test_criterion_07_paralinearization(report):
    out = bm.paralin_sweep()
    ok = out["paralin_slope"] >= 1.9 and out["diagonal_slope"] >= 1.9 and out["seconds"] < 300
    report(7, "paralinearization", ok,
           f"paralin slope {out['paralin_slope']:.3f}, diagonal slope {out['diagonal_slope']:.3f}, "
           f"chi {out['chi_threshold']}, {out['seconds']:.0f}s")
    assert ok


def test_criterion_08_paradifferential_calculus(report):
    t0 = time.perf_counter()
    out = bm.composition_benchmark()
    grid = Grid2D(256, np.pi)
    rng = np.random.default_rng(1)
    c = (rng.normal(size=(256, 256)) + 1j * rng.normal(size=(256, 256))) * grid.dealias_mask("2/3")
    f = GridField(grid, c, False).real_part()
    g = GridField(grid, np.roll(c, 3, axis=0), False).real_part()
    ident = weyl_apply(Symbol.multiplier(grid, mult.one()), f, -2)
    e_id = np.max(np.abs(ident.coeffs - f.coeffs))
    w = mult.dispersion()
    fx = weyl_apply(Symbol.multiplier(grid, w, order=1.5), f, -2)
    e_mult = np.max(np.abs(fx.coeffs - f.coeffs * w(*grid.k))) / np.max(np.abs(fx.coeffs))
    h = GridField.from_function(grid, lambda x, y: np.cos(2 * x) + 0.5 * np.sin(2 * y))
    a = Symbol(grid, [(h, mult.one()), (h * 0.5, mult.Coord(0) * mult.AbsPower(-1))])
    lhs, rhs = weyl_apply(a, f, -2).inner(g), f.inner(weyl_apply(a, g, -2))
    e_adj = abs(lhs - rhs) / abs(lhs)
    dt = time.perf_counter() - t0
    ok = out["slope"] <= -1.8 and e_id <= 1e-12 and e_mult <= 1e-12 and e_adj <= 1e-10 and dt < 120
    report(8, "paradifferential calculus", ok,
           f"remainder slope {out['slope']:.3f}, identity {e_id:.1e}, multiplier {e_mult:.1e}, "
           f"adjoint {e_adj:.1e}, {dt:.0f}s")
    assert ok


def test_criterion_09_linear_decay(report):
    t0 = time.perf_counter()
    gauss = bm.linear_decay_benchmark("gaussian")
    hole = bm.linear_decay_benchmark("excised")
    dt = time.perf_counter() - t0
    ok = abs(gauss["slope"] + 5 / 6) <= 0.05 and hole["slope"] <= -0.95 and dt < 600
    report(9, "linear dispersive decay", ok,
           f"gaussian exponent {gauss['slope']:.4f}, excised exponent {hole['slope']:.4f}, {dt:.0f}s")
    assert ok


def test_criterion_10_depletion_correlation(report):
    t0 = time.perf_counter()
    g0 = inflection_radius()
    out = res.depletion_correlation(range(5, 9), (g0 / 2, 2 * g0), chi_threshold=-2)
    vals = {k: round(v["max_depletion_scaled"], 3) for k, v in out["per_k"].items()}
    dt = time.perf_counter() - t0
    ok = out["spread"] < 4 and dt < 60
    report(10, "depletion correlation", ok,
           f"max d*2^k per k {vals}, spread {out['spread']:.3f}, {dt:.1f}s")
    assert ok


def test_criterion_11_sublevel_volumes(report):
    t0 = time.perf_counter()
    eps = [2.0**-j for j in range(4, 9)]
    est = res.sublevel_volume("+++", 0, 0, 0, eps, 10**6, seed=0)
    slope = res.fit_loglog_slope(eps, [e.measure for e in est])
    dt = time.perf_counter() - t0
    ok = abs(slope - 1) <= 0.15 and dt < 120
    report(11, "sublevel volumes", ok, f"eps exponent {slope:.3f}, {dt:.1f}s")
    assert ok


def test_criterion_12_iterated_resonances(report):
    t0 = time.perf_counter()
    out = res.iterated_resonance_check(1e-4, 1000, seed=0)
    dt = time.perf_counter() - t0
    ok = (out["outcome"] == "ok" and set(out["patterns"]) == {"-+++"}
          and np.isfinite(out["position_constant"]) and np.isfinite(out["gradient_constant"])
          and dt < 120)
    report(12, "iterated resonances", ok,
           f"{out['accepted']} samples, patterns {out.get('patterns')}, position constant "
           f"{out.get('position_constant', float('nan')):.2f}, gradient constant "
           f"{out.get('gradient_constant', float('nan')):.2f}, {dt:.0f}s")
    assert ok


def test_criterion_13_evolution(report):
    t0 = time.perf_counter()
    drift = bm.hamiltonian_drift()
    conv = bm.dt_convergence()
    mode = bm.single_mode_benchmark()
    red = bm.reduced_equation_sweep()
    bound = reduced_symbol_bound(range(-4, 6))
    dt = time.perf_counter() - t0
    ok = (drift["relative_drift"] < 1e-6 and drift["mean_h_change"] == 0.0 and not drift["failed"]
          and abs(conv["slope"] - 4) <= 0.2 and mode["relative_error"] <= 1e-6
          and red["slope_after_N3"] >= 3.8 and dt < 600)
    report(13, "evolution", ok,
           f"drift {drift['relative_drift']:.1e}, mean(h) change {drift['mean_h_change']:.1e}, "
           f"dt slope {conv['slope']:.3f}, frequency error {mode['relative_error']:.1e}, "
           f"reduced slope {red['slope_after_N3']:.3f}, symbol bound {bound:.2f}, {dt:.0f}s")
    assert ok


def test_criterion_14_z_norm(report):
    t0 = time.perf_counter()
    grid = Grid2D(128, 16 * np.pi)
    f = gaussian_bump(grid, (1.0, 0.0), 0.25)
    base = z1_norm(f).value
    homog = max(abs(z1_norm(f * c).value - abs(c) * base) / (abs(c) * base)
                for c in (0.5, 3.0, -2.0, 1j))
    coarse = bm.znorm_reference(n=128)["value"]
    fine = bm.znorm_reference(n=256)["value"]
    change = abs(fine - coarse) / fine
    dt = time.perf_counter() - t0
    ok = homog <= 1e-14 and change <= 0.02 and dt < 60
    report(14, "Z-norm diagnostics", ok,
           f"homogeneity defect {homog:.1e}, n=128 -> 256: {coarse:.6f} -> {fine:.6f} "
           f"({100 * change:.3f}%), {dt:.0f}s")
    assert ok
