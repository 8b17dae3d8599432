"""Command-line front end: ``wwlab <subcommand> [options]``.

Every command writes ``manifest.json`` into the output directory before its
results.  Exit codes: 0 success, 1 bad configuration or input, 2 numerical
failure, 3 failed certification.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import benchmarks, dispersion, resonance
from .dirichlet_neumann import DivergenceError
from .evolution import BlowUpError, ConfigError, SimConfig, run
from .grid import read_field
from .reports import RunManifest, dumps, write_csv, write_json
from .spectral import WrapAroundError, z_norm

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CERT = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command-line input (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _span(text, kind=float):
    try:
        a, b = text.split(":")
        return kind(a), kind(b)
    except ValueError as exc:
        raise UsageError(f"expected lo:hi, got {text!r}") from exc


# ------------------------------------------------------------- commands

def cmd_dispersion(args, out):
    if args.constants == args.table:
        raise UsageError("choose exactly one of --constants and --table")
    if args.constants:
        g0 = dispersion.inflection_radius()
        g1 = dispersion.resonant_sphere_radius()
        d = lambda r, k: float(dispersion.frequency_deriv(np.array([r]), k)[0])
        payload = {
            "gamma0": g0, "gamma1": g1,
            "lambda(gamma0)": float(dispersion.frequency(g0)),
            "lambda1(gamma0)": d(g0, 1), "lambda2(gamma0)": d(g0, 2),
            "lambda3(gamma0)": d(g0, 3), "lambda4(gamma0)": d(g0, 4),
            "lambda(gamma1)": float(dispersion.frequency(g1)),
            "lambda1(gamma1)": d(g1, 1), "lambda2(gamma1)": d(g1, 2),
            "closed_form_lambda1(gamma1)": 7 / (2 * np.sqrt(3 * np.sqrt(2))),
            "closed_form_lambda2(gamma1)": 23 / (4 * np.sqrt(54 * np.sqrt(2))),
        }
        path = os.path.join(out, "constants.json")
        write_json(path, payload)
        return payload, [path]
    if args.rows < 0 or args.rmin <= 0 or args.rmax < args.rmin:
        raise UsageError("need rows >= 0 and 0 < rmin <= rmax")
    r = np.linspace(args.rmin, args.rmax, args.rows)
    cols = [dispersion.frequency(r)] + [dispersion.frequency_deriv(r, k) for k in range(1, 5)]
    rows = np.column_stack([r] + cols) if args.rows else []
    path = os.path.join(out, "dispersion_table.csv")
    write_csv(path, ["r", "lambda", "lambda1", "lambda2", "lambda3", "lambda4"], rows,
              args.precision)
    return {"rows": int(args.rows), "path": path}, [path]


def _pointwise(func, *arrays):
    """Evaluate ``func`` on stacked points; degenerate points give NaN."""
    try:
        with np.errstate(all="ignore"):
            return np.asarray(func(*arrays), float)
    except (ArithmeticError, ValueError):
        out = np.full(arrays[0].shape[:-1], np.nan)
        for i in np.ndindex(out.shape):
            try:
                with np.errstate(all="ignore"):
                    out[i] = float(func(*(a[i] for a in arrays)))
            except (ArithmeticError, ValueError):
                pass
        return out


def cmd_resonance_atlas(args, out):
    if args.grid < 1 or args.xi_mag <= 0:
        raise UsageError("need --grid >= 1 and --xi-mag > 0")
    try:
        signs = dispersion.SignTriple.parse(args.signs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    xi = np.array([args.xi_mag, 0.0])
    ext = args.extent if args.extent is not None else 0.75 * args.xi_mag
    off = np.linspace(-ext, ext, args.grid) if args.grid > 1 else np.zeros(1)
    e1, e2 = np.meshgrid(xi[0] / 2 + off, off, indexing="ij")
    eta = np.stack([e1.ravel(), e2.ravel()], -1)
    xis = np.broadcast_to(xi, eta.shape)
    phi = _pointwise(lambda a, b: dispersion.phase(signs, a, b), xis, eta)
    grad = _pointwise(lambda a, b: np.linalg.norm(
        dispersion.phase_gradients(signs, a, b, with_xi=False)[1], axis=-1), xis, eta)
    dep = _pointwise(lambda a, b: resonance.depletion_factor(a, b, args.chi), xis, eta)
    ups = _pointwise(lambda a, b: dispersion.nondegeneracy_normalized(signs, a, b), xis, eta)
    with np.errstate(divide="ignore"):
        logphi = np.log(np.abs(phi))
    rows = np.column_stack([eta[:, 0], eta[:, 1], phi, logphi, grad, dep, ups])
    path = os.path.join(out, "resonance_atlas.csv")
    write_csv(path, ["eta1", "eta2", "phase", "log_abs_phase", "grad_eta_norm", "depletion",
                     "nondegeneracy_normalized"], rows, args.precision)
    centre = int(np.argmin(np.sum((eta - xi / 2) ** 2, axis=-1)))
    return {"points": int(eta.shape[0]), "centre_phase": phi[centre],
            "centre_grad_norm": grad[centre], "path": path}, [path]


STANDARD_CHECKS = (
    ("F1", "2gamma0:1", 10_000),
    ("F2", "2gamma0:1", 10_000),
    ("G1", "3:110", 100_000),
    ("G1+G11", "gamma1+0.3:3", 10_000),
    ("G1+G12", "gamma1+0.3:3", 10_000),
)


def _interval(text):
    g0 = dispersion.inflection_radius()
    g1 = dispersion.resonant_sphere_radius()
    names = {"2gamma0": 2 * g0, "gamma0": g0, "gamma1+0.3": g1 + 0.3, "gamma1": g1}
    lo, hi = text.split(":")
    conv = lambda s: names[s] if s in names else float(s)
    try:
        return conv(lo), conv(hi)
    except ValueError as exc:
        raise UsageError(f"bad interval {text!r}") from exc


def cmd_certify(args, out):
    if args.all == (args.id is not None):
        raise UsageError("choose exactly one of --all and --id")
    if args.all:
        checks = [(cid, _interval(iv), args.samples or n, True) for cid, iv, n in STANDARD_CHECKS]
    else:
        if args.id not in resonance.CERT_IDS:
            raise UsageError(f"unknown id {args.id!r}; choose from {resonance.CERT_IDS}")
        default = dict((c, iv) for c, iv, _ in STANDARD_CHECKS).get(args.id, "gamma1+0.3:3")
        iv = _interval(args.interval or default)
        checks = [(args.id, iv, args.samples or 10_000, args.expect_positive)]
    reports = []
    failed = False
    for cid, iv, n, expected in checks:
        rep = resonance.certify_positive(cid, iv, n).to_dict()
        rep["expected_positive"] = bool(expected)
        reports.append(rep)
        if expected and rep["verdict"] != "positive":
            failed = True
    path = os.path.join(out, "certify.json")
    write_json(path, {"reports": reports, "all_expected_passed": not failed})
    return {"reports": reports, "failed": failed}, [path]


def cmd_dn_validate(args, out):
    lo, hi = _span(args.eps_sweep, int)
    eps = 2.0 ** -np.arange(lo, hi + 1)
    orders = tuple(int(o) for o in args.orders.split(","))
    if not set(orders) <= {2, 3}:
        raise UsageError("orders must be drawn from 2,3")
    res = benchmarks.dn_expansion_sweep(args.n, args.L, eps, args.seed, orders,
                                        {"tol": args.tol, "M": args.depth_nodes})
    if args.paralin:
        res["paralinearization"] = benchmarks.paralin_sweep(args.n, args.L, eps, args.seed,
                                                            args.chi)
    path = os.path.join(out, "dn_validate.json")
    write_json(path, res)
    return res, [path]


def cmd_paradiff_validate(args, out):
    lo, hi = _span(args.dyadic_sweep, int)
    res = benchmarks.composition_benchmark(args.n, args.L, range(lo, hi + 1), args.chi,
                                           args.seed, args.first_order)
    path = os.path.join(out, "paradiff_validate.json")
    write_json(path, res)
    return res, [path]


def cmd_simulate(args, out):
    with open(args.config) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from exc
    cfg = SimConfig.from_dict(d)
    traj = run(cfg)
    path = os.path.join(out, "trajectory")
    traj.save(path)
    summary = {"steps": cfg.steps, "snapshots": len(traj.times), "failed": traj.failed,
               "error": traj.error, "path": path}
    if traj.failed:
        raise _NumericalFailure(summary)
    return summary, [path]


def cmd_znorm(args, out):
    f = read_field(args.field)
    rep = z_norm(f, delta=args.delta, n1=args.n1, n4=args.n4)
    payload = {"value": rep.value, "argmax": rep.argmax, "k_range": rep.k_range,
               "j_range": rep.j_range, "annulus_resolved_up_to": rep.annulus_resolved_up_to,
               "annulus_truncated": rep.annulus_truncated, "derivative": rep.derivative,
               "n": f.grid.n, "L": f.grid.L}
    path = os.path.join(out, "znorm.json")
    write_json(path, payload)
    return payload, [path]


class _NumericalFailure(Exception):
    def __init__(self, payload):
        super().__init__(payload.get("error", "numerical failure"))
        self.payload = payload


COMMANDS = {
    "dispersion": cmd_dispersion,
    "resonance-atlas": cmd_resonance_atlas,
    "certify": cmd_certify,
    "dn-validate": cmd_dn_validate,
    "paradiff-validate": cmd_paradiff_validate,
    "simulate": cmd_simulate,
    "znorm": cmd_znorm,
}

INPUT_ARGS = {"simulate": "config", "znorm": "field"}


def build_parser():
    p = _Parser(prog="wwlab", description=__doc__.splitlines()[0])
    p.add_argument("--out", default="wwlab-out", help="output directory (default: wwlab-out)")
    p.add_argument("--precision", type=int, default=17, help="significant digits in CSV output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("dispersion", help="constants or a table of lambda and derivatives")
    s.add_argument("--constants", action="store_true")
    s.add_argument("--table", action="store_true")
    s.add_argument("--rows", type=int, default=101)
    s.add_argument("--rmin", type=float, default=0.01)
    s.add_argument("--rmax", type=float, default=4.0)

    s = sub.add_parser("resonance-atlas", help="phase data on an eta grid around xi/2")
    s.add_argument("--xi-mag", type=float, required=True)
    s.add_argument("--signs", default="+++")
    s.add_argument("--grid", type=int, default=101)
    s.add_argument("--extent", type=float, default=None)
    s.add_argument("--chi", type=int, default=-20, help="cutoff threshold of the depletion factor")

    s = sub.add_parser("certify", help="dense-sampling positivity checks")
    s.add_argument("--all", action="store_true")
    s.add_argument("--id")
    s.add_argument("--interval", help="lo:hi; accepts gamma0, 2gamma0, gamma1, gamma1+0.3")
    s.add_argument("--samples", type=int)
    s.add_argument("--expect-positive", action="store_true",
                   help="treat a single --id check as expected-positive (exit 3 on failure)")

    s = sub.add_parser("dn-validate", help="amplitude sweep of the DN expansion")
    s.add_argument("--eps-sweep", default="7:11", help="exponents lo:hi of eps = 2^-j")
    s.add_argument("--orders", default="2,3")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--L", type=float, default=32 * np.pi)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-14)
    s.add_argument("--depth-nodes", type=int, default=96)
    s.add_argument("--paralin", action="store_true", help="also sweep the paralinearization")
    s.add_argument("--chi", type=int, default=-2)

    s = sub.add_parser("paradiff-validate", help="dyadic sweep of the composition remainder")
    s.add_argument("--dyadic-sweep", default="3:7")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--L", type=float, default=np.pi)
    s.add_argument("--chi", type=int, default=-2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--first-order", action="store_true", help="use b = |zeta|")

    s = sub.add_parser("simulate", help="run the evolution from a JSON config")
    s.add_argument("--config", required=True)

    s = sub.add_parser("znorm", help="Z-type norm of a field file")
    s.add_argument("--field", required=True)
    s.add_argument("--delta", type=float, default=1 / 2000)
    s.add_argument("--n1", type=int, default=0)
    s.add_argument("--n4", type=int, default=0)
    return p


def _params(args):
    return {k: v for k, v in vars(args).items() if k not in ("out",)}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"wwlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    key = INPUT_ARGS.get(args.command)
    inputs = [getattr(args, key)] if key else []
    for path in inputs:
        if not os.path.isfile(path):
            print(f"wwlab: error: input file not found: {path}", file=sys.stderr)
            return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    man_path = os.path.join(args.out, "manifest.json")
    seeds = [args.seed] if hasattr(args, "seed") else []
    manifest = RunManifest(args.command, _params(args), seeds, inputs=inputs)
    manifest.write(man_path)
    try:
        payload, outputs = COMMANDS[args.command](args, args.out)
    except (UsageError, ConfigError, FileNotFoundError, KeyError) as exc:
        manifest.finish(man_path, "config error")
        print(f"wwlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NumericalFailure as exc:
        manifest.finish(man_path, "numerical failure")
        print(dumps(exc.payload))
        return EXIT_NUMERICAL
    except (DivergenceError, BlowUpError, WrapAroundError, ArithmeticError,
            dispersion.DomainError, ValueError) as exc:
        manifest.finish(man_path, "numerical failure")
        print(f"wwlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest.outputs = outputs
    code = EXIT_OK
    if args.command == "certify" and payload["failed"]:
        code = EXIT_CERT
    manifest.finish(man_path, "ok" if code == EXIT_OK else "certification failed")
    print(dumps(payload))
    return code


if __name__ == "__main__":
    sys.exit(main())
