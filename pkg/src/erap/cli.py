"""Command-line interface.

Exit codes: 0 success, 2 bad arguments or spec, 3 runtime/config failure.
"""

import argparse
import csv
import json
import math
import os
import sys

from erap import __version__
from erap import mc
from erap.lap import build_cost_matrix, solve_jv
from erap.manifolds import ManifoldSpec, make_manifold
from erap.pointsets import GENERATOR_NAME, PointSet, fibonacci_grid, lattice_grid
from erap.spectral import masses, spectra


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def _add_spec(p, required=True):
    g = p.add_argument_group("manifold")
    g.add_argument("--spec", help="manifold spec as a JSON object")
    g.add_argument("--family", required=False)
    g.add_argument("--rho", type=float)
    g.add_argument("--tau-re", type=float, default=0.0)
    g.add_argument("--tau-im", type=float)
    g.add_argument("--p", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--bc", choices=["periodic", "neumann"])


def spec_from_args(args):
    try:
        if args.spec:
            return ManifoldSpec.from_json(args.spec)
        if not args.family:
            raise UsageError("either --spec or --family is required")
        tau = None
        if args.tau_im is not None:
            tau = complex(args.tau_re, args.tau_im)
        return ManifoldSpec(args.family, rho=args.rho, tau=tau, p=args.p, k=args.k, bc=args.bc)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad manifold spec: {exc}") from exc


def _meta(args, **extra):
    d = {"version": __version__, "seed": getattr(args, "seed", None), "generator": GENERATOR_NAME, "conventions": mc.CONVENTIONS}
    d.update(extra)
    return d


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _write_sidecar(path, meta):
    if path:
        base = path[:-4] if path.endswith(".csv") else path
        with open(base + ".json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)


def _emit_json(obj, path):
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _r12(x):
    return float(f"{x:.12f}")


# ---------------------------------------------------------------------------


def cmd_mass(args):
    spec = spec_from_args(args)
    rep = masses.mass_report(spec)
    out = {
        "spec": spec.to_dict(),
        "K": _r12(rep.kronecker_mass),
        "R": _r12(rep.robin_mass),
        "method": rep.method,
        "meta": _meta(args),
    }
    _emit_json(out, args.out)


def cmd_spectrum(args):
    spec = spec_from_args(args)
    st = spectra.spectrum(spec, args.cutoff)
    fh = _open_out(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["eigenvalue", "multiplicity"])
    for lam, m in st:
        w.writerow([repr(lam), m])
    if args.out:
        fh.close()
    _write_sidecar(args.out, _meta(args, spec=spec.to_dict(), cutoff=args.cutoff))


def cmd_grid(args):
    spec = spec_from_args(args)
    M = make_manifold(spec)
    if args.kind == "lattice":
        if args.grid_k is None:
            raise UsageError("--grid-k is required for lattice grids")
        ps = lattice_grid(M, args.grid_k)
    else:
        if args.n is None:
            raise UsageError("--n is required for Fibonacci grids")
        ps = fibonacci_grid(M, args.n)
    if args.out:
        ps.to_csv(args.out, seed=args.seed, meta={"version": __version__, "conventions": mc.CONVENTIONS})
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["index", "c1", "c2"])
        for i, (a, b) in enumerate(ps.points.tolist()):
            w.writerow([i, repr(a), repr(b)])


def cmd_solve(args):
    X = PointSet.from_csv(args.x)
    Y = PointSet.from_csv(args.y)
    if X.manifold != Y.manifold:
        raise ValueError(f"point sets live on different manifolds: {X.manifold} vs {Y.manifold}")
    M = make_manifold(X.manifold)
    sol = solve_jv(build_cost_matrix(M, X, Y))
    _emit_json(
        {"permutation": [int(p) for p in sol.permutation], "cost": sol.cost, "meta": _meta(args, spec=X.manifold.to_dict())},
        args.out,
    )


def cmd_experiment(args):
    try:
        cfg = mc.ExperimentConfig.from_json(args.config)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise RuntimeError(f"bad config {args.config}: {exc}") from exc
    if args.out:
        cfg.output = args.out
    if args.seed_override is not None:
        cfg.seed = args.seed_override
    cfg.threads = args.threads
    if not cfg.output:
        raise RuntimeError("config has no output path and --out was not given")

    def progress(rec):
        print(f"N={rec.N} mean={rec.mean_cost:.6f} se={rec.std_err:.2e} c={rec.c_estimate:.6f}", file=sys.stderr)

    mc.run_experiment(cfg, progress=progress)


def cmd_diff(args):
    ref_value = args.reference
    fam = args.family
    params = args.rho_list if args.rho_list else args.param_list
    if not params:
        raise UsageError("--rho-list (or --param-list) is required")

    def make(v):
        if fam == "torus":
            return ManifoldSpec("torus", tau=complex(0, v))
        if fam == "cone":
            return ManifoldSpec("cone", p=int(v))
        if fam == "lune":
            return ManifoldSpec("lune", k=int(v), bc=args.bc or "periodic")
        return ManifoldSpec(fam, rho=v)

    try:
        ref = make(ref_value)
        specs = [make(v) for v in params]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ens = mc.normalize_ensemble(args.ensemble)
    sizes = args.sizes
    fh = _open_out(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["param", "N", "measured", "std_err", "predicted"])

    def run(spec, seed):
        cfg = mc.ExperimentConfig(spec, ens, tuple(sizes), args.instances, seed, None, args.threads)
        return {r.N: r for r in mc.run_experiment(cfg)}

    base = run(ref, args.seed)
    for v, spec in zip(params, specs):
        pred = mc.predict_difference(spec, ref, ens)
        # the reference itself gets a fresh seed so the two runs stay independent
        recs = run(spec, args.seed if spec != ref else args.seed + 1)
        series = []
        for N in sizes:
            a, b = recs[N], base[N]
            d = a.mean_cost - b.mean_cost
            e = math.hypot(a.std_err, b.std_err)
            series.append((N, d, e))
            w.writerow([repr(v), N, repr(d), repr(e), repr(pred)])
        if len(set(sizes)) >= 3 and all(s[2] > 0 for s in series):
            fit = mc.fit_quadratic_invsqrt(series)
            w.writerow([repr(v), "inf", repr(fit.a), repr(fit.sigma[0]), repr(pred)])
        fh.flush()
    if args.out:
        fh.close()
    _write_sidecar(args.out, _meta(args, family=fam, reference=ref.to_dict(), ensemble=ens, sizes=sizes, instances=args.instances))


def cmd_tau_scan(args):
    re_vals, im_vals = masses.fundamental_region_grid(args.n, args.im_max)
    rows = masses.tau_scan(re_vals, im_vals)
    fh = _open_out(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["re_tau", "im_tau", "K"])
    for re, im, K in rows:
        w.writerow([repr(re), repr(im), repr(K)])
    if args.out:
        fh.close()
    best = masses.tau_scan_argmin(rows)
    print(f"argmin tau = {best[0]:.6f}{best[1]:+.6f}i  K = {best[2]:.10f}", file=sys.stderr)
    _write_sidecar(args.out, _meta(args, grid=args.n, im_max=args.im_max, argmin=list(best)))


def cmd_sandwich(args):
    spec = spec_from_args(args)
    if spec.family != "torus":
        raise UsageError("sandwich needs a torus")
    v = mc.gp_up_sandwich(spec, args.N, args.h_list, args.instances, args.seed, args.threads)
    out = {
        "spec": spec.to_dict(),
        "N": v.N,
        "estimates": {str(h): {"c": c, "err": e} for h, (c, e) in v.estimates.items()},
        "pairs": [{"h": h, "h_prime": h2, "lhs": lhs, "rhs": rhs, "ok": ok} for h, h2, lhs, rhs, ok in v.pairs],
        "holds": v.holds,
        "meta": _meta(args),
    }
    _emit_json(out, args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="erap", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mass", help="Kronecker and Robin masses")
    _add_spec(p)
    _add_common(p)
    p.set_defaults(func=cmd_mass)

    p = sub.add_parser("spectrum", help="Laplace-Beltrami spectrum below a cutoff")
    _add_spec(p)
    p.add_argument("--cutoff", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("grid", help="deterministic point grids")
    _add_spec(p)
    p.add_argument("--kind", choices=["lattice", "fibonacci"], default="lattice")
    p.add_argument("--grid-k", dest="grid_k", type=int, help="lattice grid divisions per unit length")
    p.add_argument("--n", type=int, help="number of Fibonacci points")
    _add_common(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("solve", help="solve one instance from two point-set CSV files")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--seed", dest="seed_override", type=int, default=None)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("diff", help="measured vs predicted cost differences over a parameter list")
    p.add_argument("--family", required=True)
    p.add_argument("--rho-list", type=_floats)
    p.add_argument("--param-list", type=_floats, help="tau_im (torus), p (cone) or k (lune)")
    p.add_argument("--reference", type=float, default=1.0)
    p.add_argument("--bc", choices=["periodic", "neumann"])
    p.add_argument("--ensemble", default="pp")
    p.add_argument("--sizes", type=_ints, default=[256])
    p.add_argument("--instances", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("tau-scan", help="K_T(tau) over the fundamental region")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--im-max", type=float, default=1.5)
    _add_common(p)
    p.set_defaults(func=cmd_tau_scan)

    p = sub.add_parser("sandwich", help="grid-Poisson bounds on the torus")
    _add_spec(p)
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--h-list", type=_ints, default=[1, 4, 9])
    p.add_argument("--instances", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(func=cmd_sandwich)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
