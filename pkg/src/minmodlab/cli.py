"""Command-line front end.

Subcommands mirror the library capabilities: ``simulate`` (ensemble + fit +
histogram), ``minmod`` (one instance, both methods), ``classify`` (bad-arc
masks), ``covariance``, ``charfn``, ``smallball``, ``edgeworth`` and
``report`` (a bundled fast self-check).  Exit codes: 0 on success, 2 on a
precondition refusal, 3 when ``report`` finds a failing check.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .arithmetic import PhaseTuple, classify_bad_arcs, random_smooth_spread_tuple
from .edgeworth import compare_box
from .harness import TARGET_RATE, fit_exponential, histogram, run_ensemble
from .minima import build_mesh, global_min
from .phasewalk import charfn_log_modulus, covariance, small_ball_polynomial
from .polymodel import (
    CoefficientDist,
    ModelSpec,
    PreconditionError,
    sample_polynomial,
    split_seed,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="symmetric_kac",
                   choices=["symmetric_kac", "one_sided_kac", "cos_sin"])
    p.add_argument("--dist", default="gaussian_complex_split",
                   choices=["rademacher", "gaussian_real", "gaussian_complex_split",
                            "uniform_symmetric"])
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k0", type=float, default=5.0)
    p.add_argument("--c0", type=float, default=2.0)
    p.add_argument("--beta", type=int, default=64)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--method", default="mesh_linearized",
                   choices=["mesh_linearized", "dense_oracle"])
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", default="json", choices=["csv", "json"])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--m", type=int, default=1, help="number of angles in the tuple")
    p.add_argument("--tuple", dest="tuple_", default=None,
                   help="comma-separated rescaled angles t_r (default: random smooth+spread)")
    p.add_argument("--a", type=float, default=1.0, help="cos_sin constant-term weight")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _spec(args) -> ModelSpec:
    dist = CoefficientDist(args.dist)
    a = args.a if args.model == "cos_sin" else None
    return ModelSpec(model=args.model, n=args.n, dist=dist, a=a)


def _tuple(args) -> PhaseTuple:
    if args.tuple_:
        return PhaseTuple(tuple(float(v) for v in args.tuple_.split(",")), args.n)
    rng = np.random.default_rng(split_seed(args.seed, 10_001))
    return random_smooth_spread_tuple(args.n, args.m, rng, K=args.n**0.3)


def _mesh_params(args) -> dict:
    return {"K0": args.k0, "C0": args.c0, "beta": args.beta}


def cmd_simulate(args) -> int:
    res = run_ensemble(
        _spec(args), _mesh_params(args), M=args.replicates,
        master_seed=args.seed, method=args.method, threads=args.threads,
    )
    clean = res.clean_samples()
    fit = fit_exponential(clean) if len(clean) >= 100 else None
    if args.format == "csv":
        _emit(histogram(clean, bins=40), args.out)
        return 0
    doc = {
        "model": args.model, "dist": args.dist, "n": args.n,
        "replicates": args.replicates, "method": args.method,
        "failures": len(res.failures), "wallclock_s": res.wallclock,
        "mean": float(clean.mean()) if len(clean) else None,
        "fit": None if fit is None else {
            "lambda_hat_mle": fit.lambda_hat_mle,
            "lambda_hat_tail": fit.lambda_hat_tail,
            "ks_vs_fitted": fit.ks_vs_fitted,
            "ks_vs_target": fit.ks_vs_target,
            "target_rate": TARGET_RATE,
            "ci_mle": fit.ci_mle,
        },
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_minmod(args) -> int:
    poly = sample_polynomial(_spec(args), args.seed)
    mesh = build_mesh(args.n, **_mesh_params(args))
    gm_mesh = global_min(poly, "mesh_linearized", mesh=mesh, kappa=args.kappa)
    gm_dense = global_min(poly, "dense_oracle", resolution=64 * args.n)
    doc = {
        "n": args.n, "seed": args.seed,
        "mesh_linearized": {"x": gm_mesh.x, "value": gm_mesh.value,
                            "used_fallback": gm_mesh.used_fallback},
        "dense_oracle": {"x": gm_dense.x, "value": gm_dense.value},
        "n_times_min": args.n * gm_dense.value,
    }
    if args.format == "csv":
        _emit("method,x,value\n"
              f"mesh_linearized,{gm_mesh.x:.17g},{gm_mesh.value:.17g}\n"
              f"dense_oracle,{gm_dense.x:.17g},{gm_dense.value:.17g}\n", args.out)
    else:
        _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_classify(args) -> int:
    mesh = build_mesh(args.n, **_mesh_params(args))
    bad = classify_bad_arcs(mesh, args.kappa)
    if args.format == "csv":
        rows = ["alpha,bad"] + [f"{a + 1},{int(b)}" for a, b in enumerate(bad)]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        _emit(json.dumps({
            "n": args.n, "kappa": args.kappa, "N_effective": mesh.N_effective,
            "bad_count": int(bad.sum()), "bad_fraction": float(bad.mean()),
        }, indent=2), args.out)
    return 0


def cmd_covariance(args) -> int:
    tup = _tuple(args)
    V, sigma_min = covariance(tup)
    doc = {"n": args.n, "t": list(tup.t), "sigma_min": sigma_min, "V": V.tolist()}
    if args.format == "csv":
        rows = [",".join(f"{v:.17g}" for v in row) for row in V]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_charfn(args) -> int:
    tup = _tuple(args)
    rng = np.random.default_rng(split_seed(args.seed, 10_002))
    x = rng.standard_normal(4 * tup.m)
    x *= (0.1 + 9.9 * rng.random()) / np.linalg.norm(x)
    res = charfn_log_modulus(tup, x, CoefficientDist(args.dist))
    doc = {"n": args.n, "t": list(tup.t), "x": x.tolist(),
           "log_modulus": res.value, "stderr": res.stderr, "saturated": res.saturated,
           "decay_threshold": -math.log(args.n) ** 2}
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_smallball(args) -> int:
    tup = _tuple(args)
    dist = CoefficientDist(args.dist)
    records = []
    for delta in (0.4, 0.6, 0.8, 1.0):
        p, se = small_ball_polynomial(tup, dist, delta, samples=max(args.replicates, 10_000),
                                      seed=args.seed)
        records.append({"delta": delta, "p": p, "stderr": se})
    if args.format == "csv":
        rows = ["delta,p,stderr"] + [
            f"{r['delta']},{r['p']:.17g},{r['stderr']:.17g}" for r in records]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        _emit(json.dumps({"n": args.n, "t": list(tup.t), "records": records}, indent=2),
              args.out)
    return 0


def cmd_edgeworth(args) -> int:
    tup = _tuple(args)
    box = [(-0.5, 0.5)] * (4 * tup.m)
    rec = compare_box(tup, CoefficientDist(args.dist), box,
                      samples=max(args.replicates, 10_000), ell=4, seed=args.seed)
    _emit(json.dumps({"n": args.n, "t": list(tup.t), **rec}, indent=2), args.out)
    return 0


def cmd_report(args) -> int:
    """Fast bundled self-check (scaled-down versions of the slow experiments)."""
    checks: list[tuple[str, bool, str]] = []

    spec = ModelSpec("symmetric_kac", 200, CoefficientDist("gaussian_complex_split"))
    res = run_ensemble(spec, M=500, master_seed=args.seed, method="dense_oracle",
                       threads=args.threads)
    fit = fit_exponential(res.clean_samples())
    ok = abs(fit.lambda_hat_mle - TARGET_RATE) < 0.5
    checks.append(("exponential_rate", ok,
                   f"lambda_hat={fit.lambda_hat_mle:.3f} target={TARGET_RATE:.3f}"))

    rng = np.random.default_rng(split_seed(args.seed, 10_003))
    tup = random_smooth_spread_tuple(4096, 1, rng, K=4096**0.3)
    _V, sigma_min = covariance(tup)
    checks.append(("covariance_positive", sigma_min > 0, f"sigma_min={sigma_min:.3g}"))

    x = rng.standard_normal(4)
    x *= 1.0 / np.linalg.norm(x)
    cf = charfn_log_modulus(tup, x, CoefficientDist("rademacher"))
    thresh = -math.log(4096) ** 2
    checks.append(("charfn_decay", cf.value <= thresh,
                   f"log_modulus={cf.value:.1f} threshold={thresh:.1f}"))

    ps = []
    for delta in (0.4, 1.0):
        p, _ = small_ball_polynomial(tup, CoefficientDist("rademacher"), delta,
                                     samples=200_000, seed=args.seed)
        ps.append(max(p, 1e-12))
    slope = (math.log(ps[1]) - math.log(ps[0])) / (math.log(1.0) - math.log(0.4))
    checks.append(("smallball_slope", 1.0 <= slope <= 5.0, f"slope={slope:.2f}"))

    doc = {"checks": [{"name": n, "pass": bool(p), "detail": d} for n, p, d in checks],
           "all_pass": all(p for _, p, _ in checks)}
    _emit(json.dumps(doc, indent=2), args.out)
    return 0 if doc["all_pass"] else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minmodlab",
        description="Minimum modulus of random trigonometric polynomials: "
                    "simulation and verification tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "simulate": cmd_simulate, "minmod": cmd_minmod, "classify": cmd_classify,
        "covariance": cmd_covariance, "charfn": cmd_charfn,
        "smallball": cmd_smallball, "edgeworth": cmd_edgeworth, "report": cmd_report,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except PreconditionError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
