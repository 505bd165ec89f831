"""Command-line driver.

Exit codes: 0 on success, 1 on a structured pipeline failure, 2 on usage
errors.  All data artifacts are CSV/JSON; the report subcommand also
renders figures next to them.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, experiment, heat, kernels, laplace
from . import montecarlo, subordination
from .kernels import KernelSpec
from .series import TimeSeries


def _load_spec(args):
    if args.spec:
        return KernelSpec.from_json(args.spec)
    if args.config:
        cfg = experiment.ExperimentConfig.from_toml(args.config)
        return cfg.kernel
    raise SystemExit2("either --spec or --config is required")


class SystemExit2(SystemExit):
    def __init__(self, msg):
        print(f"usage error: {msg}", file=sys.stderr)
        super().__init__(2)


def _fail(payload):
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return 1


def _emit(obj, out=None, name="result.json"):
    text = json.dumps(obj, sort_keys=True, indent=1)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / name).write_text(text)
    print(text)


def cmd_kernel_eval(args):
    spec = _load_spec(args)
    lams = [float(x) for x in args.lam.split(",")] if args.lam else [0.5, 1.0]
    rows = {}
    for lam in lams:
        row = {"K": kernels.eval_K(spec, lam), "phi": kernels.eval_phi(spec, lam)}
        try:
            row["k_time"] = kernels.eval_k_time(spec, lam)
        except kernels.UnsupportedKernelFormError:
            row["k_time"] = None
        rows[str(lam)] = row
    report = kernels.admissibility_report(spec)
    _emit({"class": spec.kind, "params": dict(spec.params), "values": rows,
           "rv_index": spec.rv_index, "phi_limit": spec.phi_limit,
           "admissibility": report.to_dict()}, args.out, "kernel_eval.json")
    return 0


def cmd_g_density(args):
    spec = _load_spec(args)
    ts = [float(x) for x in args.t.split(",")]
    rows = []
    for t in ts:
        tau_hi = args.tau_max or 8.0 * max(math.sqrt(t), 1.0)
        taus = np.linspace(0.0, tau_hi, args.points)
        dens = laplace.g_density_grid(spec, t, taus)
        rows.extend((t, tau, g) for tau, g in zip(taus, dens))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "g_density.csv"
    np.savetxt(path, np.array(rows), delimiter=",", header="t,tau,G",
               comments="", fmt="%.17g")
    print(str(path))
    return 0


def cmd_heat_solve(args):
    params = heat.HeatParams(s=args.s, dim=args.dim,
                             box_halfwidth=args.box, grid_points=args.grid)
    phi = {"gaussian": heat.gaussian_datum, "bump": heat.bump_datum,
           "two_bumps": heat.two_bumps_datum}[args.datum](params)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for t in [float(x) for x in args.t.split(",")]:
        snap = heat.solve(params, phi, t)
        base = out / f"field_t{t:g}"
        heat.export_field_csv(snap, f"{base}.csv")
        heat.write_grid_dump(snap, f"{base}.bin")
        written.append(str(base))
    print(json.dumps({"written": written, "mass": phi.integral()}))
    return 0


def cmd_subordinate(args):
    cfg = experiment.ExperimentConfig.from_toml(args.config)
    if args.out:
        cfg.output_dir = args.out
    if args.seed is not None and cfg.mc:
        cfg.mc["seed"] = args.seed
    cfg.make_figures = False
    summary = experiment.run_experiment(cfg, threads=args.threads)
    print(json.dumps({"passed": summary["passed"],
                      "output_dir": cfg.output_dir}, sort_keys=True))
    return 0 if summary["passed"] else 1


def cmd_fit(args):
    series = TimeSeries.from_csv(args.series)
    fit = subordination.fit_decay(series, (args.t_lo, args.t_hi),
                                  model=args.model)
    _emit(json.loads(fit.to_json()), args.out, "fit.json")
    return 0


def cmd_mc_check(args):
    spec = _load_spec(args)
    seed = args.seed if args.seed is not None else 0
    est = montecarlo.laplace_exponent_check(spec, args.t, args.lam,
                                            args.paths, seed=seed)
    out = {"exponent_check": {"estimate": est.value, "se": est.se,
                              "target": est.target, "covered": est.covered}}
    if spec.kind == kernels.STABLE:
        rep = montecarlo.empirical_density_check(spec, args.t,
                                                 min(args.paths, 20000),
                                                 seed=seed)
        out["density_ks"] = {"stat": rep.ks_stat, "threshold": rep.threshold,
                             "passed": rep.passed}
    _emit(out, args.out, "mc_check.json")
    return 0 if est.covered else 1


def cmd_tauberian(args):
    rho = args.rho
    U = lambda t: t ** rho / math.gamma(rho + 1.0)
    rep = asymptotics.karamata_pair_check(U, rho=rho)
    f_val = asymptotics.incomplete_gamma_F(args.theta, args.eps)
    pred = asymptotics.incomplete_gamma_predicted(args.theta, args.eps)
    _emit({
        "karamata": {"transform_constant": rep.transform_constant,
                     "time_constant": rep.time_constant,
                     "consistency": rep.consistency},
        "truncated_gamma": {"quadrature": f_val, "predicted": pred,
                            "ratio": f_val / pred},
    }, args.out, "tauberian.json")
    return 0


def cmd_selftest(args):
    report = experiment.run_selftests(args.suite)
    _emit(report, args.out, "selftest.json")
    return 0 if report["passed"] else 1


def cmd_report(args):
    if args.config:
        cfg = experiment.ExperimentConfig.from_toml(args.config)
    elif args.preset:
        cfg = experiment.preset_config(args.preset, mc=args.mc)
    else:
        raise SystemExit2("report needs --config or --preset")
    if args.out:
        cfg.output_dir = args.out
    if args.seed is not None and cfg.mc:
        cfg.mc["seed"] = args.seed
    cfg.make_figures = True
    summary = experiment.run_experiment(cfg, threads=args.threads)
    print(json.dumps({"passed": summary["passed"],
                      "output_dir": cfg.output_dir,
                      "config_hash": summary["config_hash"]}, sort_keys=True))
    return 0 if summary["passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="subheat",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec_opt=True):
        sp.add_argument("--config", help="TOML experiment config")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1)
        if spec_opt:
            sp.add_argument("--spec", help='kernel JSON, e.g. '
                            '{"class":"stable","params":{"theta":0.5}}')

    sp = sub.add_parser("kernel-eval", help="evaluate K, phi, k and admissibility")
    common(sp)
    sp.add_argument("--lam", help="comma-separated lambda values")
    sp.set_defaults(func=cmd_kernel_eval)

    sp = sub.add_parser("g-density", help="tabulate the first-passage density")
    common(sp)
    sp.add_argument("--t", default="1.0", help="comma-separated times")
    sp.add_argument("--tau-max", type=float, default=None)
    sp.add_argument("--points", type=int, default=200)
    sp.set_defaults(func=cmd_g_density)

    sp = sub.add_parser("heat-solve", help="solve and dump field snapshots")
    common(sp, spec_opt=False)
    sp.add_argument("--s", type=float, default=0.75)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--box", type=float, default=20.0)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--datum", default="gaussian",
                    choices=["gaussian", "bump", "two_bumps"])
    sp.add_argument("--t", default="1.0")
    sp.set_defaults(func=cmd_heat_solve)

    sp = sub.add_parser("subordinate", help="run the pipeline, data only")
    common(sp, spec_opt=False)
    sp.set_defaults(func=cmd_subordinate)

    sp = sub.add_parser("fit", help="fit a decay law to a series CSV")
    common(sp, spec_opt=False)
    sp.add_argument("--series", required=True)
    sp.add_argument("--t-lo", type=float, required=True)
    sp.add_argument("--t-hi", type=float, required=True)
    sp.add_argument("--model", default="pure_power",
                    choices=["pure_power", "power_with_log"])
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("mc-check", help="Monte Carlo subordinator checks")
    common(sp)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--paths", type=int, default=20000)
    sp.set_defaults(func=cmd_mc_check)

    sp = sub.add_parser("tauberian", help="transform-side asymptotics checks")
    common(sp, spec_opt=False)
    sp.add_argument("--rho", type=float, default=0.7)
    sp.add_argument("--theta", type=float, default=0.5)
    sp.add_argument("--eps", type=float, default=1e-4)
    sp.set_defaults(func=cmd_tauberian)

    sp = sub.add_parser("selftest", help="run module invariant suites")
    common(sp, spec_opt=False)
    sp.add_argument("--suite", default="all",
                    choices=[*experiment._SUITES, "all"])
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("report", help="full pipeline with figures")
    common(sp, spec_opt=False)
    sp.add_argument("--preset", choices=["c1_stable", "c2_distributed_order",
                                         "c3_inverse_gamma", "c4_gamma",
                                         "c5_tempered", "n1_band"])
    sp.add_argument("--mc", action="store_true")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except experiment.StageError as exc:
        return _fail(exc.to_dict())
    except (ValueError, kernels.KernelEvaluationError,
            laplace.InversionError, laplace.QuadratureError) as exc:
        return _fail({"error": type(exc).__name__, "message": str(exc)})


if __name__ == "__main__":
    sys.exit(main())
