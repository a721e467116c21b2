"""Command-line front end.

Commands::

    gibbsgap analyze         exact norms, gaps, angle, bounds for one target
    gibbsgap sweep           dimension sweep with decay-rate fit and gap floor
    gibbsgap sample          simulation diagnostics (CLT and tail panels)
    gibbsgap counterexample  ladder-chain truncation sweep

Exit status: 0 success, 1 an asserted inequality was violated beyond
tolerance, 2 usage or validation error, 3 state-count cap exceeded.

Scan mini-grammar: ``dsg:i1,i2,...,id`` (update order, 1-based) and
``rsg:uniform`` or ``rsg:w1,w2,...,wd``.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, geometry, bounds as bounds_mod
from .counterexample import reversibilization_gap_sweep
from .errors import InequalityViolationError, StateCapError, ValidationError
from .measure import TargetDistribution, equicorrelated_binary, parse_target
from .operators import (
    DEFAULT_STATE_CAP,
    DeterministicScan,
    RandomScan,
    l2_norm_centered,
    spectral_radius_centered,
    symmetrized_sweep,
    dsg,
    rsg,
)
from .reporting import default_output_dir, report_document, write_csv, write_json
from .sampler import (
    asymptotic_variance_estimate,
    clt_variance_bound,
    empirical_tail,
    run_chain,
    scan_operator,
)

GAP_POSITIVE_TOL = 1e-9


def parse_scan(text: str):
    kind, _, rest = text.partition(":")
    if kind == "dsg":
        try:
            order = tuple(int(x) for x in rest.split(","))
        except ValueError:
            raise ValidationError("bad scan spec %r" % text)
        return DeterministicScan(order)
    if kind == "rsg":
        if rest == "uniform":
            return "rsg:uniform"
        try:
            weights = tuple(float(x) for x in rest.split(","))
        except ValueError:
            raise ValidationError("bad scan spec %r" % text)
        return RandomScan(weights)
    raise ValidationError("unknown scan kind in %r (want dsg:... or rsg:...)" % text)


def _resolve_scan(scan, d: int):
    if scan == "rsg:uniform":
        return RandomScan.uniform(d)
    return scan


def _load_target(args) -> TargetDistribution:
    if args.target_file and args.model:
        raise ValidationError("give exactly one of --target-file and --model")
    if args.target_file:
        with open(args.target_file, "r", encoding="utf-8") as fh:
            return parse_target(fh.read())
    if args.model:
        if args.model != "equicorrelated_binary":
            raise ValidationError("unknown model %r" % args.model)
        if args.d is None or args.epsilon is None:
            raise ValidationError("--model equicorrelated_binary needs --d and --epsilon")
        return equicorrelated_binary(args.d, args.epsilon)
    raise ValidationError("give one of --target-file and --model")


def _scan_label(scan) -> str:
    if isinstance(scan, DeterministicScan):
        return "dsg:" + ",".join(str(i) for i in scan.order)
    return "rsg:" + ",".join(repr(w) for w in scan.weights)


def cmd_analyze(args) -> int:
    pi = _load_target(args)
    d = pi.space.d
    scan_args = args.scan or ["dsg:" + ",".join(map(str, range(1, d + 1))), "rsg:uniform"]
    scans = [_resolve_scan(parse_scan(s), d) for s in scan_args]

    angle_cf = geometry.friedrichs_angle_from_norm(pi)
    angle_bf = geometry.friedrichs_angle_bruteforce(pi)
    incl = geometry.inclination(pi, restarts=args.restarts, seed=args.seed)
    sandwich = geometry.check_sandwich(angle_cf.value, incl.value, d)

    scan_rows = []
    for scan in scans:
        op = scan_operator(pi, scan, state_cap=args.state_cap)
        norm = l2_norm_centered(op)
        rho = spectral_radius_centered(op)
        scan_rows.append({
            "scan": _scan_label(scan),
            "l2_norm_centered": norm,
            "spectral_radius_centered": rho,
            "spectral_gap": 1.0 - rho,
            "reversible": isinstance(scan, RandomScan),
        })

    sigma_list = [s.order for s in scans if isinstance(s, DeterministicScan)] or None
    weight_list = [s.weights for s in scans if isinstance(s, RandomScan)] or None
    bound_report = bounds_mod.verify_bounds(pi, sigma_list=sigma_list,
                                            weight_list=weight_list, seed=args.seed)

    # numeric surrogates for the six equivalent gap conditions
    perms = bounds_mod.sample_permutations(d, seed=args.seed)
    perm_norms = {",".join(map(str, s)): l2_norm_centered(dsg(s, pi, state_cap=args.state_cap))
                  for s in perms}
    rng = np.random.default_rng(args.seed)
    weight_norms = []
    for _ in range(args.weight_samples):
        w = rng.dirichlet(np.ones(d))
        w = np.maximum(w, 1e-9)
        w = w / w.sum()
        weight_norms.append(l2_norm_centered(rsg(RandomScan(tuple(w)), pi, state_cap=args.state_cap)))
    sym_norms = {",".join(map(str, s)): l2_norm_centered(symmetrized_sweep(s, pi, state_cap=args.state_cap))
                 for s in perms}
    uniform_norm = l2_norm_centered(rsg(RandomScan.uniform(d), pi, state_cap=args.state_cap))
    panel = {
        "some_rsg_norm_lt_1": bool(uniform_norm < 1.0 - GAP_POSITIVE_TOL),
        "all_rsg_norm_lt_1": bool(all(v < 1.0 - GAP_POSITIVE_TOL for v in [uniform_norm] + weight_norms)),
        "some_dsg_norm_lt_1": bool(any(v < 1.0 - GAP_POSITIVE_TOL for v in perm_norms.values())),
        "all_dsg_norm_lt_1": bool(all(v < 1.0 - GAP_POSITIVE_TOL for v in perm_norms.values())),
        "some_sym_norm_lt_1": bool(any(v < 1.0 - GAP_POSITIVE_TOL for v in sym_norms.values())),
        "all_sym_norm_lt_1": bool(all(v < 1.0 - GAP_POSITIVE_TOL for v in sym_norms.values())),
        "dsg_norms_by_permutation": perm_norms,
        "rsg_norms_sampled_weights": weight_norms,
        "sym_norms_by_permutation": sym_norms,
    }
    conditions = [panel["some_rsg_norm_lt_1"], panel["all_rsg_norm_lt_1"],
                  panel["some_dsg_norm_lt_1"], panel["all_dsg_norm_lt_1"],
                  panel["some_sym_norm_lt_1"], panel["all_sym_norm_lt_1"]]
    panel["all_conditions_agree"] = bool(len(set(conditions)) == 1)

    body = {
        "target": {"dims": pi.space.dims, "pmf": pi.pmf},
        "angle_closed_form": angle_cf.value,
        "angle_brute_force": angle_bf.value,
        "angle_degenerate": angle_bf.degenerate,
        "inclination_upper_bound": incl.value,
        "inclination_restarts": incl.restarts,
        "sandwich": sandwich,
        "scans": scan_rows,
        "bounds": [{"name": e.name, "bound": e.bound, "exact": e.exact,
                    "slack": e.slack, "sharp": e.sharp, "inputs": e.inputs}
                   for e in bound_report.entries],
        "equivalence_panel": panel,
    }
    doc = report_document("analyze", _config_dict(args), body)
    os.makedirs(args.out_dir, exist_ok=True)
    write_json(doc, os.path.join(args.out_dir, "analyze.json"))
    if "csv" in args.formats:
        write_csv(body["bounds"], os.path.join(args.out_dir, "bounds.csv"),
                  columns=["name", "bound", "exact", "slack", "sharp"])

    violations = bound_report.violations()
    if violations or not sandwich["left_pass"] or not panel["all_conditions_agree"]:
        print("assertion failure: %d bound violations, sandwich left pass=%s, panel agree=%s"
              % (len(violations), sandwich["left_pass"], panel["all_conditions_agree"]),
              file=sys.stderr)
        return 1
    print("analyze: report written to %s" % os.path.join(args.out_dir, "analyze.json"))
    return 0


def cmd_sweep(args) -> int:
    d_list = args.d_list
    if len(d_list) < 3:
        raise ValidationError("sweep needs at least 3 dimension points to fit a rate")
    rows = []
    for d in d_list:
        pi = equicorrelated_binary(d, args.epsilon)
        gap_rsg = 1.0 - l2_norm_centered(rsg(RandomScan.uniform(d), pi, state_cap=args.state_cap))
        perms = bounds_mod.sample_permutations(d, seed=args.seed)
        gaps = [1.0 - spectral_radius_centered(dsg(s, pi, state_cap=args.state_cap)) for s in perms]
        rows.append({
            "d": d,
            "gap_rsg": gap_rsg,
            "gap_dsg_worst": min(gaps),
            "gap_dsg_best": max(gaps),
            "permutations_checked": len(perms),
        })
    logd = np.log([r["d"] for r in rows])
    logg = np.log([r["gap_rsg"] for r in rows])
    slope, intercept = np.polyfit(logd, logg, 1)
    beta = float(max(-slope, 1e-12))
    gamma = float(min(np.exp(logg + beta * logd)))  # largest gamma with gap >= gamma d^-beta
    ok = True
    for r in rows:
        r["floor"] = bounds_mod.rapid_mixing_transfer(beta, gamma, r["d"])
        r["floor_ok"] = bool(r["gap_dsg_worst"] >= r["floor"] - 1e-12)
        ok = ok and r["floor_ok"]
    body = {"rows": rows, "beta_fit": beta, "gamma_fit": gamma}
    doc = report_document("sweep", _config_dict(args), body)
    os.makedirs(args.out_dir, exist_ok=True)
    write_json(doc, os.path.join(args.out_dir, "sweep.json"))
    write_csv(rows, os.path.join(args.out_dir, "sweep.csv"),
              columns=["d", "gap_rsg", "gap_dsg_worst", "gap_dsg_best",
                       "permutations_checked", "floor", "floor_ok"])
    if not ok:
        print("assertion failure: deterministic-scan gap below the transfer floor", file=sys.stderr)
        return 1
    print("sweep: wrote %s" % os.path.join(args.out_dir, "sweep.csv"))
    return 0


def _indicator(pi: TargetDistribution, spec_text: str) -> np.ndarray:
    kind, _, rest = spec_text.partition(":")
    if kind != "coord":
        raise ValidationError("function spec must be coord:i, got %r" % spec_text)
    i = int(rest)
    if not 1 <= i <= pi.space.d:
        raise ValidationError("coordinate %d out of range" % i)
    states = pi.space.all_multi_indices()
    top = pi.space.dims[i - 1] - 1
    return (states[:, i - 1] == top).astype(float)


def cmd_sample(args) -> int:
    pi = _load_target(args)
    d = pi.space.d
    if args.replicas < 1:
        raise ValidationError("replicas must be >= 1")
    scan_args = args.scan or ["dsg:" + ",".join(map(str, range(1, d + 1))), "rsg:uniform"]
    scans = [_resolve_scan(parse_scan(s), d) for s in scan_args]
    f = _indicator(pi, args.function)

    panels = []
    all_pass = True
    for scan in scans:
        op = scan_operator(pi, scan, state_cap=args.state_cap)
        rho = (l2_norm_centered(op) if isinstance(scan, RandomScan)
               else spectral_radius_centered(op))
        trace = run_chain(pi, scan, args.n, seed=args.seed)
        est, se = asymptotic_variance_estimate(trace, f)
        bound = clt_variance_bound(rho, f, pi)
        clt_pass = bool(est <= bound + 3.0 * se)
        tails = []
        for n in args.n_grid:
            for eps in args.eps_grid:
                t = empirical_tail(pi, scan, f, n, eps, args.replicas, seed=args.seed)
                tails.append({"n": t.n, "eps": t.eps, "frequency": t.frequency,
                              "bound": t.bound, "std_error": t.std_error, "pass": t.passed})
        panel_pass = clt_pass and all(t["pass"] for t in tails)
        all_pass = all_pass and panel_pass
        panels.append({
            "scan": _scan_label(scan), "rho": rho,
            "clt": {"estimate": est, "std_error": se, "bound": bound, "pass": clt_pass},
            "tails": tails, "pass": panel_pass,
        })
    body = {"function": args.function, "panels": panels, "all_pass": all_pass}
    doc = report_document("sample", _config_dict(args), body)
    os.makedirs(args.out_dir, exist_ok=True)
    write_json(doc, os.path.join(args.out_dir, "sample.json"))
    if not all_pass:
        print("assertion failure: a simulation panel exceeded its bound", file=sys.stderr)
        return 1
    print("sample: wrote %s" % os.path.join(args.out_dir, "sample.json"))
    return 0


def cmd_counterexample(args) -> int:
    if not 0.0 < args.q < 1.0:
        raise ValidationError("q must lie in (0, 1), got %g" % args.q)
    for b in args.b:
        if b <= 1.0:
            raise ValidationError("b must be > 1, got %g" % b)
    rows = reversibilization_gap_sweep(args.q, args.N, b_list=args.b)
    csv_rows = []
    cheeger_ok = True
    for r in rows:
        cheeger_ok = cheeger_ok and r["cheeger_upper_ok"]
        out = {k: r[k] for k in ("N", "n_states", "gap_K", "gap_P", "gap_P_star",
                                 "kappa_upper", "cheeger_upper_ok")}
        for b in args.b:
            out["moment_b%g" % b] = r["moment_b%g" % b]
            out["moment_b%g_analytic_finite" % b] = r["moment_b%g_analytic_finite" % b]
        csv_rows.append(out)
    body = {"rows": rows}
    doc = report_document("counterexample", _config_dict(args), body)
    os.makedirs(args.out_dir, exist_ok=True)
    write_json(doc, os.path.join(args.out_dir, "counterexample.json"))
    write_csv(csv_rows, os.path.join(args.out_dir, "counterexample.csv"))
    if not cheeger_ok:
        print("assertion failure: gap(K) exceeded 2*conductance", file=sys.stderr)
        return 1
    print("counterexample: wrote %s" % os.path.join(args.out_dir, "counterexample.csv"))
    return 0


def _config_dict(args) -> dict:
    # out_dir is a host path, not part of the reproducible configuration
    skip = {"func", "out_dir"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbsgap",
                                     description="Spectral analysis of Gibbs-sampler scan strategies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_target(p):
        p.add_argument("--target-file", help="JSON target spec file")
        p.add_argument("--model", help="named model family (equicorrelated_binary)")
        p.add_argument("--d", type=int, help="model dimension")
        p.add_argument("--epsilon", type=float, help="model parameter")

    def add_common(p):
        p.add_argument("--out-dir", default=default_output_dir())
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)

    p = sub.add_parser("analyze", help="exact spectral report for one target")
    add_target(p)
    add_common(p)
    p.add_argument("--scan", action="append", help="dsg:1,2,... or rsg:uniform or rsg:w1,...")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--weight-samples", type=int, default=8)
    p.add_argument("--formats", default="json,csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="dimension sweep with transfer floor")
    add_common(p)
    p.add_argument("--model", default="equicorrelated_binary")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--d-list", type=_int_list, default=[2, 3, 4, 5, 6])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="simulation diagnostics")
    add_target(p)
    add_common(p)
    p.add_argument("--scan", action="append")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--replicas", type=int, default=10_000)
    p.add_argument("--function", default="coord:1", help="coord:i indicator of the top label")
    p.add_argument("--n-grid", type=_int_list, default=[100, 1000])
    p.add_argument("--eps-grid", type=_float_list, default=[0.1, 0.2, 0.3])
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("counterexample", help="ladder-chain truncation sweep")
    add_common(p)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--N", type=_int_list, default=[10, 20, 40])
    p.add_argument("--b", type=_float_list, default=[1.5])
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StateCapError as exc:
        print("state cap exceeded: %s" % exc, file=sys.stderr)
        return 3
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except InequalityViolationError as exc:
        print("assertion failure: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
