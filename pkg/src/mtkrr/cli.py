"""Command-line front end.

Subcommands wrap the library modules one-to-one: ``risk-curve`` and
``oracle`` take flags, ``experiment``, ``table`` and ``heatmap`` read an INI
config file (flat key = value pairs inside a section named after the
subcommand), and ``verify-bounds`` runs the theoretical-bound test suite.
All data outputs go to files; stdout carries logs and the verify-bounds
pass/fail lines only.  Exit codes: 0 success, 1 error, 2 bound violation.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys

import numpy as np

from . import experiments, oracles, riskfn, scenarios
from .render import svg_heatmap

_SCENARIO_KEYS = ("kind", "n", "p", "c1", "c2", "delta1", "delta2", "beta_or_m", "seed")


class ConfigError(Exception):
    """Carries every offending config key so they can all be reported at once."""

    def __init__(self, messages: list[str]):
        super().__init__("; ".join(messages))
        self.messages = messages


def _parse_scenario(get, errors: list[str], prefix: str = "") -> scenarios.ScenarioSpec | None:
    raw: dict = {}
    casts = {"kind": str, "n": int, "p": int, "c1": float, "c2": float,
             "delta1": float, "delta2": float, "beta_or_m": float, "seed": int}
    for key in _SCENARIO_KEYS:
        value = get(key)
        if value is None:
            if key in ("delta2",):
                continue
            if key in ("beta_or_m", "seed"):
                continue  # defaulted by ScenarioSpec
            errors.append(f"{prefix}{key}: missing")
            continue
        try:
            raw[key] = casts[key](value)
        except (TypeError, ValueError):
            errors.append(f"{prefix}{key}: cannot parse {value!r}")
    if errors:
        return None
    try:
        return scenarios.ScenarioSpec.from_dict(raw)
    except (KeyError, ValueError) as exc:
        errors.append(f"{prefix}scenario: {exc}")
        return None


def _float_list(text: str, key: str, errors: list[str]) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError:
        errors.append(f"{key}: cannot parse list {text!r}")
        return []


def _load_section(path: str, section: str) -> configparser.SectionProxy:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError([f"cannot read config file {path!r}"])
    if section not in parser:
        raise ConfigError([f"config file {path!r} has no [{section}] section"])
    return parser[section]


def _fail_on(errors: list[str]) -> None:
    if errors:
        raise ConfigError(errors)


def _derived_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(path)).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# subcommands


def cmd_risk_curve(args) -> int:
    params = riskfn.RiskParams(n=args.n, p=args.p, sigma2=args.sigma2,
                               beta=args.beta, delta=args.delta, c=args.c)
    profile = riskfn.template_profile(params)
    lams = [0.0] + [float(v) for v in np.geomspace(args.lambda_min, args.lambda_max, args.points)]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "risk", "bias", "variance"])
        for lam in lams:
            bias, var = profile.parts(lam)
            writer.writerow([repr(lam), repr(bias + var), repr(bias), repr(var)])
    print(f"wrote {len(lams)} rows to {args.out}")
    return 0


def cmd_oracle(args) -> int:
    errors: list[str] = []
    spec = _parse_scenario(lambda k: getattr(args, k, None), errors)
    _fail_on(errors)
    spectrum, tasks = scenarios.build_ensemble(spec)
    result = oracles.compare_oracles(spectrum, tasks, args.sigma2)
    payload = {
        "spec": spec.to_dict(),
        "sigma2": args.sigma2,
        "mt_risk": result.mt_risk,
        "st_risk": result.st_risk,
        "lambda_star": result.lambda_star,
        "mu_star": result.mu_star,
        "st_lambdas": list(result.st_lambdas),
        "rho": result.rho,
        "per_task_risks": list(result.diagnostics),
    }
    theory_kind = {
        scenarios.ScenarioKind.H2POINTS: oracles.RatioSetting.TWO_POINTS,
        scenarios.ScenarioKind.H1OUT: oracles.RatioSetting.ONE_OUT,
    }.get(spec.kind)
    if theory_kind is not None and spec.c1 > 0:
        theory = oracles.ratio_theory(theory_kind, spec.p, spec.delta1, spec.c2 / spec.c1)
        payload["rho_formula"] = theory.rho_formula
    with open(args.out, "w", newline="") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(f"rho = {result.rho!r} -> {args.out}")
    return 0


def cmd_experiment(args) -> int:
    section = _load_section(args.config, "experiment")
    errors: list[str] = []
    spec = _parse_scenario(section.get, errors, prefix="experiment.")
    sigma2 = section.getfloat("sigma2", fallback=None)
    if sigma2 is None or sigma2 <= 0:
        errors.append("experiment.sigma2: missing or not positive")
    n_rep = section.getint("n_rep", fallback=None)
    if n_rep is None or n_rep < 1:
        errors.append("experiment.n_rep: missing or not positive")
    pi2_scale = section.get("pi2_scale", fallback="N")
    if pi2_scale not in ("N", "n"):
        errors.append(f"experiment.pi2_scale: must be 'N' or 'n', got {pi2_scale!r}")
    out_json = section.get("out_json", fallback=None)
    if out_json is None:
        errors.append("experiment.out_json: missing")
    _fail_on(errors)

    report = experiments.run_experiment(spec, sigma2, n_rep, jobs=args.jobs, pi2_scale=pi2_scale)
    experiments.write_report_json(report, out_json)
    out_csv = section.get("out_csv", fallback=None)
    if out_csv:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["replicate", "ratio"])
            for i, r in enumerate(report.ratios):
                writer.writerow([i, repr(r)])
    print(f"mean ratio {report.mean_ratio!r} over {n_rep} replicates -> {out_json}")
    return 0


def cmd_table(args) -> int:
    section = _load_section(args.config, "table")
    errors: list[str] = []
    base = {k: section.get(k) for k in _SCENARIO_KEYS if section.get(k) is not None}
    c2_values = _float_list(section.get("c2_values", ""), "table.c2_values", errors)
    bm_values = _float_list(section.get("beta_or_m_values", section.get("beta_or_m", "")), "table.beta_or_m_values", errors)
    if not c2_values:
        errors.append("table.c2_values: missing or empty")
    if not bm_values:
        errors.append("table.beta_or_m_values: missing or empty")
    sigma2 = section.getfloat("sigma2", fallback=None)
    if sigma2 is None or sigma2 <= 0:
        errors.append("table.sigma2: missing or not positive")
    n_rep = section.getint("n_rep", fallback=None)
    if n_rep is None or n_rep < 1:
        errors.append("table.n_rep: missing or not positive")
    seed = section.getint("seed", fallback=0)
    out_csv = section.get("out_csv", fallback=None)
    if out_csv is None:
        errors.append("table.out_csv: missing")
    _fail_on(errors)

    reports = []
    row = 0
    for bm in bm_values:
        for c2 in c2_values:
            cfg = dict(base)
            cfg.update(c2=repr(c2), beta_or_m=repr(bm), seed=str(_derived_seed(seed, row)))
            row_errors: list[str] = []
            spec = _parse_scenario(cfg.get, row_errors, prefix=f"table.row{row}.")
            _fail_on(row_errors)
            print(f"row {row}: c2={c2:g} beta_or_m={bm:g} ...", file=sys.stderr)
            reports.append(experiments.run_experiment(spec, sigma2, n_rep, jobs=args.jobs))
            row += 1
    experiments.emit_table(reports, out_csv)
    print(f"wrote {len(reports)} rows to {out_csv}")
    return 0


def cmd_heatmap(args) -> int:
    section = _load_section(args.config, "heatmap")
    errors: list[str] = []
    base = {k: section.get(k) for k in _SCENARIO_KEYS if section.get(k) is not None}
    row_param = section.get("row_param", fallback=None)
    col_param = section.get("col_param", fallback=None)
    allowed = {"c2", "delta2", "beta_or_m", "c1"}
    if row_param not in allowed:
        errors.append(f"heatmap.row_param: must be one of {sorted(allowed)}")
    if col_param not in allowed or col_param == row_param:
        errors.append(f"heatmap.col_param: must differ from row_param and be one of {sorted(allowed)}")
    row_values = _float_list(section.get("row_values", ""), "heatmap.row_values", errors)
    col_values = _float_list(section.get("col_values", ""), "heatmap.col_values", errors)
    if not row_values or not col_values:
        errors.append("heatmap.row_values / col_values: must be nonempty lists")
    sigma2 = section.getfloat("sigma2", fallback=None)
    if sigma2 is None or sigma2 <= 0:
        errors.append("heatmap.sigma2: missing or not positive")
    n_rep = section.getint("n_rep", fallback=None)
    if n_rep is None or n_rep < 1:
        errors.append("heatmap.n_rep: missing or not positive")
    seed = section.getint("seed", fallback=0)
    out_csv = section.get("out_csv", fallback=None)
    out_svg = section.get("out_svg", fallback=None)
    if out_csv is None:
        errors.append("heatmap.out_csv: missing")
    _fail_on(errors)

    grid: list[list[experiments.ExperimentReport]] = []
    for i, rv in enumerate(row_values):
        grid_row = []
        for j, cv in enumerate(col_values):
            cfg = dict(base)
            cfg[row_param] = repr(rv)
            cfg[col_param] = repr(cv)
            cfg["seed"] = str(_derived_seed(seed, i, j))
            cell_errors: list[str] = []
            spec = _parse_scenario(cfg.get, cell_errors, prefix=f"heatmap.cell({i},{j}).")
            _fail_on(cell_errors)
            print(f"cell ({i},{j}): {row_param}={rv:g} {col_param}={cv:g} ...", file=sys.stderr)
            grid_row.append(experiments.run_experiment(spec, sigma2, n_rep, jobs=args.jobs))
        grid.append(grid_row)
    experiments.emit_heatmap_csv(grid, row_param, row_values, col_param, col_values, out_csv)
    if out_svg:
        values = [[rep.mean_ratio for rep in row] for row in grid]
        halves = [[(rep.ci95[1] - rep.ci95[0]) / 2.0 for rep in row] for row in grid]
        kind = base.get("kind", "scenario")
        svg_heatmap(values, halves, row_param, row_values, col_param, col_values,
                    f"mean oracle-risk ratio, {kind}", out_svg)
    print(f"wrote {len(row_values)}x{len(col_values)} grid to {out_csv}")
    return 0


def _check(name: str, ok: bool, detail: str, lines: list[str]) -> bool:
    status = "PASS" if ok else "FAIL"
    lines.append(f"{status} {name}: {detail}")
    return ok


def cmd_verify_bounds(args) -> int:
    errors: list[str] = []
    n_values = [int(v) for v in _float_list(args.n_values, "--n-values", errors)]
    p_values = [int(v) for v in _float_list(args.p_values, "--p-values", errors)]
    c_values = _float_list(args.c_values, "--c-values", errors)
    bd_pairs = []
    for tok in args.bd_pairs.split(","):
        try:
            b, d = tok.split(":")
            bd_pairs.append((float(b), float(d)))
        except ValueError:
            errors.append(f"--bd-pairs: cannot parse {tok!r} (expected beta:delta)")
    if not (n_values and p_values and c_values and bd_pairs):
        errors.append("verify-bounds: every grid axis needs at least one value")
    _fail_on(errors)
    sigma2 = args.sigma2

    lines: list[str] = []
    all_ok = True

    # Property 1/2/3: optimized risk against its envelope, cell by cell
    worst_upper = -math.inf
    worst_lower = math.inf
    cap_violations = 0
    lower_checked = 0
    for beta, delta in bd_pairs:
        for n in n_values:
            for p in p_values:
                for c in c_values:
                    params = riskfn.RiskParams(n=n, p=p, sigma2=sigma2, beta=beta, delta=delta, c=c)
                    report = riskfn.minimize_risk(params)
                    if params.satisfies_hm and report.upper > 0:
                        worst_upper = max(worst_upper, (report.r_star - report.upper) / report.upper)
                    if math.isfinite(report.epsilon_cap) and report.lambda_star > report.epsilon_cap * (1 + 1e-9):
                        cap_violations += 1
                    if params.satisfies_lb and n * p / sigma2 >= args.lower_threshold:
                        lower_checked += 1
                        if report.lower > 0:
                            worst_lower = min(worst_lower, (report.r_star - report.lower) / report.lower)
    all_ok &= _check("property-1 upper bound", worst_upper <= 1e-8,
                     f"worst relative excess {worst_upper:.3e}", lines)
    all_ok &= _check("property-2 localization", cap_violations == 0,
                     f"{cap_violations} optimizer(s) above the cap", lines)
    all_ok &= _check("property-3 lower bound", worst_lower >= 0,
                     f"worst relative margin {worst_lower:.3e} over {lower_checked} cells", lines)

    # Property 4: a single regime flip along a p-sweep at fixed n
    labels = []
    for p in np.geomspace(1, 1e7, 13):
        labels.append(riskfn.classify_regime(
            riskfn.RiskParams(n=50, p=int(round(p)), sigma2=sigma2, beta=2, delta=2, c=1.0)))
    collapsed = [lab for k, lab in enumerate(labels) if lab is not riskfn.Regime.UNDETERMINED
                 and (k == 0 or lab is not labels[k - 1])]
    dedup = [lab for k, lab in enumerate(collapsed) if k == 0 or lab is not collapsed[k - 1]]
    all_ok &= _check("property-4 regime flip", dedup == [riskfn.Regime.REGULARIZE, riskfn.Regime.TRIVIAL_NOISE],
                     f"sweep labels {[lab.value for lab in labels]}", lines)

    # sum-vs-integral envelopes for the two partial sums
    rng = np.random.default_rng(20240811)
    s1_ok = s2_ok = True
    for _ in range(40):
        beta = float(rng.uniform(0.8, 4.0))
        delta = float(rng.uniform(0.6, min(2 * beta - 0.05, 3.0)))
        n = int(rng.integers(5, 400))
        lam = float(10 ** rng.uniform(-8, 2))
        i2 = riskfn.integral_i2(beta)
        i1 = riskfn.integral_i1(beta, delta)
        s2_ok &= riskfn.s2(n, lam, beta) <= lam ** (-1 / (2 * beta)) / (2 * beta) * i2 * (1 + 1e-12)
        s1_ok &= riskfn.s1(n, lam, beta, delta) <= lam ** ((2 * delta - 1) / (2 * beta)) / (beta * lam**2) * i1 * (1 + 1e-12)
    all_ok &= _check("s2 integral envelope", s2_ok, "40 random (n, lam, beta) draws", lines)
    all_ok &= _check("s1 integral envelope", s1_ok, "40 random (n, lam, beta, delta) draws", lines)

    alpha = riskfn.alpha_constant(2.0, 2.0)
    all_ok &= _check("alpha constant", alpha > 0.33, f"alpha(2,2) = {alpha!r}", lines)

    for line in lines:
        print(line)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")
    return 0 if all_ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtkrr",
        description="Exact oracle risks for multi-task kernel ridge regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("risk-curve", help="tabulate the template risk over a lambda grid")
    pc.add_argument("--n", type=int, required=True)
    pc.add_argument("--p", type=int, default=1)
    pc.add_argument("--sigma2", type=float, default=1.0)
    pc.add_argument("--beta", type=float, required=True)
    pc.add_argument("--delta", type=float, required=True)
    pc.add_argument("--c", type=float, required=True)
    pc.add_argument("--lambda-min", type=float, default=1e-12)
    pc.add_argument("--lambda-max", type=float, default=10.0)
    pc.add_argument("--points", type=int, default=200)
    pc.add_argument("--out", required=True)
    pc.set_defaults(func=cmd_risk_curve)

    po = sub.add_parser("oracle", help="multi-task vs single-task oracle on one scenario")
    po.add_argument("--kind", required=True, choices=[k.value for k in scenarios.ScenarioKind])
    po.add_argument("--n", type=int, required=True)
    po.add_argument("--p", type=int, required=True)
    po.add_argument("--c1", type=float, required=True)
    po.add_argument("--c2", type=float, required=True)
    po.add_argument("--delta1", type=float, required=True)
    po.add_argument("--delta2", type=float, default=None)
    po.add_argument("--beta-or-m", type=float, default=2.0, dest="beta_or_m")
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--sigma2", type=float, default=1.0)
    po.add_argument("--out", required=True)
    po.set_defaults(func=cmd_oracle)

    pv = sub.add_parser("verify-bounds", help="run the theoretical-bound verification suite")
    pv.add_argument("--n-values", default="50,200,800")
    pv.add_argument("--p-values", default="1,2,5,10")
    pv.add_argument("--c-values", default="0.5,1,2")
    pv.add_argument("--bd-pairs", default="2:2,4:2,2:1.5", help="comma list of beta:delta pairs")
    pv.add_argument("--sigma2", type=float, default=1.0)
    pv.add_argument("--lower-threshold", type=float, default=200.0,
                    help="assert the lower bound only when n p / sigma2 reaches this")
    pv.add_argument("--out", default=None)
    pv.set_defaults(func=cmd_verify_bounds)

    pe = sub.add_parser("experiment", help="replicated oracle comparison from a config file")
    pe.add_argument("--config", required=True)
    pe.add_argument("--jobs", type=int, default=experiments.default_jobs())
    pe.set_defaults(func=cmd_experiment)

    pt = sub.add_parser("table", help="comparison table over (c2, beta_or_m) from a config file")
    pt.add_argument("--config", required=True)
    pt.add_argument("--jobs", type=int, default=experiments.default_jobs())
    pt.set_defaults(func=cmd_table)

    ph = sub.add_parser("heatmap", help="mean-ratio heatmap over two scenario axes from a config file")
    ph.add_argument("--config", required=True)
    ph.add_argument("--jobs", type=int, default=experiments.default_jobs())
    ph.set_defaults(func=cmd_heatmap)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return 1
    except (ValueError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
