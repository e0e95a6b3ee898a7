"""Command-line front end: ``gmhd {check,sweep,simulate,verify} --config FILE``.

Exit codes: 0 success or feasible, 1 infeasible or failed verification,
2 configuration error, 3 Picard non-convergence, 4 blowup.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import conditions, estimates, initial, snapshot
from .config import Config, ConfigError
from .nonlinear import DealiasRule
from .solver import Blowup, NonConvergence, SolverConfig, diagnostics, picard_solve
from .spectral import GFunction, Grid, MultiplierSpec

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_BLOWUP = 0, 1, 2, 3, 4

log = logging.getLogger("gmhd")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, columns, rows, header: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _dump_json(obj, path: Path | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        path.write_text(text + "\n")
    return text


def _out_dir(args, default: str | None) -> Path | None:
    out = args.out or default
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# -- check / sweep -------------------------------------------------------------

_INSTANCE_KEYS = ("n", "r0", "r1", "r2", "p0", "p1", "p2", "gamma1", "gamma2", "gamma3")
_SPECIAL_KEYS = ("n", "p", "q", "gamma1", "gamma2", "gamma3")


def _read_check_params(cfg: Config) -> tuple[str, dict]:
    if cfg.has_section("special"):
        kind = cfg.get_str("special", "kind")
        if kind not in ("thm_1_1", "thm_1_2"):
            raise cfg.error("special", "kind", f"kind = {kind!r} must be thm_1_1 or thm_1_2")
        params = {k: cfg.get_float("special", k) for k in _SPECIAL_KEYS}
        params["n"] = cfg.get_int("special", "n")
        params["epsilon"] = cfg.get_float("special", "epsilon", 1e-9)
        return kind, params
    if cfg.has_section("instance"):
        params = {k: cfg.get_float("instance", k) for k in _INSTANCE_KEYS}
        params["n"] = cfg.get_int("instance", "n")
        params["epsilon"] = cfg.get_float("instance", "epsilon", 1e-9)
        return "general", params
    raise ConfigError(f"{cfg.source}:1: config needs an [instance] or [special] section")


def _evaluate(kind: str, params: dict) -> conditions.ConditionReport:
    if kind == "general":
        return conditions.check_hypotheses(conditions.TheoremInstance(**params))
    return conditions.check_special_cases(kind, **params)


def _print_report(report: conditions.ConditionReport, out=sys.stdout) -> None:
    for c in report.conditions:
        mark = "ok  " if c.satisfied else "FAIL"
        print(f"{mark} {c.name:50s} {c.lhs:+.12g} {c.relation:2s} {c.rhs:+.12g}  [{c.anchor}]", file=out)
    print(f"feasible: {report.feasible}", file=out)
    print(f"min_gamma1: {report.min_gamma1!r}", file=out)
    print(f"min_gamma2: {report.min_gamma2!r}", file=out)


def run_check(args) -> int:
    cfg = Config.from_path(args.config)
    kind, params = _read_check_params(cfg)
    try:
        report = _evaluate(kind, params)
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}:1: {exc}") from None
    out = _out_dir(args, None)
    data = report.to_dict()
    if args.json:
        print(_dump_json(data))
    else:
        _print_report(report)
    if out is not None:
        _dump_json(data, out / "report.json")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def sweep_values(start: float, stop: float, step: float) -> list[float]:
    if not step > 0 or stop < start:
        raise ValueError("sweep needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def run_sweep(args) -> int:
    cfg = Config.from_path(args.config)
    kind, params = _read_check_params(cfg)
    cfg.require_section("sweep")
    name = cfg.get_str("sweep", "parameter")
    if name not in params:
        raise cfg.error("sweep", "parameter", f"parameter = {name!r} is not a key of the instance")
    try:
        values = sweep_values(cfg.get_float("sweep", "start"), cfg.get_float("sweep", "stop"),
                              cfg.get_float("sweep", "step"))
    except ValueError as exc:
        raise cfg.error("sweep", "step", str(exc)) from None
    reports = []
    for value in values:
        trial = dict(params, **{name: value})
        try:
            reports.append(_evaluate(kind, trial))
        except ValueError as exc:
            raise cfg.error("sweep", "parameter", f"{name} = {value}: {exc}") from None
    data = [r.to_dict() for r in reports]
    if args.json:
        print(_dump_json(data))
    else:
        for value, r in zip(values, reports):
            print(f"{name}={value!r} feasible={r.feasible} min_gamma1={r.min_gamma1!r} min_gamma2={r.min_gamma2!r}")
    out = _out_dir(args, None)
    if out is not None:
        _dump_json(data, out / "sweep.json")
        write_csv(out / "sweep.csv", (name, "feasible", "min_gamma1", "min_gamma2"),
                  ((v, int(r.feasible), r.min_gamma1, r.min_gamma2) for v, r in zip(values, reports)))
    return EXIT_OK


# -- simulate ------------------------------------------------------------------


def _gfunc(cfg: Config, section: str, key: str) -> GFunction:
    name = cfg.get_str(section, key, "unit")
    try:
        return GFunction.from_name(name)
    except ValueError as exc:
        raise cfg.error(section, key, str(exc)) from None


def _read_specs(cfg: Config):
    cfg.require_section("operators")
    eps = cfg.get_float("operators", "epsilon", 1e-9)
    specs = []
    for i in (1, 2, 3):
        key = f"gamma{i}"
        try:
            specs.append(MultiplierSpec(cfg.get_float("operators", key), _gfunc(cfg, "operators", f"g{i}"), eps))
        except ValueError as exc:
            raise cfg.error("operators", key, str(exc)) from None
    return tuple(specs)


def _read_solver(cfg: Config) -> SolverConfig:
    cfg.require_section("solver")
    s = "solver"
    kwargs = dict(
        T=cfg.get_float(s, "t"),
        nodes=cfg.get_int(s, "nodes", 16),
        picard_tol=cfg.get_float(s, "picard_tol", 1e-10),
        max_iters=cfg.get_int(s, "max_iters", 50),
        min_iters=cfg.get_int(s, "min_iters", 1),
        a1=cfg.get_float(s, "a1", 0.0),
        alpha=cfg.get_float(s, "alpha", 1.0),
        nu1=cfg.get_float(s, "nu1", 1.0),
        nu2=cfg.get_float(s, "nu2", 1.0),
        nonlinear=cfg.get_bool(s, "nonlinear", True),
        dealias=cfg.get_str(s, "dealias", "two_thirds"),
    )
    for key in ("r0", "p0", "r1", "p1", "r2", "p2"):
        kwargs[key] = cfg.get_float(s, key, 0.0 if key.startswith("r") else 2.0)
    try:
        DealiasRule(kwargs["dealias"])
    except ValueError:
        raise cfg.error(s, "dealias", f"dealias = {kwargs['dealias']!r} must be two_thirds or none") from None
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise cfg.error(s, None, str(exc)) from None


def _read_initial(cfg: Config, grid: Grid, prefix: str, rng) -> object:
    s = "initial"
    family = cfg.get_str(s, f"{prefix}_family", "zero")
    try:
        return initial.make_initial(
            grid, family,
            amplitude=cfg.get_float(s, f"{prefix}_amplitude", 1.0),
            k=cfg.get_int_tuple(s, f"{prefix}_k", None),
            modes=cfg.get_int_tuples(s, f"{prefix}_modes", None),
            band=cfg.get_int(s, f"{prefix}_band", 4),
            rng=rng,
        )
    except ValueError as exc:
        raise cfg.error(s, f"{prefix}_family", str(exc)) from None


def _seed(cfg: Config, args, section: str) -> int:
    if args.seed is not None:
        return args.seed
    return cfg.get_int(section, "seed", 0)


def run_simulate(args) -> int:
    cfg = Config.from_path(args.config)
    cfg.require_section("grid")
    try:
        grid = Grid(cfg.get_int("grid", "dim"), cfg.get_int("grid", "n"))
    except ValueError as exc:
        raise cfg.error("grid", None, str(exc)) from None
    specs = _read_specs(cfg)
    solver_cfg = _read_solver(cfg)
    rng = np.random.default_rng(_seed(cfg, args, "initial"))
    u0 = _read_initial(cfg, grid, "u", rng)
    B0 = _read_initial(cfg, grid, "b", rng)
    out = _out_dir(args, "gmhd_out")

    status, code = "converged", EXIT_OK
    try:
        traj, diag = picard_solve(u0, B0, specs, solver_cfg)
    except NonConvergence as exc:
        traj, diag, status, code = exc.trajectory, exc.diagnostics, "nonconvergence", EXIT_NONCONVERGENCE
        print(f"error: {exc}", file=sys.stderr)
    except Blowup as exc:
        traj, diag, status, code = exc.trajectory, exc.diagnostics, "blowup", EXIT_BLOWUP
        print(f"error: {exc}", file=sys.stderr)
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}:1: {exc}") from None

    series = diagnostics(traj, specs[2], solver_cfg.alpha)
    write_csv(out / "diagnostics.csv", series.COLUMNS, series.rows())
    write_csv(out / "residuals.csv", ("iteration", "residual"), enumerate(diag.iterate_residuals, start=1))
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for j, t in enumerate(traj.times):
        snapshot.write_snapshot(snap_dir / f"u_{j:04d}.gmhd", traj.u[j], t)
        snapshot.write_snapshot(snap_dir / f"B_{j:04d}.gmhd", traj.B[j], t)
    summary = {
        "status": status,
        "iterations": diag.iterations,
        "residuals": [float(r) for r in diag.iterate_residuals],
        "estimated_ratio": diag.estimated_ratio,
        "max_div_residual": float(np.max(series.div_residual)),
        "nodes": solver_cfg.nodes,
        "T": solver_cfg.T,
    }
    _dump_json(summary, out / "summary.json")
    if args.json:
        print(_dump_json(summary))
    else:
        ratio = "n/a" if diag.estimated_ratio is None else f"{diag.estimated_ratio:.3e}"
        last = diag.iterate_residuals[-1] if diag.iterate_residuals else float("nan")
        print(f"{status}: {diag.iterations} iterations, final residual {last:.3e}, ratio {ratio}")
    return code


# -- verify --------------------------------------------------------------------


def _spec_from(cfg: Config, s: str) -> MultiplierSpec:
    try:
        return MultiplierSpec(cfg.get_float(s, "gamma"), _gfunc(cfg, s, "g"), cfg.get_float(s, "epsilon", 1e-9))
    except ValueError as exc:
        raise cfg.error(s, "gamma", str(exc)) from None


def _sizes(cfg: Config, s: str, default):
    return cfg.get_int_tuple(s, "sizes", default)


def _verify_semigroup(cfg, s, seed):
    spec = _spec_from(cfg, s)
    grid = Grid(cfg.get_int(s, "dim", 2), cfg.get_int(s, "n", 64))
    t = np.logspace(math.log10(cfg.get_float(s, "t_min", 1e-3)), math.log10(cfg.get_float(s, "t_max", 1e-1)),
                    cfg.get_int(s, "t_count", 20))
    tol = cfg.get_float(s, "slope_tolerance", 0.10)
    rep = estimates.verify_semigroup_estimate(
        spec, cfg.get_float(s, "r1", 0.0), cfg.get_float(s, "p1", 2.0), cfg.get_float(s, "r2", 1.0),
        cfg.get_float(s, "p2", 2.0), grid, t, trials=cfg.get_int(s, "trials", 4), seed=seed)
    ok = rep.relative_error <= tol
    if rep.mode_oracle is not None:
        ok = ok and bool(np.max(np.abs(rep.ratio / rep.mode_oracle - 1)) <= 1e-8)
    line = (f"semigroup slope {rep.fitted_exponent:.6f} vs predicted {rep.predicted_exponent:.6f} "
            f"(rel err {rep.relative_error:.3%}, tol {tol:.0%})")
    return ok, line, rep.columns, rep.rows()


def _verify_integral(cfg, s, seed):
    a, b = cfg.get_float(s, "a"), cfg.get_float(s, "b")
    tol = cfg.get_float(s, "tolerance", 1e-6)
    rep = estimates.verify_integral_estimate(a, b, cfg.get_float(s, "t", 1.0), cfg.get_int(s, "quad_points", 64))
    ok = rep.max_rel_error <= tol and abs(rep.scaling_exponent - rep.bound_exponent) <= 1e-8
    line = (f"integral a={a} b={b}: max rel err vs Beta form {rep.max_rel_error:.2e}, "
            f"scaling exponent {rep.scaling_exponent:.10f} vs {rep.bound_exponent:.10f}")
    return ok, line, rep.columns, rep.rows()


def _refinement_result(name, rep):
    line = f"{name} sup ratios {['%.6g' % x for x in rep.sup_ratio]} growth {['%.2f%%' % (100 * g) for g in rep.growth]} (limit {rep.limit:.0%})"
    return rep.stable, line, rep.columns, rep.rows()


def _verify_inverse(cfg, s, seed):
    rep = estimates.verify_inverse_estimate(
        _spec_from(cfg, s), cfg.get_float(s, "r", 1.0), cfg.get_float(s, "p", 2.0), cfg.get_int(s, "dim", 2),
        _sizes(cfg, s, (16, 32, 64)), cfg.get_int(s, "trials", 8), seed)
    return _refinement_result("inverse", rep)


def _verify_embedding(cfg, s, seed):
    rep = estimates.verify_sobolev_embedding(
        cfg.get_float(s, "s"), cfg.get_float(s, "r"), cfg.get_float(s, "p"), cfg.get_int(s, "dim", 2),
        _sizes(cfg, s, (16, 32, 64)), cfg.get_int(s, "trials", 8), seed)
    return _refinement_result(f"embedding (q={rep.exponent:.6g})", rep)


def _verify_product(cfg, s, seed):
    split = tuple(cfg.get_float(s, k) for k in ("p1", "p2", "q1", "q2"))
    rep = estimates.verify_product_estimate(
        cfg.get_float(s, "r", 0.0), cfg.get_float(s, "p"), split, cfg.get_int(s, "dim", 2),
        _sizes(cfg, s, (16, 32)), cfg.get_int(s, "trials", 8), seed)
    return _refinement_result("product", rep)


VERIFIERS = {
    "semigroup": _verify_semigroup,
    "integral": _verify_integral,
    "inverse": _verify_inverse,
    "embedding": _verify_embedding,
    "product": _verify_product,
}


def run_verify(args) -> int:
    cfg = Config.from_path(args.config)
    cfg.require_section("verify")
    name = cfg.get_str("verify", "name")
    if name not in VERIFIERS:
        raise cfg.error("verify", "name", f"unknown verifier {name!r}; expected one of {sorted(VERIFIERS)}")
    seed = _seed(cfg, args, "verify")
    try:
        ok, line, columns, rows = VERIFIERS[name](cfg, "verify", seed)
        rows = list(rows)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise cfg.error("verify", None, str(exc)) from None
    out = _out_dir(args, None)
    if out is not None:
        write_csv(out / f"verify_{name}.csv", columns, rows, header=estimates.REPORT_HEADER)
    verdict = "PASS" if ok else "FAIL"
    if args.json:
        print(_dump_json({"verifier": name, "verdict": verdict, "summary": line}))
    else:
        print(f"# {estimates.REPORT_HEADER}")
        print(f"{verdict} {line}")
    return EXIT_OK if ok else EXIT_INFEASIBLE


# -- entry point ---------------------------------------------------------------

COMMANDS = {"check": run_check, "sweep": run_sweep, "simulate": run_simulate, "verify": run_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmhd", description="gMHD-alpha mild-solution laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="64-bit seed overriding the config")
        p.add_argument("--json", action="store_true", help="print a machine-readable report")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must fit in 64 unsigned bits", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
