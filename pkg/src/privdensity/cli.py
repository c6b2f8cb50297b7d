"""Command line experiment runner.

Subcommands::

    privdensity estimate DATA [--estimator KIND] [--epsilon E | --rho R] [--delta D] [--h H | --N N]
    privdensity risk-sweep --config FILE
    privdensity rate-fit CSV [--x n|n_alpha]
    privdensity bounds --config FILE
    privdensity verify-packing [--config FILE]

All commands accept --seed (default 0) and --out (output directory, default ".").
Exit status: 0 on success, 1 on usage or configuration errors, 2 when a
verification fails.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys

import numpy as np

from . import bounds
from .budget import APPROX, PURE, ZCDP, PrivacyBudget
from .dataio import line_plot, read_dataset, write_curve
from .densities import Uniform, make_bump_packing, make_saw, make_triangle
from .errors import ConfigError
from .risk import EstimatorConfig, Metric, fit_rate, mc_risk, read_reports, write_reports
from .streams import make_stream

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2

SCHEMAS = {
    "density": {"family", "L", "x0", "h", "m", "omega", "beta"},
    "estimator": {"kind", "budget", "epsilon", "rho", "delta", "h", "N", "beta"},
    "sweep": {"n", "budget_values", "reps", "metric"},
    "bounds": {"family", "L", "h", "m", "beta", "x0", "code", "n", "budget", "budget_values"},
    "verify-packing": {"L", "saw_fractions", "bump_fractions", "m", "beta", "extra_random"},
}
COMMAND_SECTIONS = {
    "estimate": ("estimator",),
    "risk-sweep": ("density", "estimator", "sweep"),
    "bounds": ("bounds",),
    "verify-packing": ("verify-packing",),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


# ---------------------------------------------------------------------------
# configuration


def load_config(path, command) -> dict:
    """Sections of an INI file as dicts of strings; unknown sections or keys are rejected."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    allowed = COMMAND_SECTIONS[command]
    out = {}
    for section in cp.sections():
        if section not in allowed:
            raise ConfigError(f"{path}: unknown section [{section}] for {command} (allowed: {', '.join(allowed)})")
        keys = dict(cp[section])
        unknown = sorted(set(keys) - SCHEMAS[section])
        if unknown:
            raise ConfigError(f"{path}: unknown key(s) in [{section}]: {', '.join(unknown)}")
        out[section] = keys
    return out


def echo_lines(command, sections: dict, seed) -> list:
    lines = [f"command = {command}", f"seed = {seed}"]
    for name in sorted(sections):
        for k in sorted(sections[name]):
            lines.append(f"{name}.{k} = {sections[name][k]}")
    return lines


def _get(section: dict, key, conv, default=None, name="", required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {name}.{key}")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}.{key}: {raw!r} ({exc})") from None


def _float_list(text):
    vals = [float(t) for t in text.replace(",", " ").split()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _int_list(text):
    vals = []
    for t in text.replace(",", " ").split():
        f = float(t)
        if f != int(f):
            raise ValueError(f"{t} is not an integer")
        vals.append(int(f))
    if not vals:
        raise ValueError("empty list")
    return vals


def _int(text):
    f = float(text)
    if f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _omega(text):
    bits = text.replace(",", "").replace(" ", "")
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError("omega must be a string of 0/1")
    return np.array([int(c) for c in bits], dtype=int)


def make_budget(kind, epsilon=None, rho=None, delta=None):
    """Budget from its kind (inferred from the supplied parameters when None)."""
    if kind is None:
        if rho is not None:
            kind = ZCDP
        elif epsilon is not None:
            kind = APPROX if delta else PURE
        else:
            kind = "none"
    kind = kind.lower()
    if kind == "none":
        return None
    if kind == PURE:
        if epsilon is None:
            raise ConfigError("a pure budget needs epsilon")
        return PrivacyBudget.pure(epsilon)
    if kind == ZCDP:
        if rho is None:
            raise ConfigError("a zcdp budget needs rho")
        return PrivacyBudget.zcdp(rho)
    if kind == APPROX:
        if epsilon is None or delta is None:
            raise ConfigError("an approx budget needs epsilon and delta")
        return PrivacyBudget.approx(epsilon, delta)
    raise ConfigError(f"unknown budget kind {kind!r}")


def _with_value(budget, value):
    if budget is None:
        raise ConfigError("sweep.budget_values needs a budget kind in [estimator]")
    if budget.kind == PURE:
        return PrivacyBudget.pure(value)
    if budget.kind == ZCDP:
        return PrivacyBudget.zcdp(value)
    return PrivacyBudget.approx(value, budget.delta)


def density_from_section(sec: dict):
    fam = _get(sec, "family", str, name="density", required=True).lower()
    if fam not in ("uniform", "triangle", "saw", "bump"):
        raise ConfigError(f"unknown density family {fam!r}")
    L = _get(sec, "L", float, 1.0, "density")
    if fam == "uniform":
        return Uniform()
    if fam == "triangle":
        return make_triangle(L, _get(sec, "x0", float, 0.5, "density"), _get(sec, "h", float, name="density", required=True))
    m = _get(sec, "m", _int, name="density", required=True)
    omega = _get(sec, "omega", _omega, np.ones(m, dtype=int), "density")
    h = _get(sec, "h", float, name="density", required=True)
    if fam == "saw":
        return make_saw(L, m, omega, h)
    return make_bump_packing(L, _get(sec, "beta", _int, 1, "density"), m, omega, h)


def estimator_from_section(sec: dict) -> EstimatorConfig:
    budget = make_budget(
        _get(sec, "budget", str, None, "estimator"),
        _get(sec, "epsilon", float, None, "estimator"),
        _get(sec, "rho", float, None, "estimator"),
        _get(sec, "delta", float, None, "estimator"),
    )
    return EstimatorConfig(
        kind=_get(sec, "kind", str, "histogram", "estimator"),
        budget=budget,
        h=_get(sec, "h", float, None, "estimator"),
        N=_get(sec, "N", _int, None, "estimator"),
        beta=_get(sec, "beta", _int, 1, "estimator"),
    )


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands


def cmd_estimate(args) -> int:
    sections = load_config(args.config, "estimate") if args.config else {}
    sec = dict(sections.get("estimator", {}))
    for key in ("epsilon", "rho", "delta", "h", "N", "beta", "budget"):
        val = getattr(args, key)
        if val is not None:
            sec[key] = str(val)
    if args.estimator is not None:
        sec["kind"] = args.estimator
    cfg = estimator_from_section(sec)
    data = read_dataset(args.data)
    n = data.size
    rng = make_stream(args.seed)
    est = cfg.fit(data, rng)
    out = _ensure_dir(args.out)
    header = echo_lines("estimate", {"estimator": sec}, args.seed) + [f"data = {args.data}", f"n = {n}"]
    grid = np.linspace(0.0, 1.0, args.grid)
    if cfg.kind == "histogram":
        print(f"h = {est.h:g}")
        print(f"bins = {est.bins}")
    else:
        print(f"N = {est.N}")
    print(f"noise_scale = {cfg.noise_scale(n):g}")
    est.to_csv(os.path.join(out, "estimate.csv"), header)
    write_curve(os.path.join(out, "curve.csv"), grid, est.eval(grid), header)
    line_plot(os.path.join(out, "curve.svg"), [("estimate", grid, est.eval(grid))], xlabel="x", ylabel="density",
              title=f"{cfg.kind}, n={n}")
    return EXIT_OK


def cmd_risk_sweep(args) -> int:
    if not args.config:
        raise ConfigError("risk-sweep needs --config")
    sections = load_config(args.config, "risk-sweep")
    for s in COMMAND_SECTIONS["risk-sweep"]:
        if s not in sections:
            raise ConfigError(f"missing section [{s}]")
    density = density_from_section(sections["density"])
    sw = sections["sweep"]
    ns = _get(sw, "n", _int_list, name="sweep", required=True)
    values = _get(sw, "budget_values", _float_list, None, "sweep")
    est_sec = dict(sections["estimator"])
    if values is not None:
        # the swept value stands in for the budget parameter of the section
        key = "rho" if est_sec.get("budget", "").lower() == ZCDP else "epsilon"
        est_sec.setdefault(key, repr(values[0]))
    cfg = estimator_from_section(est_sec)
    reps = _get(sw, "reps", _int, 200, "sweep")
    metric = Metric.parse(_get(sw, "metric", str, "L2", "sweep"))
    reports = []
    for n in ns:
        for v in values or [None]:
            c = cfg if v is None else EstimatorConfig(cfg.kind, _with_value(cfg.budget, v), cfg.h, cfg.N, cfg.beta)
            rep = mc_risk(c, density, metric, n, reps, args.seed, workers=args.workers)
            reports.append(rep)
            print(f"n={n} budget={'none' if c.budget is None else c.budget.describe()} "
                  f"risk={rep.risk_mean:.6g} stderr={rep.risk_stderr:.3g}")
    out = _ensure_dir(args.out)
    write_reports(os.path.join(out, "risk.csv"), reports, echo_lines("risk-sweep", sections, args.seed))
    by_alpha = values is not None and cfg.budget.kind != APPROX
    xs = [r.n * r.budget.effective_alpha() if by_alpha else r.n for r in reports]
    line_plot(os.path.join(out, "risk.svg"), [(metric.tag, xs, [r.risk_mean for r in reports])],
              xlabel="n * alpha" if by_alpha else "n", ylabel="risk", logx=True, logy=True)
    return EXIT_OK


def _x_value(row, axis):
    n = float(row["n"])
    if axis == "n":
        return n
    kind = row["budget_kind"]
    if kind == "none" or not row["budget_value"]:
        raise ConfigError("x = n_alpha needs rows with a pure or zcdp budget")
    v = float(row["budget_value"])
    if kind == PURE:
        return n * v
    if kind == ZCDP:
        return n * math.sqrt(v)
    raise ConfigError(f"x = n_alpha is undefined for budget kind {kind!r}")


def cmd_rate_fit(args) -> int:
    rows = read_reports(args.csv)
    if not rows:
        raise ConfigError(f"{args.csv}: no rows")
    pts = [(_x_value(r, args.x), float(r["risk_mean"])) for r in rows]
    fit = fit_rate(pts)
    print(f"slope = {fit.slope:.6f}")
    print(f"intercept = {fit.intercept:.6f}")
    print(f"r_squared = {fit.r_squared:.6f}")
    print(f"points = {len(fit.points)}")
    if args.out:
        out = _ensure_dir(args.out)
        xs = np.array([p[0] for p in pts])
        line_plot(os.path.join(out, "rate_fit.svg"),
                  [("measured", xs, [p[1] for p in pts]), ("fit", xs, np.exp(fit.intercept) * xs**fit.slope)],
                  xlabel=args.x, ylabel="risk", logx=True, logy=True, title=f"slope {fit.slope:.3f}")
    return EXIT_OK


def _bounds_packing(sec, rng):
    fam = _get(sec, "family", str, "saw", "bounds").lower()
    L = _get(sec, "L", float, 1.0, "bounds")
    h = _get(sec, "h", float, name="bounds", required=True)
    if fam == "triangle":
        return bounds.triangle_packing(L, _get(sec, "x0", float, 0.5, "bounds"), h)
    m = _get(sec, "m", _int, name="bounds", required=True)
    code = _get(sec, "code", str, "hypercube" if m <= 6 else "vg", "bounds").lower()
    if code == "hypercube":
        words = bounds.hypercube(m)
    elif code == "vg":
        words = bounds.varshamov_gilbert(m, rng).words
    else:
        raise ConfigError(f"bounds.code must be hypercube or vg, got {code!r}")
    if fam == "saw":
        return bounds.saw_packing(L, m, h, words)
    if fam == "bump":
        return bounds.bump_packing(L, _get(sec, "beta", _int, 1, "bounds"), m, h, words)
    raise ConfigError(f"unknown packing family {fam!r}")


def cmd_bounds(args) -> int:
    if not args.config:
        raise ConfigError("bounds needs --config")
    sections = load_config(args.config, "bounds")
    if "bounds" not in sections:
        raise ConfigError("missing section [bounds]")
    sec = sections["bounds"]
    rng = make_stream(args.seed)
    packing = _bounds_packing(sec, rng)
    ns = _get(sec, "n", _int_list, name="bounds", required=True)
    kind = _get(sec, "budget", str, "none", "bounds").lower()
    values = _get(sec, "budget_values", _float_list, None, "bounds")
    if kind not in ("none", PURE, ZCDP):
        raise ConfigError("bounds.budget must be none, pure or zcdp")
    if kind != "none" and not values:
        raise ConfigError("bounds.budget_values is required with a budget")
    budgets = [None] if kind == "none" else [make_budget(kind, epsilon=v, rho=v) for v in values]
    rows = []
    for n in ns:
        for b in budgets:
            for rep in bounds.packing_bounds(packing, n, b):
                rows.append(rep)
                print(f"{rep.bound_kind:8s} n={n} budget={'none' if b is None else b.describe()} value={rep.value:.6g}")
    out = _ensure_dir(args.out)
    with open(os.path.join(out, "bounds.csv"), "w", newline="") as fh:
        for line in echo_lines("bounds", sections, args.seed):
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(bounds.BOUND_COLUMNS)
        for r in rows:
            w.writerow(r.row())
    return EXIT_OK


def cmd_verify_packing(args) -> int:
    sections = load_config(args.config, "verify-packing") if args.config else {}
    sec = sections.get("verify-packing", {})
    kw = dict(
        L_values=_get(sec, "L", _float_list, bounds.DEFAULT_L, "verify-packing"),
        saw_fractions=_get(sec, "saw_fractions", _float_list, bounds.DEFAULT_SAW_FRACTIONS, "verify-packing"),
        bump_fractions=_get(sec, "bump_fractions", _float_list, bounds.DEFAULT_BUMP_FRACTIONS, "verify-packing"),
        m_values=_get(sec, "m", _int_list, bounds.DEFAULT_M, "verify-packing"),
        beta=_get(sec, "beta", _int, 1, "verify-packing"),
        extra_random=_get(sec, "extra_random", _int, 16, "verify-packing"),
    )
    checks = bounds.verify_packing_grid(make_stream(args.seed), **kw)
    if not checks:
        raise ConfigError("no grid point satisfies the construction preconditions")
    out = _ensure_dir(args.out)
    with open(os.path.join(out, "packing.csv"), "w", newline="") as fh:
        for line in echo_lines("verify-packing", sections, args.seed):
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(bounds.CHECK_COLUMNS)
        for c in checks:
            w.writerow(c.row())
    # one summary line per (family, check)
    summary = {}
    for c in checks:
        key = (c.family, c.check)
        total, failed, worst = summary.get(key, (0, 0, math.inf))
        summary[key] = (total + 1, failed + (not c.ok), min(worst, c.slack))
    print(f"{'family':6s} {'check':16s} {'checked':>8s} {'failed':>7s} {'min slack':>12s}  status")
    for (fam, name), (total, failed, worst) in sorted(summary.items()):
        print(f"{fam:6s} {name:16s} {total:8d} {failed:7d} {worst:12.3e}  {'pass' if not failed else 'FAIL'}")
    n_failed = sum(not c.ok for c in checks)
    print(f"{len(checks)} checks, {n_failed} failed")
    return EXIT_VERIFY if n_failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--workers", type=int, default=1, help="worker processes for Monte Carlo replications")

    p = _Parser(prog="privdensity", description="Private density estimation experiments on [0, 1].")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("estimate", parents=[common], help="fit an estimator to a data file")
    e.add_argument("data", help="one value in [0, 1] per line")
    e.add_argument("--estimator", choices=["histogram", "projection", "projection-relaxed"])
    e.add_argument("--budget", choices=["none", PURE, ZCDP, APPROX])
    e.add_argument("--epsilon", type=float)
    e.add_argument("--rho", type=float)
    e.add_argument("--delta", type=float)
    e.add_argument("--h", type=float, help="bin width (default: tuned)")
    e.add_argument("--N", type=int, help="truncation order (default: tuned)")
    e.add_argument("--beta", type=int, help="smoothness used to tune N (default 1)")
    e.add_argument("--grid", type=int, default=513, help="points of the exported density curve")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("risk-sweep", parents=[common], help="Monte Carlo risk over an n / budget grid")
    s.set_defaults(func=cmd_risk_sweep)

    r = sub.add_parser("rate-fit", parents=[common], help="fit a log-log slope to a risk CSV")
    r.add_argument("csv")
    r.add_argument("--x", choices=["n", "n_alpha"], default="n", help="abscissa: n or n * (eps or sqrt(rho))")
    r.set_defaults(func=cmd_rate_fit, out=None)

    b = sub.add_parser("bounds", parents=[common], help="evaluate minimax lower bounds for a packing")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify-packing", parents=[common], help="check the packing inequalities on a grid")
    v.set_defaults(func=cmd_verify_packing)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"privdensity {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
