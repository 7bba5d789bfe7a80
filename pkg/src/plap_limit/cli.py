"""Command line runner: ``plap-limit {solve,limit,sweep,verify-example,report}``.

Problems come from a JSON config (see README for the schema) or, for
``verify-example``, from the built-in examples.  Exit codes: 0 when every
requested check passes, 1 when a check or a solve fails, 2 for usage and
config errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracles
from .limit import InfeasibleComponentError, LimitFunction, dirichlet_limit, obstacle_limit
from .piecewise import IntervalSet, PiecewisePoly, parse_real
from .psolver import (DEFAULT_P_SWEEP, ConvergenceError, GridFunction, ProblemSpec,
                      coincidence_set, default_p_chain, dirichlet_shoot, gamma_infty_estimate,
                      lewy_stampacchia_check, obstacle_solve, solution_table, solve_sweep)
from .radial import RadialSpec, radial_limit, reduce, signed_profile

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration; the message starts with file:line."""


# -- configuration -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    problem: ProblemSpec | RadialSpec | None = None
    example: oracles.ExampleId | None = None
    p_list: list[float] = field(default_factory=lambda: list(DEFAULT_P_SWEEP))
    n_nodes: int = 2001
    tol: float = 1e-8
    gamma: IntervalSet | None = None
    out: Path = Path("out")
    svg: bool = False
    ls_tol: float | None = None          # Lewy-Stampacchia margin; default 10 tol
    require_monotone: bool = True        # sup|u_p - U| strictly decreasing along the sweep

    @property
    def flat_spec(self) -> ProblemSpec:
        prob = self.problem
        return reduce(prob) if isinstance(prob, RadialSpec) else prob


class _Source:
    """Config text with a way to point at the line holding a key."""

    def __init__(self, text: str, name: str):
        self.text, self.name = text, name

    def line_of(self, key: str) -> int:
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else 1

    def error(self, key: str, msg: str) -> ConfigError:
        return ConfigError(f"{self.name}:{self.line_of(key)}: {msg}")


def _piecewise(value, lo: float, hi: float, src: _Source, key: str) -> PiecewisePoly:
    """A number (constant) or a piecewise object {domain, breaks, coeffs}."""
    try:
        if isinstance(value, (int, float, str)):
            return PiecewisePoly.constant(parse_real(value), lo, hi)
        if isinstance(value, dict) and "domain" not in value:
            value = dict(value, domain=[lo, hi])
        return PiecewisePoly.from_json(value)
    except (ValueError, TypeError, KeyError) as exc:
        raise src.error(key, f"bad piecewise function for {key!r}: {exc}") from None


def _p_values(raw, src: _Source, key: str) -> list[float]:
    if isinstance(raw, str):
        raw = [s for s in raw.split(",") if s.strip()]
    if not isinstance(raw, list):
        raise src.error(key, f"{key} must be a list of numbers")
    try:
        ps = [parse_real(v) for v in raw]
    except (ValueError, TypeError) as exc:
        raise src.error(key, f"{key}: {exc}") from None
    if not ps:
        raise src.error(key, f"{key} must not be empty")
    if any(not p > 1 for p in ps):
        raise src.error(key, f"{key}: every p must exceed 1")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise src.error(key, f"{key} must be strictly increasing")
    return ps


def parse_config(text: str, name: str = "<config>") -> ExperimentConfig:
    """Parse and validate a JSON experiment config."""
    src = _Source(text, name)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{name}:1: top level must be an object")
    known = {"problem", "radial", "example", "n", "p_list", "n_nodes", "tol", "gamma", "out",
             "svg", "ls_tol", "require_monotone"}
    for key in obj:
        if key not in known:
            raise src.error(key, f"unknown key {key!r}")
    cfg = ExperimentConfig()
    chosen = [k for k in ("problem", "radial", "example") if k in obj]
    if len(chosen) != 1:
        raise ConfigError(f"{name}:1: give exactly one of 'problem', 'radial', 'example'")
    if "p_list" in obj:
        cfg.p_list = _p_values(obj["p_list"], src, "p_list")
    p0 = cfg.p_list[0]
    try:
        if "example" in obj:
            cfg.example = oracles.ExampleId(int(obj["example"]), p0, obj.get("n"))
            cfg.problem = oracles.example_problem(cfg.example)
        elif "problem" in obj:
            cfg.problem = _flat_problem(obj["problem"], p0, src)
        else:
            cfg.problem = _radial_problem(obj["radial"], p0, src)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise src.error(chosen[0], str(exc)) from None
    if "n_nodes" in obj:
        n = obj["n_nodes"]
        if not isinstance(n, int) or n < 3:
            raise src.error("n_nodes", "n_nodes must be an integer >= 3")
        cfg.n_nodes = n
    for key in ("tol", "ls_tol"):
        if key in obj:
            v = obj[key]
            if not isinstance(v, (int, float)) or not v > 0:
                raise src.error(key, f"{key} must be a positive number")
            setattr(cfg, key, float(v))
    if "gamma" in obj:
        try:
            cfg.gamma = IntervalSet([(parse_real(a), parse_real(b)) for a, b in obj["gamma"]])
        except (ValueError, TypeError) as exc:
            raise src.error("gamma", f"gamma must be a list of [lo, hi] pairs: {exc}") from None
    if "out" in obj:
        cfg.out = Path(str(obj["out"]))
    for key in ("svg", "require_monotone"):
        if key in obj:
            if not isinstance(obj[key], bool):
                raise src.error(key, f"{key} must be true or false")
            setattr(cfg, key, obj[key])
    return cfg


def _flat_problem(obj, p: float, src: _Source) -> ProblemSpec:
    if not isinstance(obj, dict):
        raise src.error("problem", "problem must be an object")
    try:
        a, b = (parse_real(v) for v in obj["interval"])
    except (KeyError, ValueError, TypeError):
        raise src.error("problem", "problem.interval must be [a, b]") from None
    f = _piecewise(obj.get("f", 0.0), a, b, src, "f")
    phi = None if obj.get("phi") is None else _piecewise(obj["phi"], a, b, src, "phi")
    bd = obj.get("boundary", [0.0, 0.0])
    if not isinstance(bd, list) or len(bd) != 2:
        raise src.error("boundary", "boundary must be [A, B] (A may be null)")
    A = None if bd[0] is None else parse_real(bd[0])
    k = obj.get("weight_exponent", 0)
    return ProblemSpec((a, b), f, phi, (A, parse_real(bd[1])), p, weight_exponent=k)


def _radial_problem(obj, p: float, src: _Source) -> RadialSpec:
    if not isinstance(obj, dict):
        raise src.error("radial", "radial must be an object")
    try:
        n = int(obj["n"])
        r1, r2 = parse_real(obj.get("r1", 0.0)), parse_real(obj["r2"])
    except (KeyError, ValueError, TypeError):
        raise src.error("radial", "radial needs n, r2 (and optionally r1)") from None
    g = _piecewise(obj.get("g", 0.0), r1, r2, src, "g")
    Phi = None if obj.get("Phi") is None else _piecewise(obj["Phi"], r1, r2, src, "Phi")
    return RadialSpec(n, r1, r2, g, Phi, p)


# -- computations ------------------------------------------------------------

def _fmt(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _p_tag(p: float) -> str:
    return f"{p:g}".replace(".", "_")


def solve_one(cfg: ExperimentConfig, p: float) -> GridFunction:
    spec = cfg.flat_spec.with_p(p)
    if spec.phi is None and spec.A is not None and (spec.weight_exponent == 0 or spec.a > 0):
        return dirichlet_shoot(spec, cfg.n_nodes)[0]
    return obstacle_solve(spec, cfg.n_nodes, cfg.tol)


def build_limit(cfg: ExperimentConfig) -> tuple[LimitFunction, str]:
    """U for the configured problem and where its coincidence set came from."""
    prob = cfg.problem
    gamma, source = cfg.gamma, "config"
    has_obstacle = (prob.Phi if isinstance(prob, RadialSpec) else prob.phi) is not None
    if gamma is None and has_obstacle:
        if cfg.example is not None:
            gamma, source = oracles.example_gamma_infty(cfg.example.example), "example"
        else:
            ps = cfg.p_list if len(cfg.p_list) >= 3 else list(DEFAULT_P_SWEEP)
            spec = cfg.flat_spec
            est = gamma_infty_estimate([spec.with_p(p) for p in ps], cfg.n_nodes, tol=cfg.tol)
            gamma, source = est.limit, "estimated"
    if isinstance(prob, RadialSpec):
        if prob.Phi is None:
            raise ConfigError("radial limits need an obstacle Phi (it may be inactive)")
        return radial_limit(prob.g, prob.Phi, prob.n, prob.r1, prob.r2, gamma), source
    if prob.phi is None:
        if prob.A is None:
            raise ConfigError("the limit of a problem without obstacle needs both boundary values")
        return dirichlet_limit(prob.f, prob.a, prob.b, prob.A, prob.B), "none"
    if prob.A is None:
        raise ConfigError("obstacle limits need both boundary values")
    return obstacle_limit(prob.f, prob.phi, gamma, prob.A, prob.B), source


def _intervals_text(S: IntervalSet) -> str:
    return ";".join(f"{_fmt(float(a))}:{_fmt(float(b))}" for a, b in S)


@dataclass
class SweepRow:
    p: float
    sup_dist: float
    gamma: IntervalSet
    ls_lower: float
    ls_upper: float
    max_slope: float
    residual: float


def convergence_rows(cfg: ExperimentConfig, sols: list[GridFunction], U: LimitFunction | None
                     ) -> list[SweepRow]:
    spec = cfg.flat_spec
    rows = []
    for p, u in zip(cfg.p_list, sols):
        sp = spec.with_p(p)
        dist = float(np.max(np.abs(u.values - U(u.x)))) if U is not None else None
        gam = coincidence_set(u, sp.phi) if sp.phi is not None else IntervalSet.empty()
        if u.info is None:
            # shooting solutions are exact profiles, not discrete minimizers
            lo_v = hi_v = res = math.nan
        else:
            ls = lewy_stampacchia_check(u, sp, cfg.ls_tol or 10 * cfg.tol)
            lo_v, hi_v, res = ls.lower_violation, ls.upper_violation, u.info.residual
        rows.append(SweepRow(p, dist, gam, lo_v, hi_v, u.max_slope(), res))
    return rows


CONVERGENCE_HEADER = ["p", "sup_dist_U", "gamma_p", "ls_lower_violation", "ls_upper_violation",
                      "max_slope", "kkt_residual"]


def convergence_csv(rows: list[SweepRow]) -> str:
    return _csv(CONVERGENCE_HEADER,
                [[r.p, r.sup_dist, _intervals_text(r.gamma), r.ls_lower, r.ls_upper, r.max_slope,
                  r.residual] for r in rows])


def sweep_checks(cfg: ExperimentConfig, rows: list[SweepRow]) -> list[str]:
    """Names of failed checks (empty when everything passes)."""
    failed = []
    margin = cfg.ls_tol or 10 * cfg.tol
    for r in rows:
        if r.ls_lower > margin or r.ls_upper > margin:
            failed.append(f"Lewy-Stampacchia at p={r.p:g} (violations {r.ls_lower:.3e}, "
                          f"{r.ls_upper:.3e} > {margin:.1e})")
    d = [r.sup_dist for r in rows]
    if cfg.require_monotone and len(d) > 1 and None not in d and not all(b < a for a, b in zip(d, d[1:])):
        failed.append("sup|u_p - U| is not strictly decreasing in p")
    return failed


# -- SVG -----------------------------------------------------------------------

SVG_COLORS = ["#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"]


def svg_plot(series: list[dict], title: str, width: int = 640, height: int = 400) -> str:
    """Self-contained line plot; each series is {x, y, label, color, dash?}."""
    ml, mr, mt, mb = 60, 150, 36, 44
    xs = np.concatenate([np.asarray(s["x"], float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - ml - mr, height - mt - mb
    X = lambda v: ml + (v - x0) / (x1 - x0) * pw
    Y = lambda v: mt + (y1 - v) / (y1 - y0) * ph
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{ml + pw / 2:.1f}" y="20" text-anchor="middle" font-size="13">'
           f'{_xml(title)}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for t in np.linspace(x0, x1, 6):
        out.append(f'<line x1="{X(t):.2f}" y1="{mt + ph}" x2="{X(t):.2f}" y2="{mt + ph + 4}" '
                   f'stroke="#333"/><text x="{X(t):.2f}" y="{mt + ph + 16}" '
                   f'text-anchor="middle">{t:.3g}</text>')
    for t in np.linspace(y0, y1, 6):
        out.append(f'<line x1="{ml - 4}" y1="{Y(t):.2f}" x2="{ml}" y2="{Y(t):.2f}" stroke="#333"/>'
                   f'<text x="{ml - 6}" y="{Y(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{ml}" y1="{Y(0):.2f}" x2="{ml + pw}" y2="{Y(0):.2f}" '
                   f'stroke="#bbb" stroke-width="0.5"/>')
    for i, s in enumerate(series):
        x, y = np.asarray(s["x"], float), np.asarray(s["y"], float)
        keep = np.isfinite(y)
        step = max(1, int(keep.sum()) // 800)
        idx = np.flatnonzero(keep)
        idx = np.union1d(idx[::step], idx[-1:])
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(x[idx], y[idx]))
        dash = f' stroke-dasharray="{s["dash"]}"' if s.get("dash") else ""
        out.append(f'<polyline fill="none" stroke="{s["color"]}" stroke-width="{s.get("width", 1.5)}"'
                   f'{dash} points="{pts}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{s["color"]}" stroke-width="2"{dash}/>'
                   f'<text x="{ml + pw + 34}" y="{ly}">{_xml(s["label"])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def overlay_series(cfg: ExperimentConfig, sols: list[GridFunction], U: LimitFunction | None
                   ) -> list[dict]:
    """u_p for each p, U in red, the obstacle dashed grey, and the obstacle-free
    limit in blue when it exists."""
    spec = cfg.flat_spec
    x = sols[0].x
    series = [dict(x=u.x, y=u.values, label=f"u_p, p={p:g}", color=SVG_COLORS[i % len(SVG_COLORS)],
                   width=1.0) for i, (p, u) in enumerate(zip(cfg.p_list, sols))]
    if spec.phi is not None:
        phi = spec.phi(x)
        lo = np.min(np.concatenate([u.values for u in sols]))
        series.append(dict(x=x, y=np.where(phi >= lo - 0.25 * (np.ptp(sols[-1].values) + 1e-12),
                                           phi, np.nan), label="obstacle", color="#999999",
                           dash="5,3"))
    if U is not None:
        series.append(dict(x=x, y=U(x), label="U (limit)", color="#d62728", width=2.0))
    if spec.phi is not None and spec.A is not None and spec.weight_exponent == 0:
        try:
            D = dirichlet_limit(spec.f, spec.a, spec.b, spec.A, spec.B)
            series.append(dict(x=x, y=D(x), label="obstacle-free limit", color="#1f77b4",
                               dash="2,2"))
        except InfeasibleComponentError:
            pass
    return series


# -- subcommands -------------------------------------------------------------

def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _solve_all(cfg: ExperimentConfig) -> list[GridFunction]:
    spec = cfg.flat_spec
    if spec.phi is not None:
        return solve_sweep(spec, cfg.p_list, cfg.n_nodes, cfg.tol)
    return [solve_one(cfg, p) for p in cfg.p_list]


def _write_solutions(cfg: ExperimentConfig, sols: list[GridFunction]) -> None:
    spec = cfg.flat_spec
    for p, u in zip(cfg.p_list, sols):
        _write(cfg.out / f"solution_p{_p_tag(p)}.csv", solution_table(u, spec.with_p(p)))
        if isinstance(cfg.problem, RadialSpec):
            s, v = signed_profile(u)
            _write(cfg.out / f"profile_p{_p_tag(p)}_signed.csv",
                   _csv(["s", "u"], [[float(a), float(b)] for a, b in zip(s, v)]))


def cmd_solve(cfg: ExperimentConfig) -> int:
    sols = _solve_all(cfg)
    _write_solutions(cfg, sols)
    rows = convergence_rows(cfg, sols, None)
    failed = [f for f in sweep_checks(cfg, rows) if "Lewy" in f]
    for r in rows:
        print(f"p={r.p:g}  residual={_fmt(r.residual) or '-'}  max_slope={r.max_slope:.6f}  "
              f"contact={_intervals_text(r.gamma) or '-'}")
    return _finish(failed)


def _describe_limit(U: LimitFunction) -> list[str]:
    lines = []
    for pc in U.pieces:
        what = "obstacle" if pc.kind == "obstacle" else f"slope {pc.slope:.12g}"
        lines.append(f"[{pc.lo:.12g}, {pc.hi:.12g}]  {what}")
    return lines


def cmd_limit(cfg: ExperimentConfig) -> int:
    U, source = build_limit(cfg)
    for line in _describe_limit(U):
        print(line)
    obj = U.to_json()
    obj["gamma_source"] = source
    _write(cfg.out / "limit.json", json.dumps(obj, indent=2, sort_keys=True) + "\n")
    _write(cfg.out / "limit.csv", U.to_csv())
    failed = []
    if U.continuity_defect() > 1e-9:
        failed.append(f"limit is discontinuous (jump {U.continuity_defect():.3e})")
    if U.lipschitz_constant() > 1 + 1e-9:
        failed.append(f"limit has slope {U.lipschitz_constant():.6g} > 1")
    if U.phi is not None and U.obstacle_gap() < -1e-9:
        failed.append("limit dips below the obstacle")
    return _finish(failed)


def cmd_sweep(cfg: ExperimentConfig, write_solutions: bool = False) -> int:
    sols = _solve_all(cfg)
    U, source = build_limit(cfg)
    rows = convergence_rows(cfg, sols, U)
    _write(cfg.out / "convergence.csv", convergence_csv(rows))
    if write_solutions:
        _write_solutions(cfg, sols)
        obj = U.to_json()
        obj["gamma_source"] = source
        _write(cfg.out / "limit.json", json.dumps(obj, indent=2, sort_keys=True) + "\n")
        _write(cfg.out / "limit.csv", U.to_csv())
    if cfg.svg:
        _write(cfg.out / "overlay.svg", svg_plot(overlay_series(cfg, sols, U),
                                                 "u_p and the limit U"))
    print(convergence_csv(rows), end="")
    return _finish(sweep_checks(cfg, rows))


def cmd_report(cfg: ExperimentConfig) -> int:
    """Everything: per-p solutions, the limit, the convergence table, the plot."""
    return cmd_sweep(cfg, write_solutions=True)


VERIFY_HEADER = ["p", "c_p", "h_p", "residual", "derived", "sup_dist_closed_form_U",
                 "sup_dist_solver_U", "sup_dist_solver_closed_form"]


def cmd_verify_example(example: int, ps: list[float], n: int | None, n_nodes: int, tol: float,
                       solve: bool, out: Path, svg: bool) -> int:
    ids = [oracles.ExampleId(example, p, n) for p in ps]
    lo, hi = oracles.DOMAINS[example]
    x = np.linspace(lo, hi, n_nodes)
    U = oracles.closed_form_limit(example, x)
    rows, sols = [], []
    for e in ids:
        k = oracles.solve_constant(e)
        up = oracles.closed_form_up(e, x)
        derived = ";".join(f"{key}={_fmt(float(v))}" for key, v in sorted(k.derived.items()))
        row = [e.p, k.c, k.h, k.residual, derived, float(np.max(np.abs(up - U)))]
        if solve:
            prob = oracles.example_problem(e)
            spec = reduce(prob) if isinstance(prob, RadialSpec) else prob
            warm = sols[-1] if sols else None
            u = obstacle_solve(spec, n_nodes, tol, warm_start=warm,
                               p_chain=None if warm is None else
                               _continuation(ids[len(sols) - 1].p, e.p))
            sols.append(u)
            row += [float(np.max(np.abs(u.values - U))), float(np.max(np.abs(u.values - up)))]
        else:
            row += [None, None]
        rows.append(row)
    text = _csv(VERIFY_HEADER, rows)
    _write(out / f"verify_example{example}.csv", text)
    print(text, end="")
    failed = []
    for col, name in ((5, "closed-form"), (6, "solver")):
        d = [r[col] for r in rows if r[col] is not None]
        if len(d) > 1 and not all(b < a for a, b in zip(d, d[1:])):
            failed.append(f"{name} sup-distance to U is not strictly decreasing")
    if any(r[3] > 1e-13 for r in rows):
        failed.append("a constant's residual exceeds 1e-13")
    if svg:
        series = [dict(x=x, y=oracles.closed_form_up(e, x), label=f"u_p, p={e.p:g}",
                       color=SVG_COLORS[i % len(SVG_COLORS)], width=1.0)
                  for i, e in enumerate(ids)]
        f, phi = oracles.example_data(example)
        series.append(dict(x=x, y=phi(x), label="obstacle", color="#999999", dash="5,3"))
        series.append(dict(x=x, y=U, label="U (limit)", color="#d62728", width=2.0))
        if example in (1, 2):
            series.append(dict(x=x, y=oracles.dirichlet_limit_closed_form(example, x),
                               label="obstacle-free limit", color="#1f77b4", dash="2,2"))
        _write(out / f"verify_example{example}.svg", svg_plot(series, f"Example {example}"))
    return _finish(failed)


def _continuation(p_from: float, p_to: float) -> list[float]:
    return default_p_chain(p_to, start=p_from)[1:]


def _finish(failed: list[str]) -> int:
    for f in failed:
        print(f"CHECK FAILED: {f}", file=sys.stderr)
    return EXIT_CHECK if failed else EXIT_OK


# -- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plap-limit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--p", dest="p", help="comma-separated p values (overrides p_list)")
        sp.add_argument("--nodes", type=int, help="grid nodes (overrides n_nodes)")
        sp.add_argument("--tol", type=float, help="KKT tolerance (overrides tol)")
        sp.add_argument("--out", help="output directory (overrides out)")
        sp.add_argument("--svg", action="store_true", help="also write SVG plots")

    common(sub.add_parser("solve", help="solve at each p and write solution CSVs"))
    common(sub.add_parser("limit", help="construct the limit U and write JSON/CSV"))
    common(sub.add_parser("sweep", help="p-sweep with a convergence table"))
    common(sub.add_parser("report", help="sweep plus solutions, limit and plot"))
    ve = sub.add_parser("verify-example", help="check a built-in example against its closed forms")
    ve.add_argument("example", type=int, choices=range(1, 8), metavar="ID")
    ve.add_argument("--p-sweep", dest="p_sweep", help="alias of --p")
    ve.add_argument("--n", type=int, default=None, help="dimension for examples 6-7 (default 2)")
    ve.add_argument("--solve", action="store_true", help="also run the discrete solver")
    common(ve, config=False)
    return ap


def _apply_overrides(cfg: ExperimentConfig, args, src_name: str) -> None:
    src = _Source("", src_name)
    if args.p is not None:
        cfg.p_list = _p_values(args.p, src, "--p")
        if isinstance(cfg.problem, RadialSpec):
            cfg.problem = cfg.problem.with_p(cfg.p_list[0])
        elif cfg.problem is not None:
            cfg.problem = cfg.problem.with_p(cfg.p_list[0])
        if cfg.example is not None:
            cfg.example = oracles.ExampleId(cfg.example.example, cfg.p_list[0], cfg.example.n)
    if args.nodes is not None:
        if args.nodes < 3:
            raise ConfigError("--nodes must be at least 3")
        cfg.n_nodes = args.nodes
    if args.tol is not None:
        if not args.tol > 0:
            raise ConfigError("--tol must be positive")
        cfg.tol = args.tol
    if args.out is not None:
        cfg.out = Path(args.out)
    if args.svg:
        cfg.svg = True


def run(cfg: ExperimentConfig, command: str = "report") -> int:
    """Programmatic entry point; returns the exit code."""
    return {"solve": cmd_solve, "limit": cmd_limit, "sweep": cmd_sweep,
            "report": cmd_report}[command](cfg)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify-example":
            raw = args.p if args.p is not None else args.p_sweep
            ps = _p_values(raw if raw is not None else ",".join(map(str, DEFAULT_P_SWEEP)),
                           _Source("", "--p"), "--p")
            try:
                oracles.ExampleId(args.example, ps[0], args.n)
            except ValueError as exc:
                raise ConfigError(f"--p/--n: {exc}") from None
            return cmd_verify_example(args.example, ps, args.n, args.nodes or 2001,
                                      args.tol or 1e-8, args.solve, Path(args.out or "out"),
                                      args.svg)
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
        cfg = parse_config(text, str(path))
        _apply_overrides(cfg, args, str(path))
        return run(cfg, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (InfeasibleComponentError, FloatingPointError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        # input validation inside the library (grid size, p range, data shape)
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
