"""Command line entry point: ``lane-emden-lab <command> ...``.

Every command writes its outputs (CSV with a header row, JSON) into the output
directory together with a ``manifest.json`` describing inputs, versions and
tolerances.  Exit status: 0 on success, 2 on invalid input, 1 when a numerical
method does not converge.

Global options come before the command.  ``--config FILE`` reads ``key = value``
lines; keys under a ``[command]`` header apply to that command, the rest are
global.  Explicit flags win over the file.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import math
import os
from pathlib import Path
import platform
import re
import sys
import time

import numpy as np
import scipy

from . import __version__
from .common import ConvergenceError, ValidationError

OUTPUT_ENV = "LANE_EMDEN_LAB_OUTPUT"


# -- small helpers -----------------------------------------------------------------------

def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _floats(text: str) -> list:
    return _vector(text).tolist()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _clean(obj):
    # json cannot hold inf/nan; store them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _num(x):
    if isinstance(x, (bool, np.bool_, str)) or x is None:
        return x
    return repr(float(x))


class Run:
    """Output directory, written files and the manifest of one invocation."""

    def __init__(self, args):
        base = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
        self.dir = Path(base)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.args = args
        self.outputs = []
        self.tolerances = {}
        self.results = {}

    def path(self, name: str) -> Path:
        p = Path(name)
        if not p.is_absolute():
            p = self.dir / p
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write_json(self, name: str, data) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(_clean(data), default=_jsonable, indent=1, sort_keys=True) + "\n")
        self.outputs.append(str(p))
        return p

    def write_csv(self, name: str, header, rows) -> Path:
        p = self.path(name)
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_num(v) for v in r])
        self.outputs.append(str(p))
        return p

    def manifest(self, status: int):
        a = vars(self.args).copy()
        a.pop("func", None)
        data = {
            "command": self.args.command,
            "arguments": a,
            "exit_status": status,
            "outputs": self.outputs,
            "tolerances": self.tolerances,
            "results": self.results,
            "versions": {"lane_emden_lab": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version()},
            "workers": self.args.workers,
            "deterministic": self.args.deterministic,
        }
        if not self.args.deterministic:
            data["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        p = self.path(self.args.manifest)
        p.write_text(json.dumps(_clean(data), default=_jsonable, indent=1, sort_keys=True) + "\n")


# -- commands ----------------------------------------------------------------------------

def cmd_groundstate(args, run: Run):
    from .common import q_epsilon
    from .radial_groundstate import ExponentPair, critical_pair, ground_state
    q = args.q if args.q is not None else q_epsilon(args.n, args.p, args.eps)
    exps = critical_pair(args.n, args.p) if args.q is None and args.eps == 0 else ExponentPair(args.n, args.p, q)
    prof = ground_state(args.n, args.p, exps.q, normalize=not args.no_normalize)
    t, m = prof.tail, prof.mass
    data = {
        "n": args.n, "p": args.p, "q": exps.q,
        "grid": prof.grid, "u": prof.u_vals, "v": prof.v_vals,
        "shoot_param": prof.shoot_param,
        "decay": {"regime": t.regime, "a": t.a, "b": t.b, "residual": t.fit_residual,
                  "window": list(t.fit_window), "log_base": "e"},
        "mass": {"A_U": m.A_U, "A_V": m.A_V if m.A_V_finite else math.inf,
                 "A_V_finite": m.A_V_finite, "S": m.S},
        "normalized_max": not args.no_normalize,
    }
    run.write_json(args.out, data)
    run.results = {"shoot_param": prof.shoot_param, "a": t.a, "b": t.b, "A_U": m.A_U, "S": m.S}
    print(f"ground state n={args.n} p={args.p:g} q={exps.q:.10g}")
    print(f"  v(0) = {prof.shoot_param:.12g}   regime {t.regime}   a = {t.a:.10g}   b = {t.b:.10g}")
    print(f"  A_U = {m.A_U:.10g}   A_V = {m.A_V if m.A_V_finite else math.inf:.10g}   S = {m.S:.10g}")
    return 0


def cmd_greens(args, run: Run):
    from .greens_ball import BallDomain, greens, robin, verify_boundary_asymptotics
    dom = BallDomain(args.n, radius=args.radius)
    if args.action == "verify":
        rep = verify_boundary_asymptotics(dom, args.d_grid)
        rows = [(r["d"], r["ratio_H"], r["ratio_grad"], r["bound_H"], r["bound_grad"]) for r in rep.rows]
        run.write_csv(args.out or "greens_report.csv",
                      ["d", "ratio_H", "ratio_grad", "bound_H", "bound_grad"], rows)
        for r in rows:
            print("d = {:<10g} H ratio {:.6f}  gradient ratio {:.6f}".format(*r[:3]))
        run.results = {"converges_2pct_at_0.01": rep.converges()}
        return 0
    if args.x is None or args.y is None:
        raise ValidationError("greens needs --x and --y (or the verify action)")
    x, y = np.asarray(args.x), np.asarray(args.y)
    ev = greens(x, y, dom)
    Hxx, g1 = robin(x, dom)
    data = {"x": x, "y": y, "G": ev.G, "grad_x_G": ev.grad_x_G, "H": ev.H, "grad_x_H": ev.grad_x_H,
            "c_n": ev.c_n, "robin_x": Hxx, "grad1_H_xx": g1}
    run.write_json(args.out or "greens.json", data)
    run.results = {"G": ev.G, "H": ev.H}
    print(f"G(x,y) = {ev.G:.12g}   H(x,y) = {ev.H:.12g}   H(x,x) = {Hxx:.12g}")
    return 0


def cmd_gtilde(args, run: Run):
    from .greens_ball import BallDomain
    from .gtilde_field import SingularQuadConfig, boundary_growth_scan, gtilde, htilde
    dom = BallDomain(args.n, radius=args.radius)
    cfg = SingularQuadConfig(tol=args.tol)
    run.tolerances["quadrature"] = args.tol
    if args.action == "scan":
        rep = boundary_growth_scan(dom, args.p, args.d_grid, cfg)
        rows = [(r["d"], r["value"], r["derivative"], r["diagonal"], r["error"], rep.slope_direct)
                for r in rep.rows]
        run.write_csv(args.out or "gtilde_scan.csv",
                      ["d", "value", "derivative", "diagonal_derivative", "error", "slope"], rows)
        print(f"slope {rep.slope_direct:.5f} (expected {rep.expected_slope:g}), "
              f"diagonal route {rep.slope_diagonal:.5f}, positive: {rep.positive}")
        run.results = {"slope": rep.slope_direct, "positive": rep.positive, "reliable": rep.reliable}
        return 0
    if args.x is None or args.y is None:
        raise ValidationError("gtilde needs --x and --y (or the scan action)")
    x, y = np.asarray(args.x), np.asarray(args.y)
    g = gtilde(x, y, dom, args.p, cfg, strict=True)
    h = htilde(x, y, dom, args.p, cfg=cfg)
    data = {"x": x, "y": y, "p": args.p, "gtilde": g.value, "gtilde_quad_error": g.quad_error,
            "htilde": h.value, "htilde_quad_error": h.quad_error, "branch": h.branch}
    run.write_json(args.out or "gtilde.json", data)
    run.results = {"gtilde": g.value, "htilde": h.value}
    print(f"G~(x,y) = {g.value:.10g} +- {g.quad_error:.1e}   H~(x,y) = {h.value:.10g} ({h.branch} branch)")
    return 0


def _criterion_row(n, p, cfg):
    from .halfspace_criterion import criterion
    r = criterion(n, p, cfg)
    return (r.n, r.p, r.F, r.Gv, r.diff, r.err, r.verdict)


def cmd_criterion(args, run: Run):
    from .halfspace_criterion import CriterionConfig
    cfg = CriterionConfig(R_trunc=args.r_trunc, shell_eps=args.shell_eps)
    run.tolerances.update(R_trunc=args.r_trunc, shell_eps=args.shell_eps, verdict_threshold="3 err")
    header = ["n", "p", "F", "G", "diff", "err", "verdict"]
    if args.action == "sweep":
        if args.step <= 0 or args.p_to < args.p_from:
            raise ValidationError("need step > 0 and p-to >= p-from")
        k = int(math.floor((args.p_to - args.p_from) / args.step + 1e-9))
        grid = [round(args.p_from + i * args.step, 12) for i in range(k + 1)]
        # validate once in the parent so bad input exits with status 2 before forking
        _criterion_row(args.n, grid[0], cfg)
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as ex:
                rows = list(ex.map(_criterion_row, [args.n] * len(grid), grid, [cfg] * len(grid)))
        else:
            rows = [_criterion_row(args.n, p, cfg) for p in grid]
        run.write_csv(args.out or "sweep.csv", header, rows)
        end = None
        if rows and rows[0][6] == "holds":
            s0 = np.sign(rows[0][4])
            for r in rows:
                if r[6] != "holds" or np.sign(r[4]) != s0:
                    break
                end = r[1]
        for r in rows:
            print("p = {:<8g} F = {:<14.8g} G = {:<14.8g} diff = {:<14.8g} err = {:.1e}  {}".format(*r[1:]))
        print(f"sign-persistence interval: {None if end is None else (rows[0][1], end)}")
        run.results = {"interval": None if end is None else [rows[0][1], end]}
        return 0
    row = _criterion_row(args.n, args.p, cfg)
    run.write_csv(args.out or "criterion.csv", header, [row])
    print("n = {} p = {:g}: F = {:.10g}, G = {:.10g}, diff = {:.10g} +- {:.1e}, verdict {}".format(*row))
    run.results = dict(zip(header, row))
    return 0


def _solution_record(s):
    return {"n": s.n, "p": s.p, "q": s.q, "eps": s.eps, "radius": s.dom.radius, "center": s.dom.c,
            "lambda": s.lam, "lambda_component": s.lam_component, "S_eps": s.S_eps,
            "residual": s.residual, "grid": s.grid, "u": s.u, "v": s.v, "du": s.du, "dv": s.dv}


def cmd_blowup(args, run: Run):
    from .bounded_solver import (SolverConfig, _regime, continuation, diagnostics,
                                 energy_identity_constant, far_field_check, limit_constant)
    from .greens_ball import BallDomain
    from .radial_groundstate import ground_state
    if args.steps < 1:
        raise ValidationError("--steps must be at least 1")
    dom = BallDomain(args.n, radius=args.radius)
    cfg = SolverConfig(tol=args.tol)
    run.tolerances["bvp"] = args.tol
    schedule = [args.eps0 * 2.0 ** -k for k in range(args.steps)]
    try:
        sols = continuation(args.n, args.p, schedule, dom, cfg)
    except ConvergenceError as exc:
        if exc.partial:
            last = exc.partial[-1]
            print(f"continuation stopped; last converged eps = {last.eps:g}", file=sys.stderr)
        raise
    prof = ground_state(args.n, args.p)
    reg = _regime(args.n, args.p)
    const = derived = math.nan
    if reg == "p_gt":
        const = limit_constant(args.n, args.p, prof.mass, dom)
        derived = energy_identity_constant(args.n, args.p, prof.mass, dom)
    elif reg == "p_eq":
        const = limit_constant(args.n, args.p, prof.mass, dom, decay_a=prof.tail.a)
    diag = diagnostics(sols, prof.mass, const)
    rows = []
    run_dir = Path(args.run_dir)
    for s, lim in zip(sols, diag.limit_seq):
        probe = args.radius / 2
        ratio = math.nan
        if probe >= 10 / s.lam:
            ratio = float(far_field_check(s, prof.mass, radii=(probe,))["v_ratio"][0])
        rows.append((s.eps, s.q, s.lam, s.S_eps, lim, ratio))
        run.write_json(str(run_dir / f"eps_{s.eps:g}.json"), _solution_record(s))
    run.write_csv(args.out, ["eps", "q_eps", "lambda", "S_eps", "limit_quantity", "farfield_ratio"], rows)
    summary = {"regime": reg, "S": prof.mass.S, "limit_estimate": diag.limit_estimate,
               "limit_constant": const, "energy_identity_constant": derived,
               "lambda_increasing": diag.lambda_increasing, "S_decreasing": diag.S_decreasing,
               "lambda_components": diag.lam_components}
    run.write_json(str(run_dir / "diagnostics.json"), summary)
    run.results = summary
    for r in rows:
        print("eps = {:<10g} q = {:<10.6g} lambda = {:<12.6g} S_eps = {:<10.6g} limit = {:<10.6g} "
              "far-field = {:.5g}".format(*r))
    print(f"extrapolated limit {diag.limit_estimate:.6g}; constant {const:.6g}; "
          f"energy identity constant {derived:.6g}; S = {prof.mass.S:.8g}")
    if not diag.lambda_increasing:
        print("warning: lambda is not increasing along the schedule (possible branch switch)")
    return 0


def cmd_pohozaev(args, run: Run):
    from .pohozaev_verify import bubble_sampler, pohozaev_residual, radial_sampler, sphere_rule
    if args.solution == "bubble":
        n = args.n
        u, v = bubble_sampler(n)
        p = q = (n + 2) / (n - 2)
        limit = math.inf
    else:
        path = Path(args.solution)
        if not path.exists():
            raise ValidationError(f"no such solution file: {path}")
        rec = json.loads(path.read_text())
        n, p, q = int(rec["n"]), float(rec["p"]), float(rec["q"])
        u, v = radial_sampler(rec["grid"], rec["u"], rec["du"], rec["v"], rec["dv"], n, p, q,
                              center=rec["center"])
        limit = float(rec["radius"])
    center = np.zeros(n) if args.center is None else np.asarray(args.center)
    if center.shape != (n,):
        raise ValidationError(f"--center needs {n} components")
    if np.linalg.norm(center) + args.radius >= limit:
        raise ValidationError("the sphere must lie inside the solution domain")
    if not 1 <= args.axis <= n:
        raise ValidationError(f"--axis must lie in 1..{n}")
    quad = sphere_rule(n, center, args.radius, args.order)
    res = pohozaev_residual(u, v, quad, args.axis - 1, p, q)
    data = {"L": res.L, "R": res.R, "residual": res.residual, "relative": res.relative,
            "nodes": len(quad.weights), "order": quad.order, "center": center,
            "radius": args.radius, "axis": args.axis}
    run.write_json(args.out or "pohozaev.json", data)
    run.results = {"residual": res.residual}
    print(f"L = {res.L:.12g}   R = {res.R:.12g}   residual = {res.residual:.3e} "
          f"(relative {res.relative:.1e}, {len(quad.weights)} nodes)")
    return 0


def cmd_verify_all(args, run: Run):
    from .acceptance import format_line, run_all
    only = None if args.only is None else [int(k) for k in args.only]
    results = run_all(quick=args.quick, only=only, echo=lambda s: print(s, flush=True))
    report = [{"criterion": r.number, "title": r.title, "passed": r.passed, "runtime": r.runtime,
               "budget": r.budget, "checks": [vars(c) for c in r.checks], "values": r.values}
              for r in results]
    run.write_json(args.out or "verify_report.json", {"quick": args.quick, "criteria": report})
    npass = sum(r.passed for r in results)
    print(f"{npass}/{len(results)} criteria pass{' (quick mode)' if args.quick else ''}")
    run.results = {str(r.number): r.passed for r in results}
    if args.strict and npass < len(results):
        return 1
    return 0


# -- parser --------------------------------------------------------------------------------

def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def load_config(path) -> dict:
    """Sections of a ``key = value`` file; top-level keys land under "global"."""
    out = {"global": {}}
    section = "global"
    for i, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{i}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
            val = val[1:-1]
        out[section][key.replace("-", "_")] = val
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="lane-emden-lab",
                                     description="Numerical checks for the critical Lane-Emden system.")
    parser.add_argument("--output-dir", default=None,
                        help=f"output directory (default: ${OUTPUT_ENV} or the current directory)")
    parser.add_argument("--config", default=None, help="key = value configuration file")
    parser.add_argument("--workers", type=int, default=1, help="process pool size for sweeps")
    parser.add_argument("--deterministic", type=_bool, default=True,
                        help="omit timestamps so repeated runs give identical files (default true)")
    parser.add_argument("--manifest", default="manifest.json", help="manifest file name")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("groundstate", help="entire-space ground state by shooting")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, default=None, help="default: critical partner of p")
    p.add_argument("--eps", type=float, default=0.0, help="subcritical shift of q")
    p.add_argument("--no-normalize", action="store_true", help="keep u(0) = 1 instead of max = 1")
    p.add_argument("--out", default="profile.json")
    p.set_defaults(func=cmd_groundstate)
    subs["groundstate"] = p

    p = sub.add_parser("greens", help="Green's function on a ball")
    p.add_argument("action", nargs="?", choices=["eval", "verify"], default="eval")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x", type=_vector, default=None)
    p.add_argument("--y", type=_vector, default=None)
    p.add_argument("--d-grid", type=_floats, default=[0.1, 0.05, 0.02, 0.01])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_greens)
    subs["greens"] = p

    p = sub.add_parser("gtilde", help="iterated Green potential and its regular part")
    p.add_argument("action", nargs="?", choices=["eval", "scan"], default="eval")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x", type=_vector, default=None)
    p.add_argument("--y", type=_vector, default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--d-grid", type=_floats, default=[0.1, 0.05, 0.025, 0.0125])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gtilde)
    subs["gtilde"] = p

    p = sub.add_parser("criterion", help="half-space boundary growth criterion")
    p.add_argument("action", nargs="?", choices=["single", "sweep"], default="single")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--p-from", type=float, default=1.0)
    p.add_argument("--p-to", type=float, default=1.3)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--r-trunc", type=float, default=400.0)
    p.add_argument("--shell-eps", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_criterion)
    subs["criterion"] = p

    p = sub.add_parser("blowup", help="radial solutions on a ball along an eps ladder")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--eps0", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--out", default="blowup.csv")
    p.add_argument("--run-dir", default="blowup_run", help="per-eps solution files")
    p.set_defaults(func=cmd_blowup)
    subs["blowup"] = p

    p = sub.add_parser("pohozaev", help="local Pohozaev identity on a sphere")
    p.add_argument("--solution", default="bubble", help="solution JSON from blowup, or 'bubble'")
    p.add_argument("--n", type=int, default=3, help="dimension of the bubble pair")
    p.add_argument("--center", type=_vector, default=None)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--axis", type=int, default=1, help="coordinate index, 1-based")
    p.add_argument("--order", type=int, default=None, help="angular rule order")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pohozaev)
    subs["pohozaev"] = p

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="fewer samples, same thresholds")
    p.add_argument("--strict", action="store_true", help="exit 1 when a criterion fails")
    p.add_argument("--only", type=lambda s: [int(t) for t in s.split(",")], default=None,
                   help="comma separated criterion numbers")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify_all)
    subs["verify-all"] = p
    return parser, subs


def _apply_config(parser, subs, path):
    cfg = load_config(path)
    known = {a.dest for a in parser._actions} - {"help", "command", "config"}
    glob = cfg.pop("global")
    bad = [k for k in glob if k not in known]
    if bad:
        raise ValidationError(f"unknown global config keys: {', '.join(bad)}")
    parser.set_defaults(**glob)
    for name, values in cfg.items():
        if name not in subs:
            raise ValidationError(f"unknown config section [{name}]")
        sp = subs[name]
        dests = {a.dest: a for a in sp._actions}
        bad = [k for k in values if k not in dests]
        if bad:
            raise ValidationError(f"unknown keys in [{name}]: {', '.join(bad)}")
        conv = {}
        for k, v in values.items():
            act = dests[k]
            if act.nargs == 0:           # store_true flags
                conv[k] = _bool(v)
            elif act.type is not None:
                conv[k] = act.type(v)
            else:
                conv[k] = v
        sp.set_defaults(**conv)


_VECTOR_FLAGS = ("--x", "--y", "--center", "--d-grid")


def _join_negative_vectors(argv):
    # "--y -0.2,0.4" would be read as an option; rewrite it as "--y=-0.2,0.4"
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VECTOR_FLAGS and i + 1 < len(argv) and re.match(r"-[\d.]", argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _join_negative_vectors(list(sys.argv[1:] if argv is None else argv))
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            _apply_config(parser, subs, known.config)
    except (ValidationError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return 2
    try:
        run = Run(args)
    except OSError as exc:
        print(f"error: cannot use output directory: {exc}", file=sys.stderr)
        return 2
    try:
        status = args.func(args, run)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 2
    except ConvergenceError as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        status = 1
    run.manifest(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
