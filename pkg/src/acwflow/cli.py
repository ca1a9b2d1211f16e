"""Config-driven command line wrapping every harness in one binary.

A key = value config (sections metric, discretization, problem, run) picks
the geometry, resolution, and run parameters; one subcommand per harness
writes its CSV/JSON artifacts plus a manifest carrying the config hash,
library versions, and wall time.  Config errors exit 2; numerical invariant
breaches exit 3 with a machine-readable breach report.  CSV floats carry 17
significant digits so reruns can be checked byte for byte; column orders
and the snapshot schema are documented in docs/formats.md.
"""

import argparse
import configparser
import hashlib
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .action import EffectiveAction
from .barycenter import solve_barycenter
from .errors import BreachError, ConfigError, FlowError
from .flow import compare_adiabatic, run_acw, run_effective, shadow
from .harmonics import (degree_of_index, get_basis, lm_index, n_coeffs,
                        sobolev_norm)
from .metric import check_decay, make_metric
from .reduction import assemble_L, frame_and_Q, solve_LS
from .surface import (GraphSurface, area, hawking_mass, hawking_mass_std,
                      lagrange_multiplier, willmore_energy)

COMMANDS = ("energy", "spectrum", "ls-solve", "foliation", "barycenter",
            "flow", "effective", "compare", "shadow", "validate")

DEFAULTS = {
    "metric": {"mode": "schwarzschild", "family": "quad", "eta": 0.0,
               "mass": 2.0},
    "discretization": {"L": 16, "k": 4, "tol": 1e-10, "step_tol": 1e-7},
    "problem": {"r": 20.0, "c": None, "z0": (0.0, 0.0, 0.2),
                "phi0": "equilibrium"},
    "run": {"out": "out", "t_end": None, "snapshot_every": 10, "seed": 0,
            "dt0": None, "dt_max": None, "max_steps": 50000, "project": True,
            "lyapunov": True, "tube_delta": 0.05, "input": None, "index": -1,
            "r_values": None, "c_values": None, "window": None,
            "window_factor": 12.0, "band": None, "eps": 1e-3,
            "eps_power": 3.0, "L_eff": 12},
}

_VEC_KEYS = {"z0", "r_values", "c_values"}
_STR_KEYS = {"mode", "family", "phi0", "out", "input"}
_INT_KEYS = {"L", "k", "snapshot_every", "seed", "index", "L_eff",
             "max_steps"}
_BOOL_KEYS = {"project", "lyapunov"}


def _parse_value(key, raw):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if raw.lower() in ("none", ""):
        return None
    try:
        if key in _VEC_KEYS:
            return tuple(float(p) for p in raw.split(","))
        if key in _INT_KEYS:
            return int(raw)
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def load_config(path):
    """Merge the config file over the documented defaults; reject unknowns."""
    cfg = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    text = ""
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        text = p.read_text()
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse failure: {exc}") from exc
        for sec in parser.sections():
            if sec not in cfg:
                raise ConfigError(f"unknown config section [{sec}]")
            for key, raw in parser[sec].items():
                if key not in cfg[sec]:
                    raise ConfigError(f"unknown key {key} in [{sec}]")
                cfg[sec][key] = _parse_value(key, raw)
    z0 = cfg["problem"]["z0"]
    if z0 is None or len(z0) != 3:
        raise ConfigError("problem.z0 needs three components")
    if not cfg["discretization"]["L"] >= 2:
        raise ConfigError("discretization.L must be at least 2")
    return cfg, text


def _canonical(cfg):
    return json.dumps(cfg, sort_keys=True, default=str)


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.ndarray, np.generic)):
        return _jsonable(obj.tolist())
    if isinstance(obj, float):
        # strict-JSON consumers reject NaN/Infinity literals
        return float(obj) if np.isfinite(obj) else None
    return obj


def _write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2) + "\n")


def _metric(cfg):
    m = cfg["metric"]
    if m["mode"] not in ("flat", "schwarzschild", "perturbed"):
        raise ConfigError(f"unknown metric mode {m['mode']!r}")
    try:
        return make_metric(m["mode"], family=m["family"], eta=m["eta"],
                           mass=m["mass"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _problem_r(cfg, metric):
    """Radius from problem.r, or slaved to problem.c when only c is given."""
    d = cfg["discretization"]
    if cfg["problem"]["c"] is not None:
        ea = EffectiveAction(metric=metric, c=cfg["problem"]["c"],
                             L=d["L"], tol=d["tol"])
        return float(ea.area_level_r(np.asarray(cfg["problem"]["z0"])))
    if cfg["problem"]["r"] is None:
        raise ConfigError("problem needs r or c")
    return float(cfg["problem"]["r"])


def _initial_coeffs(cfg, metric, r):
    """Coefficients for the phi0 spec: terms joined by '+', each one of
    zero, equilibrium, harmonic:l,m,amp, or random:amp."""
    d = cfg["discretization"]
    L = d["L"]
    z0 = np.asarray(cfg["problem"]["z0"], dtype=float)
    c = np.zeros(n_coeffs(L))
    for term in cfg["problem"]["phi0"].split("+"):
        term = term.strip()
        if term == "zero":
            continue
        if term == "equilibrium":
            c += solve_LS(metric, r, z0, L=L, tol=d["tol"]).phi
        elif term.startswith("harmonic:"):
            try:
                lv, mv, amp = term[len("harmonic:"):].split(",")
                c[lm_index(int(lv), int(mv))] += float(amp)
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"bad phi0 term {term!r}") from exc
        elif term.startswith("random:"):
            try:
                amp = float(term[len("random:"):])
            except ValueError as exc:
                raise ConfigError(f"bad phi0 term {term!r}") from exc
            rng = np.random.default_rng(cfg["run"]["seed"])
            xi = rng.standard_normal(n_coeffs(L))
            xi[:4] = 0.0
            c += amp * xi / sobolev_norm(xi, 4, L)
        else:
            raise ConfigError(f"bad phi0 term {term!r}")
    return c


def _surface(cfg, metric):
    r = _problem_r(cfg, metric)
    z0 = np.asarray(cfg["problem"]["z0"], dtype=float)
    return GraphSurface(r=r, z=z0, c=_initial_coeffs(cfg, metric, r),
                        L=cfg["discretization"]["L"])


def cmd_energy(cfg, metric, args, out):
    x = _surface(cfg, metric)
    lam = lagrange_multiplier(x, metric)
    row = [x.r, x.z[0], x.z[1], x.z[2], area(x, metric),
           willmore_energy(x, metric), hawking_mass(x, metric),
           hawking_mass_std(x, metric), lam,
           sobolev_norm(x.c, cfg["discretization"]["k"], x.L)]
    _write_csv(out / "energy.csv",
               ["r", "z1", "z2", "z3", "area", "energy", "hawking",
                "hawking_std", "lam", "phi_h4"], [row])
    return ["energy.csv"]


def cmd_spectrum(cfg, metric, args, out):
    d = cfg["discretization"]
    r = _problem_r(cfg, metric)
    z0 = np.asarray(cfg["problem"]["z0"], dtype=float)
    sol = solve_LS(metric, r, z0, L=d["L"], tol=d["tol"])
    op = assemble_L(metric, r, z0, base=sol.phi, L=d["L"])
    ev, vec = np.linalg.eigh(op.matrix)
    ldeg = degree_of_index(d["L"])
    rows = []
    for i in range(ev.size):
        j = int(np.argmax(np.abs(vec[:, i])))
        lv = int(ldeg[j])
        rows.append([i, lv, j - lv * lv - lv, ev[i]])
    _write_csv(out / "spectrum.csv", ["index", "l", "m", "eigenvalue"], rows)
    return ["spectrum.csv"]


def cmd_ls_solve(cfg, metric, args, out):
    d = cfg["discretization"]
    z0 = np.asarray(cfg["problem"]["z0"], dtype=float)

    def solve(r):
        sol = solve_LS(metric, float(r), z0, L=d["L"], tol=d["tol"])
        return sol

    arts = []
    rvals = cfg["run"]["r_values"]
    if rvals:
        sols = _map_jobs(solve, rvals, args.jobs)
        b = get_basis(d["L"])
        rows = [[r, sobolev_norm(s.phi, d["k"], d["L"]),
                 np.max(np.abs(b.synthesize(s.phi))), s.residual,
                 s.iterations] for r, s in zip(rvals, sols)]
        _write_csv(out / "ls_sweep.csv",
                   ["r", "phi_h4", "phi_sup", "residual", "iterations"],
                   rows)
        norms = np.array([row[1] for row in rows], dtype=float)
        slope = float("nan")
        if len(rvals) >= 2 and np.all(norms > 1e-14):
            lr = np.log(np.asarray(rvals, dtype=float))
            lr = lr - lr.mean()
            ln = np.log(norms)
            slope = float(lr @ (ln - ln.mean()) / (lr @ lr))
        _write_json(out / "ls_solve.json",
                    {"r_values": list(rvals), "h4_slope": slope})
        arts += ["ls_sweep.csv", "ls_solve.json"]
    else:
        r = _problem_r(cfg, metric)
        sol = solve(r)
        _write_json(out / "ls_solve.json",
                    {"r": r, "z0": list(z0), "phi": list(sol.phi),
                     "phi_h4": sobolev_norm(sol.phi, d["k"], d["L"]),
                     "residual": sol.residual, "iterations": sol.iterations,
                     "converged": sol.converged})
        arts.append("ls_solve.json")
    return arts


def cmd_foliation(cfg, metric, args, out):
    d = cfg["discretization"]
    z0 = np.asarray(cfg["problem"]["z0"], dtype=float)
    cvals = cfg["run"]["c_values"]
    if not cvals:
        x = _surface(cfg, metric)
        cvals = (area(x, metric),)

    def critical(c):
        ea = EffectiveAction(metric=metric, c=float(c), L=d["L"],
                             tol=d["tol"])
        return ea.find_critical(z0)

    cps = _map_jobs(critical, cvals, args.jobs)
    rows = [[c, cp.zeta[0], cp.zeta[1], cp.zeta[2], cp.zeta[3], cp.value,
             cp.eigenvalues[0], cp.eigenvalues[1], cp.eigenvalues[2],
             cp.grad_norm, cp.residual, cp.classification]
            for c, cp in zip(cvals, cps)]
    _write_csv(out / "foliation.csv",
               ["c", "r_star", "z1_star", "z2_star", "z3_star", "G",
                "hess_ev1", "hess_ev2", "hess_ev3", "grad_norm", "residual",
                "classification"], rows)
    return ["foliation.csv"]


def _load_snapshot(cfg, args):
    path = args.input or cfg["run"]["input"]
    if not path:
        raise ConfigError("barycenter needs --in or run.input")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"snapshot file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"snapshot parse failure: {exc}") from exc
    if "snapshots" in data:
        try:
            snap = data["snapshots"][cfg["run"]["index"]]
            L = int(data["L"])
        except (IndexError, KeyError) as exc:
            raise ConfigError("snapshot index out of range") from exc
    else:
        snap, L = data, int(data["L"])
    try:
        return GraphSurface(r=float(snap["r"]),
                            z=np.asarray(snap["z"], dtype=float),
                            c=np.asarray(snap["c"], dtype=float), L=L)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad snapshot fields: {exc}") from exc


def cmd_barycenter(cfg, metric, args, out):
    d = cfg["discretization"]
    x = _load_snapshot(cfg, args)
    res = solve_barycenter(metric, x, tol=d["tol"],
                           delta0=cfg["run"]["tube_delta"])
    _write_json(out / "barycenter.json",
                {"zeta": list(res.zeta), "xi_h4":
                 sobolev_norm(res.xi, d["k"], x.L),
                 "pairing_residuals": list(res.gamma),
                 "recon_error": res.recon_error,
                 "iterations": res.iterations})
    return ["barycenter.json"]


_FLOW_HEADER = ["t", "energy", "hawking", "area", "lam", "vel", "zeta_r",
                "zeta_1", "zeta_2", "zeta_3", "xi_h4", "lyap"]


def _flow_rows(ts):
    return [[ts.t[i], ts.energy[i], ts.hawking[i], ts.area[i], ts.lam[i],
             ts.vel[i], ts.zeta[i, 0], ts.zeta[i, 1], ts.zeta[i, 2],
             ts.zeta[i, 3], ts.xi_h4[i], ts.lyap[i]]
            for i in range(ts.t.size)]


def _snapshot_json(ts):
    if not ts.snapshots:
        return {"format": "acwflow-snapshot-v1", "L": 0, "snapshots": []}
    return {"format": "acwflow-snapshot-v1",
            "L": ts.snapshots[0].surface.L,
            "snapshots": [{"t": st.time, "r": st.surface.r,
                           "z": list(st.surface.z),
                           "c": list(st.surface.c)}
                          for st in ts.snapshots]}


def cmd_flow(cfg, metric, args, out):
    d, run = cfg["discretization"], cfg["run"]
    if run["t_end"] is None:
        raise ConfigError("flow needs run.t_end")
    x0 = _surface(cfg, metric)
    ts = run_acw(metric, x0, run["t_end"], tol=d["step_tol"],
                 dt0=run["dt0"], dt_max=run["dt_max"],
                 snapshot_every=_cadence(cfg, args),
                 max_steps=run["max_steps"], project=run["project"],
                 with_lyapunov=run["lyapunov"],
                 tube_delta=run["tube_delta"], ptol=d["tol"])
    _write_csv(out / "flow.csv", _FLOW_HEADER, _flow_rows(ts))
    _write_json(out / "snapshots.json", _snapshot_json(ts))
    _write_json(out / "flow.json",
                {"rows": int(ts.t.size), "t_end": float(ts.t[-1]),
                 "energy_drop": float(ts.energy[0] - ts.energy[-1]),
                 "area_rel_dev":
                 float(np.max(np.abs(ts.area / ts.area[0] - 1.0))),
                 "final_zeta": list(ts.zeta[-1])})
    return ["flow.csv", "snapshots.json", "flow.json"]


def cmd_effective(cfg, metric, args, out):
    d, run = cfg["discretization"], cfg["run"]
    if run["t_end"] is None:
        raise ConfigError("effective needs run.t_end")
    r = _problem_r(cfg, metric)
    zeta0 = np.concatenate(([r], cfg["problem"]["z0"]))
    path = run_effective(metric, zeta0, run["t_end"],
                         c=cfg["problem"]["c"], L=run["L_eff"],
                         tol=d["tol"])
    rows = [[path.t[i], path.zeta[i, 0], path.zeta[i, 1], path.zeta[i, 2],
             path.zeta[i, 3], path.g[i], path.zdot[i, 0], path.zdot[i, 1],
             path.zdot[i, 2], path.zdot[i, 3]] for i in range(path.t.size)]
    _write_csv(out / "effective.csv",
               ["t", "r", "z1", "z2", "z3", "G", "zdot_r", "zdot_1",
                "zdot_2", "zdot_3"], rows)
    _write_json(out / "effective.json",
                {"samples": int(path.t.size), "final_zeta":
                 list(path.zeta[-1]), "G_first": float(path.g[0]),
                 "G_last": float(path.g[-1]),
                 "sign_convention": "descent: zdot = -(pairing gradient); "
                 "the ascent-signed form is its time reversal"})
    return ["effective.csv", "effective.json"]


def cmd_compare(cfg, metric, args, out):
    d, run = cfg["discretization"], cfg["run"]
    rvals = run["r_values"]
    if not rvals:
        raise ConfigError("compare needs run.r_values")
    rep = compare_adiabatic(metric, rvals, z0=cfg["problem"]["z0"],
                            eps=run["eps"], eps_power=run["eps_power"],
                            window_factor=run["window_factor"], L=d["L"],
                            L_eff=run["L_eff"],
                            snapshot_every=_cadence(cfg, args),
                            step_tol=d["step_tol"], tol=d["tol"],
                            tube_delta=run["tube_delta"], jobs=args.jobs)
    rows = [[rep.r_values[i], rep.sup_xi[i], rep.sup_xi_late[i],
             rep.sup_track[i], rep.sup_track_late[i], rep.entry_time[i]]
            for i in range(rep.r_values.size)]
    _write_csv(out / "compare.csv",
               ["r", "sup_xi", "sup_xi_late", "sup_track", "sup_track_late",
                "entry_time"], rows)
    arts = ["compare.csv", "compare.json"]
    for (ts, _), r in zip(rep.runs, rep.r_values):
        name = "flow_r%g.csv" % r
        _write_csv(out / name, _FLOW_HEADER, _flow_rows(ts))
        arts.append(name)
    _write_json(out / "compare.json",
                {"r_values": list(rep.r_values),
                 "xi_exponent": rep.xi_exponent,
                 "track_exponent": rep.track_exponent,
                 "eps": run["eps"], "eps_power": run["eps_power"],
                 "window_factor": run["window_factor"]})
    return arts


def cmd_shadow(cfg, metric, args, out):
    d, run = cfg["discretization"], cfg["run"]
    r = _problem_r(cfg, metric)
    zeta_T = np.concatenate(([r], cfg["problem"]["z0"]))
    rep = shadow(metric, zeta_T, window=run["window"], c=cfg["problem"]["c"],
                 band=run["band"], L=d["L"], L_eff=run["L_eff"],
                 snapshot_every=_cadence(cfg, args), step_tol=d["step_tol"],
                 tol=d["tol"])
    _write_csv(out / "shadow.csv", ["t", "gap"],
               [[rep.t[i], rep.gap[i]] for i in range(rep.t.size)])
    _write_json(out / "shadow.json",
                {"sup_gap": rep.sup_gap, "band": rep.band, "ok": rep.ok,
                 "window": float(run["window"] or r)})
    if not rep.ok:
        raise FlowError("shadowing gap exceeded the band",
                        {"sup_gap": rep.sup_gap, "band": rep.band})
    return ["shadow.csv", "shadow.json"]


def cmd_validate(cfg, metric, args, out):
    """Built-in property battery over the configured geometry."""
    d = cfg["discretization"]
    L, tol = d["L"], d["tol"]
    r = _problem_r(cfg, metric)
    z0 = np.asarray(cfg["problem"]["z0"], dtype=float)
    checks = []

    def check(name, value, bound, ok=None):
        ok = bool(value <= bound) if ok is None else bool(ok)
        checks.append({"name": name, "value": float(value),
                       "bound": float(bound), "ok": ok})

    dec = check_decay(metric)
    check("metric-decay-envelope", dec["metric_C"], 1e6, ok=dec["ok"])
    b = get_basis(L)
    rng = np.random.default_rng(cfg["run"]["seed"])
    c = rng.standard_normal(n_coeffs(L))
    f = b.synthesize(c)
    check("harmonic-roundtrip", np.max(np.abs(b.analyze(f) - c)), 1e-10)
    check("parseval", abs(b.integrate(f ** 2) / (c @ c) - 1.0), 1e-12)
    flat = make_metric("flat")
    check("flat-round-energy",
          abs(willmore_energy(GraphSurface.round(r, L=L), flat)
              / (4.0 * np.pi) - 1.0), 1e-12)
    sol = solve_LS(metric, r, z0, L=L, tol=tol)
    check("ls-converged", 0.0 if sol.converged else 1.0, 0.5)
    fr = frame_and_Q(metric, r, z0, L=L, tol=tol)
    op = assemble_L(metric, r, z0, base=sol.phi, L=L)
    xi = rng.standard_normal(n_coeffs(L))
    xi[:4] = 0.0
    xi -= fr.Q @ xi
    rq = float(xi @ (op.matrix @ xi) / (xi @ xi))
    check("stability-rayleigh", -rq, 0.0, ok=rq > 0.0)
    amp = 1e-4
    pert = rng.standard_normal(n_coeffs(L))
    pert[:4] = 0.0
    pert *= amp / sobolev_norm(pert, 4, L)
    pert -= fr.Q @ pert
    x = GraphSurface(r=r, z=z0, c=sol.phi + pert, L=L)
    res = solve_barycenter(metric, x, tol=tol)
    check("barycenter-roundtrip",
          np.max(np.abs(res.zeta - np.concatenate(([r], z0)))), 1e-7)
    c0 = sol.phi.copy()
    c0[lm_index(2, 0)] += 1e-3
    ts = run_acw(metric, GraphSurface(r=r, z=z0, c=c0, L=L),
                 25.0 * r ** 4 / 2400.0, tol=d["step_tol"], project=False,
                 snapshot_every=5)
    check("flow-dissipation",
          np.max(np.diff(ts.energy)), 1e-9 * abs(ts.energy[0]))
    check("flow-area", np.max(np.abs(ts.area / ts.area[0] - 1.0)), 1e-8)
    ea = EffectiveAction(metric=metric, c=area(x, metric), L=min(L, 12),
                         tol=tol)
    cp = ea.find_critical(np.zeros(3))
    check("critical-gradient", cp.grad_norm, 1e-8)
    ok = all(ch["ok"] for ch in checks)
    _write_json(out / "validate.json", {"checks": checks, "ok": ok})
    if not ok:
        raise BreachError("validation failed",
                          {"failed": [ch["name"] for ch in checks
                                      if not ch["ok"]]})
    return ["validate.json"]


def _cadence(cfg, args):
    if args.snapshot_every is not None:
        return args.snapshot_every
    return cfg["run"]["snapshot_every"]


def _map_jobs(fn, values, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


HANDLERS = {"energy": cmd_energy, "spectrum": cmd_spectrum,
            "ls-solve": cmd_ls_solve, "foliation": cmd_foliation,
            "barycenter": cmd_barycenter, "flow": cmd_flow,
            "effective": cmd_effective, "compare": cmd_compare,
            "shadow": cmd_shadow, "validate": cmd_validate}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="acwflow",
        description="Constrained Willmore flow harnesses: surface "
        "diagnostics, reduction solves, full and reduced time integration, "
        "and their comparison, driven by one config file.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="PATH",
                        help="key = value config; defaults used if omitted")
    parser.add_argument("--out", metavar="DIR",
                        help="artifact directory (default from run.out)")
    parser.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="thread pool size for sweep points")
    parser.add_argument("--snapshot-every", type=int, default=None,
                        metavar="T", help="override run.snapshot_every")
    parser.add_argument("--in", dest="input", metavar="PATH", default=None,
                        help="input snapshot JSON (barycenter)")
    args = parser.parse_args(argv)
    t0 = time.time()
    try:
        cfg, _ = load_config(args.config)
        out = Path(args.out if args.out else cfg["run"]["out"])
        out.mkdir(parents=True, exist_ok=True)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        metric = _metric(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    sha = hashlib.sha256(_canonical(cfg).encode()).hexdigest()
    try:
        artifacts = HANDLERS[args.command](cfg, metric, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BreachError as exc:
        report = {"error": type(exc).__name__, "message": str(exc),
                  "report": _jsonable(exc.report), "config_sha256": sha}
        _write_json(out / "breach.json", report)
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 3
    _write_json(out / "manifest.json",
                {"format": "acwflow-manifest-v1", "subcommand": args.command,
                 "config_sha256": sha, "config_file": args.config,
                 "package_version": __version__,
                 "python": platform.python_version(),
                 "numpy": np.__version__, "scipy": scipy.__version__,
                 "wall_s": round(time.time() - t0, 3),
                 "artifacts": artifacts})
    return 0


if __name__ == "__main__":
    sys.exit(main())
