"""Time integration of the constrained flow and the reduced center dynamics.

step_acw advances the graph surface with an implicit-explicit scheme: the
flat constant-coefficient part of the velocity is diagonal in harmonics and
treated by the trapezoidal rule, the remainder by a two-step explicit
update, and the area is restored onto the target level after every step.
run_acw wraps this in adaptive step control and records the projected
(barycenter, fluctuation, quadratic energy) diagnostics at snapshots.
run_effective integrates the frame-projected center velocity on the area
level set; compare_adiabatic and shadow measure how well that reduced path
tracks the full flow.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from .action import EffectiveAction
from .barycenter import (_frame_coeffs, _graph_derivative, _radial_resample,
                         _solve_graph, solve_barycenter)
from .errors import BarycenterError, FlowError, SurfaceError
from .harmonics import get_basis, lm_index, n_coeffs, sobolev_norm
from .reduction import assemble_L, solve_LS
from .surface import GraphSurface, area, extrinsic_data, velocity_fields


def _flat_symbol(r, L):
    """Diagonal symbol l(l+1)(l(l+1)-2)/r^4 of the stiff implicit part."""
    lof = get_basis(L).l_of
    ll = lof * (lof + 1.0)
    return ll * (ll - 2.0) / float(r) ** 4


@dataclass
class FlowState:
    surface: GraphSurface
    time: float
    c: float        # area target of the run
    dt: float       # last accepted step
    energy: float
    area: float
    err: float      # explicit-part consistency estimate of the last step
    remainder: np.ndarray = field(default=None, repr=False)

    @classmethod
    def initial(cls, metric, x0, c=None):
        ed = extrinsic_data(x0, metric)
        a = ed.integrate(1.0)
        c = float(a if c is None else c)
        if abs(a - c) > 1e-8 * c:
            raise FlowError("initial surface off the area target",
                            {"area": a, "target": c})
        return cls(surface=x0, time=0.0, c=c, dt=0.0,
                   energy=0.25 * ed.integrate(ed.H ** 2), area=a, err=0.0)


def step_acw(metric, state, dt, vf=None):
    """One implicit-explicit step of the area-constrained flow.

    The stiff flat part is advanced by the trapezoidal rule, the remaining
    velocity by a two-step explicit update seeded from the previous step.
    A Newton iteration on the constant mode restores the area target, and
    the step raises FlowError when the restored surface loses radial
    alignment (graph conversion factor under 0.5) or restoration stalls.
    """
    s = state.surface
    b = get_basis(s.L)
    vf = vf or velocity_fields(s, metric)
    a = _flat_symbol(s.r, s.L)
    nk = b.analyze(vf.graph_rate) + a * s.c
    nprev = nk if state.remainder is None else state.remainder
    newc = ((1.0 - 0.5 * dt * a) * s.c + dt * (1.5 * nk - 0.5 * nprev)) \
        / (1.0 + 0.5 * dt * a)
    s1 = s.with_coeffs(newc)
    root = np.sqrt(4.0 * np.pi)
    for _ in range(8):
        ed = extrinsic_data(s1, metric)
        ar = ed.integrate(1.0)
        resid = ar - state.c
        if abs(resid) <= 1e-10 * state.c:
            break
        c1 = s1.c.copy()
        c1[0] -= resid * root / (2.0 * ar)
        s1 = s1.with_coeffs(c1)
    else:
        raise FlowError("area restoration stalled",
                        {"residual": float(resid), "target": state.c})
    align = float(np.min(np.einsum("ijk,ijk->ij", ed.nu, ed.v)))
    if align < 0.5:
        raise FlowError("graph alignment below threshold",
                        {"alignment": align})
    return FlowState(surface=s1, time=state.time + dt, c=state.c, dt=dt,
                     energy=0.25 * ed.integrate(ed.H ** 2), area=ar,
                     err=0.5 * dt * float(np.linalg.norm(nk - nprev)),
                     remainder=nk)


@dataclass
class TimeSeries:
    t: np.ndarray
    energy: np.ndarray
    hawking: np.ndarray
    area: np.ndarray
    lam: np.ndarray
    vel: np.ndarray       # L2(dmu) norm of the normal speed
    zeta: np.ndarray      # (n, 4) barycenter rows; nan while projection fails
    xi_h4: np.ndarray
    lyap: np.ndarray
    snapshots: list = field(repr=False, default_factory=list)
    final: FlowState = None


def run_acw(metric, x0, t_end, c=None, tol=1e-7, dt0=None, dt_max=None,
            snapshot_every=10, max_steps=50000, adaptive=True, project=True,
            with_lyapunov=True, tube_delta=0.05, ptol=1e-10):
    """Advance the constrained flow to t_end with adaptive step control.

    Steps are rejected when the explicit-part estimate exceeds
    tol * max(||phi||, 1e-3) or the energy increases beyond roundoff slack;
    the step is then halved, while accepted steps regrow under PI control
    of the estimate against its target.  Snapshot
    rows are recorded every snapshot_every accepted steps plus the final
    state; the barycenter columns hold nan wherever the projection fails
    and resume once the surface re-enters the admission tube.
    """
    state = x0 if isinstance(x0, FlowState) else FlowState.initial(metric, x0, c)
    t_end = float(t_end)
    L = state.surface.L
    if dt0:
        dt = float(dt0)
    else:
        dt = min(state.surface.r ** 4 / 2400.0, (t_end - state.time) / 8.0)
    dt_cap = float(dt_max) if dt_max else np.inf
    dt = min(dt, dt_cap)
    dt_floor = 1e-12 * max(t_end - state.time, dt)
    cols = {k: [] for k in ("t", "energy", "hawking", "area", "lam", "vel",
                            "xi_h4", "lyap")}
    zrows = []
    snapshots = []
    seed = {}

    def record(st, vf):
        cols["t"].append(st.time)
        cols["energy"].append(st.energy)
        cols["area"].append(st.area)
        cols["hawking"].append(np.sqrt(st.area) / (16.0 * np.pi) ** 1.5
                               * (16.0 * np.pi - 2.0 * st.energy))
        cols["lam"].append(vf.lam)
        cols["vel"].append(np.sqrt(vf.ed.integrate(vf.speed ** 2)))
        zeta = np.full(4, np.nan)
        xi_h4 = lyap = np.nan
        if project:
            try:
                bar = solve_barycenter(metric, st.surface, tol=ptol,
                                       delta0=tube_delta, seed=seed)
                zeta = bar.zeta
                xi_h4 = sobolev_norm(bar.xi, 4, L)
                if with_lyapunov:
                    lyap = lyapunov(metric, bar.xi, bar.zeta, L=L, tol=ptol)
            except BarycenterError:
                pass
        zrows.append(zeta)
        cols["xi_h4"].append(xi_h4)
        cols["lyap"].append(lyap)
        snapshots.append(st)

    steps = accepted = 0
    next_record = 0
    streak = 0
    rel_prev = 1.0
    while state.time < t_end * (1.0 - 1e-12) and steps < max_steps:
        vf = velocity_fields(state.surface, metric)
        if accepted == next_record:
            record(state, vf)
            next_record += snapshot_every
        dt_eff = min(dt, t_end - state.time)
        steps += 1
        try:
            trial = step_acw(metric, state, dt_eff, vf=vf)
            fail = None
        except (FlowError, SurfaceError) as exc:
            trial, fail = None, exc
        scale = tol * max(np.linalg.norm(state.surface.c), 1e-3)
        if fail is None and adaptive:
            if trial.err > scale:
                fail = "explicit estimate"
            elif trial.energy > state.energy + 1e-9 * max(1.0, abs(state.energy)):
                fail = "energy increase"
        if fail is not None:
            if not adaptive:
                if isinstance(fail, Exception):
                    raise fail
                raise FlowError("fixed-step run rejected a step",
                                {"reason": fail, "dt": dt_eff})
            streak += 1
            dt = 0.5 * dt_eff
            if dt < dt_floor or streak > 60:
                raise FlowError("step size collapsed",
                                {"dt": dt, "time": state.time,
                                 "reason": str(fail)})
            continue
        streak = 0
        accepted += 1
        state = trial
        if adaptive:
            rel = max(trial.err / scale, 1e-12)
            grow = 0.9 * rel ** -0.35 * rel_prev ** 0.2
            rel_prev = rel
            dt = min(dt_cap, dt_eff * min(5.0, max(0.2, grow)))
    if state.time < t_end * (1.0 - 1e-12):
        raise FlowError("step budget exhausted",
                        {"time": state.time, "steps": steps})
    record(state, velocity_fields(state.surface, metric))
    return TimeSeries(t=np.array(cols["t"]), energy=np.array(cols["energy"]),
                      hawking=np.array(cols["hawking"]),
                      area=np.array(cols["area"]), lam=np.array(cols["lam"]),
                      vel=np.array(cols["vel"]), zeta=np.array(zrows),
                      xi_h4=np.array(cols["xi_h4"]),
                      lyap=np.array(cols["lyap"]), snapshots=snapshots,
                      final=state)


def lyapunov(metric, xi, zeta, L=16, tol=1e-10):
    """Quadratic fluctuation energy (1/2) <xi, L xi> at the base point."""
    zeta = np.asarray(zeta, dtype=float)
    sol = solve_LS(metric, zeta[0], zeta[1:], L=L, tol=tol)
    op = assemble_L(metric, zeta[0], zeta[1:], base=sol.phi, L=L)
    xi = np.asarray(xi, dtype=float)
    return 0.5 * float(xi @ (op.matrix @ xi))


@dataclass
class EffectivePath:
    t: np.ndarray
    zeta: np.ndarray      # (n, 4) samples, radius slaved to the area level
    g: np.ndarray         # energy along the path
    zdot: np.ndarray      # (n, 4) projected base-point velocity
    interp: object = field(repr=False, default=None)
    _ea: object = field(repr=False, default=None)

    def at(self, t):
        """Base point at time t, radius slaved to the area level."""
        z = np.asarray(self.interp(t), dtype=float)
        r = self._ea.area_level_r(z, seeded=True)
        return np.concatenate(([r], z))


def run_effective(metric, zeta0, t_end, c=None, L=12, tol=1e-10, rtol=1e-8,
                  atol=1e-12):
    """Integrate the reduced center dynamics on the area level set.

    The center velocity is the frame projection of the constrained normal
    velocity at the equilibrium graph over the moving base point, obtained
    from the pairing conditions: the pairing derivative matrix is solved
    against the frame pairings of the graph velocity.  The radius is slaved
    to the area level; the radius component of the projected velocity is
    recorded as a consistency diagnostic.  Raises FlowError when the center
    leaves the admissible ball.
    """
    zeta0 = np.asarray(zeta0, dtype=float)
    z0 = zeta0[1:].copy()
    if c is None:
        sol0 = solve_LS(metric, zeta0[0], z0, L=L, tol=tol)
        c = area(GraphSurface(r=float(zeta0[0]), z=z0, c=sol0.phi, L=L), metric)
    ea = EffectiveAction(metric=metric, c=float(c), L=L, tol=tol)
    b = get_basis(L)
    n = n_coeffs(L)
    seed = {}
    memo = {}

    def fields(z):
        key = tuple(np.round(z, 13))
        hit = memo.get(key)
        if hit is not None:
            return hit
        r = ea.area_level_r(z, seeded=True)
        sol = ea._solve(r, z, seeded=True)
        dphi = _graph_derivative(metric, r, z, L, tol, sol, seed)
        C, ed = _frame_coeffs(metric, r, z, L, sol, dphi)
        s = GraphSurface(r=r, z=np.asarray(z, dtype=float), c=sol.phi, L=L)
        vf = velocity_fields(s, metric, ed=ed)
        w = C @ b.analyze(vf.graph_rate)
        phi = b.synthesize(sol.phi)
        arows = np.empty((4, n))
        arows[0] = b.analyze(-(1.0 + phi) / r) - dphi[0]
        for j in range(3):
            arows[1 + j] = b.analyze(-ed.v[..., j] / r) - dphi[1 + j]
        try:
            zd = -scipy.linalg.solve(C @ arows.T, w)
        except scipy.linalg.LinAlgError as exc:
            raise FlowError("singular pairing derivative along the path",
                            {"zeta": [r] + list(np.asarray(z))}) from exc
        out = (r, zd, 0.25 * ed.integrate(ed.H ** 2))
        memo[key] = out
        return out

    def rhs(t, z):
        return fields(z)[1][1:]

    def leave(t, z):
        return 0.9 - np.linalg.norm(z)
    leave.terminal = True

    out = scipy.integrate.solve_ivp(rhs, (0.0, float(t_end)), z0,
                                    method="RK45", rtol=rtol, atol=atol,
                                    dense_output=True, events=leave)
    if out.status == 1:
        raise FlowError("path left the admissible center ball",
                        {"time": float(out.t_events[0][0])})
    if not out.success:
        raise FlowError("reduced integration failed", {"message": out.message})
    m = out.t.size
    rs = np.empty(m)
    zd = np.empty((m, 4))
    gv = np.empty(m)
    for i in range(m):
        rs[i], zd[i], gv[i] = fields(out.y[:, i])
    return EffectivePath(t=out.t.copy(),
                         zeta=np.column_stack([rs, out.y.T]), g=gv, zdot=zd,
                         interp=out.sol, _ea=ea)


def _exponent(r_values, sups):
    """Log-log slope of a positive sweep; nan at the noise floor or for
    fewer than two radii."""
    sups = np.asarray(sups, dtype=float)
    if sups.size < 2 or not np.all(sups > 1e-14):
        return float("nan")
    x = np.log(np.asarray(r_values, dtype=float))
    y = np.log(sups)
    x = x - x.mean()
    return float(x @ (y - y.mean()) / (x @ x))


@dataclass
class AdiabaticReport:
    r_values: np.ndarray
    sup_xi: np.ndarray         # sup_{t >= T} fluctuation norm per radius
    sup_xi_late: np.ndarray    # same over the second half of the window
    sup_track: np.ndarray      # sup_{t >= T} barycenter gap to the reduced path
    sup_track_late: np.ndarray
    entry_time: np.ndarray     # first snapshot inside the admission tube
    xi_exponent: float         # log-log slope of the late fluctuation level
    track_exponent: float      # log-log slope of the late tracking gap
    runs: list = field(repr=False, default_factory=list)


def _compare_one(metric, r, z0, eps_r, window_factor, L, L_eff,
                 snapshot_every, step_tol, tol, tube_delta):
    """One radius of the sweep: bumped flow, reduced path, gap suprema."""
    r = float(r)
    z0a = np.asarray(z0, dtype=float)
    sol = solve_LS(metric, r, z0a, L=L, tol=tol)
    c0 = sol.phi.copy()
    c0[lm_index(2, 0)] += eps_r
    x0 = GraphSurface(r=r, z=z0a, c=c0, L=L)
    t_win = window_factor * r ** 4 / 24.0
    ts = run_acw(metric, x0, t_win, tol=step_tol,
                 snapshot_every=snapshot_every, with_lyapunov=False,
                 tube_delta=tube_delta, ptol=tol)
    ok = np.isfinite(ts.xi_h4)
    inside = ok & (ts.xi_h4 <= tube_delta)
    if not inside.any():
        raise FlowError("no snapshot entered the admission tube", {"r": r})
    iT = int(np.argmax(inside))
    T = ts.t[iT]
    path = run_effective(metric, ts.zeta[iT], t_win - T, c=ts.final.c,
                         L=L_eff, tol=tol)
    gaps = np.full(ts.t.size, np.nan)
    for i in range(iT, ts.t.size):
        if ok[i]:
            gaps[i] = np.max(np.abs(ts.zeta[i] - path.at(ts.t[i] - T)))
    late = ok & (ts.t >= T + 0.5 * (t_win - T))
    onward = ok & (ts.t >= T)
    return (float(np.max(ts.xi_h4[onward])), float(np.max(ts.xi_h4[late])),
            float(np.nanmax(np.where(onward, gaps, np.nan))),
            float(np.nanmax(np.where(late, gaps, np.nan))), float(T),
            (ts, path))


def compare_adiabatic(metric, r_values, z0=(0.3, 0.0, 0.0), eps=1e-3,
                      eps_power=3.0, window_factor=12.0, L=16, L_eff=12,
                      snapshot_every=20, step_tol=1e-7, tol=1e-10,
                      tube_delta=0.05, jobs=1):
    """Full flow against the reduced dynamics across a radius sweep.

    Each run starts at the equilibrium graph over (r, z0) plus a bump on
    the (2, 0) mode of size eps * (r / r_values[0])**(-eps_power), so the
    initial data family shrinks with the radius at the fluctuation scale.
    The window covers window_factor relaxation times of the slowest
    decaying mode; T is the first snapshot inside the admission tube and
    the reduced path starts from the barycenter there.  Suprema over the
    second half of the window are reported alongside the full ones.
    Radii are independent runs; jobs > 1 maps them over a thread pool with
    results collected in input order.
    """
    r_ref = float(r_values[0])
    args = [(metric, r, z0, eps * (float(r) / r_ref) ** (-eps_power),
             window_factor, L, L_eff, snapshot_every, step_tol, tol,
             tube_delta) for r in r_values]
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            rows = list(pool.map(lambda a: _compare_one(*a), args))
    else:
        rows = [_compare_one(*a) for a in args]
    sup_xi, sup_xi_late, sup_tr, sup_tr_late, entry, runs = map(list,
                                                                zip(*rows))
    return AdiabaticReport(r_values=np.asarray(r_values, dtype=float),
                           sup_xi=np.array(sup_xi),
                           sup_xi_late=np.array(sup_xi_late),
                           sup_track=np.array(sup_tr),
                           sup_track_late=np.array(sup_tr_late),
                           entry_time=np.array(entry),
                           xi_exponent=_exponent(r_values, sup_xi_late),
                           track_exponent=_exponent(r_values, sup_tr_late),
                           runs=runs)


@dataclass
class ShadowReport:
    t: np.ndarray
    gap: np.ndarray      # fluctuation norm of the flow about the reduced path
    sup_gap: float
    band: float          # allowed level; nan when not supplied
    ok: bool


def shadow(metric, zeta_T, window=None, c=None, band=None, L=16, L_eff=12,
           snapshot_every=5, step_tol=1e-7, tol=1e-10):
    """Short-window shadowing of the reduced path by the full flow.

    The flow starts exactly on the reduced manifold at zeta_T; at each
    snapshot the surface is resampled about the reduced base point and the
    fluctuation norm against the equilibrium graph there is the shadowing
    gap.  The window defaults to one radius of time.
    """
    zeta_T = np.asarray(zeta_T, dtype=float)
    r0 = float(zeta_T[0])
    zT = zeta_T[1:].copy()
    window = float(window) if window else r0
    b = get_basis(L)
    sol = solve_LS(metric, r0, zT, L=L, tol=tol)
    x_T = GraphSurface(r=r0, z=zT, c=sol.phi, L=L)
    if c is None:
        c = area(x_T, metric)
    path = run_effective(metric, zeta_T, window, c=c, L=L_eff, tol=tol)
    ts = run_acw(metric, x_T, window, c=c, tol=step_tol,
                 snapshot_every=snapshot_every, with_lyapunov=False,
                 project=False, dt_max=window / (4.0 * snapshot_every))
    seed = {}
    gaps = np.empty(ts.t.size)
    for i, st in enumerate(ts.snapshots):
        ze = path.at(ts.t[i])
        sol_e = _solve_graph(metric, ze[0], ze[1:], L, tol, seed)
        t_res = _radial_resample(st.surface, ze[1:], b)
        gaps[i] = sobolev_norm(b.analyze(t_res / ze[0] - 1.0) - sol_e.phi,
                               4, L)
    sup = float(np.max(gaps))
    return ShadowReport(t=ts.t, gap=gaps, sup_gap=sup,
                        band=float(band) if band is not None else float("nan"),
                        ok=bool(band is None or sup <= band))
