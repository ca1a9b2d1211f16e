"""Full-scale rehearsal of acceptance criteria 8, 9, 10 at L = 16."""
import json
import time

import numpy as np

from acwflow.flow import compare_adiabatic, run_acw, shadow
from acwflow.harmonics import lm_index
from acwflow.metric import make_metric
from acwflow.reduction import solve_LS
from acwflow.surface import GraphSurface

SCHW = make_metric("schwarzschild")
Z1 = np.array([0.3, 0.0, 0.0])
out = {}

# criterion 8: one projected flow at r = 100, L = 16
t0 = time.time()
sol = solve_LS(SCHW, 100.0, Z1, L=16)
c0 = sol.phi.copy()
c0[lm_index(2, 0)] += 1e-3
x0 = GraphSurface(r=100.0, z=Z1, c=c0, L=16)
ts = run_acw(SCHW, x0, 2.0 * 100.0 ** 4 / 24.0, tol=1e-6, ptol=1e-6,
             snapshot_every=40)
e = ts.energy
out["c8"] = {
    "wall_s": time.time() - t0,
    "rows": int(ts.t.size),
    "energy_first_last": [float(e[0]), float(e[-1])],
    "max_energy_rise": float(np.max(np.diff(e))),
    "min_hawking_step": float(np.min(np.diff(ts.hawking))),
    "max_area_dev": float(np.max(np.abs(ts.area / ts.area[0] - 1.0))),
    "lam_first_last": [float(ts.lam[0]), float(ts.lam[-1])],
    "lyap": [float(v) for v in ts.lyap],
    "lyap_argmax": int(np.argmax(ts.lyap)),
    "max_lyap_rise_after_peak": float(
        np.max(np.diff(ts.lyap[np.argmax(ts.lyap):]))
        if np.argmax(ts.lyap) < ts.lyap.size - 1 else 0.0),
    "xi_first_last": [float(ts.xi_h4[0]), float(ts.xi_h4[-1])],
    "zeta_first": [float(v) for v in ts.zeta[0]],
    "zeta_last": [float(v) for v in ts.zeta[-1]],
}
print("c8", json.dumps(out["c8"], indent=1), flush=True)

# criterion 9: sweep r in {50,100,200}, scaled initial data
t0 = time.time()
rep = compare_adiabatic(SCHW, [50.0, 100.0, 200.0], z0=Z1, eps=1e-3,
                        eps_power=3.0, window_factor=8.0, L=16, L_eff=12,
                        snapshot_every=25, step_tol=1e-6, tol=1e-10)
out["c9"] = {
    "wall_s": time.time() - t0,
    "sup_xi": [float(v) for v in rep.sup_xi],
    "sup_xi_late": [float(v) for v in rep.sup_xi_late],
    "sup_track": [float(v) for v in rep.sup_track],
    "sup_track_late": [float(v) for v in rep.sup_track_late],
    "entry_time": [float(v) for v in rep.entry_time],
    "xi_exponent": float(rep.xi_exponent),
    "track_exponent": float(rep.track_exponent),
}
print("c9", json.dumps(out["c9"], indent=1), flush=True)

# criterion 10: shadowing window at r = 100, band from the c9 level
t0 = time.time()
band = 10.0 * out["c9"]["sup_track"][1]
srep = shadow(SCHW, np.array([100.0, 0.2, 0.0, 0.0]), window=100.0,
              band=band, L=16, L_eff=12)
out["c10"] = {
    "wall_s": time.time() - t0,
    "sup_gap": float(srep.sup_gap),
    "band": float(srep.band),
    "ok": bool(srep.ok),
    "n": int(srep.t.size),
}
print("c10", json.dumps(out["c10"], indent=1), flush=True)

with open("/tmp/oracle_c8910.json", "w") as fh:
    json.dump(out, fh, indent=1)
print("done")
