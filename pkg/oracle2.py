"""Scratch oracle: measured values for acceptance checks 1-7, 9-conv, 11."""
import json
import time

import numpy as np

from acwflow.action import EffectiveAction, expansion_check
from acwflow.barycenter import solve_barycenter
from acwflow.flow import run_effective
from acwflow.harmonics import get_basis, n_coeffs, sobolev_norm
from acwflow.metric import make_metric
from acwflow.reduction import (assemble_L, dPhi, frame_and_Q, pullback_Wbar,
                               solve_LS)
from acwflow.surface import GraphSurface, acw_velocity, area, willmore_energy

FLAT = make_metric("flat")
SCHW = make_metric("schwarzschild")
PERT = make_metric("perturbed", family="quad", eta=1e-2)
RS = np.array([50.0, 100.0, 200.0, 400.0])
Z1 = np.array([0.3, 0.0, 0.0])
out = {}


def fit_slope(r, v):
    x, y = np.log(np.asarray(r, float)), np.log(np.asarray(v))
    x = x - x.mean()
    return float(x @ (y - y.mean()) / (x @ x))


def emit(key, val):
    out[key] = val
    print(key, json.dumps(val), flush=True)


# c1
get_basis(8), get_basis(16)
t0 = time.time()
we = wv = 0.0
for L in (8, 16):
    for r in (5.0, 20.0, 100.0):
        for z in ((0.0, 0.0, 0.0), (0.2, -0.1, 0.3)):
            s = GraphSurface.round(r, z=z, L=L)
            we = max(we, abs(willmore_energy(s, FLAT) / (4 * np.pi) - 1))
            sp, _ = acw_velocity(s, FLAT)
            wv = max(wv, float(np.max(np.abs(sp))))
emit("c1", {"worst_e": we, "worst_v": wv, "wall": time.time() - t0})

# c2
t0 = time.time()
b = get_basis(16)
wb = 0.0
for r in RS[:3]:
    for z in (np.zeros(3), Z1):
        w = pullback_Wbar(SCHW, r, z, L=16)
        wb = max(wb, float(np.linalg.norm(b.analyze(w))))
phi_c = [float(np.linalg.norm(solve_LS(SCHW, r, np.zeros(3), L=16).phi))
         for r in RS[:3]]
phi_o = [float(np.linalg.norm(solve_LS(SCHW, r, Z1, L=16).phi))
         for r in RS[:3]]
emit("c2", {"wb_sup": wb, "phi_c": phi_c, "phi_o": phi_o,
            "wall": time.time() - t0})

# c3
t0 = time.time()
rep = expansion_check(SCHW, RS, [0.0], L=16)
emit("c3", {"slope": rep.slope, "wall": time.time() - t0})

# c4
t0 = time.time()
op = assemble_L(FLAT, 10.0, np.zeros(3), L=16)
ev = np.sort(op.eigenvalues())
kd = op.kernel_dim()
worst = 0.0
lo = 4
for l in (2, 3, 4):
    a = l * (l + 1) * (l * (l + 1) - 2) / 10.0 ** 4
    hi = lo + 2 * l + 1
    worst = max(worst, float(np.max(np.abs(ev[lo:hi] / a - 1.0))))
    lo = hi
emit("c4", {"kernel_dim": kd, "worst": worst, "wall": time.time() - t0})

# c5
t0 = time.time()
h4, dr = [], []
for r in RS:
    sol = solve_LS(PERT, r, np.zeros(3), L=16)
    h4.append(sobolev_norm(sol.phi, 4, 16))
    dr.append(sobolev_norm(dPhi(PERT, r, np.zeros(3), L=16)[0], 4, 16))
emit("c5", {"h4": h4, "dr": dr, "s1": fit_slope(RS, h4),
            "s2": fit_slope(RS, dr), "wall": time.time() - t0})

# c6
t0 = time.time()
gaps = []
for r in RS:
    fr = frame_and_Q(SCHW, r, Z1, L=16)
    P = np.zeros_like(fr.Q)
    P[:4, :4] = np.eye(4)
    gaps.append(float(np.linalg.norm(fr.Q - P, 2)))
emit("c6", {"gaps": gaps, "slope": fit_slope(RS, gaps),
            "wall": time.time() - t0})

# c7
t0 = time.time()
rng = np.random.default_rng(7)
n = n_coeffs(16)
worst = worst_q = 0.0
for _ in range(20):
    r = float(rng.uniform(8.0, 40.0))
    z = rng.uniform(-0.25, 0.25, size=3)
    xi = np.zeros(n)
    xi[4:] = rng.standard_normal(n - 4)
    xi *= rng.uniform(1e-4, 1e-3) / sobolev_norm(xi, 4, 16)
    res = solve_barycenter(FLAT, GraphSurface(r=r, z=z, c=xi, L=16))
    worst = max(worst, float(np.max(np.abs(res.zeta
                                           - np.concatenate(([r], z))))))
    fr = frame_and_Q(FLAT, r, z, L=16)
    worst_q = max(worst_q, float(np.linalg.norm(fr.Q @ xi)))
emit("c7", {"worst": worst, "worst_q": worst_q, "wall": time.time() - t0})

# c9 convergence exhibit (stand-in IC at sweep scale)
t0 = time.time()
sol = solve_LS(SCHW, 50.0, Z1, L=16)
s0 = GraphSurface(r=50.0, z=Z1, c=sol.phi, L=16)
level = float(area(s0, SCHW))
path = run_effective(SCHW, np.array([50.0, 0.3, 0.0, 0.0]), 8e8,
                     c=level, L=8)
zn = np.linalg.norm(path.zeta[:, 1:], axis=1)
r_star = EffectiveAction(metric=SCHW, c=level, L=8).area_level_r(np.zeros(3))
emit("c9conv", {"level": level, "zn0": float(zn[0]), "znT": float(zn[-1]),
                "ratio": float(zn[-1] / zn[0]),
                "max_zn_rise": float(np.max(np.diff(zn))),
                "rT": float(path.zeta[-1, 0]), "r_star": float(r_star),
                "rel": float(abs(path.zeta[-1, 0] / r_star - 1.0)),
                "wall": time.time() - t0})

# c11
t0 = time.time()
ea_s = EffectiveAction(metric=SCHW, c=30000.0, L=12)
cp_s = ea_s.find_critical(np.array([0.15, -0.12, 0.08]))
ea_p = EffectiveAction(metric=PERT, c=30000.0, L=12)
cp_p = ea_p.find_critical(np.array([0.2, -0.15, 0.1]))
rng = np.random.default_rng(11)
ratios = []
for _ in range(5):
    z = rng.uniform(-0.3, 0.3, size=3)
    ratios.append(float(ea_p.pairing_check(z).ratio))
emit("c11", {"res_s": float(cp_s.residual), "res_p": float(cp_p.residual),
             "z_s": [float(v) for v in cp_s.zeta[1:]], "ratios": ratios,
             "wall": time.time() - t0})

with open("/tmp/oracle2.json", "w") as f:
    json.dump(out, f, indent=1)
print("done", flush=True)
