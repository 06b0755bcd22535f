"""Throwaway probe: erasure run shape of beta_R(t), W, Q, bounds."""
import time

import numpy as np

from landauer_bounds import (
    ErasureParams, build_erasure, initial_state, propagate,
    solve_beta_series, driven_bounds, von_neumann_entropy,
)

p = ErasureParams()
model = build_erasure(p)
rho0 = initial_state("gibbs", model.hamiltonian(0.0), beta=p.bath_beta)

t0 = time.time()
traj = propagate(model, rho0, p.tau, p.tau / 20000, 101)
t1 = time.time()
print(f"propagate: {t1-t0:.2f}s  steps={traj.n_steps}")
print("max step drift", traj.max_step_trace_drift, "min eig", traj.min_eigenvalues.min())

ent = [(float(t), von_neumann_entropy(r)) for t, r in zip(traj.times, traj.states)]
series = solve_beta_series(model.hamiltonian, ent)
t2 = time.time()
print(f"refsolve series: {t2-t1:.2f}s")
rows = driven_bounds(traj, model, series, bath_T=1.0 / p.bath_beta)
t3 = time.time()
print(f"bounds: {t3-t2:.2f}s")

beta = np.array([r.beta_R_t for r in rows])
print("beta_R(0) =", beta[0])
print("beta_R min/max:", beta.min(), beta.max(), " final:", beta[-1])
diffs = np.diff(beta)
print("non-decreasing?", bool((diffs >= -1e-6).all()), " worst diff:", diffs.min())
print("t at worst:", rows[int(np.argmin(diffs))].t)
k = np.linspace(0, len(rows) - 1, 11).astype(int)
print("t, S, beta_R, Q, W, lp, upper, gap, D, Coh")
for i in k:
    r = rows[i]
    print(f"{r.t:6.2f} {r.S:9.5f} {r.beta_R_t:9.5f} {r.Q:9.5f} {r.W:9.5f} "
          f"{r.lp_lower:9.5f} {r.upper:9.5f} {r.gap:.3e} {r.D_inst:.3e} {r.Coh:.4f}")
ok_lp = all(r.Q >= r.lp_lower - 1e-8 for r in rows)
ok_up = all(r.Q <= r.upper + 1e-6 for r in rows)
ok_id = max(abs(r.gap - r.D_inst) for r in rows if r.gap is not None)
e_s = np.array([r.E_S for r in rows])
bal = np.max(np.abs((e_s - e_s[0]) - (np.array([r.W for r in rows]) - np.array([r.Q for r in rows]))))
print("lp<=Q:", ok_lp, " Q<=upper:", ok_up, " max|gap-D|:", ok_id, " W(tau):", rows[-1].W,
      " max|dE-W+Q|:", bal)
coh = np.array([abs(r.dCoh) for r in rows])
print("max |dCoh|:", coh.max())
