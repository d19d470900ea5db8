"""Desk-scale versions of the convergence and survival experiments.

Small R and coarse grids keep this under a minute; the acceptance suite runs
the full-size versions.  Everything is a pure function of the master seed.
"""

import math
import time

import numpy as np

from resetburgers import experiments as E
from resetburgers import fields as F
from resetburgers.particles import RunConfig

grid = F.make_grid(128)
u0 = F.sample(lambda x: np.sin(2 * np.pi * x) + 0.5 * np.cos(4 * np.pi * x), grid)

# -- resetting-interval rate: E||u^{dt}_T - v_T||^2 vs delta_t ----------------------

t0 = time.time()
base = RunConfig(u0=u0, n_copies=4, T=0.25, h=1 / 2048, delta_t=math.inf, seed=1)
spec = E.ExperimentSpec(kind="rate_dt", base=base, realizations=16,
                        delta_t_list=(1 / 64, 1 / 32, 1 / 16))
res = E.exp_rate_dt(spec)
print("coupled delta_t rate (R=16):")
for dt, mean, se in zip(spec.delta_t_list, res.summary["mean_err_l2_sq"],
                        res.summary["stderr_l2_sq"]):
    print(f"  delta_t={dt:.5f}: E||u-v||^2 = {mean:.3e} +- {se:.1e}")
print(f"  fitted slope {res.fit.slope:.2f} "
      f"(the theory guarantees decay at least like delta_t^0.5)")
print(f"  [{time.time() - t0:.0f} s]")

# -- N rate vs the deterministic solution -------------------------------------------

t0 = time.time()
base = RunConfig(u0=u0, n_copies=2, T=0.5, h=1e-3, seed=2)
spec = E.ExperimentSpec(kind="rate_n", base=base, realizations=24,
                        n_list=(2, 4, 8, 16), spde_dt=1e-3)
res = E.exp_rate_N(spec)
print("N rate (R=24):")
for n, sup in zip(spec.n_list, res.summary["sup_err"]):
    print(f"  N={n:2d}: sup_t E||u_b - v_N||^2 = {sup:.3e}")
print(f"  fitted slope {res.fit.slope:.2f} (C/N predicts -1)")
print(f"  [{time.time() - t0:.0f} s]")

# -- survival under resetting --------------------------------------------------------

t0 = time.time()
msin = F.sample(lambda x: -np.sin(2 * np.pi * x), F.make_grid(128))
base = RunConfig(u0=msin, n_copies=4, T=0.75, h=5e-4, delta_t=0.025, seed=3)
spec = E.ExperimentSpec(kind="survival", base=base, realizations=12,
                        delta_t_list=(0.025, 0.075, 0.25, math.inf))
res = E.exp_survival(spec)
print("survival to T=0.75 (R=12, N=4):")
for dt, frac in res.summary["fractions"].items():
    name = "no reset" if dt == "inf" else f"delta_t={dt}"
    print(f"  {name:16s}: {frac:.2f}")
print(f"  [{time.time() - t0:.0f} s]")
