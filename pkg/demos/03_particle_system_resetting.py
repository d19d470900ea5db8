"""The N-copy particle system: shocks without resetting, survival with it.

Without resetting, the empirical-mean system loses invertibility in finite
time for decreasing data.  Resetting the maps to the identity every delta_t
(while freezing the current velocity as new initial data) keeps the same
realization alive over the full horizon.
"""

import numpy as np

from resetburgers import fields as F
from resetburgers.noise import NoiseDriver
from resetburgers.particles import RunConfig, run, split_reset_oracle

grid = F.make_grid(256)
u0 = F.sample(lambda x: -np.sin(2 * np.pi * x), grid)
h = 2.5e-4
seed = 3

# -- no-reset: the system shocks ---------------------------------------------------

cfg = RunConfig(u0=u0, n_copies=4, T=1.0, h=h, seed=seed)
rep = run(cfg, NoiseDriver(seed, 4, h), record_every=20)
print(f"no-reset N=4: {rep.stop} at t={rep.t_stop:.4f} "
      f"(inviscid crossing at {1 / (2 * np.pi):.4f})")
print(f"  last min Jacobian {rep.series['min_jac'][-1]:.2e}, "
      f"sup|u_x| grew to {rep.series['c1'].max():.1f}")

# -- same seed, resetting every 0.025 ----------------------------------------------

cfg = RunConfig(u0=u0, n_copies=4, T=1.0, h=h, delta_t=0.025, seed=seed)
rep = run(cfg, NoiseDriver(seed, 4, h), record_every=20)
print(f"reset delta_t=0.025: {rep.stop} at t={rep.t_stop:.2f} "
      f"after {rep.epochs} resets")
print(f"  ||u(T)||_L2 = {rep.series['l2'][-1]:.2e} "
      f"(energy decays: started at {rep.series['l2'][0]:.4f})")
print(f"  mass drift {abs(rep.series['mass'][-1] - rep.series['mass'][0]):.2e}")

# -- the resetting operator itself is not smoothing --------------------------------

# with the drift turned off the pipeline is pure resetting, whose closed
# form is the empirical mean of N rigid shifts; operator norm exactly one
f = F.sample(lambda x: np.sin(2 * np.pi * x) + 0.3 * np.cos(6 * np.pi * x), grid)
steps = 200
cfg = RunConfig(u0=f, n_copies=4, T=steps * h, h=h, seed=9, drift_enabled=False)
rep = run(cfg, NoiseDriver(9, 4, h), record_every=0)
oracle = split_reset_oracle(f, NoiseDriver(9, 4, h), steps)
print(f"drift-off pipeline vs closed form: "
      f"{np.abs(rep.u_final.values - oracle.values).max():.2e}")
print(f"sup|u| {np.abs(rep.u_final.values).max():.4f} <= sup|u0| "
      f"{np.abs(f.values).max():.4f} (norm-1 operator, no smoothing)")
