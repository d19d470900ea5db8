"""Monte Carlo experiment drivers and rate fitting.

Each experiment is a pure function of (spec, master seed): realizations get
their driver seeds from a SeedSequence spawn of the master seed, run as
independent tasks (optionally in a process pool), and are reduced in seed
order, so the thread count never changes any output byte.

Conventions shared by the rate experiments:

* coupled comparisons consume Brownian increments from one driver per
  realization, at the finest step; coarser effective steps are sums;
* realizations stopped by a shock are excluded from error means but always
  reported, so shocked + surviving = R;
* the fitted log-log slope is checked downstream against the predicted
  exponent as a lower bound on the decay (the theory proves upper bounds on
  the errors, so steeper observed decay passes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np

from .errors import DegenerateFit, InsufficientSurvivors, InvalidConfig
from .fields import field_from_values, norms
from .noise import NoiseDriver
from .particles import RunConfig, run
from .reference import (
    burgers_solve,
    inviscid_shock_time,
    spde_energy,
    spde_init,
    spde_v_step,
)

__all__ = [
    "ExperimentSpec",
    "RateFit",
    "ExperimentResult",
    "fit_loglog",
    "exp_rate_dt",
    "exp_rate_N",
    "exp_shock_census",
    "exp_survival",
    "exp_energy_law",
    "exp_spectral_decay",
    "EXPERIMENTS",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """Which experiment to run, on what base configuration, over what sweep."""

    kind: str
    base: RunConfig
    realizations: int = 64
    delta_t_list: tuple = ()
    n_list: tuple = ()
    coupled: bool = True
    threads: int = 1
    spde_dt: float = 1e-3          # time step for uncoupled SPDE-only runs

    def __post_init__(self):
        if self.realizations < 1:
            raise InvalidConfig("need at least one realization")
        if self.threads < 1:
            raise InvalidConfig("threads must be >= 1")
        if list(self.delta_t_list) != sorted(self.delta_t_list):
            raise InvalidConfig("delta_t sweep must be sorted ascending")
        if list(self.n_list) != sorted(self.n_list):
            raise InvalidConfig("N sweep must be sorted ascending")


@dataclass(frozen=True)
class RateFit:
    """Weighted least-squares line through (log x, log y)."""

    slope: float
    intercept: float
    residual: float
    n_points: int


@dataclass
class ExperimentResult:
    kind: str
    tables: dict            # name -> (columns, rows)
    summary: dict
    fit: RateFit | None = None


def fit_loglog(xs, ys, errs=None) -> RateFit:
    """Fit log y = slope * log x + intercept, weighting by relative errors.

    ``errs`` are per-point standard errors of y (optional).  Raises
    DegenerateFit for fewer than 3 points or nonpositive values.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 3:
        raise DegenerateFit(f"need >= 3 points, got {xs.size}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DegenerateFit("log-log fit needs strictly positive values")
    lx, ly = np.log(xs), np.log(ys)
    if errs is None:
        w = np.ones_like(ly)
    else:
        errs = np.asarray(errs, dtype=np.float64)
        rel = np.where(errs > 0, errs / ys, np.inf)
        floor = rel[np.isfinite(rel)].min() if np.any(np.isfinite(rel)) else 1.0
        w = 1.0 / np.maximum(rel, max(floor, 1e-12))
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    sol, *_ = np.linalg.lstsq(A * w[:, None], ly * w, rcond=None)
    resid = float(np.sqrt(np.mean((A @ sol - ly) ** 2)))
    return RateFit(float(sol[0]), float(sol[1]), resid, int(xs.size))


def _spawn_seed(master: int, tag: int, index: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(tag, index))
    return int(ss.generate_state(1, np.uint64)[0])


def _pmap(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with get_context("fork").Pool(processes=threads) as pool:
        return pool.map(fn, items, chunksize=1)


def _fraction_ci(k: int, n: int, z: float = 1.96) -> tuple[float, float, float]:
    """Wilson score interval for a binomial fraction."""
    if n == 0:
        return 0.0, 0.0, 1.0
    p = k / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return p, max(0.0, mid - half), min(1.0, mid + half)


# -- coupled delta_t rate (the resetting-interval convergence study) ---------

_TAG_RATE_DT = 1


def _rate_dt_one(args):
    spec, r = args
    base = spec.base
    seed = _spawn_seed(base.seed, _TAG_RATE_DT, r)
    driver = NoiseDriver(seed, base.n_copies, base.h)
    n_steps = base.n_steps
    # common-noise SPDE path at the finest step; pathwise-coupled runs share
    # the particle driver's Brownian paths, uncoupled ones draw fresh noise
    if spec.coupled:
        driver_v = driver
    else:
        driver_v = NoiseDriver(_spawn_seed(base.seed, _TAG_RATE_DT + 100, r),
                               base.n_copies, base.h)
    state = spde_init(base.u0, base.n_copies, base.nu)
    consumed = 0.0
    for k in range(n_steps):
        dxi = driver_v.aggregate(k, k + 1)
        consumed += dxi
        state = spde_v_step(state, dxi, base.h)
    if spec.coupled:
        checksum = driver.aggregate(0, n_steps)
        if consumed != checksum or driver_v.fingerprint() != driver.fingerprint():
            raise AssertionError("coupling checksum mismatch between v and driver")
    v_T = state.field()
    rows = []
    for dt in spec.delta_t_list:
        cfg = replace(base, delta_t=dt, seed=seed)
        rep = run(cfg, driver, record_every=0)
        if rep.shocked:
            rows.append((dt, r, seed, 0, math.nan, math.nan, rep.t_stop))
        else:
            diff = field_from_values(base.u0.grid, rep.u_final.values - v_T.values)
            rows.append((dt, r, seed, 1, norms(diff, 0) ** 2, norms(diff, 2) ** 2,
                         rep.t_stop))
    return rows


def exp_rate_dt(spec: ExperimentSpec) -> ExperimentResult:
    """Coupled comparison of the reset system to the limiting SPDE at T.

    For each delta_t in the sweep, estimates E||u^{dt}_T - v_T||^2 in L2 and
    H2 over R realizations sharing Brownian paths with v, and fits the
    log-log slope against delta_t.
    """
    base = spec.base
    if base.n_copies < 2:
        raise InvalidConfig("rate experiments need N >= 2")
    if spec.realizations < 16:
        raise InvalidConfig("rate fits need R >= 16")
    if len(spec.delta_t_list) < 1:
        raise InvalidConfig("empty delta_t sweep")
    for dt in spec.delta_t_list:
        replace(base, delta_t=dt)      # validates multiples
    per_real = _pmap(_rate_dt_one, [(spec, r) for r in range(spec.realizations)],
                     spec.threads)
    real_cols = ("delta_t", "realization", "seed", "survived", "err_l2_sq",
                 "err_h2_sq", "t_stop")
    real_rows = [row for rows in per_real for row in rows]
    agg_rows = []
    means, errs = [], []
    for dt in spec.delta_t_list:
        sel = [row for row in real_rows if row[0] == dt]
        surv = [row for row in sel if row[3] == 1]
        n_surv, n_shock = len(surv), len(sel) - len(surv)
        if n_surv < spec.realizations / 2:
            raise InsufficientSurvivors(
                f"delta_t={dt}: only {n_surv}/{spec.realizations} completed"
            )
        l2 = np.array([row[4] for row in surv])
        h2 = np.array([row[5] for row in surv])
        se_l2 = float(l2.std(ddof=1) / math.sqrt(n_surv)) if n_surv > 1 else 0.0
        agg_rows.append((dt, n_surv, n_shock, float(l2.mean()), se_l2,
                         float(h2.mean()),
                         float(h2.std(ddof=1) / math.sqrt(n_surv)) if n_surv > 1 else 0.0))
        means.append(float(l2.mean()))
        errs.append(se_l2)
    fit = None
    status = "ok"
    try:
        fit = fit_loglog(spec.delta_t_list, means, errs)
    except DegenerateFit:
        status = "degenerate"
    summary = {
        "kind": "rate_dt",
        "fit_status": status,
        "slope_l2": fit.slope if fit else None,
        "realizations": spec.realizations,
        "delta_t_list": list(spec.delta_t_list),
        "mean_err_l2_sq": means,
        "stderr_l2_sq": errs,
    }
    tables = {
        "realizations": (real_cols, real_rows),
        "rate_dt": (("delta_t", "n_survived", "n_shocked", "mean_err_l2_sq",
                     "stderr_l2_sq", "mean_err_h2_sq", "stderr_h2_sq"), agg_rows),
    }
    return ExperimentResult("rate_dt", tables, summary, fit)


# -- N -> infinity rate vs the deterministic limit ----------------------------

_TAG_RATE_N = 2


def _rate_n_one(args):
    spec, n_copies, r, sample_ks, ub_values = args
    base = spec.base
    seed = _spawn_seed(base.seed, _TAG_RATE_N, r * 1000 + n_copies)
    dt = spec.spde_dt
    driver = NoiseDriver(seed, n_copies, dt)
    state = spde_init(base.u0, n_copies, base.nu)
    errs = np.zeros(len(sample_ks))
    k = 0
    for i, ks in enumerate(sample_ks):
        while k < ks:
            state = spde_v_step(state, driver.aggregate(k, k + 1), dt)
            k += 1
        d = field_from_values(base.u0.grid, state.field().values - ub_values[i])
        errs[i] = norms(d, 0) ** 2
    return errs


def exp_rate_N(spec: ExperimentSpec) -> ExperimentResult:
    """sup_t E||u^b_t - v^N_t||_L2^2 against N; expected ~ C/N."""
    base = spec.base
    if len(spec.n_list) < 1:
        raise InvalidConfig("empty N sweep")
    if spec.realizations < 16:
        raise InvalidConfig("rate fits need R >= 16")
    n_times = 10
    sample_ks = sorted(
        {round(base.T * (i + 1) / n_times / spec.spde_dt) for i in range(n_times)}
    )
    sample_ks = [k for k in sample_ks if k > 0]
    sample_times = [k * spec.spde_dt for k in sample_ks]
    _, ub = burgers_solve(base.u0, base.nu, sample_times[-1], spec.spde_dt,
                          sample_times=sample_times)
    ub_values = [f.values for f in ub]
    rows = []
    sups, sup_errs = [], []
    for n_copies in spec.n_list:
        per = _pmap(
            _rate_n_one,
            [(spec, n_copies, r, sample_ks, ub_values)
             for r in range(spec.realizations)],
            spec.threads,
        )
        errs = np.stack(per)                       # (R, n_times)
        mean_t = errs.mean(axis=0)
        i_sup = int(np.argmax(mean_t))
        sup = float(mean_t[i_sup])
        se = float(errs[:, i_sup].std(ddof=1) / math.sqrt(errs.shape[0])) \
            if errs.shape[0] > 1 else 0.0
        rows.append((n_copies, sup, se, sample_times[i_sup]))
        sups.append(sup)
        sup_errs.append(se)
    fit = None
    status = "ok"
    try:
        fit = fit_loglog(spec.n_list, sups, sup_errs)
    except DegenerateFit:
        status = "degenerate"
    summary = {
        "kind": "rate_n",
        "fit_status": status,
        "slope": fit.slope if fit else None,
        "n_list": list(spec.n_list),
        "sup_err": sups,
        "stderr": sup_errs,
        "realizations": spec.realizations,
    }
    tables = {"rate_n": (("n_copies", "sup_mean_err_l2_sq", "stderr", "t_sup"), rows)}
    return ExperimentResult("rate_n", tables, summary, fit)


# -- shock census (no-reset mode) ---------------------------------------------

_TAG_CENSUS = 3


def _census_one(args):
    spec, n_copies, r = args
    base = spec.base
    seed = _spawn_seed(base.seed, _TAG_CENSUS, r * 1000 + n_copies)
    cfg = replace(base, n_copies=n_copies, delta_t=math.inf, seed=seed)
    rep = run(cfg, NoiseDriver(seed, n_copies, base.h), record_every=0)
    return (n_copies, r, seed, 1 if rep.shocked else 0, rep.t_stop)


def exp_shock_census(spec: ExperimentSpec) -> ExperimentResult:
    """Shock times of the no-reset system across N and seeds.

    Reports, per N, the fraction shocked before the theoretical bound
    N/||u0'||_inf, the shock-time quantiles, and their ratio to the inviscid
    crossing time.
    """
    base = spec.base
    t_inviscid = inviscid_shock_time(base.u0)
    slope_inf = 1.0 / t_inviscid
    rows = _pmap(
        _census_one,
        [(spec, n, r) for n in spec.n_list for r in range(spec.realizations)],
        spec.threads,
    )
    agg = []
    medians = {}
    for n in spec.n_list:
        times = [row[4] for row in rows if row[0] == n and row[3] == 1]
        shocked = len(times)
        bound = n / slope_inf
        before = sum(1 for t in times if t < bound)
        med = float(np.median(times)) if times else math.nan
        q25 = float(np.quantile(times, 0.25)) if times else math.nan
        q75 = float(np.quantile(times, 0.75)) if times else math.nan
        medians[n] = med
        agg.append((n, spec.realizations, shocked, before / spec.realizations,
                    bound, med, q25, q75,
                    med / t_inviscid if times else math.nan))
    summary = {
        "kind": "shock_census",
        "t_inviscid": t_inviscid,
        "n_list": list(spec.n_list),
        "medians": medians,
        "frac_before_bound": {row[0]: row[3] for row in agg},
        "realizations": spec.realizations,
    }
    tables = {
        "census_runs": (("n_copies", "realization", "seed", "shocked", "t_stop"),
                        rows),
        "census": (("n_copies", "runs", "shocked", "frac_before_bound", "bound",
                    "median", "q25", "q75", "median_over_inviscid"), agg),
    }
    return ExperimentResult("shock_census", tables, summary)


# -- survival under resetting -------------------------------------------------

_TAG_SURVIVAL = 4


def _survival_one(args):
    spec, dt, r = args
    base = spec.base
    seed = _spawn_seed(base.seed, _TAG_SURVIVAL, r)
    cfg = replace(base, delta_t=dt, seed=seed)
    rep = run(cfg, NoiseDriver(seed, base.n_copies, base.h), record_every=0)
    return (dt, r, seed, 0 if rep.shocked else 1, rep.t_stop)


def exp_survival(spec: ExperimentSpec) -> ExperimentResult:
    """Fraction of realizations reaching T without shock, per reset interval.

    The sweep may include inf for the no-reset arm; realization r uses the
    same driver seed across all arms, so arms are paired.
    """
    sweep = list(spec.delta_t_list)
    rows = _pmap(
        _survival_one,
        [(spec, dt, r) for dt in sweep for r in range(spec.realizations)],
        spec.threads,
    )
    agg = []
    fractions = {}
    for dt in sweep:
        k = sum(row[3] for row in rows if row[0] == dt)
        p, lo, hi = _fraction_ci(k, spec.realizations)
        fractions[dt] = p
        agg.append((dt, spec.realizations, k, p, lo, hi))
    summary = {
        "kind": "survival",
        "delta_t_list": sweep,
        "fractions": {str(k): v for k, v in fractions.items()},
        "realizations": spec.realizations,
        "note": "survival thresholds are calibration values; the theory "
                "proves existence of a small-enough delta_t, not constants",
    }
    tables = {
        "survival_runs": (("delta_t", "realization", "seed", "survived", "t_stop"),
                          rows),
        "survival": (("delta_t", "runs", "survived", "fraction", "ci_lo", "ci_hi"),
                     agg),
    }
    return ExperimentResult("survival", tables, summary)


# -- SPDE energy identity -------------------------------------------------------

_TAG_ENERGY = 5


def exp_energy_law(spec: ExperimentSpec) -> ExperimentResult:
    """Pathwise check of d||v||^2/dt = -2 nu (1 - 1/N) ||v_x||^2.

    Runs the SPDE once per N in the sweep with paired noise seeds and
    reports per-step residuals of the trapezoidal discrete identity plus the
    fitted dissipation coefficient.
    """
    base = spec.base
    dt = spec.spde_dt
    n_steps = round(base.T / dt)
    rows = []
    coeffs = {}
    for n_copies in (spec.n_list or (base.n_copies,)):
        seed = _spawn_seed(base.seed, _TAG_ENERGY, n_copies)
        driver = NoiseDriver(seed, n_copies, dt)
        state = spde_init(base.u0, n_copies, base.nu)
        e: float
        e, g = spde_energy(state)
        e0 = e
        max_res, cum_res, diss_int = 0.0, 0.0, 0.0
        monotone = True
        for k in range(n_steps):
            state = spde_v_step(state, driver.aggregate(k, k + 1), dt)
            e2, g2 = spde_energy(state)
            gbar = 0.5 * (g + g2)
            res = (e2 - e) + 2.0 * state.nu_eff * gbar * dt
            cum_res += res
            max_res = max(max_res, abs(res))
            diss_int += gbar * dt
            if e2 > e + 1e-10:
                monotone = False
            e, g = e2, g2
        c_hat = (e0 - e) / diss_int if diss_int > 0 else math.nan
        c_theory = 2.0 * state.nu_eff
        coeffs[n_copies] = c_hat
        rows.append((n_copies, seed, max_res, cum_res, abs(cum_res) / e0,
                     c_hat, c_theory, int(monotone)))
    summary = {
        "kind": "energy_law",
        "coefficients": {str(k): v for k, v in coeffs.items()},
        "rows": len(rows),
    }
    tables = {
        "energy": (("n_copies", "seed", "max_step_residual", "cum_residual",
                    "cum_residual_rel", "dissipation_fitted",
                    "dissipation_theory", "l2_monotone"), rows),
    }
    return ExperimentResult("energy_law", tables, summary)


# -- spectral tail decay --------------------------------------------------------

_TAG_DECAY = 6


def exp_spectral_decay(spec: ExperimentSpec) -> ExperimentResult:
    """sup_{t >= T/2} |v_hat(n)|^2 * n^2 over a band of wavenumbers."""
    base = spec.base
    dt = spec.spde_dt
    n_steps = round(base.T / dt)
    burn_in = base.T / 2.0
    seed = _spawn_seed(base.seed, _TAG_DECAY, 0)
    driver = NoiseDriver(seed, base.n_copies, dt)
    state = spde_init(base.u0, base.n_copies, base.nu)
    m = base.u0.grid.m
    n_hi = min(64, m // 3)
    sup = np.zeros(m // 2 + 1)
    for k in range(n_steps):
        state = spde_v_step(state, driver.aggregate(k, k + 1), dt)
        if state.t >= burn_in - 1e-12:
            sup = np.maximum(sup, np.abs(state.coeffs) ** 2)
    ns = np.arange(8, n_hi + 1)
    weighted = sup[ns] * ns.astype(np.float64) ** 2
    rows = [(int(n), float(sup[n]), float(w)) for n, w in zip(ns, weighted)]
    band = weighted[weighted > 0]
    summary = {
        "kind": "spectral_decay",
        "seed": seed,
        "n_range": [int(ns[0]), int(ns[-1])],
        "max_weighted": float(weighted.max()) if weighted.size else 0.0,
        "max_min_ratio": float(band.max() / band.min()) if band.size else math.nan,
    }
    tables = {"spectral_decay": (("n", "sup_sq", "sup_sq_times_n_sq"), rows)}
    return ExperimentResult("spectral_decay", tables, summary)


EXPERIMENTS = {
    "rate_dt": exp_rate_dt,
    "rate_n": exp_rate_N,
    "shock_census": exp_shock_census,
    "survival": exp_survival,
    "energy_law": exp_energy_law,
    "spectral_decay": exp_spectral_decay,
}
