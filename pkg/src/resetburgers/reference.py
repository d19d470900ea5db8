"""Reference dynamics: deterministic viscous Burgers, its log-transform
closed-form oracle, the limiting common-noise SPDE, and inviscid
characteristics.

All solvers are pseudo-spectral on the unit torus with 2/3-rule dealiasing
and integral-convention coefficients c(n) (see :mod:`resetburgers.fields`).
The deterministic integrator treats diffusion exactly through an integrating
factor and the quadratic term with classical RK4 stages.

The SPDE for the common-noise limit v,

    dv + v vx dt - nu vxx dt + sqrt(2 nu) vx dxi = 0,
    xi = (1/N) sum_j W^j,

is integrated by an exact factorization: the spatially uniform transport
noise is a rigid shift of the torus, applied as the phase rotation
exp(-2 pi i n s) per step, and the Ito correction it carries
(nu/N * vxx dt) is absorbed by running the deterministic part at the reduced
viscosity nu * (1 - 1/N).  Because the Burgers flow commutes with rigid
shifts, this factorization has no splitting error; it is validated against a
literal Ito Euler-Maruyama scheme in :func:`ito_euler_spde`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CFLViolation, InvalidConfig, NonZeroMean, NoShock
from .fields import (
    PeriodicGrid,
    ScalarField,
    Spectrum,
    dealias_cutoff,
    mean,
    spectrum,
    spectrum_to_field,
)
from .noise import NoiseDriver

__all__ = [
    "SpectralState",
    "burgers_drift",
    "burgers_solve",
    "cole_hopf",
    "spde_init",
    "spde_v_step",
    "spde_v_shift_oracle",
    "ito_euler_spde",
    "inviscid_shock_time",
    "spde_energy",
    "write_spectrum_csv",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class SpectralState:
    """Dealiased one-sided spectrum of v (or u) plus solver parameters."""

    grid: PeriodicGrid
    coeffs: np.ndarray
    t: float
    nu: float
    n_copies: float    # may be math.inf for the deterministic limit

    @property
    def nu_eff(self) -> float:
        """Deterministic-part viscosity after absorbing the Ito correction."""
        if math.isinf(self.n_copies):
            return self.nu
        return self.nu * (1.0 - 1.0 / self.n_copies)

    def field(self) -> ScalarField:
        return spectrum_to_field(Spectrum(self.grid, self.coeffs))


def _modes(m: int) -> np.ndarray:
    return np.arange(m // 2 + 1, dtype=np.float64)


def _nonlinear_rhs(c: np.ndarray, m: int) -> np.ndarray:
    """Quadratic term -(u u_x)^ = -pi i n (u^2)^(n), dealiased."""
    u = np.fft.irfft(c * m, n=m)
    b = np.fft.rfft(u * u) / m
    b[dealias_cutoff(m) + 1 :] = 0.0
    return (-1j * np.pi) * _modes(m) * b


def burgers_drift(spec: Spectrum, nu: float = 0.5) -> Spectrum:
    """Time derivative of the spectrum under viscous Burgers dynamics.

    d c(n)/dt = -4 pi^2 n^2 nu c(n) - pi i n (c * c)(n), the convolution
    evaluated pseudo-spectrally with the 2/3 dealiasing rule.
    """
    m = spec.grid.m
    n = _modes(m)
    rhs = -4.0 * np.pi**2 * n**2 * nu * spec.coeffs + _nonlinear_rhs(spec.coeffs, m)
    return Spectrum(spec.grid, rhs)


def _check_cfl(c: np.ndarray, m: int, dt: float) -> None:
    # sum of |c| bounds sup|u|; advective stability needs dt*sup|u|*2*pi*K < 1
    amp = float(np.abs(c[0]) + 2.0 * np.abs(c[1:]).sum())
    if dt * amp * 2.0 * np.pi * dealias_cutoff(m) >= 1.0:
        raise CFLViolation(
            f"dt={dt} too large for amplitude {amp:.3g} at cutoff {dealias_cutoff(m)}"
        )


def _ifrk4_factors(m: int, nu: float, dt: float):
    lam = -4.0 * np.pi**2 * _modes(m) ** 2 * nu
    return np.exp(lam * dt), np.exp(lam * dt / 2.0)


def _ifrk4_step(c: np.ndarray, m: int, E: np.ndarray, E2: np.ndarray, dt: float):
    k1 = _nonlinear_rhs(c, m)
    k2 = _nonlinear_rhs(E2 * (c + 0.5 * dt * k1), m)
    k3 = _nonlinear_rhs(E2 * c + 0.5 * dt * k2, m)
    k4 = _nonlinear_rhs(E * c + dt * E2 * k3, m)
    return E * c + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def _project(u0: ScalarField) -> np.ndarray:
    c = spectrum(u0).coeffs.copy()
    c[dealias_cutoff(u0.grid.m) + 1 :] = 0.0
    return c


def burgers_solve(
    u0: ScalarField, nu: float, T: float, dt: float, sample_times=None
) -> tuple[np.ndarray, list[ScalarField]]:
    """Deterministic viscous Burgers solution, sampled at requested times.

    Returns (times, fields); times always end at T.  Sample times must be
    integer multiples of dt.
    """
    if nu <= 0 or dt <= 0 or T < 0:
        raise InvalidConfig("need nu > 0, dt > 0, T >= 0")
    m = u0.grid.m
    c = _project(u0)
    _check_cfl(c, m, dt)
    if sample_times is None:
        sample_times = [T]
    want = sorted(set(float(s) for s in sample_times) | {T})
    marks = []
    for s in want:
        k = round(s / dt)
        if abs(s - k * dt) > 1e-9 * max(dt, s):
            raise InvalidConfig(f"sample time {s} is not a multiple of dt={dt}")
        marks.append(k)
    n_steps = marks[-1]
    E, E2 = _ifrk4_factors(m, nu, dt)
    out_t, out_f = [], []
    mark = set(marks)
    if 0 in mark:
        out_t.append(0.0)
        out_f.append(spectrum_to_field(Spectrum(u0.grid, c)))
    for k in range(1, n_steps + 1):
        c = _ifrk4_step(c, m, E, E2, dt)
        if k in mark:
            out_t.append(k * dt)
            out_f.append(spectrum_to_field(Spectrum(u0.grid, c)))
    return np.asarray(out_t), out_f


def cole_hopf(u0: ScalarField, nu: float, t: float, x):
    """Closed-form viscous Burgers solution via the log transform.

    u = -2 nu d/dx log(phi) where phi solves the heat equation with initial
    data exp(-(1/2nu) int_0^x u0).  The potential's Fourier series is taken
    on a fine grid and truncated at relative magnitude 1e-16; the spatial
    derivative is applied term by term.  Requires mean-zero u0 (else the
    potential is not periodic).
    """
    if abs(mean(u0)) > 1e-12:
        raise NonZeroMean(f"mean(u0) = {mean(u0):.3e}")
    if nu <= 0:
        raise InvalidConfig("nu must be positive")
    if t < 0:
        raise InvalidConfig("t must be non-negative")
    # antiderivative of u0 with F(0) = 0, computed spectrally
    c0 = spectrum(u0).coeffs
    m_fine = max(4 * u0.grid.m, 1024)
    while True:
        n_f = np.arange(m_fine // 2 + 1, dtype=np.float64)
        cF = np.zeros(m_fine // 2 + 1, dtype=np.complex128)
        upto = min(c0.size, cF.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            cF[1:upto] = c0[1:upto] / (2j * np.pi * n_f[1:upto])
        F = np.fft.irfft(cF * m_fine, n=m_fine)
        F -= F[0]
        psi = np.exp(-F / (2.0 * nu))
        cpsi = np.fft.rfft(psi) / m_fine
        tail = np.abs(cpsi[-max(2, m_fine // 16) :]).max()
        if tail <= 1e-16 * np.abs(cpsi[0]) or m_fine >= 2**15:
            break
        m_fine *= 2
    decay = np.exp(-4.0 * np.pi**2 * n_f**2 * nu * t)
    terms = cpsi * decay
    keep = np.abs(terms) > 1e-16 * np.abs(terms[0])
    n_kept = n_f[keep]
    a_kept = terms[keep]
    xq = np.atleast_1d(np.asarray(x, dtype=np.float64))
    phase = np.exp(2j * np.pi * np.outer(xq, n_kept))
    mult = np.where(n_kept == 0, 1.0, 2.0)
    phi = (phase * (mult * a_kept)).real.sum(axis=1)
    dphi = (phase * (mult * 2j * np.pi * n_kept * a_kept)).real.sum(axis=1)
    out = -2.0 * nu * dphi / phi
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def spde_init(u0: ScalarField, n_copies: float, nu: float = 0.5) -> SpectralState:
    if not math.isinf(n_copies) and n_copies < 1:
        raise InvalidConfig("n_copies must be >= 1 (or inf)")
    return SpectralState(u0.grid, _project(u0), 0.0, nu, n_copies)


def spde_v_step(state: SpectralState, dxi: float, dt: float,
                nonlinear: bool = True) -> SpectralState:
    """One step of the common-noise SPDE.

    Deterministic Burgers dynamics at the reduced viscosity nu*(1 - 1/N)
    (integrating-factor RK4) followed by the exact transport of the step's
    noise, the phase rotation exp(-2 pi i n sqrt(2 nu) dxi).  Unconditionally
    stable in the noise; the advective CFL bound still applies.  With
    ``nonlinear=False`` the quadratic term is dropped and the deterministic
    part is the exact heat semigroup (diagnostic mode).
    """
    m = state.grid.m
    if nonlinear:
        _check_cfl(state.coeffs, m, dt)
        E, E2 = _ifrk4_factors(m, state.nu_eff, dt)
        c = _ifrk4_step(state.coeffs, m, E, E2, dt)
    else:
        E, _ = _ifrk4_factors(m, state.nu_eff, dt)
        c = E * state.coeffs
    shift = math.sqrt(2.0 * state.nu) * dxi
    c = c * np.exp(-2j * np.pi * _modes(m) * shift)
    return replace(state, coeffs=c, t=state.t + dt)


def spde_v_shift_oracle(
    u0: ScalarField,
    nu: float,
    n_copies: float,
    xi_t: float,
    t: float,
    dt_ref: float = 1e-4,
) -> ScalarField:
    """Shift representation of the SPDE solution: v_t(x) = w(t, x - s).

    w solves deterministic Burgers with viscosity nu*(1 - 1/N) and
    s = sqrt(2 nu) * xi_t is the accumulated common noise.  This is the
    independent closed form used to validate :func:`spde_v_step` and the
    Ito scheme; ``xi_t`` is the common-noise path value at time t.
    """
    nu_eff = nu * (1.0 - 1.0 / n_copies) if not math.isinf(n_copies) else nu
    _, fields = burgers_solve(u0, nu_eff, t, dt_ref)
    w = fields[-1]
    c = spectrum(w).coeffs
    m = u0.grid.m
    shift = math.sqrt(2.0 * nu) * xi_t
    c = c * np.exp(-2j * np.pi * _modes(m) * shift)
    return spectrum_to_field(Spectrum(u0.grid, c))


def ito_euler_spde(
    u0: ScalarField,
    nu: float,
    n_copies: int,
    driver: NoiseDriver,
    T: float,
    dt: float,
) -> ScalarField:
    """Literal Ito Euler-Maruyama simulation of the common-noise SPDE.

    The noise term enters exactly as written in the equation,
    c <- (1 - 2 pi i n sqrt(2 nu) dxi) c, with the FULL viscosity handled by
    an integrating factor and the quadratic term by explicit Euler.  Strong
    order 1/2; used as the independent oracle for the shift representation.
    Consumes common-noise increments from the driver at the finest step and
    sums them to the requested dt.
    """
    m = u0.grid.m
    c = _project(u0)
    _check_cfl(c, m, dt)
    n_steps = round(T / dt)
    if abs(n_steps * dt - T) > 1e-9 * T:
        raise InvalidConfig("T must be a multiple of dt")
    fine_per = round(dt / driver.base_step)
    if abs(fine_per * driver.base_step - dt) > 1e-9 * dt:
        raise InvalidConfig("dt must be a multiple of the driver base step")
    n = _modes(m)
    E = np.exp(-4.0 * np.pi**2 * n**2 * nu * dt)
    root = math.sqrt(2.0 * nu)
    for k in range(n_steps):
        dxi = driver.aggregate(k * fine_per, (k + 1) * fine_per)
        c = E * ((1.0 - 2j * np.pi * n * root * dxi) * c + dt * _nonlinear_rhs(c, m))
    return spectrum_to_field(Spectrum(u0.grid, c))


def inviscid_shock_time(u0: ScalarField) -> float:
    """First crossing time of inviscid characteristics, -1 / min u0'.

    The derivative is evaluated on an 8x zero-padded grid so the minimum is
    not limited to the sample points.  Raises NoShock for non-decreasing
    data.
    """
    m = u0.grid.m
    c = spectrum(u0).coeffs
    n = _modes(m)
    dc = 2j * np.pi * n * c
    dc[-1] = 0.0
    m_f = 8 * m
    fine = np.zeros(m_f // 2 + 1, dtype=np.complex128)
    fine[: dc.size] = dc
    slope = np.fft.irfft(fine * m_f, n=m_f)
    worst = float(slope.min())
    if worst >= -1e-12:
        raise NoShock("u0 is non-decreasing; characteristics never cross")
    return -1.0 / worst


def spde_energy(state: SpectralState) -> tuple[float, float]:
    """(||v||_L2^2, ||v_x||_L2^2) from the one-sided spectrum."""
    c = state.coeffs
    n = _modes(state.grid.m)
    mult = np.full(n.size, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0
    e = float(np.sum(mult * np.abs(c) ** 2))
    g = float(np.sum(mult * (2.0 * np.pi * n) ** 2 * np.abs(c) ** 2))
    return e, g


def write_spectrum_csv(spec: Spectrum, path) -> None:
    """Dump one-sided coefficients as ``n,re,im`` rows."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re", "im"])
        for n, c in enumerate(spec.coeffs):
            w.writerow([n, f"{c.real:.17g}", f"{c.imag:.17g}"])


def write_trajectory_csv(times, fields, path) -> None:
    """Dump a sampled trajectory as ``t,x,value`` rows."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "value"])
        for t, f in zip(times, fields):
            for x, v in zip(f.grid.points, f.values):
                w.writerow([f"{t:.17g}", f"{x:.17g}", f"{v:.17g}"])
