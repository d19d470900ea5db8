"""Independent low-level oracles used to freeze expected test values.

Nothing here shares code with the package's solvers: the finite-difference
Burgers integrator uses Crank-Nicolson diffusion with second-order upwind-free
central advection and Adams-Bashforth extrapolation, the convolution oracle
sums Fourier modes directly, and the characteristic-crossing search brute
forces pairs of labels.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu


def hs_norm_bruteforce(values: np.ndarray, s: int) -> float:
    """Discrete H^s norm by direct two-sided mode summation."""
    m = values.size
    c = np.fft.fft(values) / m
    n = np.fft.fftfreq(m, d=1.0 / m)
    w = (1.0 + n.astype(float) ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(c) ** 2)))


def convolution_bruteforce(values: np.ndarray) -> np.ndarray:
    """(u^2)^(n) for n >= 0 by the direct double sum over two-sided modes.

    O(m^2); use on small grids only.
    """
    m = values.size
    c = np.fft.fft(values) / m
    out = np.zeros(m // 2 + 1, dtype=np.complex128)
    idx = np.arange(m)
    for n in range(m // 2 + 1):
        acc = 0.0 + 0.0j
        for k in range(m):
            # two-sided indices wrap modulo m in the circular convolution
            acc += c[k] * c[(n - k) % m]
        out[n] = acc
    return out


def fd_burgers(u0_values: np.ndarray, nu: float, T: float, dt: float) -> np.ndarray:
    """Finite-difference viscous Burgers on the values' own periodic grid.

    Crank-Nicolson for nu*u_xx, explicit two-step Adams-Bashforth for the
    central-difference advection -u*u_x.  Unconditionally stable in the
    diffusion; dt must satisfy the advective CFL.
    """
    m = u0_values.size
    dx = 1.0 / m
    lap = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m), format="lil")
    lap[0, m - 1] = 1.0
    lap[m - 1, 0] = 1.0
    lap = (lap / dx**2).tocsc()
    eye = sp.identity(m, format="csc")
    lhs = splu((eye - 0.5 * dt * nu * lap).tocsc())
    rhs_m = (eye + 0.5 * dt * nu * lap).tocsc()

    def adv(u):
        return -u * (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)

    u = u0_values.astype(float).copy()
    n_steps = round(T / dt)
    f_prev = adv(u)
    # first step: plain Euler for the advection term
    u = lhs.solve(rhs_m @ u + dt * f_prev)
    for _ in range(n_steps - 1):
        f = adv(u)
        u = lhs.solve(rhs_m @ u + dt * (1.5 * f - 0.5 * f_prev))
        f_prev = f
    return u


def first_characteristic_crossing(u0, n_labels: int = 4000) -> float:
    """Brute-force first crossing time of inviscid characteristics.

    Scans all ordered pairs of labels a < b on a fine grid; the pair crosses
    at t = (b - a) / (u0(a) - u0(b)) when u0(a) > u0(b), with the periodic
    image pairs included.
    """
    a = np.linspace(0.0, 1.0, n_labels, endpoint=False)
    u = np.asarray([u0(x) for x in a])
    best = np.inf
    da = a[None, :] - a[:, None]
    da = np.where(da <= 0, da + 1.0, da)      # forward separation on the circle
    du = u[:, None] - u[None, :]              # u0(a) - u0(b)
    with np.errstate(divide="ignore"):
        t = np.where(du > 0, da / du, np.inf)
    np.fill_diagonal(t, np.inf)
    best = float(t.min())
    return best
