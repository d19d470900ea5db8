"""Periodic grid, scalar fields, spectral calculus and monotone interpolation.

Conventions used throughout the package:

* the domain is the unit torus, sampled at x_j = j/m with m a power of two;
* Fourier coefficients follow the integral convention
  ``c(n) = (1/m) sum_j f_j exp(-2 pi i n x_j)``, so a real field has
  ``c(-n) = conj(c(n))`` and we store the one-sided rfft layout;
* the discrete Sobolev norm of order s weights mode n by ``(1 + n^2)^s``;
* off-grid evaluation uses shape-preserving (Fritsch-Carlson limited)
  cubic Hermite interpolation, see :mod:`resetburgers._kernels`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidGridSize, NonFiniteSample

__all__ = [
    "PeriodicGrid",
    "ScalarField",
    "Spectrum",
    "make_grid",
    "sample",
    "field_from_values",
    "derivative",
    "norms",
    "mean",
    "interp_eval",
    "interp_tangents",
    "spectrum",
    "spectrum_to_field",
    "dealias_cutoff",
    "dealias",
    "write_field_csv",
    "read_field_csv",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid of m points on the unit torus, x_j = j*dx, dx = 1/m."""

    m: int

    @property
    def dx(self) -> float:
        return 1.0 / self.m

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.m) * self.dx


@dataclass(frozen=True)
class ScalarField:
    """Real samples of a periodic function on a :class:`PeriodicGrid`."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.m,):
            raise ValueError(f"expected {self.grid.m} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteSample("field contains NaN or Inf")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Spectrum:
    """One-sided Fourier coefficients c(n), n = 0..m/2, integral convention.

    Hermitian symmetry of the underlying two-sided spectrum is implied by the
    storage; the Nyquist slot is kept for Parseval but never carries content
    in dealiased states.
    """

    grid: PeriodicGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.m // 2 + 1,):
            raise ValueError("coefficient array has wrong length")
        object.__setattr__(self, "coeffs", c)


def make_grid(m: int) -> PeriodicGrid:
    """Grid constructor; m must be a power of two, at least 8."""
    if not isinstance(m, (int, np.integer)) or m < 8 or (m & (m - 1)) != 0:
        raise InvalidGridSize(f"m must be a power of two >= 8, got {m!r}")
    return PeriodicGrid(int(m))


def sample(f, grid: PeriodicGrid) -> ScalarField:
    """Sample a pointwise function on the grid points."""
    vals = np.array([float(f(x)) for x in grid.points])
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise NonFiniteSample(f"f(x_{bad}) = f({grid.points[bad]}) is not finite")
    return ScalarField(grid, vals)


def field_from_values(grid: PeriodicGrid, values) -> ScalarField:
    return ScalarField(grid, np.asarray(values, dtype=np.float64))


def _wavenumbers(m: int) -> np.ndarray:
    return np.arange(m // 2 + 1)


def spectrum(field: ScalarField) -> Spectrum:
    """Forward transform to integral-convention coefficients."""
    return Spectrum(field.grid, np.fft.rfft(field.values) / field.grid.m)


def spectrum_to_field(spec: Spectrum) -> ScalarField:
    m = spec.grid.m
    return ScalarField(spec.grid, np.fft.irfft(spec.coeffs * m, n=m))


def dealias_cutoff(m: int) -> int:
    """Highest wavenumber kept by the 2/3 rule."""
    return m // 3


def dealias(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Zero all modes above the 2/3-rule cutoff (returns a new array)."""
    out = coeffs.copy()
    out[dealias_cutoff(m) + 1 :] = 0.0
    return out


def derivative(field: ScalarField) -> ScalarField:
    """Spectral derivative; exact for trigonometric polynomials up to m/2 - 1.

    The Nyquist mode is dropped, as usual for odd-order spectral derivatives
    of real data.
    """
    m = field.grid.m
    c = np.fft.rfft(field.values)
    n = _wavenumbers(m)
    c *= 2j * np.pi * n
    c[-1] = 0.0
    return ScalarField(field.grid, np.fft.irfft(c, n=m))

def norms(field: ScalarField, s: int = 0) -> float:
    """Discrete H^s norm, ``(sum_n (1 + n^2)^s |c(n)|^2)^{1/2}``; s=0 is L2."""
    if not 0 <= s <= 8:
        raise ValueError("order s must be in 0..8")
    m = field.grid.m
    c = np.fft.rfft(field.values) / m
    n = _wavenumbers(m)
    mult = np.full(n.size, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0  # Nyquist appears once in the two-sided sum
    w = (1.0 + n.astype(np.float64) ** 2) ** s
    return float(np.sqrt(np.sum(mult * w * np.abs(c) ** 2)))


def mean(field: ScalarField) -> float:
    """Spatial mean (the conserved mass)."""
    return float(field.values.mean())


def interp_tangents(field: ScalarField) -> np.ndarray:
    """Limited Hermite tangents of the field (periodic)."""
    return _kernels.pchip_tangents(field.values, field.grid.dx, 0.0)


def interp_eval(field: ScalarField, x, tangents: np.ndarray | None = None):
    """Monotonicity-preserving periodic cubic Hermite evaluation.

    Reproduces grid values exactly and never overshoots the bracketing knot
    values.  ``x`` may be a scalar or an array; it is wrapped into [0, 1).
    Precomputed ``tangents`` may be passed to amortize repeated evaluation.
    """
    if tangents is None:
        tangents = interp_tangents(field)
    xq = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty(xq.size)
    _kernels.pchip_eval(field.values, tangents, field.grid.dx, xq.ravel(), out)
    out = out.reshape(xq.shape)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def write_field_csv(field: ScalarField, path) -> None:
    """Serialize as ``x,value`` rows with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for x, v in zip(field.grid.points, field.values):
            w.writerow([f"{x:.17g}", f"{v:.17g}"])


def read_field_csv(path) -> ScalarField:
    xs, vs = [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["x", "value"]:
            raise ValueError(f"unexpected header {header!r}")
        for row in r:
            xs.append(float(row[0]))
            vs.append(float(row[1]))
    grid = make_grid(len(vs))
    if not np.allclose(xs, grid.points, atol=1e-15):
        raise ValueError("grid points in file are not the uniform unit grid")
    return ScalarField(grid, np.asarray(vs))
