"""Stochastic flow maps of the circle and their spatial inversion.

A flow map X and its inverse A are stored in displacement form (X - id and
A - id respectively, sampled on the uniform label/position grid).  The
displacement of a degree-1 circle map is periodic, so periodicity is exact by
construction and there is no cancellation near the seam.  Monotonicity of the
absolute map (discrete Jacobian > 0) is the regularity being tracked: losing
it is the shock.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NearSingularMap
from .fields import PeriodicGrid, ScalarField, interp_tangents

__all__ = [
    "CircleDiffeo",
    "InverseMap",
    "DEFAULT_EPS_JAC",
    "identity_map",
    "em_step",
    "min_jacobian",
    "invert",
    "map_eval",
    "batch_min_jacobian",
    "batch_invert",
    "write_map_csv",
]

# Below this Jacobian the inverse's derivative exceeds ~1/eps, which no grid
# we run (m <= 4096) can resolve; treat as a shock.
DEFAULT_EPS_JAC = 1e-3


@dataclass(frozen=True)
class CircleDiffeo:
    """Monotone circle map in displacement form: disp_j = X(a_j) - a_j."""

    grid: PeriodicGrid
    disp: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.disp, dtype=np.float64)
        if d.shape != (self.grid.m,):
            raise ValueError("displacement length does not match grid")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "disp", d)


@dataclass(frozen=True)
class InverseMap:
    """Inverse map in displacement form: disp_j = A(x_j) - x_j."""

    grid: PeriodicGrid
    disp: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.disp, dtype=np.float64)
        if d.shape != (self.grid.m,):
            raise ValueError("displacement length does not match grid")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "disp", d)


def identity_map(grid: PeriodicGrid) -> CircleDiffeo:
    return CircleDiffeo(grid, np.zeros(grid.m))


def min_jacobian(m: CircleDiffeo | InverseMap) -> float:
    """Min over cells of (X_{j+1} - X_j)/dx, with the +1 winding at the seam."""
    return float(batch_min_jacobian(m.disp[None, :], m.grid.dx)[0])


def batch_min_jacobian(disp: np.ndarray, dx: float) -> np.ndarray:
    """Per-row minimum discrete Jacobian for (rows, m) displacements."""
    jac = (np.roll(disp, -1, axis=-1) - disp) / dx + 1.0
    return jac.min(axis=-1)


def em_step(m: CircleDiffeo, u: ScalarField, h: float, dW: float,
            u_tangents: np.ndarray | None = None) -> CircleDiffeo:
    """One explicit Euler-Maruyama step: X <- X + h*u(X) + dW.

    The noise is spatially uniform (label-independent), so it is a rigid
    rotation of the circle; periodicity of the displacement is automatic.
    The drift uses the velocity frozen at the step start.  Monotonicity is
    not enforced here; a following min_jacobian check detects its loss.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    if u_tangents is None:
        u_tangents = interp_tangents(u)
    drift = np.empty((1, m.grid.m))
    _kernels.pchip_eval_offsets(u.values, u_tangents, u.grid.dx,
                                m.disp[None, :], drift)
    return CircleDiffeo(m.grid, m.disp + h * drift[0] + dW)


def invert(m: CircleDiffeo | InverseMap, eps_jac: float = DEFAULT_EPS_JAC):
    """Spatial inverse on the grid, in displacement form.

    For each output point the bracketing label cell of the monotone
    interpolant is located and the cubic solved to residual below 1e-12.
    Raises :class:`NearSingularMap` when the Jacobian is at or below
    ``eps_jac``, which is the shock signal.
    """
    ell = batch_invert(m.disp[None, :], m.grid.dx, eps_jac)[0]
    out_cls = InverseMap if isinstance(m, CircleDiffeo) else CircleDiffeo
    return out_cls(m.grid, ell)


def batch_invert(disp: np.ndarray, dx: float, eps_jac: float) -> np.ndarray:
    """Row-wise inversion of (rows, m) displacement maps."""
    mj = batch_min_jacobian(disp, dx)
    worst = float(mj.min())
    if worst <= eps_jac:
        raise NearSingularMap(worst, eps_jac)
    tang_x = _kernels.pchip_tangents_rows(np.ascontiguousarray(disp), dx, 1.0)
    ell = np.empty_like(disp)
    _kernels.invert_monotone_rows(np.ascontiguousarray(disp), tang_x, dx, ell)
    return ell


def map_eval(m: CircleDiffeo | InverseMap, x) -> np.ndarray | float:
    """Evaluate the monotone interpolant of the map at arbitrary points.

    Uses the same limited tangents as the inversion, so map_eval(invert(m))
    composes with m to the root-finder residual.
    """
    tang_x = _kernels.pchip_tangents(m.disp, m.grid.dx, 1.0)
    xq = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty(xq.size)
    # X(x) = x + Hermite(lambda) when the lambda-tangents are the X-tangents
    # minus the identity slope (Hermite is linear in its data)
    _kernels.pchip_eval(m.disp, tang_x - 1.0, m.grid.dx, xq.ravel(), out)
    out = out.reshape(xq.shape) + xq
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def write_map_csv(m: CircleDiffeo | InverseMap, path) -> None:
    """Per-epoch dump: ``a,lambda`` for flows, ``x,ell`` for inverses."""
    head = ["a", "lambda"] if isinstance(m, CircleDiffeo) else ["x", "ell"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for a, l in zip(m.grid.points, m.disp):
            w.writerow([f"{a:.17g}", f"{l:.17g}"])
