"""Compiled kernels for monotone interpolation and circle-map inversion.

Everything here is deliberately scalar-looped and njit-compiled: the particle
stepper calls these thousands of times per run on small arrays, where numpy's
per-call overhead dominates.  All kernels are single-threaded and use strict
IEEE arithmetic so results are bit-reproducible regardless of process or
thread count.

Interpolation is shape-preserving cubic Hermite on a uniform periodic grid:
tangents start from a fourth-order centered estimate and are then limited in
the classical Fritsch-Carlson way (zero at secant sign changes, clamped to
three times the smaller adjacent secant).  The limited tangents keep every
cell's normalized derivatives inside [0, 3]^2, which is sufficient for
cell-wise monotonicity, so interpolated values never leave the range of the
two bracketing knots.

Positions are addressed relative to a base grid index wherever the ensemble
dynamics uses them: a query at point x_j + v is resolved as cell
(j + floor(v*m)) mod m with local coordinate frac(v*m), both of which are
exact float operations (m is a power of two).  Grid indices therefore never
enter floating-point sums, which makes every kernel exactly equivariant
under grid translations: rolling the input arrays rolls the outputs bit for
bit.  The map inversion works the same way in grid units, comparing only
shift-invariant (displacement, index difference) pairs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def pchip_tangents(y, dx, slope_offset):
    """Limited Hermite tangents for periodic samples ``y`` on spacing ``dx``.

    ``slope_offset`` is added to every secant and to the raw tangent
    estimate; circle maps stored in displacement form pass 1.0 here so the
    limiting acts on the monotone absolute map rather than the displacement.
    """
    m = y.size
    out = np.empty(m)
    for j in range(m):
        jm1 = j - 1 if j > 0 else m - 1
        jm2 = jm1 - 1 if jm1 > 0 else m - 1
        jp1 = j + 1 if j < m - 1 else 0
        jp2 = jp1 + 1 if jp1 < m - 1 else 0
        d0 = (y[j] - y[jm1]) / dx + slope_offset
        d1 = (y[jp1] - y[j]) / dx + slope_offset
        if d0 * d1 <= 0.0:
            out[j] = 0.0
        else:
            est = (8.0 * (y[jp1] - y[jm1]) - (y[jp2] - y[jm2])) / (12.0 * dx) \
                + slope_offset
            cap = abs(d0)
            if abs(d1) < cap:
                cap = abs(d1)
            cap *= 3.0
            if d1 > 0.0:
                out[j] = min(max(est, 0.0), cap)
            else:
                out[j] = max(min(est, 0.0), -cap)
    return out


@njit(cache=True)
def pchip_tangents_rows(y2, dx, slope_offset):
    """Row-wise :func:`pchip_tangents` for a (rows, m) array."""
    n, m = y2.shape
    out = np.empty((n, m))
    for i in range(n):
        out[i, :] = pchip_tangents(y2[i, :], dx, slope_offset)
    return out


@njit(cache=True, inline="always")
def _hermite(y0, dy, t0, t1, dx, t):
    omt = 1.0 - t
    h01 = t * t * (3.0 - 2.0 * t)
    h10 = t * omt * omt
    h11 = t * t * (t - 1.0)
    return y0 + dy * h01 + dx * (t0 * h10 + t1 * h11)


@njit(cache=True, inline="always")
def _eval_at_offset(y, tang, dx, m, j, v):
    """Interpolant of periodic ``y`` at x_j + v, addressed index-relative."""
    vm = v * m                      # exact: m is a power of two
    n = int(np.floor(vm))
    t = vm - n                      # exact fractional part
    c = (j + n) % m
    cp = c + 1
    if cp == m:
        cp = 0
    return _hermite(y[c], y[cp] - y[c], tang[c], tang[cp], dx, t)


@njit(cache=True)
def pchip_eval(y, tang, dx, queries, out):
    """Evaluate the periodic interpolant of ``y`` at absolute points."""
    m = y.size
    for i in range(queries.size):
        out[i] = _eval_at_offset(y, tang, dx, m, 0, queries[i])
    return out


@njit(cache=True)
def pchip_eval_offsets(y, tang, dx, offsets, out):
    """Evaluate at x_j + offsets[i, j] for every row i and column j."""
    m = y.size
    n = offsets.shape[0]
    for i in range(n):
        for j in range(m):
            out[i, j] = _eval_at_offset(y, tang, dx, m, j, offsets[i, j])
    return out


@njit(cache=True)
def em_step_rows(disp, u_vals, u_tang, dx, h, dW):
    """In-place Euler-Maruyama drift+noise update of all copies.

    disp[i, j] += h * u(a_j + disp[i, j]) + dW[i].  Same arithmetic, in the
    same order, as the single-map em_step composition.
    """
    n, m = disp.shape
    for i in range(n):
        for j in range(m):
            drift = _eval_at_offset(u_vals, u_tang, dx, m, j, disp[i, j])
            disp[i, j] = disp[i, j] + h * drift + dW[i]


@njit(cache=True)
def min_jac_rows(disp, dx):
    """Smallest discrete Jacobian over all copies and cells."""
    n, m = disp.shape
    best = np.inf
    for i in range(n):
        for j in range(m):
            jp = j + 1
            if jp == m:
                jp = 0
            jac = (disp[i, jp] - disp[i, j]) / dx + 1.0
            if jac < best:
                best = jac
    return best


@njit(cache=True)
def reconstruct_mean(anchor_vals, anchor_tang, ell, dx, out):
    """Empirical-mean velocity: out_j = (1/N) sum_i anchor(x_j + ell_ij)."""
    n, m = ell.shape
    for j in range(m):
        acc = 0.0
        for i in range(n):
            acc += _eval_at_offset(anchor_vals, anchor_tang, dx, m, j, ell[i, j])
        out[j] = acc / n
    return out


@njit(cache=True)
def invert_monotone_rows(disp, tang_x, dx, ell):
    """Invert circle maps given as displacement rows.

    Row i holds lambda_j = X(a_j) - a_j on labels a_j = j*dx; ``tang_x`` are
    the limited tangents of the absolute map X (slope_offset 1.0, which is
    also the slope in grid units).  For every output point x_j the winding
    and bracketing label cell are found by binary search over the extended
    knots in grid units, and the monotone cubic is solved for
    X(a) = x_j + winding to residual below 1e-13 grid cells.  Writes the
    inverse displacement ell_j = A(x_j) - x_j into ``ell``.

    Works entirely on (displacement, index-difference) pairs, so the output
    is exactly equivariant under grid translations of the input.

    Caller must ensure the maps are strictly monotone (min Jacobian > 0).
    """
    n, m = disp.shape
    tol = 1e-13 * m
    for i in range(n):
        mu_lo = np.inf
        mu_hi = -np.inf
        for j in range(m):
            v = disp[i, j] * m          # grid-unit displacement, exact scale
            if v < mu_lo:
                mu_lo = v
            if v > mu_hi:
                mu_hi = v
        for j in range(m):
            # extended knots G(c) = c + mu_{c mod m}; find the largest c with
            # G(c) <= j, i.e. mu_{c mod m} + (c - j) <= 0
            lo = j - int(np.floor(mu_hi)) - 2
            hi = j - int(np.floor(mu_lo)) + 2
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if disp[i, mid % m] * m + (mid - j) <= 0.0:
                    lo = mid
                else:
                    hi = mid
            c = lo
            cm = c % m
            cp = (c + 1) % m
            y0 = disp[i, cm] * m + (c - j)
            y1 = disp[i, cp] * m + (c + 1 - j)
            t0 = tang_x[i, cm]
            t1 = tang_x[i, cp]
            dy = y1 - y0
            # bracketed Halley iteration on the monotone cubic H(t) = 0
            blo = 0.0
            bhi = 1.0
            t = y0 / (y0 - y1) if y1 > y0 else 0.5
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            for _ in range(100):
                omt = 1.0 - t
                h01 = t * t * (3.0 - 2.0 * t)
                h10 = t * omt * omt
                h11 = t * t * (t - 1.0)
                r = y0 + dy * h01 + t0 * h10 + t1 * h11
                if abs(r) < tol:
                    break
                if r > 0.0:
                    bhi = t
                else:
                    blo = t
                hp = dy * 6.0 * t * omt \
                    + t0 * omt * (1.0 - 3.0 * t) + t1 * t * (3.0 * t - 2.0)
                hpp = dy * (6.0 - 12.0 * t) \
                    + t0 * (6.0 * t - 4.0) + t1 * (6.0 * t - 2.0)
                tn = 0.5 * (blo + bhi)
                if hp > 1e-14:
                    den = 2.0 * hp * hp - r * hpp
                    if abs(den) > 1e-300:
                        cand = t - 2.0 * r * hp / den
                        if blo < cand < bhi:
                            tn = cand
                t = tn
            ell[i, j] = ((c - j) + t) * dx
    return ell
