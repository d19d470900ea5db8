"""Reproducible Wiener increments for the N-copy particle system.

Each (copy, step) increment is a pure function of (master_seed, copy, step),
independent of query order, thread count, or which solver consumes it.  This
is what makes pathwise-coupled comparisons between the particle system and
the limiting SPDE meaningful: both sides read the same Brownian paths from
one driver at the finest step, and coarser effective steps are formed by
summation.

Generation algorithm (documented for cross-platform reproducibility): the
stream for (copy i, block b) is ``Philox`` keyed by
``SeedSequence(master_seed, spawn_key=(i, b))``; blocks hold 1024 steps.
Uniform doubles come from ``Generator.random`` (53-bit), shifted by 2^-54 to
keep them strictly inside (0, 1), and are mapped to standard normals through
the inverse CDF (``scipy.special.ndtri``), then scaled by sqrt(h).
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import InvalidConfig

__all__ = ["NoiseDriver", "new_driver", "common_path"]

_BLOCK = 1024


class NoiseDriver:
    """Addressable per-(copy, step) Gaussian increments of variance h."""

    def __init__(self, master_seed: int, n_copies: int, base_step: float):
        if n_copies < 1:
            raise InvalidConfig(f"need at least one copy, got {n_copies}")
        if not (base_step > 0.0):
            raise InvalidConfig(f"base step must be positive, got {base_step}")
        if master_seed < 0:
            raise InvalidConfig("master seed must be a non-negative integer")
        self.master_seed = int(master_seed)
        self.n_copies = int(n_copies)
        self.base_step = float(base_step)
        self._scale = float(np.sqrt(base_step))
        self._blocks: dict[tuple[int, int], np.ndarray] = {}

    # deterministic block generation; cache is value-deterministic, so a
    # concurrent recompute is benign
    def _block(self, copy: int, b: int) -> np.ndarray:
        key = (copy, b)
        blk = self._blocks.get(key)
        if blk is None:
            ss = np.random.SeedSequence(self.master_seed, spawn_key=(copy, b))
            gen = np.random.Generator(np.random.Philox(ss))
            u = gen.random(_BLOCK) + 2.0 ** -54
            blk = ndtri(u) * self._scale
            blk.setflags(write=False)
            self._blocks[key] = blk
        return blk

    def increment(self, copy: int, step: int) -> float:
        """Single increment W^copy over [step*h, (step+1)*h)."""
        if step < 0 or not 0 <= copy < self.n_copies:
            raise InvalidConfig(f"bad stream address ({copy}, {step})")
        return float(self._block(copy, step // _BLOCK)[step % _BLOCK])

    def increments(self, step: int) -> np.ndarray:
        """All N increments for one step, shape (n_copies,)."""
        if step < 0:
            raise InvalidConfig(f"step index must be >= 0, got {step}")
        b, o = divmod(step, _BLOCK)
        return np.array([self._block(i, b)[o] for i in range(self.n_copies)])

    def increments_span(self, copy: int, start: int, stop: int) -> np.ndarray:
        """Increments of one copy for steps start..stop-1 (vectorized)."""
        if stop < start or start < 0:
            raise InvalidConfig(f"bad step range [{start}, {stop})")
        parts = []
        k = start
        while k < stop:
            b, o = divmod(k, _BLOCK)
            take = min(stop - k, _BLOCK - o)
            parts.append(self._block(copy, b)[o : o + take])
            k += take
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)

    def aggregate(self, start: int, stop: int) -> float:
        """Common-noise increment over a step range: sum of per-step means.

        The sum runs left to right (cumsum), so aggregating a range equals
        summing the per-step aggregates exactly, bit for bit.
        """
        if stop <= start:
            return 0.0
        cols = np.stack(
            [self.increments_span(i, start, stop) for i in range(self.n_copies)]
        )
        a = cols.mean(axis=0)
        return float(np.cumsum(a)[-1])

    def step_aggregates(self, start: int, stop: int) -> np.ndarray:
        """Per-step common-noise increments for steps start..stop-1."""
        cols = np.stack(
            [self.increments_span(i, start, stop) for i in range(self.n_copies)]
        )
        return cols.mean(axis=0)

    def fingerprint(self) -> tuple:
        """Identity of the stream family, for coupling assertions."""
        return (self.master_seed, self.n_copies, self.base_step)


def new_driver(seed: int, n_copies: int, h: float) -> NoiseDriver:
    return NoiseDriver(seed, n_copies, h)


def common_path(driver: NoiseDriver, n_steps: int) -> np.ndarray:
    """Cumulative common noise xi_t = (1/N) sum_j W^j at step boundaries.

    Returns n_steps + 1 values with xi_0 = 0; increments over one step equal
    the mean of that step's per-copy increments.
    """
    xi = np.zeros(n_steps + 1)
    if n_steps > 0:
        xi[1:] = np.cumsum(driver.step_aggregates(0, n_steps))
    return xi
