"""Declarative INI configuration for runs and experiments.

Schema (all keys optional; defaults in parentheses):

    [grid]
    m = 512                ; power of two >= 8 (512)

    [time]
    h = 1e-4               ; base step (1e-4)
    T = 1.0                ; horizon (1.0)
    delta_t = inf          ; reset interval, inf = no-reset (inf)

    [ensemble]
    n_copies = 4           ; (4)
    nu = 0.5               ; viscosity (0.5)
    eps_jac = 1e-3         ; shock threshold (1e-3)
    seed = 42              ; master seed (42)

    [initial_data]
    preset = msin          ; msin | sin | sincos | fourier (msin)
    amplitude = 1.0        ; (1.0)
    modes = 1:0,-0.5       ; fourier preset only: n:re,im pairs, ';'-separated

    [experiment]           ; presence switches parsing to an ExperimentSpec
    kind = rate_dt         ; rate_dt | rate_n | shock_census | survival |
                           ; energy_law | spectral_decay
    realizations = 64
    delta_t_list = 0.0625, 0.03125, 0.015625
    n_list = 2, 4, 8
    spde_dt = 1e-3
"""

from __future__ import annotations

import configparser
import math

import numpy as np

from .errors import (InvalidConfig, InvalidGridSize, NonFiniteSample,
                     ParseError, ValidationError)
from .experiments import EXPERIMENTS, ExperimentSpec
from .fields import Spectrum, make_grid, sample, spectrum_to_field
from .particles import RunConfig

__all__ = ["parse_config", "build_initial_data", "config_echo"]

_SECTIONS = {"grid", "time", "ensemble", "initial_data", "experiment"}
_KEYS = {
    "grid": {"m"},
    "time": {"h", "t", "delta_t"},
    "ensemble": {"n_copies", "nu", "eps_jac", "seed"},
    "initial_data": {"preset", "amplitude", "modes"},
    "experiment": {"kind", "realizations", "delta_t_list", "n_list", "spde_dt"},
}

PRESETS = ("msin", "sin", "sincos", "fourier")


def _get(cp, section, key, cast, default, *, raw=False):
    try:
        if not cp.has_option(section, key):
            return default
        text = cp.get(section, key)
        return text if raw else cast(text)
    except ValueError as e:
        raise ParseError(f"[{section}] {key}: {e}") from None


def _float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    return float(t)


def _float_list(text: str) -> tuple:
    items = [s for s in text.replace(";", ",").split(",") if s.strip()]
    return tuple(_float(s) for s in items)


def _int_list(text: str) -> tuple:
    return tuple(int(s) for s in text.split(",") if s.strip())


def build_initial_data(grid, preset: str, amplitude: float, modes: str = ""):
    """Sample one of the named initial-data presets on the grid."""
    if preset == "msin":
        return sample(lambda x: -amplitude * math.sin(2 * math.pi * x), grid)
    if preset == "sin":
        return sample(lambda x: amplitude * math.sin(2 * math.pi * x), grid)
    if preset == "sincos":
        return sample(
            lambda x: amplitude
            * (math.sin(2 * math.pi * x) + 0.5 * math.cos(4 * math.pi * x)),
            grid,
        )
    if preset == "fourier":
        coeffs = np.zeros(grid.m // 2 + 1, dtype=np.complex128)
        try:
            for item in modes.split(";"):
                if not item.strip():
                    continue
                n_txt, c_txt = item.split(":")
                re_txt, im_txt = c_txt.split(",")
                n = int(n_txt)
                if not 0 <= n <= grid.m // 3:
                    raise ValueError(f"mode {n} outside 0..{grid.m // 3}")
                coeffs[n] = complex(float(re_txt), float(im_txt))
        except ValueError as e:
            raise ParseError(f"[initial_data] modes: {e}") from None
        coeffs *= amplitude
        return spectrum_to_field(Spectrum(grid, coeffs))
    raise ParseError(f"[initial_data] preset: unknown preset {preset!r}; "
                     f"choose one of {PRESETS}")


def parse_config(text: str, seed_override=None, threads: int = 1):
    """Parse an INI document into a RunConfig or (with [experiment]) an
    ExperimentSpec.  An empty document yields the all-defaults RunConfig."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ParseError(str(e)) from None
    for sec in cp.sections():
        low = sec.lower()
        if low not in _SECTIONS:
            raise ParseError(f"unknown section [{sec}]")
        for key in cp.options(sec):
            if key.lower() not in _KEYS[low]:
                raise ParseError(f"unknown key {key!r} in section [{sec}]")

    m = _get(cp, "grid", "m", int, 512)
    h = _get(cp, "time", "h", _float, 1e-4)
    T = _get(cp, "time", "t", _float, 1.0)
    delta_t = _get(cp, "time", "delta_t", _float, math.inf)
    n_copies = _get(cp, "ensemble", "n_copies", int, 4)
    nu = _get(cp, "ensemble", "nu", _float, 0.5)
    eps_jac = _get(cp, "ensemble", "eps_jac", _float, 1e-3)
    seed = _get(cp, "ensemble", "seed", int, 42)
    if seed_override is not None:
        seed = int(seed_override)
    preset = _get(cp, "initial_data", "preset", str, "msin").strip().lower()
    amplitude = _get(cp, "initial_data", "amplitude", _float, 1.0)
    modes = _get(cp, "initial_data", "modes", str, "", raw=True)

    try:
        grid = make_grid(m)
        u0 = build_initial_data(grid, preset, amplitude, modes)
        base = RunConfig(
            u0=u0,
            n_copies=n_copies,
            T=T,
            h=h,
            delta_t=delta_t,
            nu=nu,
            eps_jac=eps_jac,
            seed=seed,
            label=f"{preset}:a={amplitude}",
        )
    except (InvalidConfig, InvalidGridSize, NonFiniteSample) as e:
        raise ValidationError(str(e)) from None

    if not cp.has_section("experiment"):
        return base

    kind = _get(cp, "experiment", "kind", str, "").strip().lower()
    if kind not in EXPERIMENTS:
        raise ValidationError(
            f"[experiment] kind must be one of {sorted(EXPERIMENTS)}, got {kind!r}"
        )
    try:
        return ExperimentSpec(
            kind=kind,
            base=base,
            realizations=_get(cp, "experiment", "realizations", int, 64),
            delta_t_list=_get(cp, "experiment", "delta_t_list", _float_list, ()),
            n_list=_get(cp, "experiment", "n_list", _int_list, ()),
            spde_dt=_get(cp, "experiment", "spde_dt", _float, 1e-3),
            threads=threads,
        )
    except InvalidConfig as e:
        raise ValidationError(str(e)) from None


def config_echo(obj) -> dict:
    """Manifest-friendly dictionary echo of a parsed config."""
    if isinstance(obj, ExperimentSpec):
        base = config_echo(obj.base)
        return {
            "experiment": obj.kind,
            "realizations": obj.realizations,
            "delta_t_list": list(obj.delta_t_list),
            "n_list": list(obj.n_list),
            "spde_dt": obj.spde_dt,
            "base": base,
        }
    return {
        "m": obj.m,
        "n_copies": obj.n_copies,
        "T": obj.T,
        "h": obj.h,
        "delta_t": obj.delta_t if math.isfinite(obj.delta_t) else "inf",
        "nu": obj.nu,
        "eps_jac": obj.eps_jac,
        "seed": obj.seed,
        "initial_data": obj.label,
    }
