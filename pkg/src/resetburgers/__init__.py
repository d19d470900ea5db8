"""Stochastic-Lagrangian particle lab for the viscous Burgers equation.

The package simulates the N-copy flow/inverse-flow particle system with and
without map resetting, the limiting common-noise SPDE, and deterministic
references, plus the Monte Carlo experiments that measure the predicted
convergence rates and shock statistics.
"""

__version__ = "0.1.0"
