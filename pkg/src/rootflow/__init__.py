"""Zeroes of random polynomials under repeated differentiation.

Simulation of large-degree root dynamics, the predicted limiting radial
densities in the rotationally invariant complex case, and the
Cauchy-Stieltjes recovery pipeline for real-rooted polynomials.
"""

__version__ = "0.1.0"
