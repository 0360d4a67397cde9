"""Numerical laboratory for thin Fuchsian groups, conformal densities,
and horocycle averages on the upper half plane."""

__version__ = "0.1.0"
