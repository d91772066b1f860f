"""Exact symbolic engine for planar rational ODE systems with Painleve
transcendents in their coefficients: construction, birational transforms,
blow-up regularisation and differential verification."""

__version__ = "0.1.0"
