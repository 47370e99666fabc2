"""Weighted-curvature focusing, certificates, flows and Brans-Dicke cosmology on warped products."""

__version__ = "0.1.0"
