"""Numerical lab for u_t = (u^(m-1) u_x)_x + u^p - u^q."""

__version__ = "0.1.0"
