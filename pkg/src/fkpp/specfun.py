"""The hypergeometric family 2F1(1/2, k2; 3/2; z) and the Beta function."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

__all__ = ["HypEvalReport", "BetaValue", "hyp2f1_half", "beta_fn", "SERIES_SWITCH"]

# power series below, Euler integral above
SERIES_SWITCH = 0.75
_MAX_TERMS = 20000


@dataclass(frozen=True)
class HypEvalReport:
    value: float
    terms_used: int
    method: str  # "series" | "quadrature"


def _series(k2: float, z: float) -> tuple[float, int]:
    # (1/2)_n / (3/2)_n = 1/(2n+1), so the sum is sum_n (k2)_n z^n / (n! (2n+1))
    total = 1.0
    coef = 1.0
    for n in range(1, _MAX_TERMS):
        coef *= (k2 + n - 1) * z / n
        term = coef / (2 * n + 1)
        total += term
        if coef == 0.0 or abs(term) <= 1e-17 * abs(total):
            return total, n + 1
    raise ArithmeticError(f"series did not converge for k2={k2}, z={z}")


def _quadrature(k2: float, z: float) -> tuple[float, int]:
    # Euler integral with t = s^2:  F = int_0^1 (1 - z s^2)^(-k2) ds.
    # With v = 1 - s, 1 - z s^2 = w + z v (2 - v), w = 1 - z exact for z >= 1/2;
    # the integrand peaks in a layer of width ~w at v = 0.
    w = 1.0 - z
    breaks = sorted({w * 10.0**k for k in range(0, 8) if w * 10.0**k < 1.0})
    edges = [0.0, *breaks, 1.0]
    total = 0.0
    evals = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        res = integrate.quad(
            lambda v: (w + z * v * (2.0 - v)) ** (-k2),
            lo,
            hi,
            epsabs=0.0,
            epsrel=2e-14,
            limit=200,
            full_output=1,
        )
        total += res[0]
        evals += res[2]["neval"]
    return total, evals


def hyp2f1_half(k2: float, z: float, method: str = "auto") -> HypEvalReport:
    """Evaluate 2F1(1/2, k2; 3/2; z) for 0 <= z < 1.

    ``method`` may force ``"series"`` or ``"quadrature"``; ``"auto"`` switches
    at ``SERIES_SWITCH``.
    """
    k2 = float(k2)
    z = float(z)
    if not 0.0 <= z:
        raise ValueError(f"z must be >= 0, got {z}")
    if z >= 1.0:
        if k2 >= 1.0:
            raise ValueError(f"2F1(1/2, {k2}; 3/2; z) diverges at z = 1")
        if z > 1.0:
            raise ValueError(f"z must be <= 1, got {z}")
        # Gauss sum: int_0^1 (1 - s^2)^(-k2) ds = B(1/2, 1 - k2) / 2
        return HypEvalReport(0.5 * beta_fn(0.5, 1.0 - k2).value, 1, "closed")
    if z == 0.0:
        return HypEvalReport(1.0, 1, "series")
    if method == "auto":
        method = "series" if z <= SERIES_SWITCH else "quadrature"
    if method == "series":
        value, n = _series(k2, z)
    elif method == "quadrature":
        value, n = _quadrature(k2, z)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not math.isfinite(value):
        raise ArithmeticError(f"non-finite 2F1 value for k2={k2}, z={z}")
    return HypEvalReport(value, max(n, 1), method)


@dataclass(frozen=True)
class BetaValue:
    value: float
    overflow: bool = False

    def __float__(self) -> float:
        return self.value


def beta_fn(a: float, b: float) -> BetaValue:
    """B(a, b) through log-Gamma; ``overflow`` flags an infinite result."""
    a = float(a)
    b = float(b)
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"Beta needs positive arguments, got ({a}, {b})")
    lb = special.betaln(a, b)
    if lb > 709.0:
        return BetaValue(math.inf, True)
    return BetaValue(math.exp(lb))
