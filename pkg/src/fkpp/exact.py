"""Separable solutions u = phi(t) theta(x).

Two families are available:

* ``"SG"``: m = p > 1, q = 1, with a cos^2 profile of support length
  L = 2 pi sqrt(m)/(m-1) and constant C0. It is stationary for C0 = 0,
  decays for C0 > 0 and blows up for C0 < 0.
* ``"SV"``: q = m, p = 1 with 0 < m < 1, with a sech^2 profile and constant C.
  It is stationary for C = 0, grows without bound for C < 0 and goes extinct
  for 0 < C < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import ModelParams, ParameterError

__all__ = [
    "SeparableSolution",
    "sg_phi",
    "sg_theta",
    "sg_support_length",
    "sg_blowup_time",
    "sv_phi",
    "sv_phi_simplified",
    "sv_theta",
    "sv_extinction_time",
    "event_time_bisection",
    "separable_residual",
]


def _check_sg(m: float) -> None:
    if not m > 1.0:
        raise ParameterError(f"SG family needs m > 1, got {m}")


def _check_sv(m: float) -> None:
    if not 0.0 < m < 1.0:
        raise ParameterError(f"SV family needs 0 < m < 1, got {m}")


def _sg_bracket(m, C0, t):
    return np.exp(-(m - 1.0) * t) / (m - 1.0) + C0


def sg_blowup_time(m: float, C0: float) -> float:
    """Finite blow-up time for C0 < 0, inf otherwise."""
    _check_sg(m)
    if C0 >= 0.0:
        return math.inf
    if C0 <= -1.0 / (m - 1.0):
        raise ParameterError("C0 <= -1/(m-1): bracket nonpositive at t = 0")
    return -math.log(-C0 * (m - 1.0)) / (m - 1.0)


def sg_phi(m: float, C0: float, t):
    _check_sg(m)
    bracket = _sg_bracket(m, C0, np.asarray(t, dtype=float))
    if np.any(bracket <= 0.0):
        raise ValueError(f"t is at or past the blow-up time {sg_blowup_time(m, C0)}")
    out = np.exp(-np.asarray(t, dtype=float)) * bracket ** (-1.0 / (m - 1.0))
    return float(out) if np.ndim(t) == 0 else out


def sg_support_length(m: float) -> float:
    _check_sg(m)
    return 2.0 * math.pi * math.sqrt(m) / (m - 1.0)


def sg_theta(m: float, x):
    L = sg_support_length(m)
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < L / 2.0
    c2 = np.cos(math.pi * x / L) ** 2
    out = np.where(inside, (2.0 * m / (m * m - 1.0) * c2) ** (1.0 / (m - 1.0)), 0.0)
    return float(out) if np.ndim(x) == 0 else out


def sv_extinction_time(m: float, C: float) -> float:
    """Extinction time log(C)/(m-1) for 0 < C < 1, inf otherwise."""
    _check_sv(m)
    if C >= 1.0:
        raise ParameterError("C >= 1: phi(0) would vanish")
    if C <= 0.0:
        return math.inf
    return math.log(C) / (m - 1.0)


def sv_phi(m: float, C: float, t):
    """phi(t) = e^t (e^(-(1-m) t) - C)^(1/(1-m))."""
    _check_sv(m)
    t = np.asarray(t, dtype=float)
    bracket = np.exp(-(1.0 - m) * t) - C
    if np.any(bracket < 0.0):
        raise ValueError(f"t is past the extinction time {sv_extinction_time(m, C)}")
    out = np.exp(t) * bracket ** (1.0 / (1.0 - m))
    return float(out) if np.ndim(t) == 0 else out


def sv_phi_simplified(m: float, C: float, t):
    """The same function written as (1 - C e^((1-m) t))^(1/(1-m))."""
    _check_sv(m)
    t = np.asarray(t, dtype=float)
    bracket = 1.0 - C * np.exp((1.0 - m) * t)
    if np.any(bracket < 0.0):
        raise ValueError(f"t is past the extinction time {sv_extinction_time(m, C)}")
    out = bracket ** (1.0 / (1.0 - m))
    return float(out) if np.ndim(t) == 0 else out


def sv_theta(m: float, x):
    _check_sv(m)
    k1 = (1.0 - m) / math.sqrt(m)
    x = np.asarray(x, dtype=float)
    sech2 = 1.0 / np.cosh(k1 * x / 2.0) ** 2
    out = ((m + 1.0) / (2.0 * m) * sech2) ** (1.0 / (1.0 - m))
    return float(out) if np.ndim(x) == 0 else out


def event_time_bisection(bracket, t_hi: float, tol: float = 1e-13) -> float:
    """Zero of a decreasing bracket function on [0, t_hi] by bisection."""
    return optimize.bisect(bracket, 0.0, t_hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class SeparableSolution:
    family: str  # "SG" | "SV"
    m: float
    constant: float

    def __post_init__(self) -> None:
        if self.family == "SG":
            _check_sg(self.m)
            sg_blowup_time(self.m, self.constant)
        elif self.family == "SV":
            _check_sv(self.m)
            sv_extinction_time(self.m, self.constant)
        else:
            raise ParameterError(f"unknown family {self.family!r}")

    @property
    def params(self) -> ModelParams:
        if self.family == "SG":
            return ModelParams(self.m, self.m, 1.0)
        return ModelParams(self.m, 1.0, self.m)

    @property
    def predicted(self) -> str:
        c = self.constant
        if c == 0.0:
            return "stationary"
        if self.family == "SG":
            return "blowup" if c < 0.0 else "vanishing"
        return "growth" if c < 0.0 else "extinction"

    @property
    def event_time(self) -> float:
        if self.family == "SG":
            return sg_blowup_time(self.m, self.constant)
        return sv_extinction_time(self.m, self.constant)

    @property
    def support_half_width(self) -> float:
        return sg_support_length(self.m) / 2.0 if self.family == "SG" else math.inf

    def phi(self, t):
        if self.family == "SG":
            return sg_phi(self.m, self.constant, t)
        return sv_phi(self.m, self.constant, t)

    def theta(self, x):
        if self.family == "SG":
            return sg_theta(self.m, x)
        return sv_theta(self.m, x)

    def __call__(self, x, t):
        return self.phi(t) * self.theta(x)


def separable_residual(solution: SeparableSolution, x: float, t: float, h: float = 1e-4) -> float:
    """u_t - (u^(m-1) u_x)_x - u^p + u^q at (x, t) by central differences.

    The flux term is evaluated as (1/m) (u^m)_xx.
    """
    prm = solution.params
    m = prm.m

    def u(xx, tt):
        return float(solution(xx, tt))

    u0 = u(x, t)
    ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h)
    um = [u(x - h, t) ** m, u0**m, u(x + h, t) ** m]
    diff = (um[0] - 2.0 * um[1] + um[2]) / (h * h) / m
    return ut - diff - u0**prm.p + u0**prm.q
