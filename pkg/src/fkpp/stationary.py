"""Stationary separatrix profiles E(x) of u_t = (u^(m-1) u_x)_x + u^p - u^q.

A stationary solution f satisfies

    (f^(m-2) f')^2 - 2 f^(m+q-2)/(m+q) + 2 f^(m+p-2)/(m+p) = 0,

and g = (m+q)/(m+p) f^(p-q) solves g' = -/+ k1 g^k2 sqrt(1-g) with g = 1 at
the maximum. Integrating from the maximum gives the implicit relation

    k1 |x - center| = Phi(g) = 2 sqrt(1-g) 2F1(1/2, k2; 3/2; 1-g),

which is inverted here by bracketed root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .model import ModelParams, ParameterError
from .specfun import beta_fn, hyp2f1_half

__all__ = [
    "RootFindingError",
    "OracleError",
    "Support",
    "StationaryProfile",
    "build_profile",
    "implicit_rhs",
    "explicit_g",
    "g_value",
    "E_value",
    "support_width",
    "stationary_residual",
    "OracleResult",
    "ode_oracle",
]

# Phi is summed from the hypergeometric series for g >= _G_SPLIT and from the
# expansion of the Euler integrand around h = 0 below it
_G_SPLIT = 0.25
_SPECIAL_K2 = (0.0, 0.5, 1.0, 1.5)
_EDGE_G = 1e-6


class RootFindingError(ArithmeticError):
    def __init__(self, msg: str, bracket: tuple[float, float]):
        super().__init__(f"{msg} (bracket {bracket})")
        self.bracket = bracket


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Support:
    kind: str  # "compact" | "full_line"
    half_width: float  # inf for full_line

    @property
    def compact(self) -> bool:
        return self.kind == "compact"


@dataclass(frozen=True)
class StationaryProfile:
    params: ModelParams
    k1: float
    k2: float
    f_max: float
    center: float
    support: Support

    @property
    def special_case(self) -> float | None:
        """The k2 value when an explicit formula exists, else None."""
        for k in _SPECIAL_K2:
            if abs(self.k2 - k) < 1e-12:
                return k
        return None

    def translated(self, center: float) -> "StationaryProfile":
        return StationaryProfile(self.params, self.k1, self.k2, self.f_max, float(center), self.support)

    def __call__(self, x):
        return E_value(self, x)


def profile_constants(params: ModelParams) -> tuple[float, float, float]:
    m, p, q = params.m, params.p, params.q
    ratio = (m + p) / (m + q)
    k1 = (p - q) * math.sqrt(2.0 / (m + q)) * ratio ** ((q - m) / (2.0 * (p - q)))
    k2 = 1.0 + (q - m) / (2.0 * (p - q))
    f_max = ratio ** (1.0 / (p - q))
    return k1, k2, f_max


def build_profile(params: ModelParams, center: float = 0.0) -> StationaryProfile:
    if not params.m + params.q > 0:
        raise ParameterError("stationary profiles need m + q > 0")
    k1, k2, f_max = profile_constants(params)
    if k2 < 1.0:
        support = Support("compact", beta_fn(1.0 - k2, 0.5).value / k1)
    else:
        support = Support("full_line", math.inf)
    return StationaryProfile(params, k1, k2, f_max, float(center), support)


def support_width(profile: StationaryProfile) -> float:
    """Full length of the support, (2/k1) B(1-k2, 1/2), or inf when k2 >= 1."""
    if profile.k2 >= 1.0:
        return math.inf
    return 2.0 / profile.k1 * beta_fn(1.0 - profile.k2, 0.5).value


def _tail_integral(k2: float, g: float, upper: float = _G_SPLIT) -> float:
    """int_g^upper h^(-k2) (1-h)^(-1/2) dh, expanding (1-h)^(-1/2) in powers of h."""
    total = 0.0
    c = 1.0
    for j in range(400):
        e = j + 1.0 - k2
        if abs(e) < 1e-14:
            piece = math.log(upper / g) if g > 0.0 else math.inf
        else:
            piece = (upper**e - (g**e if g > 0.0 else (0.0 if e > 0 else math.inf))) / e
        term = c * piece
        total += term
        if j > 2 and abs(term) <= 1e-17 * abs(total):
            return total
        c *= (j + 0.5) / (j + 1.0)
    return total


def implicit_rhs(k2: float, g: float) -> float:
    """Phi(g) = 2 sqrt(1-g) 2F1(1/2, k2; 3/2; 1-g) for 0 <= g <= 1."""
    if g >= _G_SPLIT:
        w = 1.0 - g
        return 2.0 * math.sqrt(w) * hyp2f1_half(k2, w).value
    return implicit_rhs(k2, _G_SPLIT) + _tail_integral(k2, g)


def explicit_g(k2: float, s):
    """Closed forms of g at scaled distance s = k1 |x - center| for special k2."""
    s = np.abs(np.asarray(s, dtype=float))
    if k2 == 0.0:
        return np.where(s < 2.0, 1.0 - (s / 2.0) ** 2, 0.0)
    if k2 == 0.5:
        return np.where(s < math.pi, (np.cos(s) + 1.0) / 2.0, 0.0)
    if k2 == 1.0:
        return 1.0 - np.tanh(s / 2.0) ** 2
    if k2 == 1.5:
        return 4.0 / (s**2 + 4.0)
    raise ValueError(f"no closed form for k2={k2}")


def _invert(k2: float, s: float, phi_edge: float) -> float:
    if s == 0.0:
        return 1.0
    if s >= phi_edge:
        return 0.0
    phi_split = implicit_rhs(k2, _G_SPLIT)
    if s <= phi_split:
        # near the maximum Phi ~ 2 sqrt(1-g): solve in w = sqrt(1-g)
        w_hi = math.sqrt(1.0 - _G_SPLIT)
        if s < w_hi and implicit_rhs(k2, 1.0 - s * s) >= s:
            w_hi = s
        try:
            w = optimize.brentq(
                lambda w: implicit_rhs(k2, 1.0 - w * w) - s,
                0.0,
                w_hi,
                xtol=1e-300,
                rtol=8.9e-16,
                maxiter=300,
            )
        except (ValueError, RuntimeError) as exc:
            raise RootFindingError(str(exc), (1.0 - w_hi * w_hi, 1.0)) from exc
        return 1.0 - w * w
    if k2 < 1.0:
        g_lo = 0.0
        if implicit_rhs(k2, 0.0) <= s:
            # within rounding of the edge given by the Beta function
            return 0.0
    else:
        g_lo = _G_SPLIT
        while implicit_rhs(k2, g_lo) < s:
            g_lo *= 1e-3
            if g_lo < 1e-300:
                raise RootFindingError(f"no bracket for k1|x|={s}", (0.0, _G_SPLIT))
    try:
        return optimize.brentq(
            lambda g: implicit_rhs(k2, g) - s, g_lo, _G_SPLIT, xtol=1e-300, rtol=8.9e-16, maxiter=300
        )
    except (ValueError, RuntimeError) as exc:
        raise RootFindingError(str(exc), (g_lo, _G_SPLIT)) from exc


def g_value(profile: StationaryProfile, x, method: str = "auto"):
    """g at x. ``method`` is "auto" (closed forms when available), "implicit" or "explicit"."""
    s = profile.k1 * np.abs(np.asarray(x, dtype=float) - profile.center)
    special = profile.special_case
    if method == "explicit" or (method == "auto" and special is not None):
        if special is None:
            raise ValueError(f"no closed form for k2={profile.k2}")
        out = explicit_g(special, s)
    elif method in ("auto", "implicit"):
        phi_edge = profile.k1 * profile.support.half_width
        flat = [_invert(profile.k2, float(si), phi_edge) for si in s.ravel()]
        out = np.asarray(flat, dtype=float).reshape(s.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.ndim(x) == 0:
        return float(out)
    return out


def _f_of_g(profile: StationaryProfile, g):
    prm = profile.params
    ratio = (prm.m + prm.p) / (prm.m + prm.q)
    return (ratio * np.asarray(g, dtype=float)) ** (1.0 / (prm.p - prm.q))


def E_value(profile: StationaryProfile, x, method: str = "auto"):
    """The stationary profile f(x) = ((m+p)/(m+q) g(x))^(1/(p-q))."""
    out = _f_of_g(profile, g_value(profile, x, method))
    if np.ndim(x) == 0:
        return float(out)
    return out


def stationary_residual(profile: StationaryProfile, x: float, method: str = "auto") -> float:
    """Defect of the first integral at x, with f' by a central difference."""
    x = float(x)
    h = max(1e-6, 1e-6 * abs(x))
    if profile.support.compact and abs(x - profile.center) + h >= profile.support.half_width:
        raise ValueError(f"x={x} is not strictly inside the support")
    f = E_value(profile, x, method)
    if not f > 0.0:
        raise ValueError(f"f(x) = 0 at x={x}")
    fp = (E_value(profile, x + h, method) - E_value(profile, x - h, method)) / (2.0 * h)
    m, p, q = profile.params.m, profile.params.p, profile.params.q
    return (f ** (m - 2.0) * fp) ** 2 - 2.0 * f ** (m + q - 2.0) / (m + q) + 2.0 * f ** (m + p - 2.0) / (m + p)


@dataclass(frozen=True)
class OracleResult:
    g: np.ndarray
    edge: float  # distance from the center to the support edge, inf if none


def _edge_distance(k1: float, k2: float, g: float) -> float:
    # x(g) measured from the edge, three terms of (1-h)^(-1/2) = 1 + h/2 + 3h^2/8 + ...
    return (
        g ** (1.0 - k2) / (1.0 - k2) + g ** (2.0 - k2) / (2.0 * (2.0 - k2)) + 3.0 * g ** (3.0 - k2) / (8.0 * (3.0 - k2))
    ) / k1


def ode_oracle(params: ModelParams, x_samples, center: float = 0.0) -> OracleResult:
    """g at ``x_samples`` by integrating g'' = k1^2 (k2 g^(2k2-1) (1-g) - g^(2k2)/2).

    The second-order form leaves the maximum g(center)=1, g'(center)=0
    uniquely, unlike the first-order equation. For compact profiles the
    integration stops at g = 1e-6, where the degenerate endpoint starts to
    spoil the first integral, and continues with the local expansion of the
    distance to the edge, d(g) ~ g^(1-k2) / (k1 (1-k2)).
    """
    k1, k2, _ = profile_constants(params)
    x = np.asarray(x_samples, dtype=float)
    s = np.abs(x - center)
    s_max = float(s.max()) if s.size else 0.0

    def rhs(_, y):
        g = max(y[0], 1e-300)
        return [y[1], k1 * k1 * (k2 * g ** (2.0 * k2 - 1.0) * (1.0 - g) - 0.5 * g ** (2.0 * k2))]

    events = None
    if k2 < 1.0:

        def edge_event(_, y):
            return y[0] - _EDGE_G

        def turn_event(_, y):
            return y[1]

        edge_event.terminal = True
        edge_event.direction = -1
        turn_event.terminal = True
        turn_event.direction = 1
        events = [edge_event, turn_event]

    sol = integrate.solve_ivp(
        rhs,
        (0.0, max(s_max, 1e-300)),
        [1.0, 0.0],
        method="DOP853",
        rtol=1e-13,
        atol=1e-16,
        dense_output=True,
        events=events,
        max_step=0.01 / k1 if k2 < 1.0 else math.inf,
    )
    if sol.status == -1:
        raise OracleError(f"integration failed near the degenerate endpoint: {sol.message}")

    edge = math.inf
    stop = s_max
    if k2 < 1.0 and sol.status == 1:
        if sol.t_events[1].size:
            raise OracleError("profile turned before reaching the edge layer; step too coarse")
        stop = float(sol.t_events[0][0])
        edge = stop + _edge_distance(k1, k2, _EDGE_G)
    g = np.empty_like(s)
    inside = s <= stop
    if np.any(inside):
        g[inside] = sol.sol(s[inside])[0]
    for i in np.flatnonzero(~inside):
        d = edge - s[i]
        if d <= 0.0:
            g[i] = 0.0
        else:
            g[i] = optimize.brentq(lambda h: _edge_distance(k1, k2, h) - d, 0.0, _EDGE_G, xtol=1e-300)
    return OracleResult(np.clip(g, 0.0, 1.0), edge)
