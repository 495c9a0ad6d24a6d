"""Parameter records, the canonical rescaling, the reaction term and run outcomes.

The canonical equation is

    u_t = (u^(m-1) u_x)_x + u^p - u^q,   p > q > 0, m > 0,

obtained from u_t = kappa (u^(m-1) u_x)_x + alpha u^p - beta u^q by scaling
x, t and u.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParameterError",
    "ModelParams",
    "RawParams",
    "ScalingFactors",
    "rescale_to_canonical",
    "restore_raw",
    "reaction",
    "OutcomeKind",
    "Outcome",
    "Thresholds",
    "classify_trajectory",
]


class ParameterError(ValueError):
    """Raised for parameter sets outside the supported regime."""


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Exponents of the canonical equation.

    ``m`` is the diffusion exponent, ``p`` the source exponent and ``q`` the
    sink exponent. Only the regime ``p > q > 0``, ``m > 0`` is accepted.
    """

    m: float
    p: float
    q: float

    def __post_init__(self) -> None:
        for name in ("m", "p", "q"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        if not self.p > self.q:
            raise ParameterError(f"need p > q, got p={self.p}, q={self.q}")
        if not self.m + self.q > 0:  # implied by the checks above
            raise ParameterError("need m + q > 0")

    @property
    def degenerate(self) -> bool:
        """True for slow (degenerate) diffusion, m > 1."""
        return self.m > 1.0

    @property
    def compact_support(self) -> bool:
        return self.m > self.q

    @property
    def separatrix_hypotheses(self) -> bool:
        """p >= m > q, p >= 1, q <= 1: the stationary profile separates outcomes."""
        return self.p >= self.m > self.q and self.p >= 1.0 and self.q <= 1.0

    @property
    def blowup_hypotheses(self) -> bool:
        """p > 1: self-similar blow-up subsolutions exist."""
        return self.p > 1.0

    def as_dict(self) -> dict:
        return {"m": self.m, "p": self.p, "q": self.q}


@dataclass(frozen=True)
class RawParams:
    """Coefficients of the unscaled equation."""

    alpha: float
    beta: float
    kappa: float
    m: float
    p: float
    q: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "kappa", "m"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))


@dataclass(frozen=True)
class ScalingFactors:
    a: float  # space
    b: float  # time
    l: float  # amplitude  # noqa: E741


def rescale_to_canonical(raw: RawParams) -> ScalingFactors:
    """Scaling factors (x -> a x, t -> b t, u -> l u) that remove alpha, beta, kappa."""
    if raw.p == raw.q:
        raise ParameterError("p == q: amplitude scale undefined")
    l = (raw.beta / raw.alpha) ** (1.0 / (raw.p - raw.q))  # noqa: E741
    b = l ** (1.0 - raw.p) / raw.alpha
    a = math.sqrt(raw.kappa * l ** (raw.m - raw.p) / raw.alpha)
    return ScalingFactors(a=a, b=b, l=l)


def restore_raw(scale: ScalingFactors, m: float, p: float, q: float) -> RawParams:
    """Inverse of :func:`rescale_to_canonical` for fixed exponents."""
    alpha = scale.l ** (1.0 - p) / scale.b
    beta = alpha * scale.l ** (p - q)
    kappa = scale.a**2 * alpha / scale.l ** (m - p)
    return RawParams(alpha=alpha, beta=beta, kappa=kappa, m=m, p=p, q=q)


def reaction(u, params: ModelParams):
    """u^p - u^q, extended by 0 at u = 0. Accepts scalars or arrays."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise ValueError("reaction is defined for u >= 0 only")
    with np.errstate(divide="ignore"):
        out = np.where(arr > 0.0, arr**params.p - arr**params.q, 0.0)
    if np.ndim(u) == 0:
        return float(out)
    return out


class OutcomeKind(str, enum.Enum):
    BLOWUP = "blowup"
    EXTINCTION = "extinction"
    GROWTH = "growth"
    VANISHING = "vanishing"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    t_event: float | None = None
    t_end: float | None = None
    final_norm: float | None = None

    def __post_init__(self) -> None:
        if self.kind in (OutcomeKind.BLOWUP, OutcomeKind.EXTINCTION):
            if self.t_event is None or not self.t_event > 0.0:
                raise ValueError("finite-time events need t_event > 0")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "t_event": self.t_event,
            "t_end": self.t_end,
            "final_norm": self.final_norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Outcome":
        return cls(OutcomeKind(d["kind"]), d.get("t_event"), d.get("t_end"), d.get("final_norm"))


@dataclass(frozen=True)
class Thresholds:
    blowup: float = 1e6
    extinction: float = 1e-8
    dt_floor: float = 1e-12
    # minimum relative change over the tail for Growth/Vanishing at the horizon
    trend: float = 0.1


def _monotone_tail(norms: np.ndarray, sign: int) -> bool:
    tail = norms[len(norms) // 2 :]
    if tail.size < 2:
        return False
    d = np.diff(tail) * sign
    return bool(np.all(d >= 0.0) and np.any(d > 0.0))


def classify_trajectory(
    times,
    sup_norms,
    dts,
    thresholds: Thresholds = Thresholds(),
    *,
    finite_blowup: bool = True,
    finite_extinction: bool = True,
) -> Outcome:
    """Classify a sup-norm history.

    ``times``, ``sup_norms`` and ``dts`` are aligned; ``dts[i]`` is the step
    that produced sample ``i`` (the entry for the initial sample is ignored).
    ``finite_blowup`` should be False when p <= 1 and ``finite_extinction``
    False when q >= 1; divergence/decay is then reported as Growth/Vanishing.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(sup_norms, dtype=float)
    dts = np.asarray(dts, dtype=float)
    if times.size == 0 or times.size != norms.size or dts.size != times.size:
        raise ValueError("histories must be nonempty and aligned")
    if np.any(np.diff(times) < 0.0):
        raise ValueError("time grid must be monotone")

    above = np.flatnonzero(~(norms < thresholds.blowup))  # NaN/inf count as above
    below = np.flatnonzero(norms <= thresholds.extinction)
    first_above = above[0] if above.size else None
    first_below = below[0] if below.size else None

    if first_above is not None and (first_below is None or first_above < first_below):
        collapsed = np.any(dts[max(first_above, 1) :] < thresholds.dt_floor) or not np.isfinite(
            norms[first_above:]
        ).all()
        t_cross = float(times[first_above])
        if t_cross == 0.0:
            # data already above the threshold: date the event by the step collapse
            t_cross = float(times[-1])
        if collapsed and finite_blowup and t_cross > 0.0:
            return Outcome(OutcomeKind.BLOWUP, t_event=t_cross)
        if not finite_blowup:
            return Outcome(OutcomeKind.GROWTH, t_end=float(times[-1]), final_norm=float(norms[-1]))
    if first_below is not None:
        if finite_extinction and times[first_below] > 0.0:
            return Outcome(OutcomeKind.EXTINCTION, t_event=float(times[first_below]))
        if not finite_extinction:
            return Outcome(OutcomeKind.VANISHING, t_end=float(times[-1]), final_norm=float(norms[-1]))

    t_end, final = float(times[-1]), float(norms[-1])
    scale = max(abs(norms[0]), thresholds.extinction)
    change = (final - norms[0]) / scale
    if not finite_blowup and change > thresholds.trend and _monotone_tail(norms, +1):
        return Outcome(OutcomeKind.GROWTH, t_end=t_end, final_norm=final)
    if not finite_extinction and -change > thresholds.trend and _monotone_tail(norms, -1):
        return Outcome(OutcomeKind.VANISHING, t_end=t_end, final_norm=final)
    return Outcome(OutcomeKind.UNDECIDED, t_end=t_end, final_norm=final)
