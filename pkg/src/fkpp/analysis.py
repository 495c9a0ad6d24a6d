"""Numerical certification of comparison functions.

* Scaled stationary profiles  U(x, t) = psi(t) E(x)  that sit below (G) or
  above (H) a solution and force blow-up/growth or extinction/vanishing.
* The self-similar blow-up subsolution
      u(x, t) = (T - t)^(-alpha) A (1 - (xi/a)^2)_+^b,  xi = x (T - t)^(-beta),
  checked term by term through the four sufficient inequalities.
* A porous-medium supersolution check for data bounded by 1.

Existence arguments ask for "small enough" speeds or "large enough"
amplitudes; here those are found by halving/doubling searches and the
resulting objects are verified on sample grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, ParameterError
from .pde import GridField, SimConfig, co_evolve, without_reaction
from .stationary import StationaryProfile, E_value

__all__ = [
    "CertificationError",
    "SLACK",
    "ScaledProfileSub",
    "ScaledSubReport",
    "scaled_alpha",
    "build_scaled_sub",
    "verify_scaled_sub",
    "SelfSimilarSub",
    "InequalityReport",
    "selfsimilar_sub",
    "selfsimilar_constants",
    "build_selfsimilar_sub",
    "verify_selfsimilar",
    "selfsimilar_initial",
    "PorousReport",
    "porous_supersolution_check",
    "classify_by_separatrix",
]

SLACK = -1e-12

G_BLOWUP = "G_blowup"
G_GROWTH = "G_growth"
H_EXTINCTION = "H_extinction"
H_VANISHING = "H_vanishing"
VARIANTS = (G_BLOWUP, G_GROWTH, H_EXTINCTION, H_VANISHING)


class CertificationError(RuntimeError):
    pass


# -- scaled stationary profiles ------------------------------------------------


def scaled_alpha(params: ModelParams, variant: str) -> float:
    """Time exponent of the scaled profile for each variant.

    For H with p = m the exponent is raised to at least 1/(1-q): below that
    the sink term cannot keep up with the decay of (T - a t)^alpha as the
    extinction time is approached.
    """
    m, p, q = params.m, params.p, params.q
    if variant == G_BLOWUP:
        if not p > 1.0:
            raise ParameterError("G_blowup needs p > 1")
        if p > m and q < 1.0:
            return (p - q) / ((m - q) * (p - 1.0))
        if not m > 1.0:
            raise ParameterError("alpha = 1/(m-1) needs m > 1")
        return 1.0 / (m - 1.0)
    if variant == G_GROWTH:
        if p != 1.0:
            raise ParameterError("G_growth needs p = 1")
        return 1.0
    if variant == H_EXTINCTION:
        if not q < 1.0:
            raise ParameterError("H_extinction needs q < 1")
        if p > m:
            return (p - q) / ((p - m) * (1.0 - q))
        if m > 1.0:
            return max(1.0 / (m - 1.0), 1.0 / (1.0 - q))
        return 1.0 / (1.0 - q)
    if variant == H_VANISHING:
        if q != 1.0 or not m > 1.0:
            raise ParameterError("H_vanishing needs q = 1 < m")
        return 1.0 / (m - 1.0)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class ScaledProfileSub:
    profile: StationaryProfile
    T: float
    a_speed: float
    alpha: float
    variant: str

    @property
    def is_sub(self) -> bool:
        return self.variant.startswith("G")

    @property
    def finite_time(self) -> bool:
        return self.variant in (G_BLOWUP, H_EXTINCTION)

    @property
    def t_end(self) -> float:
        """Time at which T -/+ a t reaches 0 (inf for the growing variants)."""
        return self.T / self.a_speed if self.finite_time else math.inf

    def _s(self, t):
        return self.T - self.a_speed * t if self.finite_time else self.T + self.a_speed * t

    def amplitude(self, t):
        s = self._s(np.asarray(t, dtype=float))
        grows = self.variant in (G_BLOWUP, H_VANISHING)
        return s ** (-self.alpha) if grows else s**self.alpha

    def __call__(self, x, t):
        return self.amplitude(t) * E_value(self.profile, x)


def _default_variant(params: ModelParams, above: bool) -> str:
    if above:
        return G_BLOWUP if params.p > 1.0 else G_GROWTH
    return H_EXTINCTION if params.q < 1.0 else H_VANISHING


def _scaled_T(profile: StationaryProfile, u0: GridField, variant: str, alpha: float) -> float:
    E = E_value(profile, u0.x)
    u = u0.values
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant in (G_BLOWUP, G_GROWTH):
            S = E > 0.0
            if not np.any(S):
                raise CertificationError("profile has no support on the grid")
            ratio = E[S] / u[S]
        else:
            S = u > 0.0
            if not np.any(S):
                raise CertificationError("u0 vanishes identically")
            ratio = u[S] / E[S]
    if variant in (G_BLOWUP, H_EXTINCTION):
        r = float(np.max(ratio))
        if not r < 1.0:
            raise CertificationError(
                f"u0 is not strictly {'above' if variant == G_BLOWUP else 'below'} E on the support "
                f"(max ratio {r:.6g}); T < 1 is required"
            )
        return r ** (1.0 / alpha)
    r = float(np.min(1.0 / ratio))
    if not r > 1.0:
        raise CertificationError(f"u0 not strictly ordered against E (min ratio {r:.6g}); T > 1 is required")
    return r ** (1.0 / alpha)


def _profile_samples(profile: StationaryProfile, n_x: int) -> tuple[np.ndarray, np.ndarray]:
    hw = profile.support.half_width
    if not math.isfinite(hw):
        hw = 20.0 / profile.k1
    x = profile.center + np.linspace(-hw, hw, n_x + 2)[1:-1]
    return x, E_value(profile, x)


def _scaled_defect(sub: ScaledProfileSub, E: np.ndarray, t: np.ndarray, a_speed: float) -> np.ndarray:
    """Normalized defect on the (E, t) grid; >= 0 means the inequality holds.

    The raw defect is divided by the positive factor E |d psi/dt| / (a alpha).
    """
    prm = sub.profile.params
    m, p, q = prm.m, prm.p, prm.q
    al = sub.alpha
    s = sub.T - a_speed * t if sub.finite_time else sub.T + a_speed * t
    c = -al if sub.variant in (G_BLOWUP, H_VANISHING) else al
    S = s[None, :]
    Ec = E[:, None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        em, ep, eq = (1.0 + c * (k - 1.0) for k in (m, p, q))
        bracket = Ec ** (q - 1.0) * (S**em - S**eq) + Ec ** (p - 1.0) * (S**ep - S**em)
        if not sub.is_sub:
            bracket = -bracket
        d = bracket - a_speed * sub.alpha
    return np.where(Ec > 0.0, d, 0.0)


def _time_samples(sub: ScaledProfileSub, a_speed: float, n_t: int, eps: float) -> np.ndarray:
    if sub.finite_time:
        return np.linspace(0.0, sub.T / a_speed * (1.0 - eps), n_t)
    return np.linspace(0.0, 99.0 * sub.T / a_speed, n_t)


@dataclass(frozen=True)
class ScaledSubReport:
    min_defect: float
    worst_x: float
    worst_t: float
    certified: bool
    a_speed: float
    n_samples: int


def verify_scaled_sub(
    sub: ScaledProfileSub,
    n_x: int = 200,
    n_t: int = 200,
    eps: float = 1e-3,
    a_speed: float | None = None,
) -> ScaledSubReport:
    """Minimum of the (normalized) comparison defect over an n_x by n_t grid.

    Points with E = 0 contribute 0. ``a_speed`` overrides the stored speed.
    """
    a = sub.a_speed if a_speed is None else float(a_speed)
    x, E = _profile_samples(sub.profile, n_x)
    t = _time_samples(sub, a, n_t, eps)
    d = _scaled_defect(sub, E, t, a)
    d = np.where(np.isnan(d), -np.inf, d)
    i, j = np.unravel_index(int(np.argmin(d)), d.shape)
    mn = float(d[i, j])
    return ScaledSubReport(mn, float(x[i]), float(t[j]), mn >= SLACK, a, d.size)


def build_scaled_sub(
    profile: StationaryProfile,
    u0: GridField,
    variant: str | None = None,
    search_grid: tuple[int, int] = (120, 120),
    max_halvings: int = 80,
) -> ScaledProfileSub:
    """Scaled profile ordered against ``u0``, with the speed found by halving from 1."""
    prm = profile.params
    if variant is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            E = E_value(profile, u0.x)
            above = bool(np.all(u0.values[E > 0] > E[E > 0]))
        variant = _default_variant(prm, above)
    alpha = scaled_alpha(prm, variant)
    T = _scaled_T(profile, u0, variant, alpha)
    sub = ScaledProfileSub(profile, T, 1.0, alpha, variant)
    a = 1.0
    for _ in range(max_halvings):
        if verify_scaled_sub(sub, *search_grid, a_speed=a).certified:
            return ScaledProfileSub(profile, T, a, alpha, variant)
        a *= 0.5
    raise CertificationError(f"no admissible speed down to a = {a:g}")


# -- self-similar blow-up subsolution -----------------------------------------


@dataclass(frozen=True)
class SelfSimilarSub:
    params: ModelParams
    A: float
    b: float
    a_width: float
    T: float
    alpha: float
    beta: float
    kappa: float

    @property
    def B(self) -> float:
        return self.A ** (self.params.m - 1.0) / self.a_width**2

    def support_half_width(self, t: float = 0.0) -> float:
        return self.a_width * (self.T - t) ** self.beta

    def __call__(self, x, t):
        tau = self.T - np.asarray(t, dtype=float)
        y = np.asarray(x, dtype=float) * tau ** (-self.beta) / self.a_width
        w = np.clip(1.0 - y * y, 0.0, None)
        return tau ** (-self.alpha) * self.A * w**self.b


def _selfsimilar_exponents(params: ModelParams, b: float | None) -> tuple[float, float, float, float]:
    m, p, q = params.m, params.p, params.q
    if not (p > 1.0 and p > q > 0.0 and m > 0.0):
        raise ParameterError("self-similar subsolution needs p > 1, p > q > 0, m > 0")
    kappa = max(m - q, m - 1.0, 0.0)
    if b is None:
        b = 1.0 / m + 1.0 if kappa == 0.0 else 0.5 * (1.0 / m + 1.0 / kappa)
    lo, hi = 1.0 / m, (math.inf if kappa == 0.0 else 1.0 / kappa)
    if not lo < b < hi:
        raise ParameterError(f"b={b} outside ({lo}, {hi})")
    alpha = 1.0 / (p - 1.0)
    beta = alpha * (p - m) / 2.0
    return alpha, beta, kappa, b


def selfsimilar_sub(params: ModelParams, A: float, b: float | None = None) -> SelfSimilarSub:
    """The subsolution for a given amplitude A (width and T follow from A)."""
    alpha, beta, kappa, b = _selfsimilar_exponents(params, b)
    m, p, q = params.m, params.p, params.q
    a_width = math.sqrt(A ** (m - 1.0 - (p - 1.0) / 2.0))
    T = A ** (-((p - 1.0) ** 2) / (2.0 * (p - q)))
    return SelfSimilarSub(params, float(A), b, a_width, T, alpha, beta, kappa)


def selfsimilar_constants(sub: SelfSimilarSub) -> dict[str, float]:
    """Crossover values of (xi/a)^2 for the pairwise term comparisons.

    C1/C3/C6: I3/4 dominates I1/I4/I6 above these; C2/C4/C5: I5/4
    dominates I1/I4/I6 below these.
    """
    m, p, q = sub.params.m, sub.params.p, sub.params.q
    A, b, al, T, B = sub.A, sub.b, sub.alpha, sub.T, sub.B
    k = B * b * (m * b - 1.0)
    e4 = b * (p - m) + 1.0
    return {
        "C1": al / k,
        "C2": 1.0 - (4.0 * al) ** (1.0 / (b * (p - 1.0))) * A ** (-1.0 / b),
        "C3": 2.0 / (m * b + 1.0),
        "C4": 1.0 - (8.0 * b * A ** (-(p - 1.0) / 2.0)) ** (1.0 / e4) if e4 > 0.0 else -math.inf,
        "C5": 1.0 - 4.0 ** (1.0 / (b * (p - q))) * A ** (-1.0 / b) * T ** (al / b),
        "C6": T ** (al * (p - q)) * A ** (q - 1.0) / k,
    }


def _terms(sub: SelfSimilarSub, y: np.ndarray, tau: np.ndarray):
    """I1..I6 on the (y, tau) grid; zero outside the support."""
    m, p, q = sub.params.m, sub.params.p, sub.params.q
    A, b, al, be, B = sub.A, sub.b, sub.alpha, sub.beta, sub.B
    Y = y[:, None]
    w = 1.0 - Y * Y
    inside = w > 0.0
    wp = np.where(inside, w, 1.0)
    z = np.zeros((y.size, tau.size))
    I1 = z + al * wp**b
    I2 = z + 2.0 * b * be * Y * Y * wp ** (b - 1.0)
    I3 = z + 4.0 * B * b * (m * b - 1.0) * Y * Y * wp ** (m * b - 2.0)
    I4 = z + 2.0 * B * b * wp ** (m * b - 1.0)
    I5 = z + A ** (p - 1.0) * wp ** (b * p)
    I6 = tau[None, :] ** (al * (p - q)) * A ** (q - 1.0) * wp ** (b * q)
    return [np.where(inside, I, 0.0) for I in (I1, I2, I3, I4, I5, I6)]


@dataclass
class InequalityReport:
    minima: dict[str, float]
    combined_min: float
    worst: dict[str, float]
    terms_at_worst: dict[str, float]
    constants: dict[str, float]
    certified: bool
    shape: tuple[int, int]
    sub: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "minima": self.minima,
            "combined_min": self.combined_min,
            "worst": self.worst,
            "terms_at_worst": self.terms_at_worst,
            "constants": self.constants,
            "certified": self.certified,
            "shape": list(self.shape),
            "sub": self.sub,
        }


def _y_samples(n_y: int, constants: dict[str, float]) -> np.ndarray:
    y = np.linspace(0.0, 1.0, n_y)
    extra = []
    for c in constants.values():
        if 0.0 < c < 1.0:
            r = math.sqrt(c)
            extra += [r * (1 - 1e-9), r, min(r * (1 + 1e-9), 1.0)]
    return np.unique(np.concatenate([y, extra]))


def verify_selfsimilar(sub: SelfSimilarSub, n_y: int = 300, n_t: int = 100) -> InequalityReport:
    """Evaluate the four sufficient inequalities and the combined one on a grid.

    The grid covers xi/a in [0, 1] (refined at the crossover constants) and
    t in [0, T). All terms are scaled by the positive factor
    (T - t)^(alpha + 1) / A.
    """
    consts = selfsimilar_constants(sub)
    y = _y_samples(n_y, consts)
    t = np.linspace(0.0, sub.T, n_t, endpoint=False)
    tau = sub.T - t
    I1, I2, I3, I4, I5, I6 = _terms(sub, y, tau)
    ineq = {
        "ineq1": I3 / 4 + I5 / 4 - I1,
        "ineq2": I3 / 4 + I5 / 4 - I4,
        "ineq3": I3 / 4 + I5 / 4 - I6,
        "ineq4": I2 + I3 / 4,
    }
    combined = I2 - I1 + I3 - I4 + I5 - I6
    # outside the support every term vanishes, so only interior points carry information
    inside = y < 1.0
    ineq = {k: v[inside] for k, v in ineq.items()}
    combined = combined[inside]
    y = y[inside]
    I1, I2, I3, I4, I5, I6 = (I[inside] for I in (I1, I2, I3, I4, I5, I6))
    minima = {k: float(np.nanmin(v)) for k, v in ineq.items()}
    stacked = np.minimum.reduce(list(ineq.values()))
    i, j = np.unravel_index(int(np.nanargmin(stacked)), stacked.shape)
    terms = {f"I{k + 1}": float(arr[i, j]) for k, arr in enumerate((I1, I2, I3, I4, I5, I6))}
    certified = all(v >= SLACK for v in minima.values()) and bool(np.all(np.isfinite(stacked)))
    return InequalityReport(
        minima=minima,
        combined_min=float(np.nanmin(combined)),
        worst={"xi_over_a": float(y[i]), "t": float(t[j])},
        terms_at_worst=terms,
        constants=consts,
        certified=certified,
        shape=(y.size, t.size),
        sub={"A": sub.A, "b": sub.b, "a_width": sub.a_width, "T": sub.T, "alpha": sub.alpha, "beta": sub.beta},
    )


def build_selfsimilar_sub(
    params: ModelParams,
    b: float | None = None,
    A0: float = 4.0,
    A_max: float = 2.0**60,
    n_y: int = 300,
    n_t: int = 100,
) -> SelfSimilarSub:
    """Double A from ``A0`` until the inequalities hold on the sample grid."""
    A = A0
    while A <= A_max:
        sub = selfsimilar_sub(params, A, b)
        if verify_selfsimilar(sub, n_y, n_t).certified:
            return sub
        A *= 2.0
    raise CertificationError(f"no certified amplitude up to A = {A_max:g}")


def selfsimilar_initial(sub: SelfSimilarSub):
    """The subsolution at t = 0 as a function of x."""
    return lambda x: sub(x, 0.0)


# -- porous-medium supersolution ------------------------------------------------


@dataclass
class PorousReport:
    max_excess: float
    times: np.ndarray
    full_norms: np.ndarray
    diffusion_norms: np.ndarray
    t_stop: float
    reason: str

    @property
    def full_monotone(self) -> bool:
        """Full-equation sup norm non-increasing after at most one initial step."""
        return bool(np.all(np.diff(self.full_norms[1:]) <= 0.0))

    def as_dict(self) -> dict:
        return {
            "max_excess": self.max_excess,
            "t_stop": self.t_stop,
            "reason": self.reason,
            "full_monotone": self.full_monotone,
            "initial_norm": float(self.full_norms[0]),
            "final_full_norm": float(self.full_norms[-1]),
            "final_diffusion_norm": float(self.diffusion_norms[-1]),
        }


def porous_supersolution_check(u0: GridField, params: ModelParams, config: SimConfig) -> PorousReport:
    """Co-evolve the full equation and the diffusion-only equation from ``u0``."""
    if u0.sup_norm > 1.0:
        raise ParameterError(f"sup norm {u0.sup_norm:g} exceeds 1")
    times, full, diff = [], [], []
    excess = [-math.inf]

    def observe(t, us):
        times.append(t)
        full.append(float(us[0].max()))
        diff.append(float(us[1].max()))
        excess[0] = max(excess[0], float(np.max(us[0] - us[1])))
        return False

    t_stop, _, reason = co_evolve([u0, u0], params, [config, without_reaction(config)], observe, config.t_max)
    return PorousReport(max(excess[0], 0.0), np.asarray(times), np.asarray(full), np.asarray(diff), t_stop, reason)


# -- separatrix prediction -----------------------------------------------------


def classify_by_separatrix(u0: GridField, profile: StationaryProfile) -> str:
    """Predicted behavior of the solution from ``u0`` by comparison with E.

    Returns "blowup", "growth", "extinction", "vanishing", "not_comparable",
    or "hypotheses_not_met".
    """
    prm = profile.params
    if not prm.separatrix_hypotheses:
        return "hypotheses_not_met"
    E = E_value(profile, u0.x)
    u = u0.values
    S = E > 0.0
    if np.any(S) and np.all(u[S] > E[S]):
        return "blowup" if prm.p > 1.0 else "growth"
    pos = u > 0.0
    if np.any(pos) and np.all(u[pos] < E[pos]):
        return "extinction" if prm.q < 1.0 else "vanishing"
    return "not_comparable"
