"""Explicit finite differences for u_t = (1/m) (u^m)_xx + u^p - u^q on [-L, L].

The time step adapts to the solution: a diffusion bound from the largest
diffusivity and a reaction bound that limits the nodewise relative change.
A collapsing step below ``Thresholds.dt_floor`` is how blow-up shows up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .model import ModelParams, Outcome, Thresholds, classify_trajectory

__all__ = [
    "SolverConfigError",
    "GridField",
    "SimConfig",
    "sample",
    "stable_dt",
    "step",
    "RunResult",
    "run",
    "PairReport",
    "ordered_pair_test",
    "co_evolve",
]

DIRICHLET = "dirichlet0"
NEUMANN = "neumann"
_BOUNDARY_ALIASES = {"dirichlet0": DIRICHLET, "dirichlet": DIRICHLET, "neumann": NEUMANN, "neumannreflect": NEUMANN,
                     "neumann_reflect": NEUMANN}
# nodewise cap on |reaction| * dt relative to max(u, extinction threshold)
REACTION_FRACTION = 0.1
# hard stop once the norm passes the blow-up threshold without dt collapse
_OVERFLOW_NORM = 1e150


class SolverConfigError(ValueError):
    pass


@dataclass
class GridField:
    x_left: float
    dx: float
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 3:
            raise ValueError("need a 1-D field with at least 3 nodes")
        if not self.dx > 0.0:
            raise ValueError("dx must be positive")
        if np.any(self.values < 0.0) or not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite and nonnegative")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n)

    @property
    def sup_norm(self) -> float:
        return float(self.values.max())

    def mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    def with_values(self, values, t: float | None = None) -> "GridField":
        return GridField(self.x_left, self.dx, values, self.t if t is None else t)

    def copy(self) -> "GridField":
        return GridField(self.x_left, self.dx, self.values.copy(), self.t)


@dataclass(frozen=True)
class SimConfig:
    half_length: float = 15.0
    n: int = 1501
    t_max: float = 10.0
    cfl_safety: float = 0.4
    boundary: str = DIRICHLET
    thresholds: Thresholds = field(default_factory=Thresholds)
    snapshot_times: tuple[float, ...] = ()
    reaction_enabled: bool = True
    max_steps: int = 20_000_000

    def __post_init__(self) -> None:
        if not 0.0 < self.half_length < math.inf:
            raise SolverConfigError("half_length must be positive and finite")
        if int(self.n) < 3:
            raise SolverConfigError("need at least 3 nodes")
        if not self.t_max > 0.0:
            raise SolverConfigError("t_max must be positive")
        if not 0.0 < self.cfl_safety < 1.0:
            raise SolverConfigError("cfl_safety must lie in (0, 1)")
        tag = _BOUNDARY_ALIASES.get(str(self.boundary).lower(), self.boundary)
        object.__setattr__(self, "boundary", tag)
        if self.boundary not in (DIRICHLET, NEUMANN):
            raise SolverConfigError(f"unknown boundary {self.boundary!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "snapshot_times", tuple(sorted(float(t) for t in self.snapshot_times)))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_length, self.half_length, self.n)


def sample(f: Callable, config: SimConfig) -> GridField:
    """Nodal values of f at t = 0. ``f`` is called on the node array."""
    x = config.x
    values = np.asarray(f(x), dtype=float) * np.ones_like(x)
    if np.any(values < 0.0):
        raise ValueError("initial data must be nonnegative")
    if config.boundary == DIRICHLET:
        values[0] = values[-1] = 0.0
    return GridField(float(x[0]), config.dx, values, 0.0)


def _reaction(u: np.ndarray, params: ModelParams) -> np.ndarray:
    # q > 0, so 0**q == 0 and vacuum nodes get zero reaction without masking
    return u**params.p - u**params.q


def _rates(u: np.ndarray, params: ModelParams, config: SimConfig, dx: float):
    """Right-hand side and the admissible step for ``u``.

    Powers are only evaluated on the window of nodes that are nonzero or
    adjacent to a nonzero node; everything else is vacuum and stays put.
    """
    m = params.m
    rhs = np.zeros(u.size)
    nz = u.nonzero()[0]
    if nz.size == 0:
        return rhs, math.inf
    n = u.size
    lo, hi = max(int(nz[0]) - 1, 0), min(int(nz[-1]) + 2, n)
    w = u[lo:hi]
    um = np.zeros(hi - lo + 2)
    um[1:-1] = w * w if m == 2.0 else w**m
    lap = um[:-2] - 2.0 * um[1:-1] + um[2:]
    if lo == 0:
        lap[0] = 2.0 * (um[2] - um[1]) if config.boundary == NEUMANN else 0.0
    if hi == n:
        lap[-1] = 2.0 * (um[-3] - um[-2]) if config.boundary == NEUMANN else 0.0
    rhs[lo:hi] = lap * (1.0 / (m * dx * dx))

    floor = config.thresholds.extinction
    if m >= 1.0:
        dmax = float(w.max()) ** (m - 1.0)
    else:
        # fast diffusion: the diffusivity is floored at the extinction threshold
        dmax = max(float(u[nz].min()), floor) ** (m - 1.0)
    dt = math.inf if dmax == 0.0 else dx * dx * min(m, 1.0) / (2.0 * dmax)
    if config.reaction_enabled:
        r = _reaction(w, params)
        rhs[lo:hi] += r
        # largest relative reaction rate; the denominator is at least the floor
        rate = float((np.abs(r) / np.maximum(w, floor)).max())
        if rate > 0.0:
            dt = min(dt, REACTION_FRACTION / rate)
    return rhs, config.cfl_safety * dt


def stable_dt(u: np.ndarray, params: ModelParams, config: SimConfig, dx: float | None = None) -> float:
    """Largest admissible explicit step for the field ``u`` (inf when nothing moves)."""
    return _rates(u, params, config, config.dx if dx is None else dx)[1]


def _apply(u, rhs, dt, config):
    new = u + dt * rhs
    if config.boundary == DIRICHLET:
        new[0] = new[-1] = 0.0
    low = float(new.min())
    clip = -low if low < 0.0 else 0.0
    if clip:
        np.maximum(new, 0.0, out=new)
    return new, clip


def _advance(u, params, config, dx, dt):
    rhs, _ = _rates(u, params, config, dx)
    return _apply(u, rhs, dt, config)


def step(field_: GridField, params: ModelParams, config: SimConfig, dt_max: float = math.inf):
    """One explicit update. Returns ``(new_field, dt_used)``.

    ``dt_used`` may fall below the dt floor; that is the blow-up signal and
    is left to the caller.
    """
    dt = min(stable_dt(field_.values, params, config, field_.dx), dt_max)
    if not math.isfinite(dt):
        dt = config.t_max
    new, _ = _advance(field_.values, params, config, field_.dx, dt)
    return field_.with_values(new, field_.t + dt), dt


@dataclass
class RunResult:
    outcome: Outcome
    times: np.ndarray
    sup_norms: np.ndarray
    dts: np.ndarray
    snapshots: list[GridField]
    final: GridField
    max_clip: float
    steps: int
    t_blowup_crossing: float | None = None

    def thinned_history(self, max_points: int = 2000) -> list[tuple[float, float]]:
        n = self.times.size
        idx = np.unique(np.linspace(0, n - 1, min(n, max_points)).astype(int))
        return [(float(self.times[i]), float(self.sup_norms[i])) for i in idx]


def run(u0: GridField, params: ModelParams, config: SimConfig) -> RunResult:
    """Advance ``u0`` to ``config.t_max`` or the first blow-up/extinction event."""
    th = config.thresholds
    u = u0.values.copy()
    dx = u0.dx
    t = u0.t
    times = [t]
    norms = [float(u.max())]
    dts = [math.nan]
    snaps: list[GridField] = []
    pending = [s for s in config.snapshot_times if s >= t]
    max_clip = 0.0
    crossing = None
    steps = 0

    def take_snapshots():
        while pending and pending[0] <= t + 1e-14:
            snaps.append(GridField(u0.x_left, dx, u.copy(), t))
            pending.pop(0)

    take_snapshots()
    finite_blowup = params.p > 1.0
    while t < config.t_max and steps < config.max_steps:
        norm = norms[-1]
        if norm <= th.extinction:
            break
        rhs, dt_stable = _rates(u, params, config, dx)
        # a collapse below the blow-up threshold is not conclusive (for large p
        # the step bound can drop under the floor first), so keep stepping
        if dt_stable < th.dt_floor and (norm >= th.blowup or dt_stable <= 0.0):
            times.append(t)
            norms.append(norm)
            dts.append(dt_stable)
            break
        dt = min(dt_stable, config.t_max - t)
        if pending:
            dt = min(dt, pending[0] - t)
        if not math.isfinite(dt):
            dt = config.t_max - t
        u, clip = _apply(u, rhs, dt, config)
        max_clip = max(max_clip, clip)
        t += dt
        if abs(config.t_max - t) < 1e-14:
            t = config.t_max
        steps += 1
        norm = float(u.max())
        times.append(t)
        norms.append(norm)
        dts.append(dt_stable)
        take_snapshots()
        if norm >= th.blowup:
            if crossing is None:
                crossing = t
            if not finite_blowup or not math.isfinite(norm) or norm > _OVERFLOW_NORM:
                break

    outcome = classify_trajectory(
        times,
        norms,
        dts,
        th,
        finite_blowup=finite_blowup,
        finite_extinction=params.q < 1.0,
    )
    final = GridField(u0.x_left, dx, u, t)
    return RunResult(
        outcome,
        np.asarray(times),
        np.asarray(norms),
        np.asarray(dts),
        snaps,
        final,
        max_clip,
        steps,
        crossing,
    )


def co_evolve(
    fields: Sequence[GridField],
    params: ModelParams,
    configs: Sequence[SimConfig],
    observe: Callable[[float, list[np.ndarray]], bool | None],
    t_max: float,
) -> tuple[float, int, str]:
    """Advance several fields with one shared time step.

    ``configs[i]`` sets the boundary and reaction switch of field ``i``; the
    first config supplies the thresholds and safety factor. ``observe(t,
    values)`` runs after every step and may return True to stop. Returns
    ``(t_stop, steps, reason)``.
    """
    th = configs[0].thresholds
    us = [f.values.copy() for f in fields]
    dx = fields[0].dx
    t = fields[0].t
    steps = 0
    if observe(t, us):
        return t, steps, "observer"
    while t < t_max:
        norms = [float(u.max()) for u in us]
        if max(norms) >= th.blowup:
            return t, steps, "blowup_threshold"
        if min(norms) <= th.extinction:
            return t, steps, "extinction_threshold"
        rates = [_rates(u, params, c, dx) for u, c in zip(us, configs)]
        dt = min(r[1] for r in rates)
        if dt <= 0.0:
            return t, steps, "dt_floor"
        dt = min(dt, t_max - t)
        us = [_apply(u, r[0], dt, c)[0] for u, r, c in zip(us, rates, configs)]
        t += dt
        steps += 1
        if observe(t, us):
            return t, steps, "observer"
    return t, steps, "horizon"


@dataclass(frozen=True)
class PairReport:
    max_violation: float
    t_stop: float
    steps: int
    reason: str


def ordered_pair_test(
    u0_low: GridField, u0_high: GridField, params: ModelParams, config: SimConfig
) -> PairReport:
    """Co-evolve two ordered fields and record max(u_low - u_high) over the run."""
    if u0_low.n != u0_high.n or u0_low.dx != u0_high.dx:
        raise ValueError("fields must share a grid")
    worst = [-math.inf]

    def observe(_t, us):
        worst[0] = max(worst[0], float(np.max(us[0] - us[1])))
        return False

    t_stop, steps, reason = co_evolve([u0_low, u0_high], params, [config, config], observe, config.t_max)
    return PairReport(max(worst[0], 0.0), t_stop, steps, reason)


def without_reaction(config: SimConfig) -> SimConfig:
    return replace(config, reaction_enabled=False)
