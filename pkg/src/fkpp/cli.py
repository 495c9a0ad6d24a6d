"""Command-line driver.

    fkpp stationary --set model.m=2 --set model.p=2 --set model.q=0.9 --out out/
    fkpp simulate   --config run.json --set ic.c=2 --out out/
    fkpp verify     --config run.json --set verify.construction=selfsimilar
    fkpp sweep      --config run.json --set 'ic.multipliers=[0.5,1,2]' --workers 3
    fkpp exact      --set ic.family=SG --set ic.constant=-0.25 --set model.m=2

Configuration is one JSON document with sections model/grid/ic/run/verify;
``--set section.key=value`` overrides it (values parse as JSON when they can).
Tables are CSV with a header line and 17 significant digits. Exit codes: 0 ok
or certified, 2 parameter error, 3 solver configuration error, 4
certification failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    CertificationError,
    build_scaled_sub,
    build_selfsimilar_sub,
    porous_supersolution_check,
    selfsimilar_initial,
    selfsimilar_sub,
    verify_scaled_sub,
    verify_selfsimilar,
)
from .exact import SeparableSolution, event_time_bisection
from .model import ModelParams, ParameterError, Thresholds
from .pde import GridField, SimConfig, SolverConfigError, run, sample
from .stationary import E_value, build_profile, g_value, support_width

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_SOLVER = 3
EXIT_CERT = 4

FMT = "%.17g"

DEFAULTS: dict = {
    "model": {"m": 2.0, "p": 2.0, "q": 0.9},
    "grid": {"half_length": 15.0, "n": 751, "boundary": "dirichlet0", "cfl_safety": 0.4},
    "ic": {"kind": "stationary", "c": 1.0, "center": 0.0},
    "run": {"t_max": 10.0, "snapshot_times": [], "max_steps": 20_000_000},
    "verify": {"construction": "selfsimilar"},
}


# -- configuration -------------------------------------------------------------


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    config = copy.deepcopy(config)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ParameterError(f"--set expects key=value, got {item!r}")
        node = config
        *path, leaf = key.split(".")
        for part in path:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ParameterError(f"{key}: {part} is not a section")
        node[leaf] = _parse_value(value)
    return config


def load_config(path: str | None, overrides: list[str]) -> dict:
    user = {}
    if path:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {path}: {exc}") from exc
    return apply_overrides(_merge(DEFAULTS, user), overrides)


def model_params(config: dict) -> ModelParams:
    mdl = config["model"]
    try:
        return ModelParams(float(mdl["m"]), float(mdl["p"]), float(mdl["q"]))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"model section needs numeric m, p, q: {exc}") from exc


def sim_config(config: dict) -> SimConfig:
    grid, rn = config["grid"], config["run"]
    th = Thresholds(**rn.get("thresholds", {}))
    try:
        return SimConfig(
            half_length=float(grid["half_length"]),
            n=int(grid["n"]),
            t_max=float(rn["t_max"]),
            cfl_safety=float(grid.get("cfl_safety", 0.4)),
            boundary=grid.get("boundary", "dirichlet0"),
            thresholds=th,
            snapshot_times=tuple(rn.get("snapshot_times", ())),
            max_steps=int(rn.get("max_steps", 20_000_000)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SolverConfigError):
            raise
        raise SolverConfigError(str(exc)) from exc


def initial_field(config: dict, params: ModelParams, cfg: SimConfig) -> GridField:
    """Initial data from the ic section.

    kinds: stationary (c * E translated to ``center``), separable (family,
    constant at t = 0), bump (height * (1 - ((x - center)/width)^2)_+),
    selfsimilar (amplitude A, or searched), zero, file (CSV with x,u columns).
    """
    ic = config["ic"]
    kind = ic.get("kind", "stationary")
    center = float(ic.get("center", 0.0))
    if kind == "stationary":
        prof = build_profile(params, center)
        c = float(ic.get("c", 1.0))
        return sample(lambda x: c * E_value(prof, x), cfg)
    if kind == "separable":
        sol = SeparableSolution(ic.get("family", "SG"), params.m, float(ic.get("constant", 0.0)))
        return sample(lambda x: sol(x - center, 0.0), cfg)
    if kind == "bump":
        h, w = float(ic.get("height", 1.0)), float(ic.get("width", 1.0))
        return sample(lambda x: h * np.clip(1.0 - ((x - center) / w) ** 2, 0.0, None), cfg)
    if kind == "selfsimilar":
        sub = selfsimilar_sub(params, float(ic["A"])) if "A" in ic else build_selfsimilar_sub(params)
        f = selfsimilar_initial(sub)
        return sample(lambda x: f(x - center), cfg)
    if kind == "zero":
        return sample(lambda x: np.zeros_like(x), cfg)
    if kind == "file":
        data = read_csv(ic["path"])
        return sample(lambda x: np.interp(x, data[:, 0], data[:, 1], left=0.0, right=0.0), cfg)
    raise ParameterError(f"unknown ic kind {kind!r}")


# -- output --------------------------------------------------------------------


def write_csv(path: Path, columns: list[str], data) -> Path:
    np.savetxt(path, np.column_stack(data), fmt=FMT, delimiter=",", header=",".join(columns), comments="")
    return path


def read_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))


@dataclass
class RunManifest:
    command: str
    config: dict
    outcome: dict | None = None
    event_time: float | None = None
    norm_history: list[list[float]] = field(default_factory=list)
    files: list[str] = field(default_factory=list)
    version: str = __version__
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        path.write_text(self.to_json())
        return path


# -- commands ------------------------------------------------------------------


def cmd_stationary(config: dict, out: Path) -> RunManifest:
    params = model_params(config)
    prof = build_profile(params)
    width = support_width(prof)
    grid = config.get("stationary", {})
    n = int(grid.get("n", 401))
    hw = prof.support.half_width
    half = float(grid.get("half_length", hw if math.isfinite(hw) else 10.0 / prof.k1))
    x = np.linspace(-half, half, n)
    g = g_value(prof, x)
    E = E_value(prof, x)
    path = write_csv(out / "stationary.csv", ["x", "g", "E"], [x, g, E])
    info = {"k1": prof.k1, "k2": prof.k2, "f_max": prof.f_max, "support_width": width}
    print(" ".join(f"{k}={v:.10g}" for k, v in info.items()))
    return RunManifest("stationary", config, files=[path.name], extra=info)


def cmd_exact(config: dict, out: Path) -> RunManifest:
    ic = config["ic"]
    family = ic.get("family", "SG")
    sol = SeparableSolution(family, float(config["model"]["m"]), float(ic.get("constant", 0.0)))
    cfg = sim_config(config)
    times = list(config["run"].get("snapshot_times", [])) or [0.0]
    x = cfg.x
    files = []
    for i, t in enumerate(times):
        files.append(write_csv(out / f"exact_{i:04d}.csv", ["x", "u"], [x, sol(x, t)]).name)
    t_ev = sol.event_time
    t_bis = None
    if math.isfinite(t_ev):
        if family == "SG":
            m, c0 = sol.m, sol.constant
            bracket = lambda t: math.exp(-(m - 1.0) * t) / (m - 1.0) + c0  # noqa: E731
        else:
            m, c = sol.m, sol.constant
            bracket = lambda t: 1.0 - c * math.exp((1.0 - m) * t)  # noqa: E731
        t_bis = event_time_bisection(bracket, 2.0 * t_ev + 1.0)
    extra = {"family": family, "predicted": sol.predicted, "snapshot_times": times, "event_time_bisection": t_bis}
    print(f"{family}: {sol.predicted}, event time {t_ev:.12g}")
    return RunManifest("exact", config, event_time=t_ev if math.isfinite(t_ev) else None, files=files, extra=extra)


def _simulate(config: dict, out: Path | None):
    params = model_params(config)
    cfg = sim_config(config)
    u0 = initial_field(config, params, cfg)
    res = run(u0, params, cfg)
    files = []
    if out is not None:
        for i, snap in enumerate(res.snapshots):
            files.append(write_csv(out / f"snapshot_{i:04d}.csv", ["x", "u"], [snap.x, snap.values]).name)
        hist = np.asarray(res.thinned_history())
        files.append(write_csv(out / "history.csv", ["t", "sup_norm"], [hist[:, 0], hist[:, 1]]).name)
    return res, files


def cmd_simulate(config: dict, out: Path) -> RunManifest:
    res, files = _simulate(config, out)
    o = res.outcome
    print(f"outcome {o.kind.value}" + (f" at t={o.t_event:.10g}" if o.t_event is not None else ""))
    return RunManifest(
        "simulate",
        config,
        outcome=o.as_dict(),
        event_time=o.t_event,
        norm_history=[list(p) for p in res.thinned_history()],
        files=files,
        extra={
            "steps": res.steps,
            "max_clip": res.max_clip,
            "snapshot_times": [s.t for s in res.snapshots],
            "classification_note": (
                "blowup needs the norm past the threshold and a step collapse below the floor; "
                "growth/vanishing are reported for p <= 1 / q >= 1 only, from a monotone tail at the horizon "
                "or a threshold crossing without step collapse"
            ),
        },
    )


def cmd_verify(config: dict, out: Path) -> tuple[RunManifest, bool]:
    ver = config["verify"]
    construction = ver.get("construction", "selfsimilar")
    params = model_params(config)
    if construction == "selfsimilar":
        sub = build_selfsimilar_sub(
            params,
            b=ver.get("b"),
            A0=float(ver.get("A0", 4.0)),
            A_max=float(ver.get("A_max", 2.0**60)),
            n_y=int(ver.get("n_y", 300)),
            n_t=int(ver.get("n_t", 100)),
        )
        rep = verify_selfsimilar(sub, int(ver.get("n_y", 300)), int(ver.get("n_t", 100)))
        report = rep.as_dict()
        ok = rep.certified
        print(f"certified={ok} A={sub.A:g} b={sub.b:.10g} T={sub.T:.10g}")
    elif construction == "scaled":
        if not params.separatrix_hypotheses:
            raise ParameterError("scaled-profile comparison needs p >= m > q, p >= 1, q <= 1")
        cfg = sim_config(config)
        u0 = initial_field(config, params, cfg)
        sub = build_scaled_sub(build_profile(params), u0, ver.get("variant"))
        rep = verify_scaled_sub(sub, int(ver.get("n_x", 200)), int(ver.get("n_t", 200)))
        report = {
            "variant": sub.variant,
            "T": sub.T,
            "a_speed": sub.a_speed,
            "alpha": sub.alpha,
            "min_defect": rep.min_defect,
            "worst": {"x": rep.worst_x, "t": rep.worst_t},
            "certified": rep.certified,
        }
        ok = rep.certified
        print(f"certified={ok} {sub.variant} T={sub.T:.10g} a={sub.a_speed:g} min_defect={rep.min_defect:.3e}")
    elif construction == "porous":
        cfg = sim_config(config)
        u0 = initial_field(config, params, cfg)
        rep = porous_supersolution_check(u0, params, cfg)
        report = rep.as_dict()
        ok = rep.max_excess <= 1e-10 and rep.full_monotone
        print(f"certified={ok} max_excess={rep.max_excess:.3e} monotone={rep.full_monotone}")
    else:
        raise ParameterError(f"unknown construction {construction!r}")
    report["construction"] = construction
    path = out / "certificate.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True))
    return RunManifest("verify", config, files=[path.name], extra={"certified": ok}), ok


def _sweep_row(job: tuple[dict, float]) -> dict:
    config, c = job
    mdl = config["model"]
    row = {"m": mdl["m"], "p": mdl["p"], "q": mdl["q"], "c": c, "outcome": "", "t_event": None,
           "t_end": None, "final_norm": None, "error": ""}
    cfg = apply_overrides(config, [f"ic.c={json.dumps(c)}"])
    cfg["ic"]["kind"] = "stationary"
    try:
        res, _ = _simulate(cfg, None)
        row.update(res.outcome.as_dict())
        row["outcome"] = row.pop("kind")
    except Exception as exc:  # recorded per row; the sweep goes on
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


SWEEP_COLUMNS = ["m", "p", "q", "c", "outcome", "t_event", "t_end", "final_norm", "error"]


def cmd_sweep(config: dict, out: Path, workers: int = 1) -> RunManifest:
    mults = [float(c) for c in config["ic"].get("multipliers", [])]
    models = config.get("sweep", {}).get("models") or [[config["model"][k] for k in "mpq"]]
    jobs = []
    for m, p, q in models:
        base = _merge(config, {"model": {"m": m, "p": p, "q": q}})
        jobs += [(base, c) for c in mults]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow(["" if r[k] is None else (FMT % r[k] if isinstance(r[k], float) else r[k]) for k in SWEEP_COLUMNS])
    for r in rows:
        print(f"c={r['c']:g}: {r['outcome'] or r['error']}")
    return RunManifest("sweep", config, files=[path.name], extra={"rows": len(rows)})


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fkpp", description="Generalized Fisher-KPP numerical lab")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("stationary", "exact", "simulate", "verify", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", default="fkpp_out", help="output directory")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config entry")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        config = load_config(args.config, args.set)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        code = EXIT_OK
        if args.command == "stationary":
            manifest = cmd_stationary(config, out)
        elif args.command == "exact":
            manifest = cmd_exact(config, out)
        elif args.command == "simulate":
            manifest = cmd_simulate(config, out)
        elif args.command == "verify":
            manifest, ok = cmd_verify(config, out)
            code = EXIT_OK if ok else EXIT_CERT
        else:
            manifest = cmd_sweep(config, out, max(1, args.workers))
    except SolverConfigError as exc:
        print(f"solver configuration error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    manifest.wall_time = time.perf_counter() - started
    manifest.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
