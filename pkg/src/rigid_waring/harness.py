"""Experiment drivers: certified tracking statistics, gamma sweeps, heuristic comparison,
path traces and Monte-Carlo checks of the condition bound.

Each run writes ``<stem>.csv`` (one row per configuration), ``<stem>_trials.csv``
(one row per trial, where applicable) and ``<stem>.meta.json``. CSV files are a
deterministic function of the configuration; timings go to the JSON sidecar only.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .conditioning import gamma_estimate
from .continuation import CONVERGED, TrackConfig, certified_track, heuristic_track
from .errors import BranchAmbiguityError, CapacityError, DomainError
from .geometry import RigidPath, proj_distance
from .sampling import ROOT_SAMPLER, sample_root_on_hypersurface, sample_start_pair
from .theory import mc_gamma_avg_sq, theorem_bound
from .waring import random_system, random_waring

EXPERIMENTS = ("table1", "gamma_sweep", "heuristic_compare", "trace", "bound_check")
TRIAL_METRICS = ("iterations", "mean_dt", "mean_gamma_estimate", "mean_kappa", "final_residual")
PAIR_ATTEMPTS = 5
SWEEP_TRIM = 15
AGREEMENT_TOL = 1e-10
AFFINE_TOL = 1e-14


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 1
    D: int = 3
    r: tuple = (4,)
    trials: int = 100
    seed: int = 42
    epsilon: float = 1e-8
    max_steps: int | None = None
    j_list: tuple = (1, 2, 3, 4, 5)
    out: str = "results/out.csv"
    trace_stride: int = 1
    roots_per_poly: int = 20
    workers: int = 1
    engine: str = "compiled"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.trace_stride < 1:
            raise ValueError("trace stride must be >= 1")
        self.r = tuple(int(v) for v in self.r)
        self.j_list = tuple(int(j) for j in self.j_list)

    @property
    def steps_budget(self) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        return 10**6 if self.n == 1 else 10**7

    def track_config(self) -> TrackConfig:
        return TrackConfig(epsilon=self.epsilon, max_steps=self.steps_budget, engine=self.engine)


def parse_r(text: str) -> tuple:
    """``"7"`` or an inclusive range ``"5..12"``."""
    if ".." in text:
        lo, hi = (int(v) for v in text.split("..", 1))
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return tuple(range(lo, hi + 1))
    return (int(text),)


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator keyed by ``(seed, key)``; independent of worker count and order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(h, "")) for h in header])


def _paths(out: str):
    p = Path(out)
    stem = p.with_suffix("") if p.suffix == ".csv" else p
    return stem.with_suffix(".csv"), stem.parent / f"{stem.name}_trials.csv", stem.with_suffix(".meta.json")


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def _start(system, rng):
    """Start pair whose unitaries all have a principal logarithm (resampled otherwise)."""
    for _ in range(PAIR_ATTEMPTS):
        pair = sample_start_pair(system, rng)
        try:
            RigidPath.from_unitaries(pair.unitaries)
        except BranchAmbiguityError:
            continue
        return pair
    raise BranchAmbiguityError("start pairs kept hitting the branch cut")


def _track_trial(task):
    cfg, n, D, r, trial = task
    t0 = time.perf_counter()
    row = {"n": n, "D": D, "r": r, "trial": trial}
    try:
        rng = trial_rng(cfg.seed, n, D, r, trial)
        system = random_system(n, D, r, rng)
        pair = _start(system, rng)
        res = certified_track(system, pair, cfg.track_config(), rng)
        row.update(status=res.status, iterations=res.iterations, refine_iterations=res.refine_iterations,
                   mean_dt=res.mean_dt, mean_gamma_estimate=res.mean_gamma_estimate,
                   mean_kappa=res.mean_kappa, final_residual=res.final_residual, path_speed=res.path_speed)
    except Exception as exc:  # recorded per trial, never aborts the batch
        row.update(status=f"error:{type(exc).__name__}")
    row["wall_ms"] = 1e3 * (time.perf_counter() - t0)
    return row


def aggregate(trials: list) -> dict:
    """Mean and median of each metric over converged trials plus the convergence rate."""
    ok = [t for t in trials if t.get("status") == CONVERGED]
    out = {"trials": len(trials), "converged": len(ok),
           "convergence_rate": len(ok) / len(trials) if trials else float("nan")}
    for key in TRIAL_METRICS:
        vals = np.array([t[key] for t in ok], dtype=float)
        out[f"mean_{key}"] = float(np.mean(vals)) if len(vals) else float("nan")
        out[f"median_{key}"] = float(np.median(vals)) if len(vals) else float("nan")
    return out


TABLE1_TRIAL_COLUMNS = ["n", "D", "r", "trial", "status", "iterations", "refine_iterations", "mean_dt",
                        "mean_gamma_estimate", "mean_kappa", "final_residual", "path_speed"]
TABLE1_COLUMNS = ["n", "D", "r", "trials", "converged", "convergence_rate"] + [
    f"{stat}_{key}" for key in TRIAL_METRICS for stat in ("mean", "median")]


def run_table1(cfg: ExperimentConfig):
    tasks = [(cfg, cfg.n, cfg.D, r, k) for r in cfg.r for k in range(cfg.trials)]
    trials = _map(_track_trial, tasks, cfg.workers)
    rows = []
    for r in cfg.r:
        group = [t for t in trials if t["r"] == r]
        rows.append({"n": cfg.n, "D": cfg.D, "r": r, **aggregate(group)})
    return rows, trials, {}


def _sweep_poly(task):
    cfg, r, poly = task
    rng = trial_rng(cfg.seed, cfg.n, cfg.D, r, poly)
    values = []
    try:
        f = random_waring(cfg.n, cfg.D, r, rng)
        for _ in range(cfg.roots_per_poly):
            zeta = sample_root_on_hypersurface(f, rng)
            values.append(gamma_estimate(f, zeta, cfg.epsilon, rng) ** 2)
        return values, None
    except Exception as exc:
        return values, f"{type(exc).__name__}: {exc}"


def trimmed_mean(values, drop: int = SWEEP_TRIM) -> float:
    """Mean after removing the ``drop`` largest values."""
    vals = np.sort(np.asarray(values, dtype=float))
    kept = vals[: max(len(vals) - drop, 0)]
    return float(np.mean(kept)) if len(kept) else float("nan")


def run_gamma_sweep(cfg: ExperimentConfig):
    tasks = [(cfg, r, k) for r in cfg.r for k in range(cfg.trials)]
    results = _map(_sweep_poly, tasks, cfg.workers)
    rows, trials, notes = [], [], {}
    for r in cfg.r:
        vals, errors = [], 0
        for (_, rr, k), (v, err) in zip(tasks, results):
            if rr != r:
                continue
            vals.extend(v)
            errors += err is not None
            trials.extend({"r": r, "poly": k, "root": j, "gamma_sq": g} for j, g in enumerate(v))
        try:
            bound = theorem_bound(cfg.n, cfg.D, r).bound
        except DomainError as exc:
            bound = ""
            notes[str(r)] = str(exc)
        rows.append({"n": cfg.n, "D": cfg.D, "r": r, "samples": len(vals), "failed_polys": errors,
                     "mean_gamma_sq": float(np.mean(vals)) if vals else float("nan"),
                     "trimmed_mean_gamma_sq": trimmed_mean(vals), "bound": bound})
    return rows, trials, {"bound_annotations": notes}


def affine_distance(a, b) -> float:
    """Max coordinate difference after scaling both points to ``z_0 = 1``."""
    a, b = np.asarray(a), np.asarray(b)
    if a[0] == 0 or b[0] == 0:
        return float("inf")
    return float(np.max(np.abs(a / a[0] - b / b[0])))


def _heuristic_trial(task):
    cfg, trial = task
    rng = trial_rng(cfg.seed, cfg.n, cfg.D, cfg.r[0], trial)
    rows = []
    try:
        system = random_system(cfg.n, cfg.D, cfg.r[0], rng)
        pair = _start(system, rng)
        base_cfg = cfg.track_config()
        ref = certified_track(system, pair, base_cfg, rng)
    except Exception as exc:
        return [{"trial": trial, "j": "certified", "status": f"error:{type(exc).__name__}", "success": False}]
    rows.append({"trial": trial, "j": "certified", "status": ref.status, "iterations": ref.iterations,
                 "proj_distance": 0.0, "affine_distance": 0.0, "success": ref.converged})
    for j in cfg.j_list:
        try:
            res = heuristic_track(system, pair, base_cfg.heuristic(10.0 ** -j))
        except Exception as exc:
            rows.append({"trial": trial, "j": j, "status": f"error:{type(exc).__name__}", "success": False})
            continue
        dist = proj_distance(res.endpoint, ref.endpoint)
        aff = affine_distance(res.endpoint, ref.endpoint)
        rows.append({"trial": trial, "j": j, "status": res.status, "iterations": res.iterations,
                     "proj_distance": dist, "affine_distance": aff,
                     "success": bool(ref.converged and res.converged and dist < AGREEMENT_TOL)})
    return rows


def run_heuristic_compare(cfg: ExperimentConfig):
    if not cfg.j_list:
        raise ValueError("j-list must be nonempty")
    per_trial = _map(_heuristic_trial, [(cfg, k) for k in range(cfg.trials)], cfg.workers)
    trials = [row for rows in per_trial for row in rows]
    rows = []
    for j in ("certified",) + cfg.j_list:
        group = [t for t in trials if t["j"] == j]
        aff = [t.get("affine_distance", float("inf")) < AFFINE_TOL for t in group]
        rows.append({"j": j, "step": "" if j == "certified" else 10.0 ** -j, "trials": len(group),
                     "success_rate": float(np.mean([t["success"] for t in group])),
                     "affine_success_rate": float(np.mean(aff))})
    return rows, trials, {"agreement": f"1 - |<a, b>| < {AGREEMENT_TOL}",
                          "affine_agreement": f"max |a/a0 - b/b0| < {AFFINE_TOL}"}


def run_trace(cfg: ExperimentConfig):
    rng = trial_rng(cfg.seed, cfg.n, cfg.D, cfg.r[0], 0)
    system = random_system(cfg.n, cfg.D, cfg.r[0], rng)
    pair = _start(system, rng)
    res = certified_track(system, pair, cfg.track_config(), rng, keep_trace=True)
    csv_path, _, _ = _paths(cfg.out)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    res.trace.write_csv(csv_path, stride=cfg.trace_stride, coordinates=True)
    summary = {"status": res.status, "iterations": res.iterations, "path_speed": res.path_speed,
               "final_residual": res.final_residual, "trace_rows_total": len(res.trace)}
    return None, None, summary


def _bound_row(task):
    cfg, r = task
    row = {"n": cfg.n, "D": cfg.D, "r": r}
    try:
        rep = theorem_bound(cfg.n, cfg.D, r)
    except DomainError:
        row.update(skipped="R undefined")
        return row
    try:
        mean, stderr = mc_gamma_avg_sq(cfg.n, cfg.D, r, cfg.trials, trial_rng(cfg.seed, cfg.n, cfg.D, r))
    except CapacityError:
        row.update(bound=rep.bound, skipped="dense oracle too large")
        return row
    row.update(mc_mean=mean, mc_stderr=stderr, bound=rep.bound, passed=mean + 3 * stderr <= rep.bound,
               skipped="")
    return row


def run_bound_check(cfg: ExperimentConfig):
    rows = _map(_bound_row, [(cfg, r) for r in cfg.r], cfg.workers)
    return rows, None, {"gamma_variant": "unrestricted", "root_sampler": ROOT_SAMPLER}


RUNNERS = {"table1": (run_table1, TABLE1_COLUMNS, TABLE1_TRIAL_COLUMNS),
           "gamma_sweep": (run_gamma_sweep, ["n", "D", "r", "samples", "failed_polys", "mean_gamma_sq",
                                             "trimmed_mean_gamma_sq", "bound"],
                           ["r", "poly", "root", "gamma_sq"]),
           "heuristic_compare": (run_heuristic_compare, ["j", "step", "trials", "success_rate",
                                                         "affine_success_rate"],
                                 ["trial", "j", "status", "iterations", "proj_distance", "affine_distance",
                                  "success"]),
           "trace": (run_trace, None, None),
           "bound_check": (run_bound_check, ["n", "D", "r", "mc_mean", "mc_stderr", "bound", "passed",
                                             "skipped"], None)}


def _versions() -> dict:
    import numba
    import scipy
    return {"rigid_waring": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


@dataclass
class RunOutput:
    rows: list | None
    trials: list | None
    meta: dict = field(default_factory=dict)
    paths: tuple = ()


def run_experiment(cfg: ExperimentConfig) -> RunOutput:
    """Run ``cfg.experiment`` and write its CSV files and JSON sidecar."""
    runner, columns, trial_columns = RUNNERS[cfg.experiment]
    t0 = time.perf_counter()
    rows, trials, extra = runner(cfg)
    wall = time.perf_counter() - t0
    csv_path, trials_path, meta_path = _paths(cfg.out)
    written = [csv_path]
    if columns is not None:
        _write_csv(csv_path, columns, rows)
    if trial_columns is not None and trials is not None:
        _write_csv(trials_path, trial_columns, trials)
        written.append(trials_path)
    config = asdict(cfg)
    config["max_steps_effective"] = cfg.steps_budget
    meta = {"config": config, "versions": _versions(), "root_sampler": ROOT_SAMPLER,
            "wall_seconds": wall, **extra}
    if trials is not None and any("wall_ms" in t for t in trials):
        meta["trial_wall_ms"] = [t.get("wall_ms") for t in trials]
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    meta_path.write_text(json.dumps(meta, indent=2, default=str) + "\n")
    written.append(meta_path)
    return RunOutput(rows, trials, meta, tuple(written))
