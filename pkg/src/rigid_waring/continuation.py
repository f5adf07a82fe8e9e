"""Tracking the rigid homotopy ``h_t = exp(tA) . f`` from ``t = 1`` down to ``t = 0``.

Certified mode sets ``dt = 1 / (240 kappa split_gamma)`` at every step, using
per-call failure probability ``eps / (n K)`` for the gamma estimates.
Heuristic mode uses a constant step instead and skips gamma estimation.
Each step is followed by a fixed number of projective Newton iterations, and
the endpoint is refined on ``f`` itself.

Two engines run the same loop: ``"compiled"`` (numba kernel, default) and
``"numpy"`` (built from the public functions of this package, slow). They
consume identical random probes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .conditioning import sample_count, split_gamma, unit_ball_points
from .errors import ArgumentError, BranchAmbiguityError, SingularPointError
from .geometry import RigidPath, normalize
from .sampling import StartPair
from .waring import WaringSystem

CONVERGED = "converged"
BUDGET_EXHAUSTED = "step_budget_exhausted"
SINGULAR = "singular_encountered"
BRANCH_AMBIGUITY = "branch_ambiguity"

CHUNK = 1024
TRACE_COLUMNS = ("t", "dt", "kappa", "split_gamma", "residual")


@dataclass(frozen=True)
class TrackConfig:
    epsilon: float = 1e-8
    max_steps: int = 10**6
    newton_steps_per_corrector: int = 2
    final_refine_tol: float = 1e-12
    mode: str = "certified"
    heuristic_step: float | None = None
    refine_max_iter: int = 50
    engine: str = "compiled"

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.5:
            raise ArgumentError("epsilon must lie in (0, 1/2]")
        if self.max_steps < 1:
            raise ArgumentError("max_steps must be >= 1")
        if self.mode not in ("certified", "heuristic"):
            raise ArgumentError(f"unknown mode {self.mode!r}")
        if self.mode == "heuristic" and not (self.heuristic_step and 0.0 < self.heuristic_step <= 1.0):
            raise ArgumentError("heuristic mode needs heuristic_step in (0, 1]")
        if self.engine not in ("compiled", "numpy"):
            raise ArgumentError(f"unknown engine {self.engine!r}")

    def heuristic(self, step: float) -> "TrackConfig":
        return replace(self, mode="heuristic", heuristic_step=step)


@dataclass(frozen=True)
class TraceRow:
    t: float
    dt: float
    kappa: float
    split_gamma: float
    residual: float
    z: np.ndarray | None = None


@dataclass
class Trace:
    """Column store of per-step tracking data.

    ``residual_before`` is the residual of ``h_t`` at the previous iterate,
    before Newton correction; ``gamma_mean`` is the mean per-equation estimate.
    """

    t: np.ndarray
    dt: np.ndarray
    kappa: np.ndarray
    split_gamma: np.ndarray
    residual: np.ndarray
    residual_before: np.ndarray
    gamma_mean: np.ndarray
    z: np.ndarray

    @classmethod
    def empty(cls, m: int) -> "Trace":
        e = np.empty(0)
        return cls(e, e, e, e, e, e, e, np.empty((0, m), dtype=complex))

    @classmethod
    def concat(cls, pieces, m: int) -> "Trace":
        if not pieces:
            return cls.empty(m)
        cols = {name: np.concatenate([p[name] for p in pieces]) for name in pieces[0]}
        return cls(**cols)

    def __len__(self):
        return len(self.t)

    def rows(self, stride: int = 1, snapshot_stride: int = 0):
        for k in range(0, len(self), stride):
            snap = self.z[k] if snapshot_stride and k % snapshot_stride == 0 else None
            yield TraceRow(self.t[k], self.dt[k], self.kappa[k], self.split_gamma[k], self.residual[k], snap)

    def write_csv(self, path, stride: int = 1, coordinates: bool = False):
        """One row per ``stride`` steps (the last step is always kept)."""
        idx = list(range(0, len(self), stride))
        if len(self) and idx[-1] != len(self) - 1:
            idx.append(len(self) - 1)
        m = self.z.shape[1]
        header = list(TRACE_COLUMNS)
        if coordinates:
            header += [f"z{j}_{part}" for j in range(m) for part in ("re", "im")]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in idx:
                row = [repr(float(x)) for x in (self.t[k], self.dt[k], self.kappa[k],
                                                self.split_gamma[k], self.residual[k])]
                if coordinates:
                    row += [repr(float(v)) for zj in self.z[k] for v in (zj.real, zj.imag)]
                writer.writerow(row)


@dataclass
class TrackResult:
    endpoint: np.ndarray
    iterations: int
    mean_dt: float
    mean_gamma_estimate: float
    mean_kappa: float
    final_residual: float
    status: str
    refine_iterations: int = 0
    path_speed: float = float("nan")
    trace: Trace | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def newton_correct(system: WaringSystem, z, steps: int) -> np.ndarray:
    """``steps`` projective Newton iterations ``z <- normalize(z - J|_{z^perp}^+ f(z))``.

    The update solves ``J delta = f(z)`` with ``delta`` orthogonal to ``z``.
    """
    z = normalize(z)
    n = system.n
    for _ in range(steps):
        jac = system.jacobian(z)
        proj = np.eye(n + 1) - np.outer(z, z.conj())
        sigma = np.linalg.svd(jac @ proj, compute_uv=False)
        if sigma[n - 1] <= _kernels.SINGULAR_TOL:
            raise SingularPointError("restricted Jacobian is singular")
        mat = np.vstack([jac, z.conj()[None, :]])
        rhs = np.append(system.evaluate(z), 0.0)
        z = normalize(z - np.linalg.solve(mat, rhs))
    return z


def _padded(system: WaringSystem):
    rmax = max(p.length for p in system)
    coeffs = np.zeros((system.n, rmax, system.n + 1), dtype=complex)
    for i, p in enumerate(system):
        coeffs[i, :p.length] = p.coeffs
    return coeffs, np.array(system.degrees, dtype=np.int64)


def _draw_chunk(rng: np.random.Generator, n: int, smax: int, m: int):
    raw = rng.standard_normal((CHUNK, n, smax, m, 2))
    normals = raw[..., 0] + 1j * raw[..., 1]
    uniforms = rng.random((CHUNK, n, smax))
    return normals, uniforms


def _numpy_chunk(system, path, z, t, normals, uniforms, counts, steps_allowed, cfg, step0, monitor):
    """Reference implementation of :func:`rigid_waring._kernels.track_chunk`."""
    heuristic = cfg.mode == "heuristic"
    eps_each = cfg.epsilon / (system.n * cfg.max_steps)
    cols = {k: [] for k in ("t", "dt", "kappa", "split_gamma", "gamma_mean", "residual", "residual_before", "z")}
    status = _kernels.RUNNING
    grow, prev = monitor
    for step in range(steps_allowed):
        try:
            if heuristic:
                dt, kap, split, gmean = cfg.heuristic_step, np.nan, np.nan, np.nan
                t_new = max(1.0 - (step0 + step + 1) * cfg.heuristic_step, 0.0)
            else:
                h = system.act(path.at(t))
                probes = [unit_ball_points(normals[step, i, :counts[i]], uniforms[step, i, :counts[i]])
                          for i in range(system.n)]
                report = split_gamma(h, z, eps_each, probes=probes)
                kap, split = report.kappa, report.split_gamma
                gmean = float(np.mean(report.per_poly))
                dt = 1.0 / (240.0 * kap * split)
                t_new = max(t - dt, 0.0)
            h = system.act(path.at(t_new))
            res_before = h.residual(z)
            z = newton_correct(h, z, cfg.newton_steps_per_corrector)
        except SingularPointError:
            status = _kernels.SINGULAR
            break
        res = h.residual(z)
        for key, val in zip(cols, (t_new, dt, kap, split, gmean, res, res_before, z)):
            cols[key].append(val)
        t = t_new
        if heuristic:
            grow = grow + 1 if (res > _kernels.DIVERGENCE_GROWTH * prev and res > _kernels.DIVERGENCE_FLOOR) else 0
            prev = res
            if grow >= _kernels.DIVERGENCE_COUNT:
                status = _kernels.SINGULAR
                break
        if t <= 0.0:
            status = _kernels.REACHED_ZERO
            break
    m = system.n + 1
    piece = {k: np.array(v, dtype=complex if k == "z" else float) for k, v in cols.items()}
    if not cols["z"]:
        piece["z"] = np.empty((0, m), dtype=complex)
    return piece, status, t, z, (grow, prev)


def _track(system: WaringSystem, pair: StartPair, cfg: TrackConfig, rng, keep_trace: bool) -> TrackResult:
    n, m = system.n, system.n + 1
    try:
        path = RigidPath.from_unitaries(pair.unitaries)
    except BranchAmbiguityError:
        z0 = normalize(pair.zeta)
        return TrackResult(z0, 0, np.nan, np.nan, np.nan, system.residual(z0), BRANCH_AMBIGUITY)
    heuristic = cfg.mode == "heuristic"
    eps_each = cfg.epsilon / (n * cfg.max_steps)
    counts = np.array([sample_count(d, eps_each) for d in system.degrees], dtype=np.int64)
    smax = int(counts.max())
    coeffs, degrees = _padded(system)

    z = normalize(pair.zeta).astype(complex)
    t = 1.0
    steps = 0
    status = _kernels.RUNNING
    monitor = (0, np.inf)
    pieces = []
    if path.speed == 0.0:
        t = 0.0
        status = _kernels.REACHED_ZERO
    while status == _kernels.RUNNING and steps < cfg.max_steps:
        allowed = min(CHUNK, cfg.max_steps - steps)
        if heuristic:
            normals = np.zeros((1, n, 1, m), dtype=complex)
            uniforms = np.zeros((1, n, 1))
        else:
            if rng is None:
                raise ArgumentError("certified tracking needs an rng")
            normals, uniforms = _draw_chunk(rng, n, smax, m)
        if cfg.engine == "compiled":
            out = {k: np.empty(allowed) for k in ("t", "dt", "kappa", "split_gamma", "gamma_mean",
                                                  "residual", "residual_before")}
            out["z"] = np.empty((allowed, m), dtype=complex)
            done, status, t, grow, prev = _kernels.track_chunk(
                coeffs, degrees, path.eigvecs, path.angles, z, t, normals, uniforms, counts, allowed,
                cfg.newton_steps_per_corrector, heuristic, float(cfg.heuristic_step or 0.0), steps,
                monitor[0], monitor[1], out["t"], out["dt"], out["kappa"], out["split_gamma"],
                out["gamma_mean"], out["residual"], out["residual_before"], out["z"])
            monitor = (grow, prev)
            piece = {k: v[:done] for k, v in out.items()}
        else:
            piece, status, t, z, monitor = _numpy_chunk(system, path, z, t, normals, uniforms, counts,
                                                        allowed, cfg, steps, monitor)
            done = len(piece["t"])
        steps += done
        pieces.append(piece)

    trace = Trace.concat(pieces, m)
    means = (float(np.mean(trace.dt)) if steps else np.nan,
             float(np.mean(trace.gamma_mean)) if steps else np.nan,
             float(np.mean(trace.kappa)) if steps else np.nan)
    if status == _kernels.SINGULAR:
        return TrackResult(z, steps, *means, system.residual(z), SINGULAR, 0, path.speed,
                           trace if keep_trace else None)
    if status != _kernels.REACHED_ZERO:
        return TrackResult(z, steps, *means, system.residual(z), BUDGET_EXHAUSTED, 0, path.speed,
                           trace if keep_trace else None)

    residual = system.residual(z)
    refine = 0
    try:
        while residual >= cfg.final_refine_tol and refine < cfg.refine_max_iter:
            z = newton_correct(system, z, 1)
            residual = system.residual(z)
            refine += 1
    except SingularPointError:
        return TrackResult(z, steps, *means, residual, SINGULAR, refine, path.speed,
                           trace if keep_trace else None)
    final = CONVERGED if residual < cfg.final_refine_tol else SINGULAR
    return TrackResult(z, steps, *means, residual, final, refine, path.speed, trace if keep_trace else None)


def certified_track(system: WaringSystem, pair: StartPair, cfg: TrackConfig | None = None,
                    rng: np.random.Generator | None = None, keep_trace: bool = False) -> TrackResult:
    """Track the rigid path from ``pair`` to a root of ``system`` with certified steps.

    A stationary path (all generators zero) needs no continuation steps.
    """
    cfg = cfg or TrackConfig()
    if cfg.mode != "certified":
        raise ArgumentError("certified_track needs mode='certified'")
    return _track(system, pair, cfg, rng, keep_trace)


def heuristic_track(system: WaringSystem, pair: StartPair, cfg: TrackConfig,
                    keep_trace: bool = False) -> TrackResult:
    """Same loop with constant steps; ``t_k = max(1 - k h, 0)`` so exactly ``ceil(1/h)`` steps."""
    if cfg.mode != "heuristic":
        raise ArgumentError("heuristic_track needs mode='heuristic'")
    return _track(system, pair, cfg, None, keep_trace)
