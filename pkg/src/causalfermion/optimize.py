"""Quasi-Newton minimization: L-BFGS followed by dense BFGS.

Both stages share a strong-Wolfe line search.  Stopping tests are applied after
every accepted step in a fixed order:

1. relative objective change ``(f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) <= ftol``
2. gradient norm (l1 by default) ``<= gtol``
3. iteration cap
4. wall-clock deadline
"""

from __future__ import annotations

import enum
import logging
import os
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .action import causal_action
from .errors import CausalFermionError, DegenerateTrace, LineSearchFailure
from .gradient import ActionObjective
from .parametrize import UnconstrainedParams, decode, init_random

logger = logging.getLogger(__name__)

THREADS_ENV = "CAUSALFERMION_THREADS"
_CURVATURE_EPS = 1e-12
_MAX_REINIT = 20


class TerminationReason(str, enum.Enum):
    FTOL = "FtolReached"
    GTOL = "GtolReached"
    MAX_ITER = "MaxIter"
    WALL_CLOCK = "WallClock"
    LINE_SEARCH = "LineSearchFailure"


@dataclass(frozen=True)
class OptimizerSettings:
    ftol: float = 1e-7
    gtol_stage1: float = 1e-9
    gtol_stage2: float = 1e-7
    memory: int = 70
    max_linesearch: int = 20
    max_iter_stage1: int = 10000
    max_iter_stage2: int = 5000
    wall_clock_limit: float | None = 72 * 3600.0
    gtol_norm: str = "l1"
    c1: float = 1e-4
    c2: float = 0.9
    log_every: int = 100
    trace_every: int = 1

    def __post_init__(self):
        for name in ("ftol", "gtol_stage1", "gtol_stage2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.memory < 1:
            raise ValueError("memory must be at least 1")
        if self.max_linesearch < 1:
            raise ValueError("max_linesearch must be at least 1")
        if self.gtol_norm not in ("l1", "l2", "max"):
            raise ValueError("gtol_norm must be 'l1', 'l2' or 'max'")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.wall_clock_limit is not None and self.wall_clock_limit <= 0:
            raise ValueError("wall_clock_limit must be positive")

    def grad_norm(self, g: np.ndarray) -> float:
        if self.gtol_norm == "l1":
            return float(np.sum(np.abs(g)))
        if self.gtol_norm == "max":
            return float(np.max(np.abs(g), initial=0.0))
        return float(np.linalg.norm(g))


@dataclass
class LineSearchResult:
    step: float
    direction: np.ndarray
    fun: float
    grad: np.ndarray
    evaluations: int
    reset: bool


@dataclass
class StageResult:
    """Outcome of one quasi-Newton stage on a flat objective."""

    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    reason: TerminationReason
    trace: list = field(default_factory=list)
    evaluations: int = 0


@dataclass
class RunResult:
    final_params: UnconstrainedParams
    final_action: float
    final_boundedness: float
    iterations: tuple[int, int]
    termination_reason: TerminationReason
    action_trace: list
    seed: int
    stage_reasons: tuple[TerminationReason, TerminationReason | None] = (None, None)
    elapsed: float = 0.0

    @property
    def shape(self):
        return self.final_params.shape


@dataclass
class RestartResult:
    best: RunResult
    results: list
    failures: dict


def _safe_eval(objective, gradient, x):
    """Objective and gradient, with undecodable points mapped to ``inf``."""
    try:
        f = float(objective(x))
    except CausalFermionError:
        return np.inf, None
    if not np.isfinite(f):
        return np.inf, None
    return f, np.asarray(gradient(x), dtype=float)


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic interpolating two points and slopes, or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    rad = d1 * d1 - da * db
    if rad < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(rad)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    t = b - (b - a) * (db + d2 - d1) / denom
    return t if np.isfinite(t) else None


def line_search_strong_wolfe(
    objective: Callable,
    gradient: Callable,
    point,
    direction,
    settings: OptimizerSettings | None = None,
    initial_step: float = 1.0,
    f0: float | None = None,
    g0=None,
) -> LineSearchResult:
    """Find a step along ``direction`` satisfying the strong Wolfe conditions.

    If ``direction`` is not a descent direction it is replaced by the negative
    gradient first (``reset`` is then set on the result).

    Raises
    ------
    LineSearchFailure
        when no acceptable step is found within ``settings.max_linesearch``
        function evaluations.
    """
    settings = settings or OptimizerSettings()
    x = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    if f0 is None or g0 is None:
        f0, g0 = _safe_eval(objective, gradient, x)
        if g0 is None:
            raise LineSearchFailure("objective is not finite at the start point")
    dphi0 = float(g0 @ d)
    reset = False
    if not dphi0 < 0:
        d = -g0
        dphi0 = float(g0 @ d)
        reset = True
        initial_step = min(initial_step, 1.0 / max(np.sum(np.abs(g0)), 1e-300))
        if not dphi0 < 0:
            raise LineSearchFailure("gradient vanishes; no descent direction")
    c1, c2 = settings.c1, settings.c2
    evals = 0

    def phi(a):
        nonlocal evals
        evals += 1
        f, g = _safe_eval(objective, gradient, x + a * d)
        return f, g, (float(g @ d) if g is not None else np.nan)

    def armijo_ok(a, fa):
        return fa <= f0 + c1 * a * dphi0

    def done(a, fa, ga):
        return LineSearchResult(a, d, fa, ga, evals, reset)

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        while evals < settings.max_linesearch:
            a = None
            if np.isfinite(f_hi) and np.isfinite(d_hi):
                a = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
            left, right = min(lo, hi), max(lo, hi)
            margin = 0.1 * (right - left)
            if a is None or not (left + margin <= a <= right - margin):
                a = 0.5 * (lo + hi)
            fa, ga, da = phi(a)
            if not armijo_ok(a, fa) or fa >= f_lo:
                hi, f_hi, d_hi = a, fa, da
                continue
            if abs(da) <= -c2 * dphi0:
                return done(a, fa, ga)
            if da * (hi - lo) >= 0:
                hi, f_hi, d_hi = lo, f_lo, d_lo
            lo, f_lo, d_lo = a, fa, da
            if abs(hi - lo) <= 1e-16 * max(1.0, abs(lo)):
                break
        raise LineSearchFailure(f"zoom did not converge in {settings.max_linesearch} evaluations")

    a_prev, f_prev, d_prev = 0.0, f0, dphi0
    a = float(initial_step)
    first = True
    while evals < settings.max_linesearch:
        fa, ga, da = phi(a)
        if not armijo_ok(a, fa) or (not first and fa >= f_prev):
            return zoom(a_prev, f_prev, d_prev, a, fa, da)
        if abs(da) <= -c2 * dphi0:
            return done(a, fa, ga)
        if da >= 0:
            return zoom(a, fa, da, a_prev, f_prev, d_prev)
        a_prev, f_prev, d_prev = a, fa, da
        a *= 2.0
        first = False
    raise LineSearchFailure(f"no acceptable step in {settings.max_linesearch} evaluations")


def two_loop(g: np.ndarray, pairs, gamma: float) -> np.ndarray:
    """L-BFGS product ``H g`` from curvature pairs ``(s, y)`` (oldest first)."""
    q = np.array(g, dtype=float)
    alphas = []
    for s, y in reversed(pairs):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        q -= a * y
        alphas.append((a, rho))
    r = gamma * q
    for (s, y), (a, rho) in zip(pairs, reversed(alphas)):
        b = rho * (y @ r)
        r += (a - b) * s
    return r


def bfgs_inverse_update(h: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``(I - rho s y^T) H (I - rho y s^T) + rho s s^T``."""
    rho = 1.0 / (y @ s)
    hy = h @ y
    return h - rho * (np.outer(s, hy) + np.outer(hy, s)) + (rho * rho * (y @ hy) + rho) * np.outer(s, s)


def _quasi_newton(objective, gradient, x0, settings, *, dense, gtol, max_iter, deadline, stage):
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("initial point is not finite")
    f, g = _safe_eval(objective, gradient, x)
    if g is None:
        raise ValueError("objective is not finite at the initial point")
    evals = 1
    trace = [(stage, 0, f)]
    if settings.grad_norm(g) <= gtol:
        return StageResult(x, f, g, 0, TerminationReason.GTOL, trace, evals)

    pairs: deque = deque(maxlen=settings.memory)
    h = None
    gamma = 1.0
    it = 0
    while True:
        if dense:
            direction = -(h @ g) if h is not None else -g
        else:
            direction = -two_loop(g, list(pairs), gamma) if pairs else -g
        initial = 1.0 if (pairs or h is not None) else min(1.0, 1.0 / max(np.sum(np.abs(g)), 1e-300))
        try:
            ls = line_search_strong_wolfe(objective, gradient, x, direction, settings, initial, f, g)
        except LineSearchFailure as exc:
            logger.info("stage %d: line search failed at iteration %d: %s", stage, it, exc)
            return StageResult(x, f, g, it, TerminationReason.LINE_SEARCH, trace, evals)
        evals += ls.evaluations
        if ls.reset:
            pairs.clear()
            h = None
        s = ls.step * ls.direction
        x_new, f_new, g_new = x + s, ls.fun, ls.grad
        y = g_new - g
        sy = float(s @ y)
        if sy > _CURVATURE_EPS * float(np.linalg.norm(s) * np.linalg.norm(y)):
            if dense:
                if h is None:
                    h = (sy / float(y @ y)) * np.eye(x.size)
                h = bfgs_inverse_update(h, s, y)
            else:
                pairs.append((s, y))
                gamma = sy / float(y @ y)
        it += 1
        f_old = f
        x, f, g = x_new, f_new, g_new
        if it % settings.trace_every == 0:
            trace.append((stage, it, f))
        gnorm = settings.grad_norm(g)
        if settings.log_every and it % settings.log_every == 0:
            logger.info("stage %d iter %d S=%.12g |g|=%.3e", stage, it, f, gnorm)

        if f_old - f <= settings.ftol * max(abs(f_old), abs(f), 1.0):
            reason = TerminationReason.FTOL
        elif gnorm <= gtol:
            reason = TerminationReason.GTOL
        elif it >= max_iter:
            reason = TerminationReason.MAX_ITER
        elif deadline is not None and time.monotonic() >= deadline:
            reason = TerminationReason.WALL_CLOCK
        else:
            continue
        if trace[-1][1] != it:
            trace.append((stage, it, f))
        return StageResult(x, f, g, it, reason, trace, evals)


def _deadline(settings):
    if settings.wall_clock_limit is None:
        return None
    return time.monotonic() + settings.wall_clock_limit


def lbfgs(objective, gradient, x0, settings: OptimizerSettings | None = None, deadline=None) -> StageResult:
    """Limited-memory BFGS with ``settings.memory`` curvature pairs (stage one)."""
    settings = settings or OptimizerSettings()
    return _quasi_newton(
        objective, gradient, x0, settings,
        dense=False, gtol=settings.gtol_stage1, max_iter=settings.max_iter_stage1,
        deadline=deadline if deadline is not None else _deadline(settings), stage=1,
    )


def bfgs(objective, gradient, x0, settings: OptimizerSettings | None = None, deadline=None) -> StageResult:
    """Dense-inverse BFGS (stage two)."""
    settings = settings or OptimizerSettings()
    return _quasi_newton(
        objective, gradient, x0, settings,
        dense=True, gtol=settings.gtol_stage2, max_iter=settings.max_iter_stage2,
        deadline=deadline if deadline is not None else _deadline(settings), stage=2,
    )


def _initial_params(shape, rng, mu0, sigma_c, sigma_mu):
    for _ in range(_MAX_REINIT):
        params = init_random(shape, rng, sigma_c=sigma_c, sigma_mu=sigma_mu, mu0=mu0)
        try:
            decode(params)
        except DegenerateTrace:
            continue
        return params
    raise DegenerateTrace(-1, 0.0)


def minimize_two_stage(
    shape,
    seed: int,
    settings: OptimizerSettings | None = None,
    mu0: float | None = None,
    sigma_c: float = 0.01,
    sigma_mu: float = 0.01,
) -> RunResult:
    """Random start, then L-BFGS, then BFGS from the L-BFGS end point."""
    settings = settings or OptimizerSettings()
    n, f, m = shape
    start = time.monotonic()
    rng = np.random.default_rng(seed)
    params = _initial_params((n, f, m), rng, mu0, sigma_c, sigma_mu)
    obj = ActionObjective((n, f, m))
    deadline = _deadline(settings)

    s1 = lbfgs(obj.value, obj.gradient, params.to_vector(), settings, deadline)
    logger.info("seed %s stage 1: %s after %d iterations, S=%.12g", seed, s1.reason.value, s1.iterations, s1.fun)
    s2 = None
    final = s1
    if s1.reason != TerminationReason.WALL_CLOCK:
        s2 = bfgs(obj.value, obj.gradient, s1.x, settings, deadline)
        logger.info("seed %s stage 2: %s after %d iterations, S=%.12g", seed, s2.reason.value, s2.iterations, s2.fun)
        final = s2

    final_params = UnconstrainedParams.from_vector(final.x, (n, f, m))
    report = causal_action(decode(final_params))
    trace = s1.trace + (s2.trace[1:] if s2 is not None else [])
    return RunResult(
        final_params=final_params,
        final_action=report.action,
        final_boundedness=report.boundedness,
        iterations=(s1.iterations, s2.iterations if s2 else 0),
        termination_reason=final.reason,
        action_trace=trace,
        seed=int(seed),
        stage_reasons=(s1.reason, s2.reason if s2 else None),
        elapsed=time.monotonic() - start,
    )


def _run_one(args):
    shape, seed, settings, kwargs = args
    try:
        return seed, minimize_two_stage(shape, seed, settings, **kwargs), None
    except Exception as exc:  # recorded per seed, see multi_restart
        return seed, None, f"{type(exc).__name__}: {exc}"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def multi_restart(shape, seeds, settings: OptimizerSettings | None = None, workers: int | None = None, **kwargs) -> RestartResult:
    """Run :func:`minimize_two_stage` for every seed and keep the lowest action.

    Failing seeds are collected in ``failures``; only if every seed fails is an
    error raised.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    settings = settings or OptimizerSettings()
    workers = worker_count() if workers is None else workers
    jobs = [(tuple(shape), s, settings, kwargs) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    results = [r for _, r, _ in outcomes if r is not None]
    failures = {s: err for s, r, err in outcomes if r is None}
    if not results:
        raise RuntimeError(f"all {len(seeds)} restarts failed: {failures}")
    best = min(results, key=lambda r: r.final_action)
    return RestartResult(best=best, results=results, failures=failures)


def with_overrides(settings: OptimizerSettings, **overrides) -> OptimizerSettings:
    return replace(settings, **{k: v for k, v in overrides.items() if v is not None})
