"""Limited-memory BFGS over the projection matrix, and the end-to-end fit."""
from __future__ import annotations

import json
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import LabeledDataset
from .metric import ProjectionMatrix, as_projection
from .objective import HyperParams, PairObjective, PairStrategy
from .pairs import PairSets, build_pairs_knn, build_pairs_random

log = logging.getLogger(__name__)


class SolverError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 200
    gradient_tolerance: float = 1e-5
    history_size: int = 10
    objective_tolerance: float = 1e-9
    # Wolfe constants: sufficient decrease and curvature
    c1: float = 1e-4
    c2: float = 0.9
    max_line_search: int = 20
    verbose: bool = False

    def __post_init__(self):
        for name in ("max_iterations", "gradient_tolerance", "history_size",
                     "objective_tolerance", "max_line_search"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")


@dataclass
class MinimizeResult:
    L: ProjectionMatrix
    value: float
    initial_value: float
    iterations: int
    evaluations: int
    grad_max: float
    message: str
    history: list[float] = field(default_factory=list)
    seconds: float = 0.0


def _check_finite(value, grad, iteration):
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise SolverError(f"non-finite objective or gradient at iteration {iteration}")


def _interpolate(a_lo, a_hi, f_lo, f_hi, g_lo):
    # minimizer of the quadratic through (a_lo, f_lo, g_lo) and (a_hi, f_hi),
    # safeguarded to stay well inside the bracket
    span = a_hi - a_lo
    denom = 2.0 * (f_hi - f_lo - g_lo * span)
    a = a_lo - g_lo * span * span / denom if denom > 0 else a_lo + 0.5 * span
    lo, hi = sorted((a_lo, a_hi))
    pad = 0.1 * (hi - lo)
    return min(max(a, lo + pad), hi - pad)


def _line_search(fg, x, f0, g0, direction, step, opts):
    """Strong-Wolfe bracketing/zoom line search.

    Returns ``(alpha, f, g, n_evals, wolfe)``.  When no Wolfe point is found
    the best point with strict sufficient decrease is returned with ``wolfe=False``;
    ``alpha`` is None when not even that exists.
    """
    dg0 = float(g0 @ direction)
    evals = 0
    best = None

    def trial(alpha):
        nonlocal evals, best
        evals += 1
        f, g = fg(x + alpha * direction)
        # the fallback must make real progress: f0 + c1*alpha*dg0 rounds to f0
        # for tiny steps, so strict decrease is demanded as well
        if (np.isfinite(f) and f < f0 and f <= f0 + opts.c1 * alpha * dg0
                and (best is None or f < best[1])):
            best = (alpha, f, g)
        return f, g

    def zoom(a_lo, a_hi, f_lo, f_hi, g_lo):
        while evals < opts.max_line_search:
            a = _interpolate(a_lo, a_hi, f_lo, f_hi, g_lo)
            f, g = trial(a)
            dg = float(g @ direction)
            if not np.isfinite(f) or f > f0 + opts.c1 * a * dg0 or f >= f_lo:
                a_hi, f_hi = a, f if np.isfinite(f) else np.inf
            else:
                if abs(dg) <= -opts.c2 * dg0:
                    return a, f, g
                if dg * (a_hi - a_lo) >= 0:
                    a_hi, f_hi = a_lo, f_lo
                a_lo, f_lo, g_lo = a, f, dg
        return None

    a_prev, f_prev, dg_prev = 0.0, f0, dg0
    a = step
    while evals < opts.max_line_search:
        f, g = trial(a)
        if not np.isfinite(f) or f > f0 + opts.c1 * a * dg0 or (evals > 1 and f >= f_prev):
            found = zoom(a_prev, a, f_prev, f if np.isfinite(f) else np.inf, dg_prev)
            break
        dg = float(g @ direction)
        if abs(dg) <= -opts.c2 * dg0:
            found = (a, f, g)
            break
        if dg >= 0:
            found = zoom(a, a_prev, f, f_prev, dg)
            break
        a_prev, f_prev, dg_prev = a, f, dg
        a *= 2.0
    else:
        found = None

    if found is not None:
        return found[0], found[1], found[2], evals, True
    if best is not None:
        return best[0], best[1], best[2], evals, False
    return None, f0, g0, evals, False


def minimize(fun: Callable, grad: Callable | None, L0, opts: SolverOptions | None = None,
             value_and_grad: Callable | None = None) -> MinimizeResult:
    """Minimize a smooth-ish function of a matrix with L-BFGS.

    ``fun(L)`` and ``grad(L)`` take and return arrays shaped like ``L0``;
    alternatively ``value_and_grad`` returns both at once.  Stops when the
    largest gradient entry drops below the tolerance, the relative change of
    the objective falls below ``objective_tolerance``, the iteration budget
    is spent, or the line search cannot make progress.  Accepted steps never
    increase the objective.
    """
    opts = opts or SolverOptions()
    start = time.perf_counter()
    L0 = np.array(as_projection(L0).matrix, dtype=float)
    shape = L0.shape

    if value_and_grad is None:
        if grad is None:
            raise ValueError("need grad or value_and_grad")

        def value_and_grad(L):
            return fun(L), grad(L)

    n_evals = 0

    def fg(flat):
        nonlocal n_evals
        n_evals += 1
        f, g = value_and_grad(flat.reshape(shape))
        return float(f), np.asarray(g, dtype=float).ravel()

    x = L0.ravel()
    f, g = fg(x)
    _check_finite(f, g, 0)
    f_init = f
    history = [f]
    s_hist: deque = deque(maxlen=opts.history_size)
    y_hist: deque = deque(maxlen=opts.history_size)
    message = "iteration limit reached"
    iteration = 0

    while True:
        gmax = float(np.max(np.abs(g))) if g.size else 0.0
        if gmax < opts.gradient_tolerance:
            message = "gradient tolerance reached"
            break
        if iteration >= opts.max_iterations:
            break
        iteration += 1

        # two-loop recursion
        q = -g
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / float(y @ s)
            alpha = rho * float(s @ q)
            q = q - alpha * y
            alphas.append((rho, alpha))
        if s_hist:
            s, y = s_hist[-1], y_hist[-1]
            q = q * (float(s @ y) / float(y @ y))
        for (s, y), (rho, alpha) in zip(zip(s_hist, y_hist), reversed(alphas)):
            beta = rho * float(y @ q)
            q = q + (alpha - beta) * s
        direction = q
        if float(direction @ g) >= 0:
            s_hist.clear()
            y_hist.clear()
            direction = -g
        step = 1.0 if s_hist else min(1.0, 1.0 / max(np.linalg.norm(g), 1e-300))

        alpha, f_new, g_new, _, wolfe = _line_search(fg, x, f, g, direction, step, opts)
        if alpha is None:
            if s_hist:
                # stale curvature pairs can spoil the direction; retry once from scratch
                s_hist.clear()
                y_hist.clear()
                iteration -= 1
                continue
            message = "line search failed"
            break
        _check_finite(f_new, g_new, iteration)
        x_new = x + alpha * direction
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
        f_prev = f
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if opts.verbose:
            log.info(json.dumps({"event": "iteration", "iteration": iteration, "objective": f,
                                 "grad_max": float(np.max(np.abs(g))), "wolfe": wolfe}))
        # tiny non-Wolfe steps say nothing about convergence
        if wolfe and abs(f_prev - f) <= opts.objective_tolerance * max(abs(f_prev), abs(f), 1.0):
            message = "objective change below tolerance"
            break

    result = MinimizeResult(
        L=ProjectionMatrix(x.reshape(shape)),
        value=f,
        initial_value=f_init,
        iterations=iteration,
        evaluations=n_evals,
        grad_max=float(np.max(np.abs(g))) if g.size else 0.0,
        message=message,
        history=history,
        seconds=time.perf_counter() - start,
    )
    if opts.verbose:
        log.info(json.dumps({"event": "fit", "iterations": result.iterations,
                             "evaluations": result.evaluations, "objective": result.value,
                             "grad_max": result.grad_max, "seconds": result.seconds,
                             "message": result.message}))
    return result


def build_pairs(train: LabeledDataset, hp: HyperParams, seed=0) -> PairSets:
    """Pairs for ``hp``: kNN rule, or 2nk random pairs for the random strategy."""
    if hp.pair_strategy is PairStrategy.KNN:
        return build_pairs_knn(train, hp.k)
    return build_pairs_random(train, 2 * train.n * hp.k, seed)


def fit_metric(train: LabeledDataset, hp: HyperParams, opts: SolverOptions | None = None,
               pairs: PairSets | None = None, seed=0, rank: int | None = None) -> MinimizeResult:
    """Learn L from the identity; returns the full optimizer result."""
    train.require_both_classes(1)
    if pairs is None:
        pairs = build_pairs(train, hp, seed)
    problem = PairObjective(pairs, train.features, hp)
    L0 = ProjectionMatrix.identity(train.d, rank)
    return minimize(None, None, L0, opts, value_and_grad=problem.value_and_grad)


def fit_iml(train: LabeledDataset, hp: HyperParams, opts: SolverOptions | None = None,
            pairs: PairSets | None = None, seed=0) -> ProjectionMatrix:
    """Build pairs per ``hp``, minimize the objective from L = I, return L."""
    return fit_metric(train, hp, opts, pairs=pairs, seed=seed).L
