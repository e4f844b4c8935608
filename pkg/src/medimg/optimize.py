"""General-purpose minimizers: L-BFGS, nonlinear conjugate gradient, RANSAC."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, InvalidStartError, NoConsensusError

LBFGS_HISTORY = 10
ARMIJO_C1 = 1e-4


@dataclass
class ObjectiveSpec:
    f: Callable
    grad: Optional[Callable] = None
    fd_step: float = 1e-4        # per-component step: max(fd_step, fd_step * |x_i|)
    max_iter: int = 400
    tol_x: float = 1e-8
    tol_f: float = 1e-10

    def gradient(self, x, fx=None):
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return self._fd_gradient(x)

    def _fd_gradient(self, x):
        g = np.empty(x.size)
        for i in range(x.size):
            h = max(self.fd_step, self.fd_step * abs(x[i]))
            xp = x.copy(); xp[i] += h
            xm = x.copy(); xm[i] -= h
            g[i] = (self.f(xp) - self.f(xm)) / (2 * h)
        return g


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool


def _line_search(f, x, fx, g, direction):
    """Armijo backtracking; returns (x_new, f_new, step) or None on failure."""
    slope = float(g @ direction)
    if slope >= 0:
        direction = -g
        slope = float(g @ direction)
        if slope >= 0:
            return None
    step = 1.0
    for _ in range(60):
        x_new = x + step * direction
        f_new = f(x_new)
        if np.isfinite(f_new) and f_new <= fx + ARMIJO_C1 * step * slope:
            return x_new, float(f_new), step
        step *= 0.5
    return None


def _check_start(spec, x0):
    x0 = np.asarray(x0, dtype=float).ravel()
    f0 = float(spec.f(x0))
    if not np.isfinite(f0):
        raise InvalidStartError("objective is non-finite at the start point")
    return x0, f0


def lbfgs_minimize(spec, x0):
    """Limited-memory BFGS with Armijo backtracking line search."""
    x, fx = _check_start(spec, x0)
    g = spec.gradient(x)
    s_hist, y_hist = [], []
    converged = False
    it = 0
    for it in range(1, spec.max_iter + 1):
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / float(y @ s)
            a = rho * float(s @ q)
            alphas.append((a, rho, s, y))
            q -= a * y
        if y_hist:
            y_last = y_hist[-1]
            s_last = s_hist[-1]
            q *= float(s_last @ y_last) / float(y_last @ y_last)
        for a, rho, s, y in reversed(alphas):
            b = rho * float(y @ q)
            q += (a - b) * s
        direction = -q
        res = _line_search(spec.f, x, fx, g, direction)
        if res is None:
            break
        x_new, f_new, step = res
        g_new = spec.gradient(x_new)
        s = x_new - x
        y = g_new - g
        if float(s @ y) > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y) + 1e-300):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > LBFGS_HISTORY:
                s_hist.pop(0)
                y_hist.pop(0)
        else:
            # negative curvature: stale pairs would poison the direction
            s_hist, y_hist = [], []
        dx = float(np.linalg.norm(s))
        df = abs(fx - f_new)
        x, fx, g = x_new, f_new, g_new
        if dx < spec.tol_x or df < spec.tol_f:
            converged = True
            break
    return MinimizeResult(x, fx, it, converged)


def cg_minimize(spec, x0):
    """Fletcher-Reeves nonlinear conjugate gradient with Armijo line search."""
    x, fx = _check_start(spec, x0)
    g = spec.gradient(x)
    direction = -g
    converged = False
    it = 0
    for it in range(1, spec.max_iter + 1):
        res = _line_search(spec.f, x, fx, g, direction)
        if res is None:
            break
        x_new, f_new, step = res
        g_new = spec.gradient(x_new)
        beta = float(g_new @ g_new) / max(float(g @ g), 1e-300)
        direction = -g_new + beta * direction
        if float(direction @ g_new) >= 0:  # restart on loss of descent
            direction = -g_new
        dx = float(np.linalg.norm(x_new - x))
        df = abs(fx - f_new)
        x, fx, g = x_new, f_new, g_new
        if dx < spec.tol_x or df < spec.tol_f:
            converged = True
            break
    return MinimizeResult(x, fx, it, converged)


@dataclass
class RansacSpec:
    fit: Callable        # (data_subset) -> model
    distance: Callable   # (model, data) -> per-datum nonnegative distances
    min_samples: int
    threshold: float
    max_iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.threshold <= 0:
            raise InvalidArgumentError("RANSAC threshold must be positive")
        if self.min_samples < 1:
            raise InvalidArgumentError("min_samples must be >= 1")


def ransac(data, spec):
    """Seeded RANSAC; returns (model, inlier_mask), refit on the inlier set.

    Sampling draws index subsets from the canonically sorted data order, so
    the result is invariant to input permutation for a given seed.
    """
    data = np.asarray(data, dtype=float)
    m = data.shape[0]
    if m < spec.min_samples:
        raise NoConsensusError(
            f"need at least {spec.min_samples} data points, got {m}")
    order = np.lexsort(tuple(data.reshape(m, -1).T[::-1]))
    canonical = data[order]
    rng = np.random.default_rng(spec.seed)
    best = None  # (inlier_count, mean_dist, model, mask)
    for _ in range(spec.max_iterations):
        subset = rng.choice(m, size=spec.min_samples, replace=False)
        try:
            model = spec.fit(canonical[subset])
        except np.linalg.LinAlgError:
            continue
        dist = np.asarray(spec.distance(model, canonical), dtype=float)
        mask = dist <= spec.threshold
        count = int(mask.sum())
        if count < spec.min_samples:
            continue
        mean_dist = float(dist[mask].mean())
        key = (-count, mean_dist)
        if best is None or key < best[0]:
            best = (key, model, mask)
    if best is None:
        raise NoConsensusError("no model reached the minimum inlier count")
    _, _, mask = best
    model = spec.fit(canonical[mask])
    dist = np.asarray(spec.distance(model, canonical), dtype=float)
    mask = dist <= spec.threshold
    # map the canonical-order mask back to the input order
    out_mask = np.empty(m, dtype=bool)
    out_mask[order] = mask
    return model, out_mask
