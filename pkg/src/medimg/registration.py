"""End-to-end intensity registration drivers (rigid and FFD)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GeometryMismatchError, InvalidArgumentError
from .image import Image
from .metrics import METRICS, MetricContext
from .optimize import ObjectiveSpec, cg_minimize, lbfgs_minimize
from .transforms import (
    FfdState,
    rigid_params_to_matrix,
    transform_ffd,
    transform_rigid,
)

OPTIMIZERS = {"lbfgs": lbfgs_minimize, "cg": cg_minimize}


@dataclass
class RegistrationProblem:
    fixed: Image
    moving: Image
    transform: str = "rigid"            # 'rigid' or 'ffd'
    metric: str = "ncc"                 # 'ncc', 'nmi' or 'ssd'
    optimizer: str = "lbfgs"
    x0: Optional[np.ndarray] = None
    ffd_state: Optional[FfdState] = None
    bins: int = 64
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fixed.ndim != self.moving.ndim:
            raise GeometryMismatchError("fixed and moving dimensionality differ")
        if self.metric not in METRICS:
            raise InvalidArgumentError(f"unknown metric {self.metric!r}")
        if self.optimizer not in OPTIMIZERS:
            raise InvalidArgumentError(f"unknown optimizer {self.optimizer!r}")
        if self.transform == "rigid":
            n_params = 3 if self.fixed.ndim == 2 else 6
        elif self.transform == "ffd":
            if self.ffd_state is None:
                raise InvalidArgumentError("ffd transform needs an FfdState")
            n_params = self.ffd_state.num_params
        else:
            raise InvalidArgumentError(f"unknown transform {self.transform!r}")
        if self.x0 is None:
            self.x0 = np.zeros(n_params)
        else:
            self.x0 = np.asarray(self.x0, dtype=float).ravel()
        if self.x0.size != n_params:
            raise InvalidArgumentError(
                f"x0 length {self.x0.size} != transform parameter count {n_params}")

    def transform_fn(self):
        if self.transform == "rigid":
            return lambda moving, p: transform_rigid(moving, p, ref=self.fixed)
        state = self.ffd_state
        return lambda moving, p: transform_ffd(moving, p, state, ref=self.fixed)


@dataclass
class RegistrationResult:
    params: np.ndarray
    cost_initial: float
    cost_final: float
    iterations: int
    warped: Image
    matrix: Optional[np.ndarray] = None


def register(problem):
    """Minimize the metric over the transform family, starting at x0."""
    ctx = MetricContext(problem.fixed, problem.moving, problem.transform_fn(),
                        bins=problem.bins)
    metric = METRICS[problem.metric]
    spec = ObjectiveSpec(f=lambda x: metric(ctx, x), **problem.options)
    cost_initial = spec.f(problem.x0)
    result = OPTIMIZERS[problem.optimizer](spec, problem.x0)
    params = result.x
    cost_final = result.fun
    if cost_final > cost_initial:  # optimizer contract: never worse than x0
        params, cost_final = problem.x0, cost_initial
    warped = ctx.transform_fn(problem.moving, params)
    matrix = None
    if problem.transform == "rigid":
        matrix = rigid_params_to_matrix(
            params, centre=problem.fixed.geometric_centre())
    return RegistrationResult(params, float(cost_initial), float(cost_final),
                              result.iterations, warped, matrix)


def difference_image(a, b):
    """Voxel-wise a - b on a's geometry; grids must match."""
    if not (np.array_equal(a.size, b.size)
            and np.allclose(a.origin, b.origin)
            and np.allclose(a.spacing, b.spacing)
            and np.allclose(a.orientation, b.orientation)):
        raise GeometryMismatchError("difference_image requires identical grids")
    return Image.like(a, data=a.data - b.data)
