"""Douglas-Rachford splitting for the first-stage hinge-loss minimization.

The splitting works on X = H1 x H2 with f(p, u) = sum_i h_i(u_i) (shifted max
per sample) and g = indicator of the graph {u = A p}. The operator is the
composition of the two reflections, reflect-through-the-graph first; fixed
points map through the graph projection onto the hinge-loss minimizers, and
discarding u yields the classifier.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import ClassifierParams, TrainingDataset, hinge_loss
from .operators import DataOperator
from .points import ProductPoint, SplitPoint, split_distance
from .projections import prox_shifted_max_rows


def prox_hinge_sum(p: np.ndarray, u: np.ndarray, ops: DataOperator) -> tuple[np.ndarray, np.ndarray]:
    """Prox of f: p passes through, each u block gets the shifted-max prox."""
    if u.shape != (ops.n_samples, ops.n_classes):
        raise ConfigError(f"u has shape {u.shape}, expected {(ops.n_samples, ops.n_classes)}")
    return p.copy(), prox_shifted_max_rows(u, ops.hinge_shifts)


def apply_t_drs(x: SplitPoint, ops: DataOperator) -> SplitPoint:
    """One application of (2 prox_f - Id) o (2 prox_g - Id)."""
    gp, gu = ops.project_graph(x.p, x.u)
    rp = 2.0 * gp - x.p
    ru = 2.0 * gu - x.u
    # prox_f leaves the p component untouched, so the second reflection only
    # reshapes the u blocks.
    fu = prox_shifted_max_rows(ru, ops.hinge_shifts)
    return SplitPoint(p=rp, u=2.0 * fu - ru)


def fixed_point_residual(x: SplitPoint, ops: DataOperator) -> float:
    """||T_DRS(x) - x|| in the product norm."""
    return split_distance(apply_t_drs(x, ops), x)


def apply_t_drs_relaxed(z: ProductPoint, alpha: float, ops: DataOperator) -> ProductPoint:
    """Averaged DRS update of the (p, u) blocks; omega and t pass through."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"relaxation alpha must lie in (0, 1), got {alpha}")
    tx = apply_t_drs(SplitPoint(z.p, z.u), ops)
    return ProductPoint(
        p=(1.0 - alpha) * z.p + alpha * tx.p,
        u=(1.0 - alpha) * z.u + alpha * tx.u,
        omega=z.omega.copy(),
        t=z.t,
    )


def extract_minimizer(x: SplitPoint, ops: DataOperator) -> ClassifierParams:
    """Map a (near) fixed point to a classifier: graph projection, then drop u."""
    p_hat, _ = ops.project_graph(x.p, x.u)
    return ClassifierParams.from_vector(p_hat, ops.n_classes, ops.n_features)


@dataclass
class HingeMinimization:
    """Result of running the averaged DRS iteration to (near) convergence."""

    params: ClassifierParams
    hinge_loss: float
    residual: float
    iterations: int
    wall_time_s: float
    fixed_point: SplitPoint = field(repr=False)


def minimize_hinge(dataset: TrainingDataset, *, alpha: float = 0.5,
                   max_iterations: int = 100_000, tolerance: float = 1e-10,
                   x0: SplitPoint | None = None,
                   ops: DataOperator | None = None) -> HingeMinimization:
    """First-stage solve: iterate x <- (1-a) x + a T_DRS(x) until the residual drops.

    Returns the extracted classifier together with the final fixed-point
    residual; callers decide what residual is small enough to trust.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"relaxation alpha must lie in (0, 1), got {alpha}")
    if ops is None:
        ops = DataOperator(dataset)
    x = x0.copy() if x0 is not None else SplitPoint(
        p=np.zeros(ops.dim_h1), u=np.zeros((ops.n_samples, ops.n_classes)))
    start = time.perf_counter()
    residual = float("inf")
    n = 0
    for n in range(1, max_iterations + 1):
        tx = apply_t_drs(x, ops)
        residual = split_distance(tx, x)
        x = SplitPoint(p=(1.0 - alpha) * x.p + alpha * tx.p,
                       u=(1.0 - alpha) * x.u + alpha * tx.u)
        if residual < tolerance:
            break
    params = extract_minimizer(x, ops)
    return HingeMinimization(
        params=params,
        hinge_loss=hinge_loss(params, dataset),
        residual=residual,
        iterations=n,
        wall_time_s=time.perf_counter() - start,
        fixed_point=x,
    )
