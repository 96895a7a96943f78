"""Single-level weighted-sum baseline: quadratic pair penalty plus C x hinge loss.

Minimizes (1/2) sum_{r<s} ||w_r - w_s||^2 + C Phi_D(p) with all offsets pinned
at zero, by a forward-backward primal-dual iteration: an explicit gradient
step on the quadratic term corrected through the adjoint of the stacked score
operator, and a dual prox that is a shifted, mass-C simplex projection per
sample block.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError
from .model import ClassifierParams, TrainingDataset, evaluate, hinge_loss
from .operators import DataOperator
from .report import HistoryEntry, SolverReport


@dataclass
class NcrConfig:
    """Baseline solver knobs; step sizes of None are derived from operator norms."""

    c_value: float = 2.0**10
    tau: float | None = None
    sigma: float | None = None
    max_iterations: int = 200_000
    tolerance: float = 1e-7
    log_every: int = 1000

    def __post_init__(self):
        if self.c_value <= 0:
            raise ConfigError(f"C must be positive, got {self.c_value}")
        if self.tau is not None and self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.sigma is not None and self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if (self.tau is None) != (self.sigma is None):
            raise ConfigError("tau and sigma must be given together or both left unset")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")


def power_iteration(matvec, dim: int, iterations: int = 50, tolerance: float = 1e-8) -> float:
    """Largest singular value estimate via power iteration on the Gram operator.

    ``matvec`` must apply M^T M; the return value is ||M||.
    """
    v = 1.0 + np.arange(dim, dtype=float)  # deterministic, not orthogonal to anything by accident
    v /= np.linalg.norm(v)
    value = 0.0
    for _ in range(iterations):
        w = matvec(v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - value) <= tolerance * max(1.0, norm):
            value = norm
            break
        value = norm
    return float(np.sqrt(value))


def quadratic_term_gradient(params: ClassifierParams) -> np.ndarray:
    """Gradient of (1/2) sum_{r<s} ||w_r - w_s||^2 in H1; offset blocks are zero."""
    k = params.n_classes
    grad_w = k * params.w - params.w.sum(axis=0)[None, :]
    return np.concatenate([grad_w.ravel(), np.zeros(k)])


def objective_ncr(params: ClassifierParams, c_value: float, dataset: TrainingDataset) -> float:
    """The weighted-sum objective (quadratic pair penalty + C x hinge loss)."""
    if c_value <= 0:
        raise ConfigError(f"C must be positive, got {c_value}")
    diffs = params.w[:, None, :] - params.w[None, :, :]
    iu = np.triu_indices(params.n_classes, k=1)
    quad = 0.5 * float(np.sum(np.linalg.norm(diffs, axis=2)[iu] ** 2))
    return quad + c_value * hinge_loss(params, dataset)


def _project_scaled_shifted_simplex(z: np.ndarray, shifts: np.ndarray, sigma: float,
                                    c_value: float) -> np.ndarray:
    """Row-wise dual prox: P_{C * simplex}(z + sigma * shift)."""
    from .projections import project_simplex_rows

    return project_simplex_rows(z + sigma * shifts, mass=c_value)


def solve_ncr(dataset: TrainingDataset, cfg: NcrConfig | None = None,
              ops: DataOperator | None = None) -> tuple[ClassifierParams, SolverReport]:
    """Train the baseline classifier (offsets fixed at zero)."""
    cfg = cfg if cfg is not None else NcrConfig()
    if ops is None:
        ops = DataOperator(dataset)
    k, n, m = ops.n_classes, ops.n_features, ops.n_samples
    a_w = ops.matrix[:, :k * n]  # offsets never enter the baseline's variable space
    norm_a = power_iteration(lambda v: a_w.T @ (a_w @ v), k * n)
    lipschitz = float(k)  # largest eigenvalue of the quadratic term's Hessian

    if cfg.tau is None:
        # The dual blocks live on the mass-C simplex while the primal stays
        # O(1), so balance the steps by sqrt(C); sigma = 1/||A|| stalls badly
        # at large C.
        sigma = np.sqrt(cfg.c_value) / norm_a if norm_a > 0 else 1.0
        tau = 0.99 / (sigma * norm_a**2 + lipschitz / 2.0)
    else:
        tau, sigma = cfg.tau, cfg.sigma
        if tau * (sigma * norm_a**2 + lipschitz / 2.0) > 1.0:
            raise ConfigError(
                f"step sizes inadmissible: tau (sigma ||A||^2 + L/2) = "
                f"{tau * (sigma * norm_a**2 + lipschitz / 2.0):.6g} > 1")

    w = np.zeros((k, n))
    dual = np.zeros((m, k))
    shifts = ops.hinge_shifts

    def current_params(w_mat: np.ndarray) -> ClassifierParams:
        return ClassifierParams(w=w_mat.copy(), b=np.zeros(k))

    initial_objective = objective_ncr(current_params(w), cfg.c_value, dataset)
    guard = 10.0 * max(initial_objective, 1.0)

    start = time.perf_counter()
    history: list[HistoryEntry] = []
    residual = float("inf")
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        grad = k * w - w.sum(axis=0)[None, :]
        w_new = w - tau * (grad + (a_w.T @ dual.ravel()).reshape(k, n))
        bar = 2.0 * w_new - w
        z = dual + sigma * (a_w @ bar.ravel()).reshape(m, k)
        dual_new = _project_scaled_shifted_simplex(z, shifts, sigma, cfg.c_value)

        rp = np.linalg.norm((w - w_new) / tau - (a_w.T @ (dual - dual_new).ravel()).reshape(k, n))
        rd = np.linalg.norm((dual - dual_new) / sigma - (a_w @ (w - w_new).ravel()).reshape(m, k))
        residual = float(np.hypot(rp, rd))
        w, dual = w_new, dual_new

        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(dual))):
            raise DivergenceError(f"non-finite iterate at iteration {it}")

        if cfg.log_every and (it % cfg.log_every == 0 or it == cfg.max_iterations):
            params_now = current_params(w)
            obj_now = objective_ncr(params_now, cfg.c_value, dataset)
            history.append(HistoryEntry(n=it, value=obj_now,
                                        hinge_loss=hinge_loss(params_now, dataset),
                                        residual=residual))
            if obj_now > guard:
                raise DivergenceError(
                    f"objective {obj_now:.6g} exceeded 10x its initial value at iteration {it}")

        if residual < cfg.tolerance:
            converged = True
            break

    params = current_params(w)
    report = SolverReport(
        solver="ncr",
        iterations=it,
        converged=converged,
        final_residual=residual,
        final_value=objective_ncr(params, cfg.c_value, dataset),
        value_label="objective",
        evaluation=evaluate(params, dataset),
        wall_time_s=time.perf_counter() - start,
        history=history,
        notes={"c_value": cfg.c_value, "tau": tau, "sigma": sigma, "operator_norm": norm_a},
    )
    return params, report
