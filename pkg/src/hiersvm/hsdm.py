"""Hierarchical solve: hybrid steepest descent over the fixed-point set.

The composed operator T applies, in order, every pair-link projection, every
second-order-cone projection, the relaxed DRS update of (p, u), and finally
the bounding-box projection. Its fixed points are exactly the feasible points
of the epigraph reformulation (hinge minimizers whose omega blocks equal the
linked pair differences, every pair norm below t, inside the box), and the
hybrid steepest descent iteration z <- T(z) - lambda_n grad(t) minimizes the
epigraph variable t over that set.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .drs import apply_t_drs_relaxed, extract_minimizer, minimize_hinge
from .errors import ConfigError, DivergenceError
from .model import ClassifierParams, TrainingDataset, evaluate
from .operators import DataOperator
from .points import ProductPoint, SplitPoint, check_product_shapes, product_distance, zero_product_point
from .projections import BoundingBox, compute_radii, project_bounding_box, project_soc
from .report import HistoryEntry, SolverReport


@dataclass
class HsdmConfig:
    """Knobs of the hierarchical solver.

    ``rho1`` of None resolves to 100x the largest sample norm. The step
    sequence is lambda_n = lambda1 / n**decay_exponent for the first
    ``annealing_iterations`` steps and 0 afterwards; the tail with lambda = 0
    is a pure fixed-point (feasibility) phase that lets the iterate settle
    onto Fix(T) so the extracted classifier attains the first-stage minimum to
    high accuracy in finite time.
    """

    rho1: float | None = None
    upsilon: float | None = None
    alpha: float = 0.5
    lambda1: float = 1.0
    decay_exponent: float = 1.0
    schedule: str = "harmonic"  # "harmonic": lambda1 / n^gamma; "adaptive": level halving
    lambda_floor: float = 1e-5  # adaptive only: smallest nonzero level
    settle_fraction: float = 0.05  # adaptive only: level ends once residual < frac * lambda
    max_iterations: int = 200_000
    annealing_iterations: int | None = None  # harmonic only; None -> max_iterations // 2
    tolerance: float = 1e-7
    t_drift_tolerance: float = 1e-9
    drift_window: int = 100
    log_every: int = 100
    stage1_refine: bool = True
    stage1_tolerance: float = 1e-12
    stage1_max_iterations: int = 50_000
    z0: ProductPoint | None = None

    def __post_init__(self):
        if self.rho1 is not None and self.rho1 <= 0:
            raise ConfigError(f"rho1 must be positive, got {self.rho1}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.lambda1 < 0:
            raise ConfigError(f"lambda1 must be nonnegative, got {self.lambda1}")
        if not 0.0 < self.decay_exponent <= 1.0:
            raise ConfigError(f"decay exponent must lie in (0, 1], got {self.decay_exponent}")
        if self.schedule not in ("harmonic", "adaptive"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if self.lambda_floor <= 0 or self.settle_fraction <= 0:
            raise ConfigError("lambda_floor and settle_fraction must be positive")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if self.annealing_iterations is not None and self.annealing_iterations < 0:
            raise ConfigError("annealing_iterations must be nonnegative")
        if self.drift_window < 1:
            raise ConfigError("drift_window must be at least 1")

    @property
    def effective_annealing(self) -> int:
        if self.annealing_iterations is None:
            return self.max_iterations // 2
        return self.annealing_iterations


def lambda_schedule(n: int, cfg: HsdmConfig) -> float:
    """Step size lambda_n = lambda1 / n^gamma during annealing, zero in the tail.

    This is the admissible slowly-vanishing family (vanishing, divergent sum,
    summable increments). The zero tail turns the final iterations into a pure
    fixed-point polish so finite runs actually land on the feasible set. The
    "adaptive" schedule is stateful (levels advance when the iterate settles)
    and is therefore managed inside solve_rhc rather than by this function.
    """
    if n < 1:
        raise ConfigError(f"schedule index must be >= 1, got {n}")
    if n > cfg.effective_annealing:
        return 0.0
    return cfg.lambda1 / float(n) ** cfg.decay_exponent


def benchmark_config(**overrides) -> HsdmConfig:
    """Solver configuration used by the benchmark pipeline and acceptance runs.

    Adaptive level-halving reaches step sizes ~1e-5 in a few thousand
    iterations where the harmonic default would need ~1e5 times more, and the
    first-stage refinement pins the extracted classifier to the hinge-loss
    minimizers.
    """
    base = dict(schedule="adaptive")
    base.update(overrides)
    return HsdmConfig(**base)


def apply_T(z: ProductPoint, ops: DataOperator, box: BoundingBox, alpha: float) -> ProductPoint:
    """The composed averaged operator: pair links, cones, relaxed DRS, box."""
    p, u = z.p.copy(), z.u.copy()
    omega, t = z.omega.copy(), z.t
    for idx, (r, s) in enumerate(ops.pairs):
        p, u, omega[idx] = ops.project_pair_link(p, u, omega[idx], r, s)
    for idx in range(len(ops.pairs)):
        omega[idx], t = project_soc(omega[idx], t)
    out = apply_t_drs_relaxed(ProductPoint(p, u, omega, t), alpha, ops)
    return project_bounding_box(out, box)


def hsdm_step(z: ProductPoint, lam: float, ops: DataOperator, box: BoundingBox,
              alpha: float) -> ProductPoint:
    """One hybrid steepest descent step: apply T, then walk t downhill by lam."""
    if lam < 0:
        raise ConfigError(f"step size must be nonnegative, got {lam}")
    out = apply_T(z, ops, box, alpha)
    out.t -= lam
    return out


def constraint_residuals(z: ProductPoint, ops: DataOperator) -> dict[str, float]:
    """Feasibility diagnostics: worst pair-link defect and worst cone violation."""
    link = 0.0
    cone = 0.0
    for idx, (r, s) in enumerate(ops.pairs):
        linked = ops.linked_difference(z.p, z.u, r, s)
        link = max(link, float(np.linalg.norm(z.omega[idx] - linked)))
        cone = max(cone, max(0.0, float(np.linalg.norm(z.omega[idx])) - z.t))
    return {"pair_link": link, "cone": cone}


def solve_rhc(dataset: TrainingDataset, cfg: HsdmConfig | None = None,
              ops: DataOperator | None = None) -> tuple[ClassifierParams, SolverReport]:
    """Train the hierarchical max-margin classifier.

    Runs z_{n+1} = T(z_n) - lambda_{n+1} e_t from z_0 (all zeros by default),
    then extracts the classifier from the final (p, u) block through the graph
    projection.
    """
    cfg = cfg if cfg is not None else HsdmConfig()
    if ops is None:
        ops = DataOperator(dataset)
    rho1 = cfg.rho1 if cfg.rho1 is not None else 100.0 * dataset.max_sample_norm()
    if rho1 <= 0:
        raise ConfigError(f"rho1 must be positive, got {rho1}")
    box = compute_radii(dataset, rho1, upsilon=cfg.upsilon)

    if cfg.z0 is not None:
        check_product_shapes(cfg.z0, ops.n_classes, ops.n_features, ops.n_samples)
        z = cfg.z0.copy()
    else:
        z = zero_product_point(ops.n_classes, ops.n_features, ops.n_samples)

    start = time.perf_counter()
    history: list[HistoryEntry] = []
    t_window: list[float] = []
    residual = float("inf")
    converged = False
    adaptive_lambda = cfg.lambda1
    n = 0
    for n in range(1, cfg.max_iterations + 1):
        lam = adaptive_lambda if cfg.schedule == "adaptive" else lambda_schedule(n, cfg)
        tz = apply_T(z, ops, box, cfg.alpha)
        residual = product_distance(tz, z)
        dt = tz.t - z.t
        tz.t -= lam
        z = tz
        if not z.is_finite():
            raise DivergenceError(f"non-finite iterate at iteration {n}")

        if cfg.schedule == "adaptive" and adaptive_lambda > 0:
            # hold each level until the lambda-perturbed iteration settles there
            perturbed = math.sqrt(max(residual**2 - dt**2, 0.0) + (dt - lam) ** 2)
            if perturbed < max(cfg.settle_fraction * lam, 1e-13):
                adaptive_lambda = 0.0 if adaptive_lambda <= cfg.lambda_floor else adaptive_lambda / 2.0

        t_window.append(z.t)
        if len(t_window) > cfg.drift_window + 1:
            t_window.pop(0)

        if cfg.log_every and (n % cfg.log_every == 0 or n == cfg.max_iterations):
            p_now = extract_minimizer(SplitPoint(z.p, z.u), ops)
            hinge_now = evaluate(p_now, dataset).hinge_loss
            history.append(HistoryEntry(n=n, value=z.t, hinge_loss=hinge_now, residual=residual))

        if len(t_window) > cfg.drift_window:
            drift = abs(t_window[-1] - t_window[0]) / max(1.0, abs(t_window[-1]))
            lam_done = adaptive_lambda == 0.0 if cfg.schedule == "adaptive" else True
            if lam_done and residual < cfg.tolerance and drift < cfg.t_drift_tolerance:
                converged = True
                break

    stage1_iterations = 0
    if cfg.stage1_refine:
        # finish the first stage exactly: the extraction map is only guaranteed
        # to hit the hinge minimizers from Fix(T_DRS) itself, so settle the
        # (p, u) block with the plain averaged DRS iteration before extracting
        refine = minimize_hinge(dataset, alpha=cfg.alpha, ops=ops,
                                max_iterations=cfg.stage1_max_iterations,
                                tolerance=cfg.stage1_tolerance,
                                x0=SplitPoint(z.p, z.u))
        z = ProductPoint(p=refine.fixed_point.p, u=refine.fixed_point.u,
                         omega=z.omega, t=z.t)
        stage1_iterations = refine.iterations

    params = extract_minimizer(SplitPoint(z.p, z.u), ops)
    report_eval = evaluate(params, dataset)
    p_norm = float(np.linalg.norm(params.to_vector()))
    if p_norm >= 0.9 * box.rho1:
        warnings.warn(
            f"extracted classifier norm {p_norm:.4g} is within 10% of rho1={box.rho1:.4g}; "
            "the bounding box may be binding - rerun with a larger rho1", stacklevel=2)
    feas = constraint_residuals(z, ops)
    report = SolverReport(
        solver="rhc",
        iterations=n,
        converged=converged,
        final_residual=residual,
        final_value=z.t,
        value_label="t",
        evaluation=report_eval,
        wall_time_s=time.perf_counter() - start,
        history=history,
        notes={
            "rho1": box.rho1,
            "upsilon": box.upsilon,
            "classifier_norm": p_norm,
            "pair_link_residual": feas["pair_link"],
            "cone_residual": feas["cone"],
            "schedule": cfg.schedule,
            "stage1_iterations": stage1_iterations,
        },
    )
    return params, report
