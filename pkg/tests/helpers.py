"""Shared test utilities: projection property checkers and independent oracles.

The oracles here deliberately avoid the package's solver path: the hinge
minimization oracle is a dense grid with multiscale local refinement in
pairwise-difference coordinates (plus an LP cross-check at N=1), and the
hierarchical oracle layers an exact-penalty grid search for the smallest
worst-pair objective among near-minimal-hinge points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

import hiersvm as hv

# ---------------------------------------------------------------------------
# generic projection property checks (idempotence / variational / firm nonexp.)


def check_idempotent(project, z, tol=1e-10):
    pz = project(z)
    pzz = project(pz)
    gap = np.linalg.norm(pzz - pz)
    assert gap <= tol * (1.0 + np.linalg.norm(z)), f"idempotence defect {gap:.3e}"


def check_variational(project, z, set_points, tol=1e-9):
    """<z - Pz, c - Pz> <= tol for sampled members c of the target set."""
    pz = project(z)
    for c in set_points:
        inner = float(np.dot(z - pz, c - pz))
        assert inner <= tol, f"variational inequality violated: {inner:.3e}"


def check_firmly_nonexpansive(project, z1, z2, tol=1e-9):
    p1, p2 = project(z1), project(z2)
    lhs = float(np.dot(p1 - p2, p1 - p2))
    rhs = float(np.dot(p1 - p2, z1 - z2))
    assert lhs <= rhs + tol, f"firm nonexpansiveness violated: {lhs:.3e} > {rhs:.3e}"


# ---------------------------------------------------------------------------
# tiny random instances (N = 1) for oracle-based solver checks


def tiny_instance(rng: np.random.Generator, n_classes: int, n_samples: int) -> hv.TrainingDataset:
    """1-D dataset on a 0.1 grid in [-2, 2] with every class present."""
    x = rng.integers(-20, 21, size=n_samples) / 10.0
    labels = np.concatenate([np.arange(1, n_classes + 1),
                             rng.integers(1, n_classes + 1, size=n_samples - n_classes)])
    rng.shuffle(labels)
    return hv.TrainingDataset(x=x[:, None].astype(float), y=labels.astype(int),
                              n_classes=n_classes)


# ---------------------------------------------------------------------------
# oracle machinery in pairwise-difference coordinates (N = 1 only)
#
# Every metric depends on p only through differences against class 1, so the
# search space is q = (a_2..a_K, c_2..c_K) with w_j = a_j, b_j = c_j, a_1 =
# c_1 = 0. Dimension 2(K-1).


def params_from_diff(q: np.ndarray, n_classes: int) -> hv.ClassifierParams:
    k = n_classes
    a = np.concatenate([[0.0], q[:k - 1]])
    c = np.concatenate([[0.0], q[k - 1:]])
    return hv.ClassifierParams(w=a[:, None], b=c)


def _batch_metrics(Q: np.ndarray, dataset: hv.TrainingDataset):
    """Vectorized hinge loss and worst-pair objective over a (B, d) batch."""
    k, m = dataset.n_classes, dataset.n_samples
    x = dataset.x[:, 0]
    y = dataset.y
    A = np.concatenate([np.zeros((Q.shape[0], 1)), Q[:, :k - 1]], axis=1)
    C = np.concatenate([np.zeros((Q.shape[0], 1)), Q[:, k - 1:]], axis=1)
    scores = A[:, None, :] * x[None, :, None] + C[:, None, :]  # (B, M, K)
    rows = np.arange(m)
    own = scores[:, rows, y - 1]
    viol = 1.0 - (own[:, :, None] - scores)
    viol[:, rows, y - 1] = -np.inf
    hinge = np.sum(np.maximum(np.max(viol, axis=2), 0.0), axis=1)
    pair_norms = np.abs(A[:, :, None] - A[:, None, :])
    iu = np.triu_indices(k, k=1)
    psi = np.max(pair_norms[:, iu[0], iu[1]], axis=1)
    return hinge, psi


def _grid_around(center: np.ndarray, span: float, pts: int) -> np.ndarray:
    axes = [np.linspace(c - span, c + span, pts) for c in center]
    return np.array(list(itertools.product(*axes)))


class OracleBoundError(RuntimeError):
    """The oracle's search box was nearly binding; the instance should be resampled."""


@dataclass
class HingeOracle:
    """Grid + refinement result for one tiny instance."""

    hinge_min: float
    argmin: np.ndarray          # difference coordinates
    psi_min_on_argmin: float    # smallest worst-pair objective among near-minimizers
    near_minimal_points: np.ndarray  # evaluated grid points with hinge <= min + 1e-6


def grid_hinge_oracle(dataset: hv.TrainingDataset, radius: float = 64.0,
                      hinge_slack: float = 1e-6, levels: int = 48) -> HingeOracle:
    d = 2 * (dataset.n_classes - 1)

    # stage 1: minimize the hinge loss
    grid0 = _grid_around(np.zeros(d), radius, 13 if d == 4 else 41)
    h0, _ = _batch_metrics(grid0, dataset)
    center = grid0[int(np.argmin(h0))]
    best_h = float(np.min(h0))
    span = radius / 2.0
    for _ in range(levels):
        grid = _grid_around(center, span, 7 if d == 4 else 17)
        h, _ = _batch_metrics(grid, dataset)
        i = int(np.argmin(h))
        if h[i] <= best_h:
            best_h, center = float(h[i]), grid[i]
        span /= 2.0
        if span < 1e-11:
            break
    hinge_min, argmin = best_h, center.copy()
    if np.max(np.abs(argmin)) >= 0.8 * radius:
        raise OracleBoundError("hinge minimizer near the search bound; resample the instance")

    # stage 2: exact-penalty search for the smallest Psi among near-minimizers
    kappa = 1e5
    feasible: list[np.ndarray] = []

    def penalized(Q):
        h, psi = _batch_metrics(Q, dataset)
        keep = h <= hinge_min + hinge_slack
        if np.any(keep):
            feasible.append(Q[keep][np.argsort(psi[keep])[:50]])
        return psi + kappa * np.maximum(h - hinge_min, 0.0)

    best = None
    for start in (argmin, 0.5 * argmin, np.zeros(d)):
        center = start.copy()
        span = radius / 2.0
        val = float(penalized(center[None, :])[0])
        for _ in range(levels):
            grid = _grid_around(center, span, 7 if d == 4 else 17)
            v = penalized(grid)
            i = int(np.argmin(v))
            if v[i] <= val:
                val, center = float(v[i]), grid[i]
            span /= 2.0
            if span < 1e-11:
                break
        h_c, psi_c = _batch_metrics(center[None, :], dataset)
        if h_c[0] <= hinge_min + hinge_slack and (best is None or psi_c[0] < best):
            best = float(psi_c[0])
    pts = np.concatenate(feasible) if feasible else argmin[None, :]
    _, psis = _batch_metrics(pts, dataset)
    psi_min = min(best if best is not None else np.inf, float(np.min(psis)))
    return HingeOracle(hinge_min=hinge_min, argmin=argmin,
                       psi_min_on_argmin=psi_min, near_minimal_points=pts)


# ---------------------------------------------------------------------------
# LP cross-checks at N = 1 (both oracle stages are linear programs there)


def _hinge_lp_matrices(dataset: hv.TrainingDataset):
    """Constraint rows xi_i >= 1 - (score_{y_i} - score_s) as A_ub q' <= b_ub.

    Variables: q (2(K-1) differences) then xi (M slacks).
    """
    k, m = dataset.n_classes, dataset.n_samples
    d = 2 * (k - 1)
    rows, rhs = [], []
    for i in range(m):
        yi = dataset.y[i]
        xi_val = dataset.x[i, 0]
        for s in range(1, k + 1):
            if s == yi:
                continue
            row = np.zeros(d + m)
            # score_j = a_j x + c_j with a_1 = c_1 = 0
            if yi > 1:
                row[yi - 2] -= xi_val
                row[k - 1 + yi - 2] -= 1.0
            if s > 1:
                row[s - 2] += xi_val
                row[k - 1 + s - 2] += 1.0
            row[d + i] = -1.0
            rows.append(row)
            rhs.append(-1.0)
    return np.array(rows), np.array(rhs)


def lp_hinge_min(dataset: hv.TrainingDataset) -> float:
    k, m = dataset.n_classes, dataset.n_samples
    d = 2 * (k - 1)
    a_ub, b_ub = _hinge_lp_matrices(dataset)
    c = np.concatenate([np.zeros(d), np.ones(m)])
    bounds = [(None, None)] * d + [(0, None)] * m
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    assert res.success, res.message
    return float(res.fun)


def lp_hierarchical_min(dataset: hv.TrainingDataset, hinge_min: float,
                        slack: float = 1e-9) -> float:
    """min max_{r<s} |a_r - a_s| subject to hinge <= hinge_min + slack (N = 1)."""
    k, m = dataset.n_classes, dataset.n_samples
    d = 2 * (k - 1)
    a_ub, b_ub = _hinge_lp_matrices(dataset)
    nvar = d + m + 1  # differences, slacks, tau
    A = np.concatenate([a_ub, np.zeros((a_ub.shape[0], 1))], axis=1)
    rows, rhs = list(A), list(b_ub)
    row = np.zeros(nvar)
    row[d:d + m] = 1.0
    rows.append(row)
    rhs.append(hinge_min + slack)
    for r in range(1, k + 1):
        for s in range(r + 1, k + 1):
            for sign in (1.0, -1.0):
                row = np.zeros(nvar)
                if r > 1:
                    row[r - 2] += sign
                if s > 1:
                    row[s - 2] -= sign
                row[-1] = -1.0
                rows.append(row)
                rhs.append(0.0)
    c = np.zeros(nvar)
    c[-1] = 1.0
    bounds = [(None, None)] * d + [(0, None)] * m + [(0, None)]
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    assert res.success, res.message
    return float(res.fun)


# ---------------------------------------------------------------------------
# misc


def random_params(rng: np.random.Generator, n_classes: int, n_features: int,
                  scale: float = 2.0) -> hv.ClassifierParams:
    return hv.ClassifierParams(w=scale * rng.standard_normal((n_classes, n_features)),
                               b=scale * rng.standard_normal(n_classes))


def product_to_vector(z: hv.ProductPoint) -> np.ndarray:
    return np.concatenate([z.p, z.u.ravel(), z.omega.ravel(), [z.t]])


def vector_to_product(v: np.ndarray, k: int, n: int, m: int) -> hv.ProductPoint:
    d1 = (n + 1) * k
    npairs = k * (k - 1) // 2
    p = v[:d1]
    u = v[d1:d1 + k * m].reshape(m, k)
    omega = v[d1 + k * m:d1 + k * m + npairs * n].reshape(npairs, n)
    return hv.ProductPoint(p=p.copy(), u=u.copy(), omega=omega.copy(), t=float(v[-1]))
