"""Dataset and classifier types plus every evaluation metric of the model.

A multiclass linear classifier is a tuple p = (w_j, b_j), j = 1..K. All
quantities here (pairwise margins, hinge loss, margin-violation counts) are
functions of the pairwise differences w_r - w_s and b_r - b_s only, which is
what the property tests on translation invariance pin down.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DegeneratePairError, InputError

# Pair norms below this count as a degenerate pair (margin reported as +inf).
ZERO_NORM_TOL = 1e-12

# A sample counts as a margin violation only when its pairwise score falls
# below 1 - BOUNDARY_TOL.  Support vectors sit exactly on the unit-margin
# boundary at an optimum, so a strict float comparison against 1 would count
# them or not depending on solver accuracy and rounding noise.
BOUNDARY_TOL = 1e-6


def label_pairs(n_classes: int) -> list[tuple[int, int]]:
    """All class pairs (r, s) with r < s, in lexicographic order, 1-based."""
    return [(r, s) for r in range(1, n_classes + 1) for s in range(r + 1, n_classes + 1)]


@dataclass(frozen=True)
class TrainingDataset:
    """Labeled samples (x_i, y_i) with x_i in R^N and y_i in {1..K}."""

    x: np.ndarray
    y: np.ndarray
    n_classes: int = 0  # 0 means "infer as max(y)"
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if x.ndim != 2:
            raise InputError(f"x must be 2-D (samples, features), got shape {x.shape}")
        if x.shape[0] == 0:
            raise InputError("dataset has zero rows")
        if not np.all(np.isfinite(x)):
            raise InputError("dataset contains non-finite feature values")
        if y.shape != (x.shape[0],):
            raise InputError(f"y must have shape ({x.shape[0]},), got {y.shape}")
        if np.any(y < 1):
            raise InputError("labels must be 1-based positive integers")
        k = int(self.n_classes) if self.n_classes else int(y.max())
        if k < 2:
            raise InputError("at least two classes are required")
        if int(y.max()) > k:
            raise InputError(f"label {int(y.max())} exceeds n_classes={k}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "n_classes", k)
        if self.feature_names is not None and len(self.feature_names) != x.shape[1]:
            raise InputError("feature_names length does not match feature count")

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def class_indices(self, label: int) -> np.ndarray:
        """Sample indices of one class (the index set D_j)."""
        if not 1 <= label <= self.n_classes:
            raise InputError(f"label {label} outside 1..{self.n_classes}")
        return np.flatnonzero(self.y == label)

    def label_histogram(self) -> dict[int, int]:
        return {j: int(np.sum(self.y == j)) for j in range(1, self.n_classes + 1)}

    def max_sample_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.x, axis=1)))


@dataclass(frozen=True)
class ClassifierParams:
    """Multiclass linear classifier parameters: K weight vectors and K offsets."""

    w: np.ndarray  # (K, N)
    b: np.ndarray  # (K,)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if w.ndim != 2:
            raise InputError(f"w must be 2-D (classes, features), got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise InputError(f"b must have shape ({w.shape[0]},), got {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise InputError("classifier parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)

    @property
    def n_classes(self) -> int:
        return self.w.shape[0]

    @property
    def n_features(self) -> int:
        return self.w.shape[1]

    @property
    def dim(self) -> int:
        """Flattened dimension (N+1)K."""
        return self.w.size + self.b.size

    def to_vector(self) -> np.ndarray:
        """Flatten as [w_1, ..., w_K, b_1, ..., b_K]."""
        return np.concatenate([self.w.ravel(), self.b])

    @classmethod
    def from_vector(cls, vec: np.ndarray, n_classes: int, n_features: int) -> "ClassifierParams":
        vec = np.asarray(vec, dtype=float)
        expected = (n_features + 1) * n_classes
        if vec.shape != (expected,):
            raise InputError(f"expected vector of length {expected}, got {vec.shape}")
        nw = n_classes * n_features
        return cls(w=vec[:nw].reshape(n_classes, n_features), b=vec[nw:].copy())

    def pair_difference(self, r: int, s: int) -> tuple[np.ndarray, float]:
        """(w_r - w_s, b_r - b_s) for 1-based labels r, s."""
        k = self.n_classes
        if not (1 <= r <= k and 1 <= s <= k):
            raise InputError(f"labels ({r},{s}) outside 1..{k}")
        return self.w[r - 1] - self.w[s - 1], float(self.b[r - 1] - self.b[s - 1])


def classify(params: ClassifierParams, x: np.ndarray) -> int:
    """Predicted label: smallest index attaining max_j (w_j^T x + b_j)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.n_features,):
        raise InputError(f"expected feature vector of length {params.n_features}, got {x.shape}")
    scores = params.w @ x + params.b
    return int(np.argmax(scores)) + 1


def pairwise_margin(params: ClassifierParams, r: int, s: int, zero_tol: float = ZERO_NORM_TOL) -> float:
    """Margin 1 / ||w_r - w_s|| of the pair (r, s) classifier; +inf when degenerate."""
    if r == s:
        raise InputError(f"pairwise margin needs distinct labels, got r = s = {r}")
    omega, _ = params.pair_difference(r, s)
    norm = float(np.linalg.norm(omega))
    if norm <= zero_tol:
        return float("inf")
    return 1.0 / norm


def halfspace_distance(params: ClassifierParams, r: int, s: int, x: np.ndarray,
                       zero_tol: float = ZERO_NORM_TOL) -> float:
    """Distance from x to the unit-margin half-space {omega_rs^T x + beta_rs >= 1}."""
    if r == s:
        raise InputError(f"half-space distance needs distinct labels, got r = s = {r}")
    x = np.asarray(x, dtype=float)
    if x.shape != (params.n_features,):
        raise InputError(f"expected feature vector of length {params.n_features}, got {x.shape}")
    omega, beta = params.pair_difference(r, s)
    norm = float(np.linalg.norm(omega))
    if norm <= zero_tol:
        raise DegeneratePairError(f"pair ({r},{s}) has ||w_r - w_s|| ~ 0")
    value = float(omega @ x + beta)
    if value >= 1.0:
        return 0.0
    return (1.0 - value) / norm


def worst_pair_objective(params: ClassifierParams) -> float:
    """max over pairs r < s of ||w_r - w_s||; its inverse is the smallest margin."""
    if params.n_classes < 2:
        raise InputError("worst-pair objective needs at least two classes")
    diffs = params.w[:, None, :] - params.w[None, :, :]
    norms = np.linalg.norm(diffs, axis=2)
    iu = np.triu_indices(params.n_classes, k=1)
    return float(np.max(norms[iu]))


def _pairwise_score_margins(params: ClassifierParams, dataset: TrainingDataset) -> np.ndarray:
    """(M, K) array of own-class score minus each class score; +inf on the own column."""
    if params.n_features != dataset.n_features or params.n_classes < dataset.n_classes:
        raise InputError(
            f"classifier ({params.n_classes} classes, {params.n_features} features) does not "
            f"match dataset ({dataset.n_classes} classes, {dataset.n_features} features)")
    scores = dataset.x @ params.w.T + params.b
    rows = np.arange(dataset.n_samples)
    own = scores[rows, dataset.y - 1]
    diff = own[:, None] - scores
    diff[rows, dataset.y - 1] = np.inf  # own class never competes
    return diff


@dataclass(frozen=True)
class EvaluationReport:
    """All evaluation quantities of a classifier on one dataset."""

    hinge_loss: float
    per_sample_deviation: np.ndarray
    pairwise_margins: dict[tuple[int, int], float]
    worst_pair_objective: float
    risk_count: int

    @property
    def smallest_pairwise_margin(self) -> float:
        return min(self.pairwise_margins.values())

    @property
    def smallest_margin_pair(self) -> tuple[int, int]:
        return min(self.pairwise_margins, key=self.pairwise_margins.get)

    def to_dict(self) -> dict:
        margins: dict[str, dict[str, float]] = {}
        for (r, s), m in self.pairwise_margins.items():
            margins.setdefault(str(r), {})[str(s)] = m
        return {
            "schema_version": 1,
            "hinge_loss": self.hinge_loss,
            "risk_count": self.risk_count,
            "margins": margins,
            "smallest_pairwise_margin": self.smallest_pairwise_margin,
            "smallest_margin_pair": list(self.smallest_margin_pair),
            "worst_pair_objective": self.worst_pair_objective,
            "per_sample_deviation": [float(v) for v in self.per_sample_deviation],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def evaluate(params: ClassifierParams, dataset: TrainingDataset,
             boundary_tol: float = BOUNDARY_TOL) -> EvaluationReport:
    """Hinge loss, per-sample deviations, margins and the margin-violation count.

    The hinge loss is sum_i max{0, max_{s != y_i} [1 - (omega_{y_i s}^T x_i +
    beta_{y_i s})]}; a sample enters the risk count when that inner max is
    strictly positive (beyond ``boundary_tol``).
    """
    diff = _pairwise_score_margins(params, dataset)
    worst = 1.0 - np.min(diff, axis=1)  # max_s (1 - diff)
    deviations = np.maximum(worst, 0.0)
    hinge = float(np.sum(deviations))
    risk = int(np.sum(worst > boundary_tol))
    margins = {
        (r, s): pairwise_margin(params, r, s)
        for (r, s) in label_pairs(dataset.n_classes)
    }
    return EvaluationReport(
        hinge_loss=hinge,
        per_sample_deviation=deviations,
        pairwise_margins=margins,
        worst_pair_objective=worst_pair_objective(params),
        risk_count=risk,
    )


def check_margin_witness(params: ClassifierParams, dataset: TrainingDataset) -> bool:
    """True iff every sample satisfies every unit-margin condition (hinge loss 0)."""
    diff = _pairwise_score_margins(params, dataset)
    return bool(np.all(np.min(diff, axis=1) >= 1.0))


def hinge_loss(params: ClassifierParams, dataset: TrainingDataset) -> float:
    """Convenience accessor for the generalized hinge loss alone."""
    diff = _pairwise_score_margins(params, dataset)
    return float(np.sum(np.maximum(1.0 - np.min(diff, axis=1), 0.0)))
