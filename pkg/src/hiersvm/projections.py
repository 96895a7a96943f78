"""Closed-form projections and proximity operators used as solver building blocks.

Everything here is a metric projection onto a simple convex set (simplex,
second-order cone, balls/box) or a prox derived from one via the Moreau
identity. All operators are total on finite inputs and reject non-finite ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .model import TrainingDataset
from .points import ProductPoint


def _require_finite(name: str, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def project_simplex(v: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {q : q >= 0, sum(q) = mass}.

    Sort-and-threshold algorithm, O(K log K); exact in finitely many steps.
    """
    v = _require_finite("simplex input", v)
    if v.ndim != 1 or v.size == 0:
        raise InputError(f"simplex projection needs a nonempty 1-D vector, got shape {v.shape}")
    if mass <= 0:
        raise InputError(f"simplex mass must be positive, got {mass}")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - mass
    j = np.arange(1, v.size + 1)
    rho = int(np.max(np.nonzero(u * j > css)[0])) + 1
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def project_simplex_rows(v: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Row-wise simplex projection of an (M, K) array (vectorized)."""
    v = _require_finite("simplex input", v)
    if v.ndim != 2 or v.shape[1] == 0:
        raise InputError(f"expected a 2-D block array, got shape {v.shape}")
    if mass <= 0:
        raise InputError(f"simplex mass must be positive, got {mass}")
    u = np.sort(v, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - mass
    j = np.arange(1, v.shape[1] + 1)
    valid = u * j > css
    rho = v.shape[1] - 1 - np.argmax(valid[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


def hinge_shift(n_classes: int, label: int) -> np.ndarray:
    """Shift vector with 0 at the true-class coordinate and 1 elsewhere."""
    if not 1 <= label <= n_classes:
        raise InputError(f"label {label} outside 1..{n_classes}")
    r = np.ones(n_classes)
    r[label - 1] = 0.0
    return r


def prox_shifted_max(v: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Prox of xi -> max_j (shift_j + xi_j), via the Moreau identity.

    The function is the support function of the unit simplex composed with a
    shift, so prox(v) = v - P_simplex(v + shift).
    """
    v = _require_finite("prox input", v)
    shift = np.asarray(shift, dtype=float)
    if shift.shape != v.shape:
        raise InputError(f"shift shape {shift.shape} does not match input {v.shape}")
    return v - project_simplex(v + shift)


def prox_shifted_max_rows(v: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Row-wise prox_shifted_max for (M, K) blocks with per-row shifts."""
    v = _require_finite("prox input", v)
    if v.shape != shifts.shape:
        raise InputError(f"shift shape {shifts.shape} does not match input {v.shape}")
    return v - project_simplex_rows(v + shifts)


def project_soc(omega: np.ndarray, t: float) -> tuple[np.ndarray, float]:
    """Projection onto the second-order cone {(omega, t) : ||omega|| <= t}."""
    omega = _require_finite("cone input", omega)
    if not math.isfinite(t):
        raise InputError("cone input has non-finite scalar part")
    norm = float(np.linalg.norm(omega))
    if norm <= t:
        return omega.copy(), float(t)
    if norm <= -t:
        return np.zeros_like(omega), 0.0
    scale = (norm + t) / 2.0
    return (scale / norm) * omega, scale


def project_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Radial projection onto the closed Euclidean ball of the given radius."""
    v = _require_finite("ball input", v)
    if radius <= 0:
        raise InputError(f"ball radius must be positive, got {radius}")
    norm = float(np.linalg.norm(v))
    if norm <= radius:
        return v.copy()
    return (radius / norm) * v


@dataclass(frozen=True)
class BoundingBox:
    """Radii of the bounded box the product-space iterates are confined to.

    rho2, rho3, rho4 are tied to rho1 through the admissibility formulas; the
    stored upsilon bounds every sample norm.
    """

    rho1: float
    rho2: float
    rho3: float
    rho4: float
    upsilon: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho3", "rho4"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.upsilon < 0:
            raise ConfigError(f"upsilon must be nonnegative, got {self.upsilon}")


def compute_radii(dataset: TrainingDataset, rho1: float, upsilon: float | None = None) -> BoundingBox:
    """Fill the box radii from rho1 and the data bound upsilon >= max_i ||x_i||.

    rho2 = 2 rho1 sqrt(KM (upsilon^2 + 1)), rho3 = rho1 K (K - 1), rho4 = 2 rho1.
    """
    if rho1 <= 0:
        raise ConfigError(f"rho1 must be positive, got {rho1}")
    max_norm = dataset.max_sample_norm()
    if upsilon is None:
        upsilon = max_norm
    elif upsilon < max_norm:
        raise ConfigError(f"upsilon={upsilon} is below the largest sample norm {max_norm:.6g}")
    k, m = dataset.n_classes, dataset.n_samples
    return BoundingBox(
        rho1=rho1,
        rho2=2.0 * rho1 * math.sqrt(k * m * (upsilon**2 + 1.0)),
        rho3=rho1 * k * (k - 1),
        rho4=2.0 * rho1,
        upsilon=float(upsilon),
    )


def project_bounding_box(z: ProductPoint, box: BoundingBox) -> ProductPoint:
    """Block-wise projection onto B = ball(rho1) x ball(rho2) x ball(rho3) x [-rho4, rho4]."""
    if not z.is_finite():
        raise InputError("bounding-box input has non-finite entries")
    p = project_ball(z.p, box.rho1)
    u = z.u.copy()
    u_norm = float(np.linalg.norm(u))
    if u_norm > box.rho2:
        u *= box.rho2 / u_norm
    omega = z.omega.copy()
    omega_norm = float(np.linalg.norm(omega))
    if omega_norm > box.rho3:
        omega *= box.rho3 / omega_norm
    t = min(max(z.t, -box.rho4), box.rho4)
    return ProductPoint(p=p, u=u, omega=omega, t=t)
