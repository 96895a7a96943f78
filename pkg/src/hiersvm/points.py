"""Iterate containers for the splitting and product-space solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass
class SplitPoint:
    """Point of the first-stage product space: classifier vector p and auxiliary u.

    ``p`` is the flattened classifier ((N+1)K,), ``u`` holds one length-K block
    per sample as an (M, K) array.
    """

    p: np.ndarray
    u: np.ndarray

    def copy(self) -> "SplitPoint":
        return SplitPoint(self.p.copy(), self.u.copy())

    def norm(self) -> float:
        return math.hypot(float(np.linalg.norm(self.p)), float(np.linalg.norm(self.u)))


def split_distance(a: SplitPoint, b: SplitPoint) -> float:
    return math.hypot(float(np.linalg.norm(a.p - b.p)), float(np.linalg.norm(a.u - b.u)))


@dataclass
class ProductPoint:
    """Full solver iterate: (p, u, omega, t).

    ``omega`` stacks one length-N block per class pair (r, s), r < s, in
    lexicographic order, as a (K(K-1)/2, N) array. ``t`` is the scalar epigraph
    variable bounding every pair norm.
    """

    p: np.ndarray
    u: np.ndarray
    omega: np.ndarray
    t: float

    def copy(self) -> "ProductPoint":
        return ProductPoint(self.p.copy(), self.u.copy(), self.omega.copy(), self.t)

    def split(self) -> SplitPoint:
        return SplitPoint(self.p.copy(), self.u.copy())

    def norm(self) -> float:
        return math.sqrt(
            float(np.dot(self.p, self.p))
            + float(np.sum(self.u * self.u))
            + float(np.sum(self.omega * self.omega))
            + self.t * self.t
        )

    def is_finite(self) -> bool:
        return (
            bool(np.all(np.isfinite(self.p)))
            and bool(np.all(np.isfinite(self.u)))
            and bool(np.all(np.isfinite(self.omega)))
            and math.isfinite(self.t)
        )


def product_distance(a: ProductPoint, b: ProductPoint) -> float:
    return math.sqrt(
        float(np.sum((a.p - b.p) ** 2))
        + float(np.sum((a.u - b.u) ** 2))
        + float(np.sum((a.omega - b.omega) ** 2))
        + (a.t - b.t) ** 2
    )


def zero_product_point(n_classes: int, n_features: int, n_samples: int) -> ProductPoint:
    n_pairs = n_classes * (n_classes - 1) // 2
    return ProductPoint(
        p=np.zeros((n_features + 1) * n_classes),
        u=np.zeros((n_samples, n_classes)),
        omega=np.zeros((n_pairs, n_features)),
        t=0.0,
    )


def check_product_shapes(z: ProductPoint, n_classes: int, n_features: int, n_samples: int) -> None:
    n_pairs = n_classes * (n_classes - 1) // 2
    expected = {
        "p": ((n_features + 1) * n_classes,),
        "u": (n_samples, n_classes),
        "omega": (n_pairs, n_features),
    }
    for name, shape in expected.items():
        got = getattr(z, name).shape
        if got != shape:
            raise InputError(f"product point block '{name}' has shape {got}, expected {shape}")
