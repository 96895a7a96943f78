"""The stacked score-difference operator and the subspace projections built on it.

For sample i with label y_i, the per-sample map sends a classifier vector p to
the K score differences ((w_j - w_{y_i})^T x_i + (b_j - b_{y_i}))_j, so that
the shifted-max functions composed with it reproduce the generalized hinge
loss term by term (the y_i-th output is identically zero). Stacking all M maps
gives a (KM x (N+1)K) matrix A; the graph {(p, u) : u = A p} is the feasible
set of the first-stage splitting, and each class pair (r, s) additionally gets
a linear "link" subspace tying its omega block to w_r - w_s of the projected
classifier.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InputError, InternalError
from .model import ClassifierParams, TrainingDataset, label_pairs


class DataOperator:
    """Dense stacked operator plus the one-time SPD factorizations.

    (I + A^T A) and each pair system (I_N + Omega_rs P_N Omega_rs^T) are
    assembled densely and Cholesky-factorized once; every projection is then a
    pair of triangular solves.
    """

    def __init__(self, dataset: TrainingDataset):
        self.dataset = dataset
        k, n, m = dataset.n_classes, dataset.n_features, dataset.n_samples
        self.n_classes, self.n_features, self.n_samples = k, n, m
        self.dim_h1 = (n + 1) * k
        self.pairs = label_pairs(k)
        self._pair_index = {pair: i for i, pair in enumerate(self.pairs)}

        self.matrix = self._assemble(dataset)
        gram = np.eye(self.dim_h1) + self.matrix.T @ self.matrix
        try:
            self._graph_cho = cho_factor(gram)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
            raise InternalError("Cholesky of I + A^T A failed; numerical state corrupted") from exc
        self._gram_inv = cho_solve(self._graph_cho, np.eye(self.dim_h1))

        # Pair systems: I_N + E_rs^T G E_rs with E_rs selecting w_r - w_s rows.
        self._pair_chos = []
        for (r, s) in self.pairs:
            rr = slice((r - 1) * n, r * n)
            ss = slice((s - 1) * n, s * n)
            block = (self._gram_inv[rr, rr] - self._gram_inv[rr, ss]
                     - self._gram_inv[ss, rr] + self._gram_inv[ss, ss])
            try:
                self._pair_chos.append(cho_factor(np.eye(n) + block))
            except np.linalg.LinAlgError as exc:  # pragma: no cover
                raise InternalError(f"Cholesky of pair system ({r},{s}) failed") from exc

        # 0/1 shifts for the hinge prox, one row per sample.
        shifts = np.ones((m, k))
        shifts[np.arange(m), dataset.y - 1] = 0.0
        self.hinge_shifts = shifts

    @staticmethod
    def _assemble(dataset: TrainingDataset) -> np.ndarray:
        k, n, m = dataset.n_classes, dataset.n_features, dataset.n_samples
        a = np.zeros((k * m, (n + 1) * k))
        for i in range(m):
            yi = dataset.y[i] - 1
            xi = dataset.x[i]
            for j in range(k):
                if j == yi:
                    continue
                row = i * k + j
                a[row, j * n:(j + 1) * n] = xi
                a[row, yi * n:(yi + 1) * n] = -xi
                a[row, n * k + j] = 1.0
                a[row, n * k + yi] = -1.0
        return a

    def pair_position(self, r: int, s: int) -> int:
        try:
            return self._pair_index[(r, s)]
        except KeyError:
            raise InputError(f"({r},{s}) is not a class pair with r < s in 1..{self.n_classes}")

    def apply(self, p: np.ndarray) -> np.ndarray:
        """A p, reshaped to one length-K block per sample."""
        return (self.matrix @ p).reshape(self.n_samples, self.n_classes)

    def adjoint(self, u: np.ndarray) -> np.ndarray:
        """A^T u for u given as (M, K) blocks."""
        return self.matrix.T @ u.reshape(-1)

    def apply_sample(self, i: int, params: ClassifierParams) -> np.ndarray:
        """Matrix-free per-sample map; reference path for differential tests."""
        yi = self.dataset.y[i] - 1
        xi = self.dataset.x[i]
        return (params.w - params.w[yi]) @ xi + (params.b - params.b[yi])

    def project_graph(self, p: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Projection onto {(p, u) : u = A p}: solve (I + A^T A) p_hat = p + A^T u."""
        p_hat = cho_solve(self._graph_cho, p + self.adjoint(u))
        return p_hat, self.apply(p_hat)

    def graph_defect(self, p: np.ndarray, u: np.ndarray) -> float:
        """||A p - u||, zero exactly on the graph."""
        return float(np.linalg.norm(self.apply(p) - u))

    def pair_difference_map(self, p: np.ndarray, r: int, s: int) -> np.ndarray:
        """w_r - w_s read out of a flattened classifier vector."""
        n = self.n_features
        return p[(r - 1) * n:r * n] - p[(s - 1) * n:s * n]

    def linked_difference(self, p: np.ndarray, u: np.ndarray, r: int, s: int) -> np.ndarray:
        """The map Omega_rs applied to the graph projection of (p, u)."""
        p_hat, _ = self.project_graph(p, u)
        return self.pair_difference_map(p_hat, r, s)

    def project_pair_link(self, p: np.ndarray, u: np.ndarray, omega_rs: np.ndarray,
                          r: int, s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Projection onto the subspace {omega_rs = Omega_rs P_graph(p, u)}.

        Null-space projection z - B^T (B B^T)^{-1} B z with the pair system
        factorized at construction; the u blocks move through the graph
        projection, every other omega block and t are untouched by the caller.
        """
        pos = self.pair_position(r, s)
        n = self.n_features
        p_hat = cho_solve(self._graph_cho, p + self.adjoint(u))
        defect = omega_rs - self.pair_difference_map(p_hat, r, s)
        v = cho_solve(self._pair_chos[pos], defect)
        q = np.zeros(self.dim_h1)
        q[(r - 1) * n:r * n] = v
        q[(s - 1) * n:s * n] = -v
        dp = cho_solve(self._graph_cho, q)
        return p + dp, u + self.apply(dp), omega_rs - v
