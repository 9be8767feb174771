"""Least squares over the probability simplex in three variables."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..errors import EmptyData


@dataclass(frozen=True)
class SimplexLSResult:
    w: np.ndarray
    objective: float
    non_unique: bool


def _objective(A, b, w):
    r = A @ w - b
    return float(r @ r)


def simplex_ls(components, targets) -> SimplexLSResult:
    """Minimize ``||A w - b||^2`` subject to ``w >= 0, sum(w) == 1``.

    Parameters
    ----------
    components : array, shape (n, L, k) or (m, k)
        Stacked component predictions; the last axis indexes the ``k``
        weights (``k == 3`` for ETS).
    targets : array, shape (n, L) or (m,)
        One-hot labels (or any regression target).

    Notes
    -----
    The problem is a tiny convex QP, so every face of the simplex is
    visited: for each support set the equality-constrained minimizer comes
    from its KKT system, infeasible ones are dropped and the best survivor
    wins. Vertices are always feasible, hence the result never loses to any
    of them. ``non_unique`` is set when ``A`` is rank deficient.
    """
    A = np.asarray(components, dtype=float)
    b = np.asarray(targets, dtype=float)
    k = A.shape[-1]
    A = A.reshape(-1, k)
    b = b.reshape(-1)
    if A.shape[0] == 0 or A.shape[0] != b.shape[0]:
        raise EmptyData("need at least one sample with matching targets")

    Q = A.T @ A
    c = A.T @ b
    rank = np.linalg.matrix_rank(A)

    best_w, best_obj = None, np.inf
    for size in range(1, k + 1):
        for support in combinations(range(k), size):
            s = list(support)
            if size == 1:
                w_s = np.ones(1)
            else:
                kkt = np.zeros((size + 1, size + 1))
                kkt[:size, :size] = 2 * Q[np.ix_(s, s)]
                kkt[:size, size] = 1.0
                kkt[size, :size] = 1.0
                rhs = np.concatenate([2 * c[s], [1.0]])
                sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
                w_s = sol[:size]
                if np.any(w_s < -1e-12):
                    continue
                w_s = np.clip(w_s, 0.0, None)
                w_s = w_s / w_s.sum()
            w = np.zeros(k)
            w[s] = w_s
            obj = _objective(A, b, w)
            if obj < best_obj:
                best_w, best_obj = w, obj
    return SimplexLSResult(best_w, best_obj, bool(rank < k))
