"""Minimum-cost assignment on small square matrices.

Exhaustive enumeration up to 6x6 (cheap and independently checkable),
the O(K^3) solver from scipy above that.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

_EXHAUSTIVE_LIMIT = 6


def solve_assignment(cost: np.ndarray) -> np.ndarray:
    """Column index assigned to each row of a square cost matrix, minimizing total cost."""
    cost = np.asarray(cost, dtype=float)
    k = cost.shape[0]
    if cost.shape != (k, k):
        raise ValueError("cost matrix must be square")
    if k <= _EXHAUSTIVE_LIMIT:
        best, best_cost = None, np.inf
        rows = np.arange(k)
        for perm in permutations(range(k)):
            c = cost[rows, perm].sum()
            if c < best_cost:
                best, best_cost = perm, c
        return np.asarray(best, dtype=int)
    _, cols = linear_sum_assignment(cost)
    return cols
