"""Alternating-minimization heuristic for the row-sparse K-center objective.

Minimizes ||Y - mu L^T||_F^2 over K cluster centers that share at most s
non-zero rows.  The global problem is nonconvex with a combinatorial
feasible set; this module is an explicitly heuristic Lloyd-style
alternation with a joint row-sparsity projection, run from multiple
restarts.  With s = p the projection is the identity and the procedure
reduces to ordinary k-means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataMatrix
from .errors import ConfigError


@dataclass(frozen=True)
class CmleConfig:
    k: int
    s: int
    max_iters: int = 100
    n_restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.s < 1 or self.max_iters < 1 or self.n_restarts < 1:
            raise ConfigError("k, s, max_iters, n_restarts must be positive")


def sparsify_rows(mu: np.ndarray, s: int, sizes: np.ndarray | None = None) -> np.ndarray:
    """Best s-row projection for fixed assignments.

    Keeps the s rows with the largest size-weighted squared row norm
    sum_k n_k mu_jk^2 (these are the rows whose removal would increase
    the objective most) and zeros the rest.  Ties break toward the lower
    row index.  s >= p is the identity.
    """
    p, k = mu.shape
    if s >= p:
        return mu.copy()
    w = np.ones(k) if sizes is None else np.asarray(sizes, dtype=float)
    score = (mu * mu) @ w
    # stable sort on (-score, index) keeps lower indices on ties
    keep = np.argsort(-score, kind="stable")[:s]
    out = np.zeros_like(mu)
    out[keep] = mu[keep]
    return out


def _objective(values: np.ndarray, mu: np.ndarray, z: np.ndarray) -> float:
    resid = values - mu[:, z - 1]
    return float(np.sum(resid * resid))


def _assign(values: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Nearest center per observation, ties to the lowest index."""
    d2 = (
        (values * values).sum(axis=0)[:, None]
        - 2.0 * values.T @ mu
        + (mu * mu).sum(axis=0)[None, :]
    )
    return d2.argmin(axis=1) + 1


def _single_run(
    values: np.ndarray, config: CmleConfig, init_centers: np.ndarray, max_iters: int
) -> tuple[np.ndarray, np.ndarray, float]:
    p, n = values.shape
    k = config.k
    mu = init_centers.copy()
    z_prev = None
    best = (None, None, np.inf)
    for _ in range(max_iters):
        z = _assign(values, mu)
        # re-seed empty clusters at the worst-fit observation (bounded:
        # duplicated observations can make a reseed futile)
        sizes = np.bincount(z, minlength=k + 1)[1:]
        for _attempt in range(k):
            if not (sizes == 0).any():
                break
            resid = ((values - mu[:, z - 1]) ** 2).sum(axis=0)
            worst = int(np.argmax(resid))
            empty = int(np.flatnonzero(sizes == 0)[0])
            mu[:, empty] = values[:, worst]
            z = _assign(values, mu)
            sizes = np.bincount(z, minlength=k + 1)[1:]
        sums = np.zeros((p, k))
        np.add.at(sums.T, z - 1, values.T)
        nonempty = sizes > 0
        new_mu = mu.copy()
        new_mu[:, nonempty] = sums[:, nonempty] / sizes[nonempty][None, :]
        mu = sparsify_rows(new_mu, config.s, sizes)
        obj = _objective(values, mu, z)
        if obj < best[2]:
            best = (mu.copy(), z.copy(), obj)
        if z_prev is not None and np.array_equal(z, z_prev):
            break
        z_prev = z
    return best


def fit_cmle(
    data: DataMatrix,
    config: CmleConfig,
    init_centers: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """(mu_hat, z_hat, objective): best of n_restarts alternating runs.

    mu_hat is p x K with at most s non-zero rows; z_hat holds labels
    1..K.  Even restarts seed centers at K observations drawn without
    replacement, odd restarts at the means of a random partition (better
    basin coverage on small instances); each restart uses an independent
    stream, so the best-of-restarts objective is non-increasing in
    n_restarts.  ``init_centers`` replaces the seeding of the first
    restart (useful for warm starts).
    """
    values = data.values
    p, n = values.shape
    if config.k > n:
        raise ConfigError(f"k={config.k} exceeds n={n}")
    if config.s > p:
        raise ConfigError(f"s={config.s} exceeds p={p}")
    streams = np.random.SeedSequence(config.seed).spawn(config.n_restarts)
    best = (None, None, np.inf)
    for r in range(config.n_restarts):
        if r == 0 and init_centers is not None:
            centers = np.asarray(init_centers, dtype=float).copy()
            if centers.shape != (p, config.k):
                raise ConfigError("init_centers must be p x K")
        else:
            rng = np.random.default_rng(streams[r])
            if r % 2 == 0:
                idx = rng.choice(n, size=config.k, replace=False)
                centers = values[:, idx].copy()
            else:
                z0 = np.empty(n, dtype=int)
                z0[: config.k] = np.arange(1, config.k + 1)
                z0[config.k :] = rng.integers(1, config.k + 1, size=n - config.k)
                rng.shuffle(z0)
                sizes = np.bincount(z0, minlength=config.k + 1)[1:]
                sums = np.zeros((p, config.k))
                np.add.at(sums.T, z0 - 1, values.T)
                centers = sums / sizes[None, :]
        mu, z, obj = _single_run(values, config, centers, config.max_iters)
        if obj < best[2]:
            best = (mu, z, obj)
    return best


def fit_kmeans(
    data: DataMatrix, k: int, n_restarts: int = 8, seed: int = 0, max_iters: int = 100
) -> tuple[np.ndarray, np.ndarray, float]:
    """Plain k-means comparison hook (the s = p special case)."""
    config = CmleConfig(k=k, s=data.p, max_iters=max_iters, n_restarts=n_restarts, seed=seed)
    return fit_cmle(data, config)
