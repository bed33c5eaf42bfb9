"""Chain orchestration: initialization, full sweeps, multi-chain runs.

Draw order within a chain is fixed for reproducibility.  One sweep
consumes randomness in this order:

1. reseating, observations i = 1..n ascending (per observation: in
   column mode a candidate indicator block, then candidate auxiliaries,
   then candidate mean, all skipped for departing singletons or when
   the candidate is suppressed; then one categorical uniform);
2. mean update, clusters ascending, one normal block per cluster in
   coordinate order;
3. auxiliary update, clusters ascending (inverse-Gaussian block then
   Gamma block per cluster);
4. indicator update (one uniform block, features ascending; per cluster
   in column mode);
5. one Beta draw for theta.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    COLUMN_SSL,
    ChainTrace,
    DataMatrix,
    Hyperparams,
    ModelState,
    Snapshot,
    TraceMeta,
    validate_dataset,
)
from .errors import InvalidKError
from .ssl import build_context, update_mu, update_phi, update_theta, update_xi
from .urn import VnTable, build_vn_table, reseat_observation

SINGLE_CLUSTER = "single"
RANDOM_K = "random_k"
KMEANS_PP = "kmeans_pp"


@dataclass(frozen=True)
class InitSpec:
    kind: str = RANDOM_K
    k: int | None = None


@dataclass(frozen=True)
class RunConfig:
    """Chain execution settings (defaults: 1000 burn-in, 4000 kept, thin 1)."""

    n_burn: int = 1000
    n_keep: int = 4000
    n_chains: int = 1
    thin: int = 1
    seed: int = 0
    init: InitSpec | None = None
    store_dense_mu: bool = False

    def __post_init__(self):
        if self.n_burn < 0 or self.n_keep < 1 or self.thin < 1 or self.n_chains < 1:
            raise ValueError("need n_burn >= 0, n_keep >= 1, thin >= 1, n_chains >= 1")


@dataclass(frozen=True)
class ProgressEvent:
    chain_id: int
    iteration: int
    total: int
    k_active: int
    loglik: float


ProgressCallback = Callable[[ProgressEvent], None]


def default_init(hyper: Hyperparams) -> InitSpec:
    """Random assignment into min(poisson rate, k_max) clusters."""
    k = max(1, min(int(hyper.poisson_lambda), hyper.k_max))
    return InitSpec(RANDOM_K, k)


def _effective_k_max(hyper: Hyperparams, n: int) -> int:
    if hyper.k_max > n:
        warnings.warn(
            f"k_max={hyper.k_max} exceeds n={n}; clamping to n", stacklevel=3
        )
        return n
    return hyper.k_max


def _compact_labels(z: np.ndarray, k: int) -> tuple[np.ndarray, int]:
    """Relabel so that used labels become dense 1..K' preserving order."""
    used = np.unique(z)
    lut = np.zeros(k + 1, dtype=int)
    lut[used] = np.arange(1, used.size + 1)
    return lut[z], used.size


def _means_for_labels(data: DataMatrix, z: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, data.p))
    np.add.at(sums, z - 1, data.values.T)
    sizes = np.bincount(z, minlength=k + 1)[1:]
    return sums / sizes[:, None]


def init_state(
    data: DataMatrix,
    hyper: Hyperparams,
    config: RunConfig,
    rng: np.random.Generator,
) -> ModelState:
    """Build the initial sampler state.

    Single-cluster: everything in one cluster at the sample mean.  Random
    assignment: labels uniform on 1..k, empty clusters compacted.
    Kmeans++ seeding: k centers by the squared-distance rule, nearest
    assignment.  Means are set to the resulting cluster sample means;
    auxiliaries start at 1, indicators at 0, theta at its prior mean
    1 / (1 + beta_theta).
    """
    spec = config.init or default_init(hyper)
    k_max = _effective_k_max(hyper, data.n)
    n, p = data.n, data.p

    if spec.kind == SINGLE_CLUSTER:
        z = np.ones(n, dtype=int)
        k = 1
    elif spec.kind == RANDOM_K:
        k = spec.k or 1
        if k > k_max:
            raise InvalidKError(f"init k={k} exceeds k_max={k_max}")
        z = rng.integers(1, k + 1, size=n)
        z, k = _compact_labels(z, k)
    elif spec.kind == KMEANS_PP:
        k = spec.k or 1
        if k > k_max:
            raise InvalidKError(f"init k={k} exceeds k_max={k_max}")
        centers = _kmeans_pp_centers(data.values, k, rng)
        d2 = ((data.values.T[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        z = d2.argmin(axis=1) + 1
        z, k = _compact_labels(z, k)
    else:
        raise InvalidKError(f"unknown init kind {spec.kind!r}")

    mu = _means_for_labels(data, z, k)
    phi = np.ones((k, p))
    xi_shape = (k, p) if hyper.ssl_mode == COLUMN_SSL else (p,)
    return ModelState(
        z=z,
        mu=mu,
        phi=phi,
        xi=np.zeros(xi_shape, dtype=np.int8),
        theta=1.0 / (1.0 + hyper.beta_theta),
    )


def _kmeans_pp_centers(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Standard D^2 seeding; returns (k, p) centers chosen among observations."""
    obs = values.T
    n = obs.shape[0]
    centers = [obs[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            ((obs[:, None, :] - np.asarray(centers)[None, :, :]) ** 2).sum(axis=2),
            axis=1,
        )
        total = d2.sum()
        if total <= 0:
            centers.append(obs[rng.integers(n)])
            continue
        u = rng.random() * total
        centers.append(obs[min(np.searchsorted(np.cumsum(d2), u), n - 1)])
    return np.asarray(centers)


def sweep(
    state: ModelState,
    data: DataMatrix,
    vn: VnTable,
    hyper: Hyperparams,
    rng: np.random.Generator,
) -> ModelState:
    """One full iteration: reseat all observations, then mu, phi, xi, theta."""
    for i in range(data.n):
        reseat_observation(i, state, vn, data, hyper, rng)
    ctx = build_context(state, data, hyper)
    update_mu(state, ctx, hyper, rng)
    update_phi(state, hyper, rng)
    update_xi(state, hyper, rng)
    update_theta(state, hyper, rng)
    return state


def _loglik(state: ModelState, data: DataMatrix) -> float:
    resid = data.values - state.mu[state.z - 1].T
    return float(-0.5 * np.sum(resid * resid))


def _take_snapshot(state: ModelState, store_dense: bool) -> Snapshot:
    xi = state.xi
    support0 = np.flatnonzero(xi.any(axis=0) if xi.ndim == 2 else xi)
    return Snapshot(
        z=state.z.copy(),
        k=state.k_active,
        theta=state.theta,
        support=support0 + 1,
        mu_support=state.mu[:, support0].copy(),
        mu_dense=state.mu.copy() if store_dense else None,
    )


def run_chain(
    data: DataMatrix,
    hyper: Hyperparams,
    config: RunConfig,
    chain_id: int = 0,
    rng: np.random.Generator | None = None,
    progress: ProgressCallback | None = None,
    progress_every: int = 100,
) -> ChainTrace:
    """Run one chain: n_burn discarded sweeps, then n_keep thinned snapshots."""
    validate_dataset(data)
    if rng is None:
        n_streams = max(config.n_chains, chain_id + 1)
        rng = np.random.default_rng(
            np.random.SeedSequence(config.seed).spawn(n_streams)[chain_id]
        )
    k_max = _effective_k_max(hyper, data.n)
    hyper_run = hyper if k_max == hyper.k_max else Hyperparams(
        lambda0=hyper.lambda0,
        lambda1=hyper.lambda1,
        beta_theta=hyper.beta_theta,
        alpha=hyper.alpha,
        poisson_lambda=hyper.poisson_lambda,
        k_max=k_max,
        ssl_mode=hyper.ssl_mode,
    )
    vn = build_vn_table(data.n, hyper_run)
    state = init_state(data, hyper_run, config, rng)
    total = config.n_burn + config.n_keep * config.thin
    snaps: list[Snapshot] = []
    it = 0
    for _ in range(config.n_burn):
        sweep(state, data, vn, hyper_run, rng)
        it += 1
        if progress and it % progress_every == 0:
            progress(ProgressEvent(chain_id, it, total, state.k_active, _loglik(state, data)))
    for _ in range(config.n_keep):
        for _ in range(config.thin):
            sweep(state, data, vn, hyper_run, rng)
            it += 1
            if progress and it % progress_every == 0:
                progress(
                    ProgressEvent(chain_id, it, total, state.k_active, _loglik(state, data))
                )
        snaps.append(_take_snapshot(state, config.store_dense_mu))
    meta = TraceMeta(
        n=data.n,
        p=data.p,
        n_burn=config.n_burn,
        thin=config.thin,
        seed=config.seed,
        chain_id=chain_id,
        hyper_digest=hyper_run.digest(),
        ssl_mode=hyper_run.ssl_mode,
    )
    return ChainTrace(snapshots=snaps, meta=meta)


def default_workers() -> int:
    env = os.environ.get("SPARSEGMM_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_chains(
    data: DataMatrix,
    hyper: Hyperparams,
    config: RunConfig,
    n_workers: int | None = None,
    progress: ProgressCallback | None = None,
) -> list[ChainTrace]:
    """Run config.n_chains independent chains.

    Each chain owns a generator spawned from the master seed, so results
    are identical whatever the worker count; output is ordered by chain id.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    workers = n_workers if n_workers is not None else default_workers()

    def job(cid: int) -> ChainTrace:
        return run_chain(
            data,
            hyper,
            config,
            chain_id=cid,
            rng=np.random.default_rng(seeds[cid]),
            progress=progress,
        )

    ids = range(config.n_chains)
    if workers <= 1 or config.n_chains == 1:
        return [job(cid) for cid in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, ids))
