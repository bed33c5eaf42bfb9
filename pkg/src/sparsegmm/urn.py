"""Partition-urn machinery: new-cluster coefficients and the reseating step.

The exchangeable-partition coefficients V_n(t) control the probability of
opening a new cluster while reseating a single observation.  Two modes
are provided:

* ``"exact"`` (default): the truncated-series definition
  V_n(t) = sum_{k=t}^{k_max} p_K(k) * k_(t) / (alpha*k)^(n),
  computed in the log domain (falling factorial k_(t), rising factorial
  (alpha*k)^(n)).  The truncated prior on the number of clusters makes
  the series finite, so this mode is exact.
* ``"stirling"``: the closed-form approximation
  V_n(t) ~= (t!/n!) * Gamma(alpha*t) / n^(alpha*t - 1) * p_K(t),
  kept for compatibility with the approximate recipe; it does not match
  the exact series and is off by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import COLUMN_SSL, DataMatrix, Hyperparams, ModelState
from .distributions import log_trunc_poisson_table, sample_categorical_log
from .ssl import sample_prior_mu, sample_prior_phi

EXACT = "exact"
STIRLING = "stirling"


@dataclass(frozen=True)
class VnTable:
    """log V_n(t) for t = 1..k_max; -inf beyond the truncation."""

    table: np.ndarray
    n: int
    alpha: float
    k_max: int
    mode: str = EXACT

    def log_vn(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"t must be >= 1, got {t}")
        if t > self.k_max:
            return -np.inf
        return float(self.table[t - 1])

    def log_ratio(self, t: int) -> float:
        """log V_n(t+1) - log V_n(t); -inf once t+1 exceeds the truncation."""
        return self.log_vn(t + 1) - self.log_vn(t)


def build_vn_table(n: int, hyper: Hyperparams, mode: str = EXACT) -> VnTable:
    """Tabulate log V_n(t) for all t in 1..k_max."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k_max = hyper.k_max
    alpha = hyper.alpha
    log_pk = log_trunc_poisson_table(hyper.poisson_lambda, k_max)
    ks = np.arange(1, k_max + 1, dtype=float)
    out = np.empty(k_max)
    if mode == EXACT:
        # log k_(t) = lgamma(k+1) - lgamma(k-t+1); log (alpha k)^(n) via lgamma.
        log_rising = gammaln(alpha * ks + n) - gammaln(alpha * ks)
        for t in range(1, k_max + 1):
            ks_t = ks[t - 1 :]
            log_falling = gammaln(ks_t + 1) - gammaln(ks_t - t + 1)
            out[t - 1] = logsumexp(log_pk[t - 1 :] + log_falling - log_rising[t - 1 :])
    elif mode == STIRLING:
        for t in range(1, k_max + 1):
            out[t - 1] = (
                gammaln(t + 1)
                - gammaln(n + 1)
                + gammaln(alpha * t)
                - (alpha * t - 1) * np.log(n)
                + log_pk[t - 1]
            )
    else:
        raise ValueError(f"unknown V_n mode {mode!r}")
    return VnTable(table=out, n=n, alpha=alpha, k_max=k_max, mode=mode)


def gaussian_loglik(y: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """-(1/2) ||y - mu_k||^2 for each row mu_k of a (K, p) array.

    The -(p/2) log(2 pi) constant is common to every reseating weight and
    is omitted from all of them simultaneously.
    """
    d = mu - y
    return -0.5 * np.einsum("kp,kp->k", d, d)


def reseat_log_weights(
    y: np.ndarray,
    mus: np.ndarray,
    sizes_minus: np.ndarray,
    alpha: float,
    log_vn_ratio: float,
    mu_cand: np.ndarray | None,
) -> np.ndarray:
    """Unnormalized log weights for reseating one observation.

    Entry k < t: log(n_k^- + alpha) + loglik(y | mu_k).  A final entry
    log(alpha) + log_vn_ratio + loglik(y | mu_cand) is appended when a
    candidate mean is supplied.
    """
    logw = np.log(sizes_minus + alpha) + gaussian_loglik(y, mus)
    if mu_cand is not None:
        cand = np.log(alpha) + log_vn_ratio + gaussian_loglik(y, mu_cand[None, :])[0]
        logw = np.append(logw, cand)
    return logw


def _remove_cluster(state: ModelState, c: int, column_mode: bool) -> None:
    state.mu = np.delete(state.mu, c, axis=0)
    state.phi = np.delete(state.phi, c, axis=0)
    if column_mode:
        state.xi = np.delete(state.xi, c, axis=0)
    state.z = np.where(state.z > c + 1, state.z - 1, state.z)


def reseat_observation(
    i: int,
    state: ModelState,
    vn: VnTable,
    data: DataMatrix,
    hyper: Hyperparams,
    rng: np.random.Generator,
) -> ModelState:
    """Remove observation i (0-based) from its cluster and reseat it.

    Follows the single-observation urn step: a departing singleton offers
    its own parameters as the candidate cluster; otherwise candidate
    auxiliaries and mean are drawn fresh from the prior (in column mode a
    fresh indicator column first, then auxiliaries, then the mean).  The
    candidate option is suppressed, and no candidate draws are consumed,
    when the active count without i already equals k_max.  Emptied
    clusters are removed and labels stay dense.
    """
    column_mode = hyper.ssl_mode == COLUMN_SSL
    y = data.observation(i)
    old_label = int(state.z[i])
    counts = state.cluster_sizes()

    singleton = counts[old_label - 1] == 1
    if singleton:
        mu_cand = state.mu[old_label - 1].copy()
        phi_cand = state.phi[old_label - 1].copy()
        xi_cand = state.xi[old_label - 1].copy() if column_mode else None
        _remove_cluster(state, old_label - 1, column_mode)
        counts = np.delete(counts, old_label - 1)
        allow_candidate = True
    else:
        counts[old_label - 1] -= 1
        allow_candidate = state.k_active < vn.k_max
        xi_cand = None
        if allow_candidate:
            if column_mode:
                xi_cand = (rng.random(state.p) < state.theta).astype(np.int8)
                xi_for_draw = xi_cand
            else:
                xi_for_draw = state.xi
            phi_cand = sample_prior_phi(state.p, rng)
            mu_cand = sample_prior_mu(xi_for_draw, phi_cand, hyper, rng)
        else:
            phi_cand = mu_cand = None

    t = state.k_active
    logw = reseat_log_weights(
        y,
        state.mu,
        counts.astype(float),
        hyper.alpha,
        vn.log_ratio(t) if allow_candidate else -np.inf,
        mu_cand if allow_candidate else None,
    )
    choice = sample_categorical_log(logw, rng)

    if choice == t:
        state.mu = np.vstack([state.mu, mu_cand[None, :]])
        state.phi = np.vstack([state.phi, phi_cand[None, :]])
        if column_mode:
            state.xi = np.vstack([state.xi, xi_cand[None, :]])
        state.z[i] = t + 1
    else:
        state.z[i] = choice + 1
    return state
