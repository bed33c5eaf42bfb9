"""Full-conditional updates for the sparsity-inducing prior block.

The two-rate Laplace mixture prior on cluster means is handled through
its normal scale-mixture representation, which gives conjugate updates
for the means (normal), the scale auxiliaries phi (GIG), the inclusion
indicators xi (Bernoulli), and the inclusion probability theta (Beta).

The Bernoulli update computes the slab probability with the shared
1/sqrt(phi) factors canceled between the slab and spike hypotheses;
under a shared indicator the factors are identical on both sides, so the
canceled and uncanceled forms agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import JOINT_SSL, DataMatrix, Hyperparams, ModelState
from .distributions import sample_gig_half_vector
from .errors import LengthMismatchError

_THETA_FLOOR = 1e-300
_THETA_CEIL = 1.0 - 1e-16


@dataclass(frozen=True)
class SslConditionalContext:
    """Per-cluster sufficient statistics for the mean update."""

    cluster_sums: np.ndarray   # (K, p) row c = sum of observations in cluster c+1
    cluster_sizes: np.ndarray  # (K,)
    lambda0: float
    lambda1: float
    beta_theta: float

    def __post_init__(self):
        if (self.cluster_sizes < 1).any():
            raise LengthMismatchError("every active cluster must be non-empty")


def build_context(state: ModelState, data: DataMatrix, hyper: Hyperparams) -> SslConditionalContext:
    """Recompute cluster sums/sizes from scratch (avoids incremental drift)."""
    k = state.k_active
    sums = np.zeros((k, data.p))
    np.add.at(sums, state.z - 1, data.values.T)
    sizes = state.cluster_sizes()
    if sizes.sum() != data.n:
        raise LengthMismatchError("cluster sizes do not sum to n")
    return SslConditionalContext(
        cluster_sums=sums,
        cluster_sizes=sizes,
        lambda0=hyper.lambda0,
        lambda1=hyper.lambda1,
        beta_theta=hyper.beta_theta,
    )


def _lambda_sq(state: ModelState, hyper: Hyperparams) -> np.ndarray:
    """(K, p) array of lambda_{xi}^2 values matching mu's layout."""
    lam_sq = np.where(state.xi == 1, hyper.lambda1**2, hyper.lambda0**2)
    if lam_sq.ndim == 1:
        lam_sq = np.broadcast_to(lam_sq, state.mu.shape)
    return lam_sq


def mu_conditional(sum_y: float, n_c: float, lam_sq_over_phi: float) -> tuple[float, float]:
    """(mean, variance) of the conjugate normal conditional for one coordinate."""
    prec = n_c + lam_sq_over_phi
    return sum_y / prec, 1.0 / prec


def update_mu(
    state: ModelState,
    ctx: SslConditionalContext,
    hyper: Hyperparams,
    rng: np.random.Generator,
) -> ModelState:
    """Redraw every coordinate of every active cluster mean in place.

    Clusters are visited in ascending label order; each cluster consumes
    one block of standard normal draws in ascending coordinate order.
    """
    lam_sq = _lambda_sq(state, hyper)
    for c in range(state.k_active):
        prec = ctx.cluster_sizes[c] + lam_sq[c] / state.phi[c]
        mean = ctx.cluster_sums[c] / prec
        state.mu[c] = mean + rng.standard_normal(state.p) / np.sqrt(prec)
    return state


def update_phi(state: ModelState, hyper: Hyperparams, rng: np.random.Generator) -> ModelState:
    """Redraw the scale auxiliaries: (phi_c)_j ~ GIG(1/2, mu_cj^2 lambda_{xi}^2, 1).

    Cluster-ascending; see sample_gig_half_vector for the within-cluster
    draw order.
    """
    lam_sq = _lambda_sq(state, hyper)
    for c in range(state.k_active):
        chi = state.mu[c] ** 2 * lam_sq[c]
        state.phi[c] = sample_gig_half_vector(chi, 1.0, rng)
    return state


def slab_log_odds(
    sq_sum: np.ndarray, n_terms: int, lambda0: float, lambda1: float, theta: float
) -> np.ndarray:
    """log odds of the slab hypothesis for each feature.

    sq_sum is the per-feature sum of mu^2/phi over the clusters entering
    the product (all K in joint mode, a single cluster in column mode);
    n_terms is the number of factors in that product.
    """
    theta = min(max(theta, _THETA_FLOOR), _THETA_CEIL)
    log_slab = n_terms * np.log(lambda1) - 0.5 * lambda1**2 * sq_sum + np.log(theta)
    log_spike = n_terms * np.log(lambda0) - 0.5 * lambda0**2 * sq_sum + np.log1p(-theta)
    return log_slab - log_spike


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def update_xi(state: ModelState, hyper: Hyperparams, rng: np.random.Generator) -> ModelState:
    """Redraw the inclusion indicators from their Bernoulli conditionals.

    Joint mode: one indicator per feature, product over all active
    clusters, one uniform block in ascending feature order.  Column mode:
    per-cluster indicators, clusters ascending.
    """
    ratio = state.mu**2 / state.phi
    if hyper.ssl_mode == JOINT_SSL:
        odds = slab_log_odds(
            ratio.sum(axis=0), state.k_active, hyper.lambda0, hyper.lambda1, state.theta
        )
        prob = _sigmoid(odds)
        state.xi = (rng.random(state.p) < prob).astype(np.int8)
    else:
        new_xi = np.empty_like(state.xi)
        for c in range(state.k_active):
            odds = slab_log_odds(ratio[c], 1, hyper.lambda0, hyper.lambda1, state.theta)
            new_xi[c] = (rng.random(state.p) < _sigmoid(odds)).astype(np.int8)
        state.xi = new_xi
    return state


def theta_conditional_shapes(xi: np.ndarray, beta_theta: float) -> tuple[float, float]:
    """Beta shapes (1 + sum xi, beta_theta + #indicators - sum xi)."""
    total = int(xi.sum())
    count = int(xi.size)
    return 1.0 + total, beta_theta + count - total


def update_theta(state: ModelState, hyper: Hyperparams, rng: np.random.Generator) -> ModelState:
    """Redraw theta from its Beta conditional (one draw)."""
    a, b = theta_conditional_shapes(state.xi, hyper.beta_theta)
    draw = float(rng.beta(a, b))
    state.theta = min(max(draw, _THETA_FLOOR), _THETA_CEIL)
    return state


def sample_prior_phi(p: int, rng: np.random.Generator) -> np.ndarray:
    """phi_j ~ Exp(rate 1/2), the scale-mixture prior for the auxiliaries."""
    return rng.exponential(2.0, size=p)


def sample_prior_mu(
    xi_row: np.ndarray, phi: np.ndarray, hyper: Hyperparams, rng: np.random.Generator
) -> np.ndarray:
    """mu_j ~ N(0, phi_j / lambda_{xi_j}^2), one normal block ascending."""
    lam_sq = np.where(xi_row == 1, hyper.lambda1**2, hyper.lambda0**2)
    return rng.standard_normal(phi.size) * np.sqrt(phi / lam_sq)
