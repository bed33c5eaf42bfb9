"""Shared data model: data matrix, prior constants, sampler state, traces.

Conventions used throughout the package:

* The data matrix ``Y`` is p x n: rows are features, columns are
  observations (column ``i`` is observation ``Y_i``).
* Cluster labels are dense 1-based integers ``1..K`` in every public
  array (``z``, ``z_hat``, ``z_true``).  Row ``c`` of a ``(K, p)`` mean
  array corresponds to label ``c + 1``.
* Feature indices in public outputs (supports) are 1-based to match the
  label convention; in-memory numpy indexing is 0-based.
* Randomness: one master seed spawns independent per-chain streams via
  ``numpy.random.SeedSequence``.  Within a chain all draws happen in a
  fixed order, documented in :mod:`sparsegmm.gibbs`.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    NonFiniteEntryError,
    TooFewObservationsError,
)

JOINT_SSL = "joint"
COLUMN_SSL = "column"


@dataclass(frozen=True)
class DataMatrix:
    """Dense p x n observation matrix (rows = features, cols = observations)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise DataError(f"expected a 2-d matrix, got ndim={v.ndim}")
        object.__setattr__(self, "values", v)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def observation(self, i: int) -> np.ndarray:
        """Column ``i`` (0-based) as a length-p vector."""
        return self.values[:, i]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    p: int
    n: int
    constant_rows: tuple[int, ...] = ()
    messages: tuple[str, ...] = ()


def validate_dataset(data: DataMatrix) -> ValidationReport:
    """Check DataMatrix invariants; raise on violations, report oddities.

    Raises
    ------
    NonFiniteEntryError
        If any entry is NaN or infinite (first offender in row-major order).
    TooFewObservationsError
        If n < 2 or p < 1.
    """
    v = data.values
    if v.shape[0] < 1 or v.shape[1] < 2:
        raise TooFewObservationsError(
            f"need p >= 1 and n >= 2, got p={v.shape[0]}, n={v.shape[1]}"
        )
    bad = ~np.isfinite(v)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonFiniteEntryError(int(r), int(c))
    const = np.where(np.ptp(v, axis=1) == 0.0)[0]
    messages = []
    if const.size:
        messages.append(f"{const.size} constant feature row(s)")
    return ValidationReport(
        ok=True,
        p=data.p,
        n=data.n,
        constant_rows=tuple(int(j) for j in const),
        messages=tuple(messages),
    )


@dataclass(frozen=True)
class Hyperparams:
    """Prior constants for the sparse mixture model.

    lambda0/lambda1 are the spike/slab Laplace rates, beta_theta the second
    shape of the Beta prior on the slab inclusion probability, alpha the
    symmetric Dirichlet weight parameter, poisson_lambda the rate of the
    truncated Poisson prior on the number of clusters, k_max its truncation
    point, and ssl_mode selects shared ("joint") or per-cluster ("column")
    inclusion indicators.
    """

    lambda0: float
    lambda1: float
    beta_theta: float
    alpha: float = 1.0
    poisson_lambda: float = 2.0
    k_max: int = 20
    ssl_mode: str = JOINT_SSL

    def __post_init__(self):
        if not (self.lambda0 > self.lambda1 > 0):
            raise ValueError(
                f"need lambda0 > lambda1 > 0, got {self.lambda0}, {self.lambda1}"
            )
        if self.beta_theta <= 0 or self.poisson_lambda <= 0:
            raise ValueError("beta_theta and poisson_lambda must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.ssl_mode not in (JOINT_SSL, COLUMN_SSL):
            raise ValueError(f"unknown ssl_mode {self.ssl_mode!r}")
        if self.alpha < 1:
            warnings.warn(
                f"alpha={self.alpha} < 1 is outside the supported analysis regime",
                stacklevel=2,
            )

    def to_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "beta_theta": self.beta_theta,
            "alpha": self.alpha,
            "poisson_lambda": self.poisson_lambda,
            "k_max": self.k_max,
            "ssl_mode": self.ssl_mode,
        }

    def digest(self) -> str:
        """Stable hash of the hyperparameter values."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def default_hyperparams(p: int, ssl_mode: str = JOINT_SSL) -> Hyperparams:
    """Default prior constants for a p-feature dataset.

    lambda0=100, lambda1=1, alpha=1, poisson rate 2, k_max=20, and
    beta_theta = p^(1+kappa) * ln(p) with kappa = 0.1.  Natural log is
    used for the ``log p`` factor.
    """
    if p < 2:
        raise ValueError("default_hyperparams requires p >= 2")
    kappa = 0.1
    return Hyperparams(
        lambda0=100.0,
        lambda1=1.0,
        beta_theta=p ** (1.0 + kappa) * math.log(p),
        alpha=1.0,
        poisson_lambda=2.0,
        k_max=20,
        ssl_mode=ssl_mode,
    )


@dataclass
class ModelState:
    """One Gibbs-sampler state.

    z        : (n,) int labels in 1..K (dense, every cluster non-empty)
    mu       : (K, p) cluster means; row c is the mean of label c+1
    phi      : (K, p) strictly positive Laplace scale auxiliaries
    xi       : (p,) 0/1 indicators in joint mode, (K, p) in column mode
    theta    : slab inclusion probability in (0, 1)
    """

    z: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    theta: float

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def p(self) -> int:
        return self.mu.shape[1]

    @property
    def k_active(self) -> int:
        return self.mu.shape[0]

    def cluster_sizes(self) -> np.ndarray:
        """Sizes of clusters 1..K as a (K,) int array."""
        return np.bincount(self.z, minlength=self.k_active + 1)[1:]

    def copy(self) -> "ModelState":
        return ModelState(
            z=self.z.copy(),
            mu=self.mu.copy(),
            phi=self.phi.copy(),
            xi=self.xi.copy(),
            theta=self.theta,
        )

    def check_invariants(self, k_max: int | None = None) -> None:
        """Assert the partition/state invariants; raise AssertionError if broken."""
        k = self.k_active
        assert self.z.min() >= 1 and self.z.max() <= k, "labels out of range"
        sizes = self.cluster_sizes()
        assert (sizes >= 1).all(), "empty active cluster"
        assert self.phi.shape == self.mu.shape and (self.phi > 0).all(), "phi must be positive"
        assert 0.0 < self.theta < 1.0, "theta outside (0,1)"
        if k_max is not None:
            assert k <= k_max, "more active clusters than k_max"


@dataclass(frozen=True)
class Snapshot:
    """Post-burn-in state summary kept in a trace.

    Means are stored restricted to the active support (features with an
    inclusion indicator of 1; the union over clusters in column mode).
    ``support`` holds 1-based feature indices.  ``mu_dense`` is populated
    only when dense storage is toggled on.
    """

    z: np.ndarray
    k: int
    theta: float
    support: np.ndarray
    mu_support: np.ndarray
    mu_dense: np.ndarray | None = None

    def dense_mu(self, p: int) -> np.ndarray:
        """(K, p) mean matrix with zeros off the stored support."""
        if self.mu_dense is not None:
            return self.mu_dense
        out = np.zeros((self.k, p))
        if self.support.size:
            out[:, self.support - 1] = self.mu_support
        return out


@dataclass(frozen=True)
class TraceMeta:
    n: int
    p: int
    n_burn: int
    thin: int
    seed: int
    chain_id: int
    hyper_digest: str
    ssl_mode: str


@dataclass
class ChainTrace:
    """Ordered post-burn-in snapshots from one chain."""

    snapshots: list[Snapshot]
    meta: TraceMeta

    def __len__(self) -> int:
        return len(self.snapshots)

    def k_values(self) -> np.ndarray:
        return np.array([s.k for s in self.snapshots], dtype=int)

    def theta_values(self) -> np.ndarray:
        return np.array([s.theta for s in self.snapshots])


@dataclass(frozen=True)
class ClusterEstimate:
    """Aligned posterior point estimate.

    z_hat labels are exactly {1, ..., k_hat}; mu_hat is p x k_hat with
    column c-1 the mean of cluster c; support_hat holds 1-based feature
    indices whose posterior inclusion frequency reached the threshold.
    """

    k_hat: int
    z_hat: np.ndarray
    mu_hat: np.ndarray
    support_hat: tuple[int, ...]
    inclusion_freq: np.ndarray = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# trace serialization (newline-delimited JSON, one snapshot per line)
# ---------------------------------------------------------------------------


def trace_to_ndjson(trace: ChainTrace) -> str:
    """Serialize a trace; first record is the meta, then one snapshot per line."""
    lines = [
        json.dumps(
            {
                "type": "meta",
                "n": trace.meta.n,
                "p": trace.meta.p,
                "n_burn": trace.meta.n_burn,
                "thin": trace.meta.thin,
                "seed": trace.meta.seed,
                "chain_id": trace.meta.chain_id,
                "hyper_digest": trace.meta.hyper_digest,
                "ssl_mode": trace.meta.ssl_mode,
            },
            sort_keys=True,
        )
    ]
    for s in trace.snapshots:
        rec = {
            "type": "snapshot",
            "z": s.z.tolist(),
            "k": s.k,
            "theta": s.theta,
            "support": s.support.tolist(),
            "mu_support": s.mu_support.tolist(),
        }
        if s.mu_dense is not None:
            rec["mu_dense"] = s.mu_dense.tolist()
        lines.append(json.dumps(rec, sort_keys=True))
    return "\n".join(lines) + "\n"


def trace_from_ndjson(text: str) -> ChainTrace:
    """Inverse of :func:`trace_to_ndjson`; round-trips every field exactly."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError("empty trace file")
    head = json.loads(lines[0])
    if head.get("type") != "meta":
        raise DataError("trace file must start with a meta record")
    meta = TraceMeta(
        n=head["n"],
        p=head["p"],
        n_burn=head["n_burn"],
        thin=head["thin"],
        seed=head["seed"],
        chain_id=head["chain_id"],
        hyper_digest=head["hyper_digest"],
        ssl_mode=head["ssl_mode"],
    )
    snaps = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        if rec.get("type") != "snapshot":
            raise DataError(f"unexpected record type {rec.get('type')!r}")
        k = rec["k"]
        support = np.asarray(rec["support"], dtype=int)
        mu_support = np.asarray(rec["mu_support"], dtype=float).reshape(k, support.size)
        dense = rec.get("mu_dense")
        snaps.append(
            Snapshot(
                z=np.asarray(rec["z"], dtype=int),
                k=k,
                theta=rec["theta"],
                support=support,
                mu_support=mu_support,
                mu_dense=None if dense is None else np.asarray(dense, dtype=float),
            )
        )
    return ChainTrace(snapshots=snaps, meta=meta)


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """n independent, reproducible generators derived from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]
