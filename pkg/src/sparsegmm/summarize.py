"""Posterior summarization: label alignment, point estimates, diagnostics.

Raw mixture traces are only identified up to cluster relabeling.  The
alignment pass picks the snapshot with the smallest Frobenius
reconstruction error as the reference and permutes every other
snapshot's labels to best match the reference means.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .assignment import solve_assignment
from .core import ChainTrace, ClusterEstimate, DataMatrix, Snapshot
from .errors import LengthMismatchError


@dataclass(frozen=True)
class AlignedSnapshot:
    """One snapshot after relabeling.

    ``labels`` holds the aligned labels present, sorted ascending, and
    ``mu`` the matching dense means (row r is the mean of labels[r]).
    Aligned labels live in 1..max(K, K_ref) and are not necessarily
    dense when the snapshot's K differs from the reference's.
    """

    z: np.ndarray
    k: int
    theta: float
    labels: np.ndarray
    mu: np.ndarray

    def mean_of(self, label: int) -> np.ndarray | None:
        pos = np.searchsorted(self.labels, label)
        if pos < self.labels.size and self.labels[pos] == label:
            return self.mu[pos]
        return None


@dataclass
class AlignedTrace:
    """Aligned snapshots plus the label maps that produced them.

    ``perms[b][c]`` is the aligned label of original label c+1 in
    snapshot b; ``ref_index`` is the reference snapshot (or -1 when an
    external reference was supplied).
    """

    snapshots: list[AlignedSnapshot]
    perms: list[np.ndarray]
    ref_index: int
    p: int
    support_freq: np.ndarray

    def __len__(self) -> int:
        return len(self.snapshots)


def reconstruction_error(snapshot: Snapshot, data: DataMatrix) -> float:
    """||Y - mu L^T||_F^2 for one snapshot."""
    mu = snapshot.dense_mu(data.p)
    resid = data.values - mu[snapshot.z - 1].T
    return float(np.sum(resid * resid))


def _match_to_reference(mu_ref: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Label map sending snapshot cluster c+1 to its aligned label.

    Solves the assignment on the squared-distance matrix between
    reference rows and snapshot rows, padded with a large constant to a
    square when the cluster counts differ.  Surplus snapshot clusters
    keep fresh labels after the matched ones, in their original order.
    """
    k_ref, k = mu_ref.shape[0], mu.shape[0]
    m = max(k_ref, k)
    d = mu_ref[:, None, :] - mu[None, :, :]
    cost_real = np.einsum("rcp,rcp->rc", d, d)
    pad = m * (cost_real.max(initial=0.0) + 1.0) + 1.0
    cost = np.full((m, m), pad)
    cost[:k_ref, :k] = cost_real
    cols_for_rows = solve_assignment(cost)

    label_map = np.zeros(k, dtype=int)
    for r, c in enumerate(cols_for_rows):
        if r < k_ref and c < k:
            label_map[c] = r + 1
    surplus = np.flatnonzero(label_map == 0)
    label_map[surplus] = k_ref + 1 + np.arange(surplus.size)
    return label_map


def _apply_label_map(snapshot: Snapshot, label_map: np.ndarray, p: int) -> AlignedSnapshot:
    order = np.argsort(label_map)
    return AlignedSnapshot(
        z=label_map[snapshot.z - 1],
        k=snapshot.k,
        theta=snapshot.theta,
        labels=label_map[order],
        mu=snapshot.dense_mu(p)[order],
    )


def align_labels(
    trace: ChainTrace | list[Snapshot],
    data: DataMatrix,
    mu_ref: np.ndarray | None = None,
) -> AlignedTrace:
    """Align every snapshot's labels to a common reference.

    The reference is the snapshot minimizing the reconstruction error,
    unless an explicit reference mean matrix is supplied (used to align
    several chains against one shared target).
    """
    snaps = trace.snapshots if isinstance(trace, ChainTrace) else list(trace)
    if not snaps:
        raise LengthMismatchError("cannot align an empty trace")
    if mu_ref is None:
        errors = [reconstruction_error(s, data) for s in snaps]
        ref_index = int(np.argmin(errors))
        mu_ref = snaps[ref_index].dense_mu(data.p)
    else:
        ref_index = -1

    freq = np.zeros(data.p)
    aligned, perms = [], []
    for s in snaps:
        label_map = _match_to_reference(mu_ref, s.dense_mu(data.p))
        aligned.append(_apply_label_map(s, label_map, data.p))
        perms.append(label_map)
        freq[s.support - 1] += 1.0
    freq /= len(snaps)
    return AlignedTrace(
        snapshots=aligned, perms=perms, ref_index=ref_index, p=data.p, support_freq=freq
    )


def point_estimates(aligned: AlignedTrace, inclusion_threshold: float = 0.5) -> ClusterEstimate:
    """Posterior point estimate from an aligned trace.

    The cluster count is the posterior mode of K (smallest on ties); each
    observation gets its modal aligned label among the snapshots with
    that K; cluster means average the aligned draws over the same
    snapshots.  Labels are densified at the end so z_hat uses exactly
    1..k_hat.  The support estimate keeps features whose inclusion
    frequency over all snapshots reaches the threshold.
    """
    snaps = aligned.snapshots
    p = aligned.p
    k_counts = Counter(s.k for s in snaps)
    top = max(k_counts.values())
    k_mode = min(k for k, c in k_counts.items() if c == top)
    chosen = [s for s in snaps if s.k == k_mode]

    n = snaps[0].z.shape[0]
    max_label = max(int(s.labels.max()) for s in chosen)
    votes = np.zeros((n, max_label), dtype=int)
    for s in chosen:
        votes[np.arange(n), s.z - 1] += 1
    z_modal = votes.argmax(axis=1) + 1

    mu_sum = np.zeros((max_label, p))
    mu_count = np.zeros(max_label)
    for s in chosen:
        mu_sum[s.labels - 1] += s.mu
        mu_count[s.labels - 1] += 1

    used = np.unique(z_modal)
    lut = np.zeros(max_label + 1, dtype=int)
    lut[used] = np.arange(1, used.size + 1)
    z_hat = lut[z_modal]
    mu_hat = (mu_sum[used - 1] / np.maximum(mu_count[used - 1], 1.0)[:, None]).T

    freq = aligned.support_freq
    support_hat = tuple(int(j) + 1 for j in np.flatnonzero(freq >= inclusion_threshold))

    return ClusterEstimate(
        k_hat=int(used.size),
        z_hat=z_hat,
        mu_hat=mu_hat,
        support_hat=support_hat,
        inclusion_freq=freq,
    )


def psrf(chains) -> float:
    """Potential scale reduction factor for one scalar across chains.

    sqrt(((L-1)/L * W + B/L) / W) with W the mean within-chain variance
    and B = L * variance of the chain means.  Identical constant chains
    return 1 by convention.
    """
    arrs = [np.asarray(c, dtype=float) for c in chains]
    if len(arrs) < 2:
        raise LengthMismatchError("need at least 2 chains")
    length = arrs[0].size
    if any(a.size != length for a in arrs):
        raise LengthMismatchError("chains must have equal lengths")
    if length < 2:
        raise LengthMismatchError("chains must have length >= 2")
    mat = np.stack(arrs)
    w = mat.var(axis=1, ddof=1).mean()
    b = length * mat.mean(axis=1).var(ddof=1)
    if w == 0.0:
        return 1.0 if b == 0.0 else float("inf")
    return float(np.sqrt(((length - 1) / length * w + b / length) / w))


def psrf_report(traces: list[ChainTrace], data: DataMatrix) -> dict[str, float]:
    """PSRF table over theta, K, and first-coordinate cluster means.

    All chains are aligned against the globally best-reconstructing
    snapshot; a mean-coordinate entry appears only for aligned labels
    present in every snapshot of every chain.
    """
    if len(traces) < 2:
        raise LengthMismatchError("need at least 2 chains")
    pooled = [s for t in traces for s in t.snapshots]
    errors = [reconstruction_error(s, data) for s in pooled]
    mu_ref = pooled[int(np.argmin(errors))].dense_mu(data.p)
    aligned = [align_labels(t, data, mu_ref=mu_ref) for t in traces]

    report = {
        "theta": psrf([t.theta_values() for t in traces]),
        "k": psrf([t.k_values() for t in traces]),
    }
    for label in range(1, mu_ref.shape[0] + 1):
        seqs = []
        for a in aligned:
            vals = [s.mean_of(label) for s in a.snapshots]
            if any(v is None for v in vals):
                seqs = None
                break
            seqs.append(np.array([v[0] for v in vals]))
        if seqs is not None:
            report[f"mu_{label}_1"] = psrf(seqs)
    return report
