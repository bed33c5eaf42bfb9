"""Reproducible synthetic benchmark generators.

Three named scenarios plus a free-form Gaussian/Student-t mixture.  All
dimensions and mean magnitudes can be overridden for desk-scale runs;
fixed seeds give bit-identical output.

Named scenarios (defaults p=400, n=200, support = first s features):

* scenario one: K*=3 with means 3, -1.5, 0 on the support and weights
  (0.3, 0.3, 0.4), or K*=5 with means 4, -4, 0, alternating +-4 and
  alternating +-1.5 and uniform weights; unit-variance Gaussian noise.
* scenario two: s=8, means (5,2,...), (10,5,...), (15,2,...) on the
  support, weights (0.02, 0.48, 0.5); the middle cluster has variance 4
  on the support (1 elsewhere), the others are isotropic.
* scenario three: the means/covariances of scenario two, weights
  (0.2, 0.4, 0.4), and multivariate Student-t noise with 5 degrees of
  freedom (Gaussian draw scaled by sqrt(dof / chi-square(dof))).

Draw order per dataset: cluster labels, then the Gaussian noise block,
then (t only) the chi-square scaling block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataMatrix
from .errors import BadSpecError

SCENARIO_ONE = "one"
SCENARIO_TWO = "two"
SCENARIO_THREE = "three"
CUSTOM = "custom"


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: str = SCENARIO_ONE
    p: int | None = None
    n: int | None = None
    seed: int = 0
    k_star: int = 3          # scenario one: 3 or 5
    s: int | None = None     # support size (scenario one: 6 or 12)
    mean_scale: float = 1.0
    # custom-mixture fields
    means: np.ndarray | None = None          # (p, K)
    weights: np.ndarray | None = None        # (K,)
    diag_variances: np.ndarray | None = None  # (K, p), defaults to ones
    t_dof: float | None = None


def _scenario_one_means(p: int, k_star: int, s: int) -> np.ndarray:
    if k_star == 3:
        base = [3.0, -1.5, 0.0]
        mu = np.zeros((p, 3))
        for c, v in enumerate(base):
            mu[:s, c] = v
    elif k_star == 5:
        mu = np.zeros((p, 5))
        mu[:s, 0] = 4.0
        mu[:s, 1] = -4.0
        alt = np.array([(-1.0) ** (j + 1) for j in range(s)])  # -1, +1, -1, ...
        mu[:s, 3] = 4.0 * alt
        mu[:s, 4] = 1.5 * -alt
    else:
        raise BadSpecError(f"scenario one supports k_star in {{3, 5}}, got {k_star}")
    return mu


def _scenario_two_means(p: int, s: int) -> np.ndarray:
    mu = np.zeros((p, 3))
    pattern = np.array([[5.0, 2.0], [10.0, 5.0], [15.0, 2.0]])
    for c in range(3):
        mu[:s, c] = np.tile(pattern[c], (s + 1) // 2)[:s]
    return mu


def _resolve(spec: ScenarioSpec):
    """(p, n, means, weights, variances, t_dof) for any scenario."""
    if spec.scenario == SCENARIO_ONE:
        p = spec.p or 400
        n = spec.n or 200
        s = spec.s or 6
        if s > p:
            raise BadSpecError(f"support size {s} exceeds p={p}")
        means = _scenario_one_means(p, spec.k_star, s) * spec.mean_scale
        weights = (
            np.array([0.3, 0.3, 0.4]) if spec.k_star == 3 else np.full(5, 0.2)
        )
        variances = np.ones((means.shape[1], p))
        return p, n, means, weights, variances, None
    if spec.scenario in (SCENARIO_TWO, SCENARIO_THREE):
        p = spec.p or 400
        n = spec.n or 200
        s = spec.s or 8
        if s > p:
            raise BadSpecError(f"support size {s} exceeds p={p}")
        means = _scenario_two_means(p, s) * spec.mean_scale
        variances = np.ones((3, p))
        variances[1, :s] = 4.0
        if spec.scenario == SCENARIO_TWO:
            return p, n, means, np.array([0.02, 0.48, 0.5]), variances, None
        return p, n, means, np.array([0.2, 0.4, 0.4]), variances, 5.0
    if spec.scenario == CUSTOM:
        if spec.means is None or spec.weights is None:
            raise BadSpecError("custom scenario requires means and weights")
        means = np.asarray(spec.means, dtype=float) * spec.mean_scale
        weights = np.asarray(spec.weights, dtype=float)
        if means.ndim != 2 or weights.ndim != 1 or means.shape[1] != weights.size:
            raise BadSpecError("means must be p x K with one weight per cluster")
        if not np.isclose(weights.sum(), 1.0):
            raise BadSpecError(f"weights sum to {weights.sum()}, expected 1")
        p = means.shape[0]
        if spec.p is not None and spec.p != p:
            raise BadSpecError("explicit p conflicts with means dimension")
        n = spec.n or 200
        if spec.diag_variances is None:
            variances = np.ones((weights.size, p))
        else:
            variances = np.asarray(spec.diag_variances, dtype=float)
            if variances.shape != (weights.size, p):
                raise BadSpecError("diag_variances must be K x p")
        return p, n, means, weights, variances, spec.t_dof
    raise BadSpecError(f"unknown scenario {spec.scenario!r}")


def generate(spec: ScenarioSpec) -> tuple[DataMatrix, np.ndarray, np.ndarray]:
    """Draw one dataset: (data, z_true, mu_true).

    z_true uses labels 1..K; mu_true is p x K.
    """
    p, n, means, weights, variances, t_dof = _resolve(spec)
    if n < 2:
        raise BadSpecError("need n >= 2")
    rng = np.random.default_rng(spec.seed)
    z = rng.choice(weights.size, size=n, p=weights) + 1
    noise = rng.standard_normal((p, n)) * np.sqrt(variances[z - 1].T)
    if t_dof is not None:
        scale = np.sqrt(t_dof / rng.chisquare(t_dof, size=n))
        noise = noise * scale[None, :]
    y = means[:, z - 1] + noise
    return DataMatrix(values=y), z, means
