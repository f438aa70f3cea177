"""Two-tier privatization of categorical values.

Categories whose population mass falls below a rarity threshold are never
reported individually: every rare input collapses to the same shielded
sentinel, so the output carries no information about which rare value was
held. All other categories pass through symmetric k-ary randomized response:
with probability 1 - p the true category is kept, otherwise a category is
resampled uniformly from all k, giving an effective keep probability
q = 1 - p + p/k. Aggregate frequencies are recovered from report fractions
with the inverse map mu_hat = (y - p/k) / (1 - p), which is exactly unbiased
for this mechanism.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SHIELDED",
    "CategoricalDistribution",
    "RarityPartition",
    "RapporParams",
    "ReportKind",
    "PrivatizedReport",
    "PacBounds",
    "classify_rarity",
    "derive_params",
    "randomization_matrix",
    "privatize",
    "privatize_many",
    "debias",
    "estimator_variance_bound",
    "pac_bounds",
]

# Sentinel used by the vectorized path for shielded-rare outputs.
SHIELDED = -1

_MASS_SUM_TOL = 1e-9


@dataclass(frozen=True)
class CategoricalDistribution:
    """Probability vector over k >= 2 categories."""

    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float, copy=True)
        if masses.ndim != 1 or masses.size < 2:
            raise ValueError("masses must be a 1-d vector of length >= 2")
        if np.any(masses < 0.0) or np.any(masses > 1.0):
            raise ValueError("every mass must lie in [0, 1]")
        total = float(masses.sum())
        if abs(total - 1.0) > _MASS_SUM_TOL:
            raise ValueError(f"masses must sum to 1 within {_MASS_SUM_TOL}, got {total!r}")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def k(self) -> int:
        return int(self.masses.size)


@dataclass(frozen=True)
class RarityPartition:
    """Split of category indices into rare and non-rare at mass threshold alpha.

    A category j is rare iff its source mass is strictly below alpha; mass
    exactly equal to alpha is non-rare. Index tuples are kept sorted.
    """

    alpha: float
    rare: tuple[int, ...]
    nonrare: tuple[int, ...]

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        rare = tuple(int(j) for j in self.rare)
        nonrare = tuple(int(j) for j in self.nonrare)
        if set(rare) & set(nonrare):
            raise ValueError("rare and nonrare sets must be disjoint")
        k = len(rare) + len(nonrare)
        if set(rare) | set(nonrare) != set(range(k)):
            raise ValueError("rare and nonrare must together cover 0..k-1")
        object.__setattr__(self, "rare", tuple(sorted(rare)))
        object.__setattr__(self, "nonrare", tuple(sorted(nonrare)))

    @property
    def k(self) -> int:
        return len(self.rare) + len(self.nonrare)

    def rare_mask(self) -> np.ndarray:
        """Boolean lookup table of length k, True at rare indices."""
        mask = np.zeros(self.k, dtype=bool)
        mask[list(self.rare)] = True
        return mask


@dataclass(frozen=True)
class RapporParams:
    """Randomized-response parameters with their two privacy-loss readings.

    eps_nominal is the binary-flip reading log((1-p)/p); it is the value a
    budget ledger is charged per release. eps_exact is the exact worst-case
    likelihood ratio of the k-ary mechanism, log(q*k/p), and is always at
    least eps_nominal for k >= 2. Both are exposed; neither is silently
    corrected into the other.

    p = 0 is the noiseless edge (q = 1, both epsilons infinite); it is useful
    for identity checks but cannot be charged to a finite budget.
    """

    p: float
    k: int
    q: float
    eps_nominal: float
    eps_exact: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError("p must lie in [0, 1)")
        if self.k < 2:
            raise ValueError("k must be at least 2")


def derive_params(p: float, k: int) -> RapporParams:
    """Derive the full parameter set from a flip probability and domain size.

    Args:
        p: probability of replacing the true category with a uniform draw,
           in [0, 1). p = 0 yields the noiseless identity mechanism.
        k: domain size, at least 2.

    Returns:
        RapporParams with q = 1 - p + p/k and both epsilon readings.
    """
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p!r}")
    k = int(k)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k!r}")
    q = 1.0 - p + p / k
    if p == 0.0:
        eps_nominal = math.inf
        eps_exact = math.inf
    else:
        eps_nominal = math.log((1.0 - p) / p)
        eps_exact = math.log(q * k / p)
    return RapporParams(p=p, k=k, q=q, eps_nominal=eps_nominal, eps_exact=eps_exact)


def randomization_matrix(params: RapporParams) -> np.ndarray:
    """k x k row-stochastic matrix M with M[x, y] = P(report y | true x)."""
    off = params.p / params.k
    m = np.full((params.k, params.k), off)
    np.fill_diagonal(m, params.q)
    return m


class ReportKind(enum.Enum):
    SHIELDED_RARE = "shielded_rare"
    REPORTED = "reported"


@dataclass(frozen=True)
class PrivatizedReport:
    """One user's privatized output.

    A shielded-rare report carries no category; a reported one carries the
    (noisy) category index.
    """

    kind: ReportKind
    category: int | None = None

    def __post_init__(self):
        if self.kind is ReportKind.REPORTED:
            if self.category is None:
                raise ValueError("a reported output must carry a category index")
        elif self.category is not None:
            raise ValueError("a shielded-rare output must not carry a category")

    @classmethod
    def shielded_rare(cls) -> "PrivatizedReport":
        return _SHIELDED_REPORT

    @classmethod
    def reported(cls, category: int) -> "PrivatizedReport":
        return cls(ReportKind.REPORTED, int(category))


_SHIELDED_REPORT = PrivatizedReport(ReportKind.SHIELDED_RARE)


def classify_rarity(dist: CategoricalDistribution, alpha: float) -> RarityPartition:
    """Partition the domain of `dist` into rare and non-rare categories.

    Args:
        dist: source distribution.
        alpha: rarity threshold in (0, 1); mass strictly below alpha is rare.

    Returns:
        RarityPartition with ascending index order inside each set.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
    rare = tuple(int(j) for j in np.flatnonzero(dist.masses < alpha))
    nonrare = tuple(int(j) for j in np.flatnonzero(dist.masses >= alpha))
    return RarityPartition(alpha=alpha, rare=rare, nonrare=nonrare)


def privatize_many(
    categories: np.ndarray,
    partition: RarityPartition,
    params: RapporParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Privatize a vector of true categories in one pass.

    Returns an int array: SHIELDED (-1) where the true category is rare,
    otherwise the randomized-response output for that entry. Distribution
    per entry matches `privatize`.
    """
    if params.k != partition.k:
        raise ValueError(
            f"params.k ({params.k}) must equal the partition's domain size ({partition.k})"
        )
    cats = np.asarray(categories)
    if cats.size and (cats.min() < 0 or cats.max() >= params.k):
        raise ValueError(f"category indices must lie in [0, {params.k})")
    cats = cats.astype(np.int64, copy=False)
    flip = rng.random(cats.shape) < params.p
    resampled = rng.integers(0, params.k, size=cats.shape)
    out = np.where(flip, resampled, cats)
    out[partition.rare_mask()[cats]] = SHIELDED
    return out


def privatize(
    true_category: int,
    partition: RarityPartition,
    params: RapporParams,
    rng: np.random.Generator,
) -> PrivatizedReport:
    """Privatize a single category index.

    Rare inputs deterministically yield the shielded sentinel. Non-rare
    inputs are kept with probability 1 - p and otherwise replaced by a
    uniform draw over all k categories, so the keep probability is exactly
    q = 1 - p + p/k.
    """
    value = int(privatize_many(np.asarray([true_category]), partition, params, rng)[0])
    if value == SHIELDED:
        return PrivatizedReport.shielded_rare()
    return PrivatizedReport.reported(value)


def debias(report_histogram: np.ndarray, n: int, params: RapporParams) -> np.ndarray:
    """Invert the randomization to unbiased frequency estimates.

    Args:
        report_histogram: length-k vector of report counts per category
            (shielded reports contribute to no bin).
        n: total number of reports, shielded included.
        params: parameters the reports were produced with.

    Returns:
        Estimate vector mu_hat with mu_hat[j] = (count[j]/n - p/k) / (1 - p).
        Entries may be slightly negative; no clamping happens here.

    Some randomized-response write-ups normalize by q - (1 - q)/k instead;
    for this symmetric k-ary mechanism the off-diagonal report probability
    is p/k, and only the map above inverts the expectation exactly.
    """
    hist = np.asarray(report_histogram, dtype=float)
    if hist.ndim != 1 or hist.size != params.k:
        raise ValueError(f"report_histogram must have length k={params.k}, got {hist.shape}")
    if n <= 0:
        raise ValueError(f"n must be positive, got {n!r}")
    y = hist / float(n)
    return (y - params.p / params.k) / (1.0 - params.p)


def estimator_variance_bound(params: RapporParams, n: int) -> float:
    """Worst-case per-category variance bound p(1-p)/n for the estimator."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n!r}")
    return params.p * (1.0 - params.p) / float(n)


@dataclass(frozen=True)
class PacBounds:
    """Three indistinguishability bounds for a rare category.

    hoeffding_gap uses the true gap alpha - mu, hoeffding_alpha is the
    mu-free conservative variant at gap alpha, and empirical_fit is the
    unsquared exponential decay that tracks observed behaviour more closely.
    All are probabilities in (0, 1] and non-increasing in n.
    """

    hoeffding_gap: float
    hoeffding_alpha: float
    empirical_fit: float


def pac_bounds(n: int, alpha: float, mu: float) -> PacBounds:
    """Evaluate the shielding bounds at sample size n.

    Args:
        n: number of samples, >= 0.
        alpha: rarity threshold in (0, 1).
        mu: true mass of the rare category, with 0 <= mu < alpha.

    Returns:
        PacBounds(exp(-2n(alpha-mu)^2), exp(-2n alpha^2), exp(-n(alpha-mu))).
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n!r}")
    alpha = float(alpha)
    mu = float(mu)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
    if mu < 0.0:
        raise ValueError(f"mu must be non-negative, got {mu!r}")
    if mu >= alpha:
        raise ValueError(
            f"mu ({mu!r}) must be strictly below alpha ({alpha!r}); "
            "shielding bounds do not apply to non-rare mass"
        )
    gap = alpha - mu
    return PacBounds(
        hoeffding_gap=math.exp(-2.0 * n * gap * gap),
        hoeffding_alpha=math.exp(-2.0 * n * alpha * alpha),
        empirical_fit=math.exp(-float(n) * gap),
    )
