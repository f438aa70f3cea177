"""Privacy-budget ledger, composition rules, and the release aggregator.

The ledger holds a hard budget in nats and a history of per-query charges.
Total spend is always recomputed from the full history under the ledger's
composition mode, so accepted state never drifts from its definition. A
charge that would push spend past the budget is refused and leaves the
ledger untouched.

The aggregator turns a batch of privatized reports into a release bundle:
debiased estimates for non-rare categories, a single total count for all
shielded-rare reports (no per-category breakdown), and the shielding bounds
evaluated at the release's sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mechanism import (
    PacBounds,
    PrivatizedReport,
    RapporParams,
    RarityPartition,
    ReportKind,
    debias,
    pac_bounds,
)

__all__ = [
    "BASIC",
    "ADVANCED",
    "ChargeResult",
    "PrivacyLedger",
    "ReleaseBundle",
    "compose_basic",
    "compose_advanced",
    "aggregate",
]

BASIC = "basic"
ADVANCED = "advanced"
_MODES = (BASIC, ADVANCED)


def compose_basic(count_queries: int, eps: float) -> float:
    """Total privacy loss of count_queries releases at eps each, summed linearly."""
    if count_queries < 0:
        raise ValueError(f"count_queries must be non-negative, got {count_queries!r}")
    if eps < 0:
        raise ValueError(f"eps must be non-negative, got {eps!r}")
    return count_queries * eps


def compose_advanced(count_queries: int, eps: float, delta: float) -> float:
    """Sublinear composition bound sqrt(2k log(1/delta)) eps + k eps (e^eps - 1).

    Tighter than the linear sum for many small queries, at the cost of a
    delta slack.
    """
    if count_queries < 1:
        raise ValueError(f"count_queries must be at least 1, got {count_queries!r}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie strictly between 0 and 1, got {delta!r}")
    k = count_queries
    return math.sqrt(2.0 * k * math.log(1.0 / delta)) * eps + k * eps * (math.exp(eps) - 1.0)


def _compose_history(epsilons: Sequence[float], mode: str, delta_target: float) -> float:
    """Spend implied by a charge history under the given mode.

    Advanced mode uses the heterogeneous form
    sqrt(2 log(1/delta) sum eps_i^2) + sum eps_i (e^eps_i - 1),
    which reduces to compose_advanced when all charges are equal.
    """
    if not epsilons:
        return 0.0
    if mode == BASIC:
        return math.fsum(epsilons)
    sum_sq = math.fsum(e * e for e in epsilons)
    linear = math.fsum(e * math.expm1(e) for e in epsilons)
    return math.sqrt(2.0 * math.log(1.0 / delta_target) * sum_sq) + linear


@dataclass(frozen=True)
class ChargeResult:
    """Outcome of one attempted charge. Refusal is a normal outcome."""

    accepted: bool
    spent: float
    reason: str | None = None


class PrivacyLedger:
    """Cumulative epsilon accounting against a hard budget.

    The composition mode is fixed at construction; spend under one mode is
    not comparable to spend under the other.
    """

    def __init__(self, budget: float, mode: str = BASIC, delta_target: float = 1e-5):
        budget = float(budget)
        if budget < 0 or math.isnan(budget):
            raise ValueError(f"budget must be non-negative, got {budget!r}")
        if mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
        delta_target = float(delta_target)
        if not 0.0 < delta_target < 1.0:
            raise ValueError(f"delta_target must lie strictly between 0 and 1, got {delta_target!r}")
        self.budget = budget
        self.mode = mode
        self.delta_target = delta_target
        self.query_epsilons: list[float] = []

    @property
    def spent(self) -> float:
        """Composed spend, recomputed from the full charge history."""
        return _compose_history(self.query_epsilons, self.mode, self.delta_target)

    def charge(self, eps: float) -> ChargeResult:
        """Attempt to record one query of privacy cost eps.

        Accepted iff the prospective composed spend stays within budget;
        a refusal leaves the ledger exactly as it was.
        """
        eps = float(eps)
        if eps < 0 or math.isnan(eps):
            raise ValueError(f"eps must be non-negative, got {eps!r}")
        prospective = _compose_history(self.query_epsilons + [eps], self.mode, self.delta_target)
        if prospective <= self.budget:
            self.query_epsilons.append(eps)
            return ChargeResult(accepted=True, spent=prospective)
        return ChargeResult(
            accepted=False,
            spent=self.spent,
            reason=(
                f"charge of eps={eps:.6g} would raise spend to {prospective:.6g} nats, "
                f"over budget {self.budget:.6g}"
            ),
        )

    def snapshot(self) -> tuple[float, float, str]:
        return (self.spent, self.budget, self.mode)

    def to_text(self) -> str:
        """Line-oriented form: one header line, then one charge per line."""
        header = f"budget={self.budget!r} mode={self.mode} delta_target={self.delta_target!r}"
        lines = [header] + [repr(e) for e in self.query_epsilons]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PrivacyLedger":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("ledger text is empty")
        fields = dict(item.split("=", 1) for item in lines[0].split())
        ledger = cls(
            budget=float(fields["budget"]),
            mode=fields["mode"],
            delta_target=float(fields["delta_target"]),
        )
        ledger.query_epsilons = [float(ln) for ln in lines[1:]]
        return ledger


@dataclass(frozen=True)
class ReleaseBundle:
    """One accepted release.

    nonrare_estimates maps non-rare category index to its debiased frequency
    estimate (possibly slightly negative). Rare categories appear only as a
    single total count plus shielding bounds, never individually.
    """

    nonrare_estimates: dict[int, float]
    rare_total_count: int
    rare_pac: PacBounds
    n: int
    params_used: RapporParams
    ledger_snapshot: tuple[float, float, str]


def aggregate(
    reports: Sequence[PrivatizedReport],
    partition: RarityPartition,
    params: RapporParams,
    ledger: PrivacyLedger,
    max_rare_mass: float | None = None,
) -> ReleaseBundle | ChargeResult:
    """Turn one batch of reports into a release, charging the ledger first.

    All reports must come from the same (partition, params) configuration.
    The ledger is charged eps_nominal for the release before any estimate is
    computed; on refusal the ChargeResult is returned and nothing else
    happens. Debiasing uses n = len(reports) (shielded included), so
    non-rare estimates are fractions of the full population.

    max_rare_mass, when known from the data-generating configuration, is the
    largest true rare mass and feeds the mu-dependent shielding bounds. When
    unknown, mu falls back to alpha/2; the mu-free hoeffding_alpha entry of
    the bundle is the conservative reading in that case.
    """
    if len(reports) == 0:
        raise ValueError("reports must be non-empty")
    outcome = ledger.charge(params.eps_nominal)
    if not outcome.accepted:
        return outcome

    n = len(reports)
    hist = np.zeros(params.k, dtype=float)
    rare_total = 0
    for report in reports:
        if report.kind is ReportKind.SHIELDED_RARE:
            rare_total += 1
        else:
            hist[report.category] += 1.0

    estimates = debias(hist, n, params)
    nonrare_estimates = {j: float(estimates[j]) for j in partition.nonrare}

    mu = partition.alpha / 2.0 if max_rare_mass is None else float(max_rare_mass)
    return ReleaseBundle(
        nonrare_estimates=nonrare_estimates,
        rare_total_count=rare_total,
        rare_pac=pac_bounds(n, partition.alpha, mu),
        n=n,
        params_used=params,
        ledger_snapshot=ledger.snapshot(),
    )
