"""Coincidence rates, marginals, and the inequality statistic.

The inequality statistic is the sum over the three distinct unordered
setting pairs of the same-color probability. Any local deterministic
strategy compatible with perfect same-setting correlation puts this sum at
1 or above; the biased observer drives it to 2 * p_same_bias, below 1
whenever the bias is strictly below 1/2.

Monte Carlo rates carry Wilson 95% intervals; the violation verdict from
sampled data is conservative, requiring the sum plus ``k_sigma`` standard
errors to stay below the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .engine import TallyTable
from .model import RandomPermutations
from .observer import CollapseMode, ObserverParams
from .oracle import DISTINCT_PAIRS, SETTING_PAIRS, ProbabilityTable, exact_distribution

Z_95 = 1.959963984540054

LOCAL_BOUND = Fraction(1)


def wilson_interval(successes: int, n: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("interval needs at least one observation")
    if not 0 <= successes <= n:
        raise ValueError(f"successes {successes} outside [0, {n}]")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class PairStats:
    rate: float
    ci_low: float
    ci_high: float
    n: int
    same: int


@dataclass(frozen=True)
class CoincidenceStats:
    """Per-setting-pair same-color rates with Wilson intervals, wing
    marginals, and the pooled overall coincidence rate."""

    per_pair: Mapping[tuple[int, int], PairStats]
    overall: PairStats
    left_red: float
    right_red: float
    n: int


def coincidence_rates(tally: TallyTable) -> CoincidenceStats:
    """Rates and intervals from a tally; rejects an empty tally."""
    total = tally.total
    if total < 1:
        raise ValueError("tally is empty")
    per_pair = {}
    for ls, rs in SETTING_PAIRS:
        n = tally.pair_total(ls, rs)
        if n == 0:
            continue
        same = tally.pair_same(ls, rs)
        low, high = wilson_interval(same, n)
        per_pair[(ls, rs)] = PairStats(rate=same / n, ci_low=low, ci_high=high, n=n, same=same)
    same_total = sum(s.same for s in per_pair.values())
    low, high = wilson_interval(same_total, total)
    overall = PairStats(rate=same_total / total, ci_low=low, ci_high=high, n=total, same=same_total)
    counts = tally.counts
    return CoincidenceStats(
        per_pair=per_pair,
        overall=overall,
        left_red=float(counts[:, :, 0, :].sum()) / total,
        right_red=float(counts[:, :, :, 0].sum()) / total,
        n=total,
    )


@dataclass(frozen=True)
class InequalityReport:
    """Same-color sum over the three distinct setting pairs vs. the local
    bound of 1. ``violated`` means the sum is below the bound: exactly for
    rational sources, by more than ``k_sigma`` standard errors for sampled
    sources."""

    mermin_sum: Fraction | float
    per_pair_same: Mapping[tuple[int, int], Fraction | float]
    violated: bool
    local_bound: Fraction = LOCAL_BOUND
    uncertainty: float | None = None
    k_sigma: float | None = None


def mermin_sum(source: CoincidenceStats | ProbabilityTable, k_sigma: float = 5.0) -> InequalityReport:
    """Inequality statistic from either an exact table or sampled rates.

    Ordered setting pairs are symmetrized: (a,b) and (b,a) carry the same
    physics, so their probabilities are averaged (counts pooled).
    """
    if isinstance(source, ProbabilityTable):
        per_pair = {
            (a, b): (source.coincidence(a, b) + source.coincidence(b, a)) / 2
            for a, b in DISTINCT_PAIRS
        }
        total = sum(per_pair.values(), Fraction(0))
        return InequalityReport(
            mermin_sum=total, per_pair_same=per_pair, violated=total < LOCAL_BOUND
        )

    per_pair: dict[tuple[int, int], float] = {}
    variance = 0.0
    for a, b in DISTINCT_PAIRS:
        forward = source.per_pair.get((a, b))
        backward = source.per_pair.get((b, a))
        n = (forward.n if forward else 0) + (backward.n if backward else 0)
        if n == 0:
            raise ValueError(f"no trials observed for setting pair {{{a},{b}}}")
        same = (forward.same if forward else 0) + (backward.same if backward else 0)
        rate = same / n
        per_pair[(a, b)] = rate
        variance += rate * (1 - rate) / n
    total = sum(per_pair.values())
    se = math.sqrt(variance)
    return InequalityReport(
        mermin_sum=total,
        per_pair_same=per_pair,
        violated=total + k_sigma * se < float(LOCAL_BOUND),
        uncertainty=se,
        k_sigma=k_sigma,
    )


def sweep_bias(
    p_grid: Iterable[Fraction], mode: CollapseMode
) -> list[tuple[Fraction, Fraction]]:
    """Exact inequality sum for each bias value, averaged over all
    instruction sets. Under observer-mediated collapse this is 2p."""
    results = []
    for p in p_grid:
        table = exact_distribution(ObserverParams(Fraction(p)), mode, RandomPermutations())
        results.append((Fraction(p), mermin_sum(table).mermin_sum))
    return results
