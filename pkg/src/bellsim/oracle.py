"""Exact probabilities by enumeration, and the local deterministic bound.

All arithmetic here is over ``fractions.Fraction``; floating point never
enters. The state space is tiny (at most 6 instruction sets x 9 setting
pairs x a handful of perception branches), so plain enumeration is both
the reference implementation and fast enough for everything.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .model import (
    ALL_INSTRUCTION_SETS,
    POSITIONS,
    Color,
    FixedSet,
    InstructionSet,
    InstructionSource,
    RandomPermutations,
)
from .observer import CollapseMode, ObserverMediated, ObserverParams, joint_distribution

#: Perceived color pairs in report order.
COLOR_PAIRS: tuple[tuple[Color, Color], ...] = (
    (Color.RED, Color.RED),
    (Color.RED, Color.GREEN),
    (Color.GREEN, Color.RED),
    (Color.GREEN, Color.GREEN),
)

#: The three distinct unordered setting pairs entering the inequality.
DISTINCT_PAIRS: tuple[tuple[int, int], ...] = ((1, 2), (1, 3), (2, 3))

SETTING_PAIRS: tuple[tuple[int, int], ...] = tuple(itertools.product(POSITIONS, POSITIONS))


@dataclass(frozen=True)
class ProbabilityTable:
    """Exact distribution over perceived color pairs, per setting pair.

    ``entries[(left_setting, right_setting)][(left_color, right_color)]``
    is a Fraction; the four probabilities of every cell sum to exactly 1.
    """

    entries: Mapping[tuple[int, int], Mapping[tuple[Color, Color], Fraction]]

    def __post_init__(self) -> None:
        for pair in SETTING_PAIRS:
            total = sum(self.entries[pair].values(), Fraction(0))
            if total != 1:
                raise ValueError(f"cell {pair} sums to {total}, not 1")

    def prob(self, left_setting: int, right_setting: int, left_color: Color, right_color: Color) -> Fraction:
        return self.entries[(left_setting, right_setting)].get((left_color, right_color), Fraction(0))

    def coincidence(self, left_setting: int, right_setting: int) -> Fraction:
        """Probability that both wings show the same color at this setting pair."""
        cell = self.entries[(left_setting, right_setting)]
        return cell.get((Color.RED, Color.RED), Fraction(0)) + cell.get(
            (Color.GREEN, Color.GREEN), Fraction(0)
        )

    def overall_coincidence(self) -> Fraction:
        """Coincidence probability with uniform independent settings."""
        return sum(
            (self.coincidence(ls, rs) for ls, rs in SETTING_PAIRS), Fraction(0)
        ) / len(SETTING_PAIRS)

    def red_marginal(self, wing: str) -> Fraction:
        """P(wing shows red) with uniform independent settings; wing is 'left' or 'right'."""
        if wing not in ("left", "right"):
            raise ValueError(f"wing must be 'left' or 'right', got {wing!r}")
        total = Fraction(0)
        for pair in SETTING_PAIRS:
            for (lc, rc), p in self.entries[pair].items():
                color = lc if wing == "left" else rc
                if color is Color.RED:
                    total += p
        return total / len(SETTING_PAIRS)


def exact_distribution(
    params: ObserverParams, mode: CollapseMode, source: InstructionSource
) -> ProbabilityTable:
    """Enumerate instruction sets and perception branches; no sampling.

    Under RandomPermutations each of the 6 instruction sets carries weight
    1/6; a FixedSet source has a single term.
    """
    if isinstance(source, FixedSet):
        isets: tuple[InstructionSet, ...] = (source.iset,)
    elif isinstance(source, RandomPermutations):
        isets = ALL_INSTRUCTION_SETS
    else:
        raise TypeError(f"not an instruction source: {source!r}")
    weight = Fraction(1, len(isets))

    entries: dict[tuple[int, int], dict[tuple[Color, Color], Fraction]] = {}
    for ls, rs in SETTING_PAIRS:
        cell = {pair: Fraction(0) for pair in COLOR_PAIRS}
        for iset in isets:
            dist = joint_distribution(iset.behavior_at(ls), iset.behavior_at(rs), params, mode)
            for color_pair, p in dist.items():
                cell[color_pair] += weight * p
        entries[(ls, rs)] = cell
    return ProbabilityTable(entries)


def coincidence_table_sum(params: ObserverParams, iset: InstructionSet) -> Fraction:
    """Sum of the nine same-color probabilities for one fixed instruction
    set under observer-mediated collapse (the classic table's bottom line)."""
    table = exact_distribution(params, ObserverMediated(), FixedSet(iset))
    return sum((table.coincidence(ls, rs) for ls, rs in SETTING_PAIRS), Fraction(0))


#: Shared deterministic color assignments: each position mapped to a color,
#: identical on both wings. Perfect same-setting correlation forces any
#: local deterministic strategy into this class of 8.
LocalStrategy = tuple[Color, Color, Color]

ALL_LOCAL_STRATEGIES: tuple[LocalStrategy, ...] = tuple(
    itertools.product((Color.RED, Color.GREEN), repeat=3)
)


def pairwise_same_sum(strategy: LocalStrategy) -> int:
    """Number of distinct unordered setting pairs on which the strategy
    yields equal colors."""
    return sum(1 for a, b in DISTINCT_PAIRS if strategy[a - 1] == strategy[b - 1])


def local_strategy_bound() -> Fraction:
    """Minimum pairwise-same sum over all 8 deterministic strategies.

    With 3 positions and 2 colors, some two positions always share a color,
    so the minimum is 1; mixtures cannot go lower by linearity.
    """
    return Fraction(min(pairwise_same_sum(s) for s in ALL_LOCAL_STRATEGIES))


def mixture_pairwise_same_sum(weights: Iterable[float]) -> float:
    """Pairwise-same sum of a probability mixture of the 8 strategies."""
    w = list(weights)
    if len(w) != len(ALL_LOCAL_STRATEGIES):
        raise ValueError(f"need {len(ALL_LOCAL_STRATEGIES)} weights, got {len(w)}")
    if any(x < 0 for x in w):
        raise ValueError("mixture weights must be nonnegative")
    total = sum(w)
    if not abs(total - 1.0) < 1e-9:
        raise ValueError(f"mixture weights must sum to 1, got {total}")
    return sum(x * pairwise_same_sum(s) for x, s in zip(w, ALL_LOCAL_STRATEGIES))


def format_table(table: ProbabilityTable) -> list[str]:
    """Report lines: one per setting pair with the four rational
    probabilities as num/den strings plus the coincidence probability."""
    lines = []
    for ls, rs in SETTING_PAIRS:
        probs = " ".join(
            f"{lc.value}{rc.value}={table.prob(ls, rs, lc, rc)}" for lc, rc in COLOR_PAIRS
        )
        lines.append(f"pair ({ls},{rs}): {probs} coincidence={table.coincidence(ls, rs)}")
    return lines
