"""Perception rules for flickering lamps and the collapse-timing variants.

A flickering lamp is unresolvable to the observer and is perceived as a
single color. Three rules govern the perceived color:

(a) watching one wing alone, flicker reads red half the time;
(b) watching both wings while both flicker, the same color is seen on both;
(c) watching both wings while exactly one flickers, the flicker wing is
    biased toward the opposite of the solid wing's color: it matches the
    solid color with probability ``p_same_bias`` (default 3/8).

The collapse mode decides whether the joint rules (b) and (c) can act at
all. Under observer-mediated collapse (and under the delayed variant,
which only differs by a bookkeeping delay) the flicker color is fixed at
joint observation, so (b) and (c) apply. Under objective early collapse
each flickering wing is fixed independently at measurement, before any
comparison is possible, so only rule (a) survives and the cross-wing
correlation is lost.

Samplers here draw from a scalar stream (anything with ``random()``
returning a float in [0, 1)); ``joint_distribution`` gives the same rules
in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .model import Color, LampBehavior


@dataclass(frozen=True)
class ObserverParams:
    """Perception bias: probability that a lone flicker wing matches the
    opposite wing's solid color under rule (c). Kept as an exact rational
    so the enumeration oracle reproduces table values exactly."""

    p_same_bias: Fraction = Fraction(3, 8)

    def __post_init__(self) -> None:
        p = Fraction(self.p_same_bias)
        if not 0 <= p <= 1:
            raise ValueError(f"p_same_bias must lie in [0, 1], got {p}")
        object.__setattr__(self, "p_same_bias", p)


@dataclass(frozen=True)
class ObserverMediated:
    """Flicker is fixed only when the observer compares both wings."""


@dataclass(frozen=True)
class ObjectiveEarly:
    """Each wing's flicker is fixed independently at measurement."""


@dataclass(frozen=True)
class SfDelayed:
    """Joint fixing happens, but only after ``delay_s`` seconds.

    The wing results are carried to wherever collapse happens, so the
    statistics are identical to ObserverMediated for every delay; the
    delay is annotation on configs and reports only.
    """

    delay_s: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delay_s) and self.delay_s >= 0):
            raise ValueError(f"delay must be a finite nonnegative number of seconds, got {self.delay_s!r}")


CollapseMode = ObserverMediated | ObjectiveEarly | SfDelayed


class PerceivedPair(NamedTuple):
    left: Color
    right: Color


def _fair_color(rng) -> Color:
    return Color.RED if rng.random() < 0.5 else Color.GREEN


def perceive_single(behavior: LampBehavior, rng, params: ObserverParams) -> Color:
    """Rule (a): a lone wing. Solids read their own color; flicker is fair."""
    solid = behavior.solid_color
    if solid is not None:
        return solid
    return _fair_color(rng)


def perceive_joint(
    left_behavior: LampBehavior,
    right_behavior: LampBehavior,
    rng,
    params: ObserverParams,
    mode: CollapseMode,
) -> PerceivedPair:
    """Joint perception of both wings under the given collapse mode.

    Draw order is fixed: under ObjectiveEarly the left wing's fix is drawn
    before the right wing's; under the joint modes at most one draw is
    consumed. Solid wings always report their own color. Sampling compares
    uniforms against ``float(p_same_bias)``.
    """
    left = left_behavior.solid_color
    right = right_behavior.solid_color

    if isinstance(mode, ObjectiveEarly):
        if left is None:
            left = _fair_color(rng)
        if right is None:
            right = _fair_color(rng)
        return PerceivedPair(left, right)

    # ObserverMediated and SfDelayed: identical statistics.
    if left is not None and right is not None:
        return PerceivedPair(left, right)
    if left is None and right is None:
        shared = _fair_color(rng)  # rule (b)
        return PerceivedPair(shared, shared)
    # rule (c): one solid anchor, one flicker
    if left is not None:
        anchor = left
    else:
        assert right is not None
        anchor = right
    flicker = anchor if rng.random() < float(params.p_same_bias) else anchor.opposite()
    if left is None:
        return PerceivedPair(flicker, anchor)
    return PerceivedPair(anchor, flicker)


def joint_distribution(
    left_behavior: LampBehavior,
    right_behavior: LampBehavior,
    params: ObserverParams,
    mode: CollapseMode,
) -> dict[tuple[Color, Color], Fraction]:
    """Exact distribution over perceived color pairs for one behavior pair.

    This is the rational-arithmetic statement of rules (a)-(c) under the
    given collapse mode; the enumeration oracle is built on it.
    """
    left = left_behavior.solid_color
    right = right_behavior.solid_color
    half = Fraction(1, 2)

    if isinstance(mode, ObjectiveEarly):
        left_marginal = {left: Fraction(1)} if left is not None else {Color.RED: half, Color.GREEN: half}
        right_marginal = {right: Fraction(1)} if right is not None else {Color.RED: half, Color.GREEN: half}
        return {
            (lc, rc): pl * pr
            for lc, pl in left_marginal.items()
            for rc, pr in right_marginal.items()
        }

    if left is not None and right is not None:
        return {(left, right): Fraction(1)}
    if left is None and right is None:
        return {(Color.RED, Color.RED): half, (Color.GREEN, Color.GREEN): half}

    p_same = params.p_same_bias
    if right is not None:  # left wing flickers
        return {(right, right): p_same, (right.opposite(), right): 1 - p_same}
    assert left is not None
    return {(left, left): p_same, (left, left.opposite()): 1 - p_same}


MODE_TOKENS = ("observer", "objective-early", "sf-delayed:<seconds>")


def mode_token(mode: CollapseMode) -> str:
    """Config-file token for a collapse mode."""
    if isinstance(mode, ObserverMediated):
        return "observer"
    if isinstance(mode, ObjectiveEarly):
        return "objective-early"
    if isinstance(mode, SfDelayed):
        return f"sf-delayed:{mode.delay_s:g}"
    raise TypeError(f"not a collapse mode: {mode!r}")


def parse_mode(token: str) -> CollapseMode:
    if token == "observer":
        return ObserverMediated()
    if token == "objective-early":
        return ObjectiveEarly()
    if token.startswith("sf-delayed:"):
        try:
            delay = float(token.partition(":")[2])
        except ValueError:
            raise ValueError(f"bad delay in collapse-mode token {token!r}")
        return SfDelayed(delay)
    raise ValueError(
        f"unknown collapse-mode token {token!r}; expected one of {', '.join(MODE_TOKENS)}"
    )
