"""Switch positions, lamp behaviors, and the instruction-set hidden variable.

Each measuring station has a three-position switch and a lamp that either
flashes a solid color (red or green) or flickers between both. An
instruction set is the shared hidden variable carried by both particles of
a pair: a bijective assignment of the three lamp behaviors to the three
switch positions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

POSITIONS = (1, 2, 3)


class Color(Enum):
    RED = "R"
    GREEN = "G"

    def opposite(self) -> "Color":
        return Color.GREEN if self is Color.RED else Color.RED


class LampBehavior(Enum):
    SOLID_RED = "R"
    SOLID_GREEN = "G"
    FLICKER = "F"

    @property
    def solid_color(self) -> Color | None:
        """The color a solid lamp shows; None for a flickering lamp."""
        if self is LampBehavior.FLICKER:
            return None
        return Color(self.value)


def check_position(position: int) -> int:
    if position not in POSITIONS:
        raise ValueError(f"switch position must be 1, 2 or 3, got {position!r}")
    return position


@dataclass(frozen=True)
class InstructionSet:
    """Bijective mapping of switch positions 1..3 to lamp behaviors.

    ``behaviors[p - 1]`` is the behavior at position ``p``. Every behavior
    appears exactly once; non-bijective assignments are rejected.
    """

    behaviors: tuple[LampBehavior, LampBehavior, LampBehavior]

    def __post_init__(self) -> None:
        if set(self.behaviors) != set(LampBehavior) or len(self.behaviors) != 3:
            raise ValueError(
                "instruction set must assign each lamp behavior exactly once, "
                f"got {self.behaviors!r}"
            )

    def behavior_at(self, position: int) -> LampBehavior:
        return self.behaviors[check_position(position) - 1]

    def token(self) -> str:
        """Serialize as a 3-character string over {R, G, F} in position order."""
        return "".join(b.value for b in self.behaviors)

    @classmethod
    def from_token(cls, token: str) -> "InstructionSet":
        try:
            behaviors = tuple(LampBehavior(ch) for ch in token)
        except ValueError:
            raise ValueError(f"instruction-set token must use only R, G, F: {token!r}")
        if len(behaviors) != 3:
            raise ValueError(f"instruction-set token must have 3 characters: {token!r}")
        return cls(behaviors)  # bijection re-checked in __post_init__


#: The 6 possible instruction sets, in lexicographic order of (R, G, F).
#: Index 0 is the canonical set R/G/F.
ALL_INSTRUCTION_SETS: tuple[InstructionSet, ...] = tuple(
    InstructionSet(perm) for perm in itertools.permutations(tuple(LampBehavior))
)


def base_instruction_set() -> InstructionSet:
    """The canonical set: position 1 solid red, 2 solid green, 3 flicker."""
    return ALL_INSTRUCTION_SETS[0]


def sample_instruction_set(rng: np.random.Generator) -> InstructionSet:
    """Draw one of the 6 instruction sets uniformly.

    Both wings of a trial share the sampled set; callers emit a single
    draw per pair.
    """
    return ALL_INSTRUCTION_SETS[int(rng.integers(len(ALL_INSTRUCTION_SETS)))]


def resolve_behavior(iset: InstructionSet, position: int) -> LampBehavior:
    """Pure lookup of the lamp behavior at a switch position."""
    return iset.behavior_at(position)


@dataclass(frozen=True)
class RandomPermutations:
    """Source draws a fresh uniform instruction set for every particle pair."""


@dataclass(frozen=True)
class FixedSet:
    """Source emits the same instruction set for every particle pair."""

    iset: InstructionSet


InstructionSource = RandomPermutations | FixedSet

