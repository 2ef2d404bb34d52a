"""Reproducible Monte Carlo engine for the two-wing experiment.

Randomness is counter-based: trial ``i`` of a run with seed ``s`` owns a
fixed window of the Philox stream keyed by ``s`` (two 4-word counter
blocks per trial), so its draws depend only on ``(s, i)``. Results are
therefore bitwise independent of chunking, execution order, and worker
count, and any single trial can be reconstructed in isolation.

Each trial consumes up to five uniform doubles from its window, in fixed
slots:

  u0  left setting (or the setting-pair draw for a weighted table)
  u1  right setting
  u2  instruction-set index
  u3  first perception draw
  u4  second perception draw (objective-early collapse when both wings
      flicker; a lone flickering wing always uses u3)

Unused slots are skipped, never shifted, which keeps the layout identical
across policies and modes. The perception slots feed the same draw order
``observer.perceive_joint`` consumes, so a trial's perceived pair can be
reproduced by feeding u3/u4 to the scalar rules.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterator

import numpy as np
from numpy.random import Philox

from .model import (
    ALL_INSTRUCTION_SETS,
    Color,
    FixedSet,
    InstructionSet,
    InstructionSource,
    LampBehavior,
    RandomPermutations,
    check_position,
)
from .observer import CollapseMode, ObjectiveEarly, ObserverMediated, ObserverParams, PerceivedPair

_WORDS_PER_TRIAL = 8  # two Philox counter blocks; 5 are consumed
_BLOCKS_PER_TRIAL = _WORDS_PER_TRIAL // 4
_UNIT = 2.0**-53

_BEHAVIOR_CODES = {b: i for i, b in enumerate(LampBehavior)}  # solid codes equal color codes
_FLICKER = _BEHAVIOR_CODES[LampBehavior.FLICKER]
_PERM_CODES = np.array(
    [[_BEHAVIOR_CODES[b] for b in iset.behaviors] for iset in ALL_INSTRUCTION_SETS],
    dtype=np.int64,
)
_COLOR_BY_CODE = (Color.RED, Color.GREEN)


@dataclass(frozen=True)
class UniformIndependent:
    """Each wing's switch position is drawn uniformly and independently."""


@dataclass(frozen=True)
class FixedSettings:
    left: int
    right: int

    def __post_init__(self) -> None:
        check_position(self.left)
        check_position(self.right)


@dataclass(frozen=True)
class WeightedTable:
    """Setting pairs drawn from 9 weights, row-major over (left, right)."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != 9:
            raise ValueError(f"need 9 weights, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")


SettingPolicy = UniformIndependent | FixedSettings | WeightedTable


@dataclass(frozen=True)
class RunConfig:
    n_trials: int
    seed: int
    params: ObserverParams = ObserverParams()
    mode: CollapseMode = ObserverMediated()
    policy: SettingPolicy = UniformIndependent()
    source: InstructionSource = RandomPermutations()

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be at least 1, got {self.n_trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class TrialRecord:
    index: int
    iset: InstructionSet
    left_setting: int
    right_setting: int
    left_behavior: LampBehavior
    right_behavior: LampBehavior
    perceived: PerceivedPair


@dataclass(frozen=True, eq=False)
class TallyTable:
    """Counts keyed by (left setting, right setting, left color, right color).

    Backed by a (3, 3, 2, 2) int64 array indexed by zero-based setting and
    color codes (red=0, green=1). Merging is pointwise addition.
    """

    counts: np.ndarray = field(
        default_factory=lambda: np.zeros((3, 3, 2, 2), dtype=np.int64)
    )

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, left_setting: int, right_setting: int, left_color: Color, right_color: Color) -> int:
        return int(
            self.counts[
                check_position(left_setting) - 1,
                check_position(right_setting) - 1,
                _COLOR_BY_CODE.index(left_color),
                _COLOR_BY_CODE.index(right_color),
            ]
        )

    def pair_total(self, left_setting: int, right_setting: int) -> int:
        return int(self.counts[left_setting - 1, right_setting - 1].sum())

    def pair_same(self, left_setting: int, right_setting: int) -> int:
        cell = self.counts[left_setting - 1, right_setting - 1]
        return int(cell[0, 0] + cell[1, 1])

    def merge(self, other: "TallyTable") -> "TallyTable":
        return TallyTable(self.counts + other.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TallyTable):
            return NotImplemented
        return bool(np.array_equal(self.counts, other.counts))


def _trial_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform doubles in [0, 1), shape (count, 8): the draw windows of
    trials [start, start + count)."""
    bitgen = Philox(key=seed)
    bitgen.advance(start * _BLOCKS_PER_TRIAL)
    raw = bitgen.random_raw(count * _WORDS_PER_TRIAL)
    return ((raw >> np.uint64(11)) * _UNIT).reshape(count, _WORDS_PER_TRIAL)


def _decode_chunk(config: RunConfig, start: int, count: int):
    """Vectorized trial pipeline: settings -> instruction set -> behaviors
    -> perceived colors. Returns zero-based code arrays."""
    u = _trial_uniforms(config.seed, start, count)

    policy = config.policy
    if isinstance(policy, UniformIndependent):
        ls = (u[:, 0] * 3).astype(np.int64)
        rs = (u[:, 1] * 3).astype(np.int64)
    elif isinstance(policy, FixedSettings):
        ls = np.full(count, policy.left - 1, dtype=np.int64)
        rs = np.full(count, policy.right - 1, dtype=np.int64)
    else:
        cumulative = np.cumsum(policy.weights)
        pair = np.minimum(np.searchsorted(cumulative, u[:, 0], side="right"), 8)
        ls = pair // 3
        rs = pair % 3

    if isinstance(config.source, FixedSet):
        iset_idx = np.full(count, ALL_INSTRUCTION_SETS.index(config.source.iset), dtype=np.int64)
    else:
        iset_idx = (u[:, 2] * 6).astype(np.int64)
    bl = _PERM_CODES[iset_idx, ls]
    br = _PERM_CODES[iset_idx, rs]

    left_flickers = bl == _FLICKER
    right_flickers = br == _FLICKER
    if isinstance(config.mode, ObjectiveEarly):
        # independent fair fixes; the right wing's draw comes after the
        # left wing's, matching perceive_joint's consumption order
        u_left = u[:, 3]
        u_right = np.where(left_flickers, u[:, 4], u[:, 3])
        lc = np.where(left_flickers, (u_left >= 0.5).astype(np.int64), bl)
        rc = np.where(right_flickers, (u_right >= 0.5).astype(np.int64), br)
    else:
        both = left_flickers & right_flickers
        shared = (u[:, 3] >= 0.5).astype(np.int64)  # rule (b)
        matches_anchor = u[:, 3] < float(config.params.p_same_bias)  # rule (c)
        anchor = np.where(left_flickers, br, bl)
        flicker_color = np.where(matches_anchor, anchor, 1 - anchor)
        lc = np.where(left_flickers, np.where(both, shared, flicker_color), bl)
        rc = np.where(right_flickers, np.where(both, shared, flicker_color), br)

    return ls, rs, iset_idx, bl, br, lc, rc


def run_chunk(config: RunConfig, start: int, count: int) -> TallyTable:
    """Tally trials [start, start + count); exact sub-range of the run."""
    ls, rs, _, _, _, lc, rc = _decode_chunk(config, start, count)
    key = ((ls * 3 + rs) * 2 + lc) * 2 + rc
    counts = np.bincount(key, minlength=36).reshape(3, 3, 2, 2).astype(np.int64)
    return TallyTable(counts)


def run_experiment(
    config: RunConfig, workers: int = 1, chunk_size: int = 1 << 16
) -> TallyTable:
    """Tally all trials of the run.

    The result is a pure function of ``config``: workers own disjoint index
    ranges and merged counts are identical for any worker count.
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    starts = range(0, config.n_trials, chunk_size)
    sizes = [min(chunk_size, config.n_trials - s) for s in starts]
    if workers == 1:
        tallies = [run_chunk(config, s, n) for s, n in zip(starts, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(run_chunk, [config] * len(sizes), starts, sizes))
    counts = np.zeros((3, 3, 2, 2), dtype=np.int64)
    for tally in tallies:
        counts += tally.counts
    return TallyTable(counts)


def _record_from_codes(index, ls, rs, iset_idx, bl, br, lc, rc) -> TrialRecord:
    behaviors = tuple(LampBehavior)
    return TrialRecord(
        index=index,
        iset=ALL_INSTRUCTION_SETS[iset_idx],
        left_setting=int(ls) + 1,
        right_setting=int(rs) + 1,
        left_behavior=behaviors[bl],
        right_behavior=behaviors[br],
        perceived=PerceivedPair(_COLOR_BY_CODE[lc], _COLOR_BY_CODE[rc]),
    )


def run_trial(config: RunConfig, index: int) -> TrialRecord:
    """Reconstruct a single trial; deterministic in (config.seed, index)."""
    if not 0 <= index < config.n_trials:
        raise IndexError(f"trial index {index} outside [0, {config.n_trials})")
    ls, rs, iset_idx, bl, br, lc, rc = _decode_chunk(config, index, 1)
    return _record_from_codes(index, ls[0], rs[0], iset_idx[0], bl[0], br[0], lc[0], rc[0])


def iter_trials(config: RunConfig, start: int = 0, count: int | None = None) -> Iterator[TrialRecord]:
    """Yield TrialRecords in index order, decoding in chunks."""
    if count is None:
        count = config.n_trials - start
    if not (0 <= start and start + count <= config.n_trials):
        raise IndexError(f"trial range [{start}, {start + count}) outside [0, {config.n_trials})")
    chunk = 1 << 14
    for base in range(start, start + count, chunk):
        n = min(chunk, start + count - base)
        ls, rs, iset_idx, bl, br, lc, rc = _decode_chunk(config, base, n)
        for i in range(n):
            yield _record_from_codes(base + i, ls[i], rs[i], iset_idx[i], bl[i], br[i], lc[i], rc[i])


def format_trial_line(record: TrialRecord) -> str:
    """One log line: index, instruction-set token, settings, colors."""
    return ",".join(
        (
            str(record.index),
            record.iset.token(),
            str(record.left_setting),
            str(record.right_setting),
            record.perceived.left.value,
            record.perceived.right.value,
        )
    )


def write_trial_log(config: RunConfig, out: IO[str], start: int = 0, count: int | None = None) -> None:
    for record in iter_trials(config, start, count):
        out.write(format_trial_line(record) + "\n")
