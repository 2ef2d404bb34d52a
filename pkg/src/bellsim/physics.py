"""Quantum reference predictions and the collapse-time scaling estimate.

The singlet-state predictions are the baseline the instruction-set model
imitates: with red meaning parallel detection on the left and the
assignment reversed on the right, the probability of equal perceived
colors is cos^2 of the analyzer angle difference for photons and cos^2 of
half the difference for spin-1/2 pairs.

The collapse-time estimator extrapolates a mass-proportional,
number-squared collapse rate through its reference point of 1e-8 s for
1e13 displaced nucleons, for comparison against the 1e-6 s and 3e-5 s
timescales of typical two-photon experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ParticleKind(Enum):
    PHOTON = "photon"
    SPIN_HALF = "spin-half"


#: Analyzer angles (degrees) realizing the three switch positions.
CANONICAL_ANGLES: dict[ParticleKind, tuple[float, float, float]] = {
    ParticleKind.PHOTON: (0.0, 60.0, 120.0),
    ParticleKind.SPIN_HALF: (0.0, 120.0, 240.0),
}

REFERENCE_COLLAPSE_TIME_S = 1e-8
REFERENCE_NUCLEON_COUNT = 1e13
FAST_THRESHOLD_S = 1e-6
SLOW_THRESHOLD_S = 3e-5


def qm_same_color_probability(kind: ParticleKind, angle_a_deg: float, angle_b_deg: float) -> float:
    """Singlet probability that both wings show the same color at the given
    analyzer angles (right-wing color assignment reversed). Equal angles
    give 1."""
    if not (math.isfinite(angle_a_deg) and math.isfinite(angle_b_deg)):
        raise ValueError("analyzer angles must be finite")
    delta = math.radians(angle_a_deg - angle_b_deg)
    if kind is ParticleKind.PHOTON:
        return math.cos(delta) ** 2
    return math.cos(delta / 2.0) ** 2


@dataclass(frozen=True)
class CollapseEstimate:
    collapse_time_s: float
    n_particles: float
    mass_ratio: float


@dataclass(frozen=True)
class ThresholdReport:
    estimate: CollapseEstimate
    exceeds_fast_threshold: bool  # collapse slower than 1e-6 s
    exceeds_slow_threshold: bool  # collapse slower than 3e-5 s


def csl_collapse_time(n_particles: float, mass_ratio: float) -> float:
    """Collapse time for ``n_particles`` of ``mass_ratio`` nucleon masses.

    The rate scales with particle mass and the square of the particle
    number, so the time is 1e-8 s * (1e13 / N)^2 / mass_ratio.
    """
    if not n_particles >= 1:
        raise ValueError(f"n_particles must be at least 1, got {n_particles!r}")
    if not mass_ratio > 0:
        raise ValueError(f"mass_ratio must be positive, got {mass_ratio!r}")
    return REFERENCE_COLLAPSE_TIME_S * (REFERENCE_NUCLEON_COUNT / n_particles) ** 2 / mass_ratio


def estimate_collapse(n_particles: float, mass_ratio: float) -> CollapseEstimate:
    return CollapseEstimate(
        collapse_time_s=csl_collapse_time(n_particles, mass_ratio),
        n_particles=n_particles,
        mass_ratio=mass_ratio,
    )


def compare_to_thresholds(estimate: CollapseEstimate) -> ThresholdReport:
    """Flag whether the estimated collapse outlasts the experimental
    timescales 1e-6 s and 3e-5 s."""
    return ThresholdReport(
        estimate=estimate,
        exceeds_fast_threshold=estimate.collapse_time_s > FAST_THRESHOLD_S,
        exceeds_slow_threshold=estimate.collapse_time_s > SLOW_THRESHOLD_S,
    )
