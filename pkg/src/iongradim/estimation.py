"""Monte Carlo shot statistics under projection noise and field noise.

Noise model: quasi-static Gaussian fluctuations, constant within a shot and
independent between shots. The uniform (common-mode) component enters the
phase only through the sum of the +-1 branch weights, which is exactly zero,
so toggling it cannot change any outcome at a fixed seed; the gradient
component couples through the weighted ion coordinates and dephases the
parity fringe. Each shot consumes fixed counter slots of the seeded
counter-based stream (see rng), so results are a pure function of
(plan, probe, fields, noise) and are independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import rng
from .constants import constants
from .errors import ConfigurationError, InfeasibleError
from .protocol import ProbeState, ZeemanConfig, outcome_parities, phase_rate

# Counter slots per shot: 0,1 common-mode gaussian; 2,3 gradient gaussian;
# 4 outcome draw; 5..7 reserved.
_SLOTS_PER_SHOT = 8


@dataclass(frozen=True)
class NoiseModel:
    """Per-shot field noise amplitudes and readout contrast."""

    common_mode_rms: float = 0.0   # T, uniform over the crystal
    gradient_rms: float = 0.0     # T/m, differential
    contrast: float = 1.0          # readout contrast multiplier

    def __post_init__(self):
        if self.common_mode_rms < 0 or self.gradient_rms < 0:
            raise ConfigurationError("noise rms values must be >= 0")
        if not (0.0 <= self.contrast <= 1.0):
            raise ConfigurationError(f"contrast must be in [0, 1], got {self.contrast}")


@dataclass(frozen=True)
class ExperimentPlan:
    """Shot budget, interaction time, analysis bias phase, and RNG seed."""

    shots: int
    interaction_time: float        # s
    bias_phase: float = 0.0        # rad
    rng_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.shots, int) or self.shots < 1:
            raise ConfigurationError(f"shots must be an integer >= 1, got {self.shots!r}")
        if self.interaction_time < 0:
            raise ConfigurationError("interaction_time must be >= 0")
        if not (0 <= self.rng_seed < 2 ** 64):
            raise ConfigurationError("rng_seed must fit in 64 bits")


@dataclass(frozen=True)
class ShotOutcomes:
    """Per-shot results: parity (+-1), drawn spin pattern index, accumulated phase."""

    parities: np.ndarray
    outcome_indices: np.ndarray
    phases: np.ndarray

    def __len__(self) -> int:
        return len(self.parities)


@dataclass(frozen=True)
class EstimationResult:
    parity_estimate: float
    std_error: float
    snr: float
    shots_used: int
    true_parity: float | None = None


@dataclass(frozen=True)
class DiscriminationResult:
    snr: float
    up: EstimationResult
    down: EstimationResult


def simulate_shots(plan: ExperimentPlan, probe: ProbeState, zeeman: ZeemanConfig,
                   field_at_ions: Sequence[float], noise: NoiseModel) -> ShotOutcomes:
    """Run plan.shots independent shots and draw one spin pattern per shot."""
    c = constants()
    coeff = zeeman.g_factor * c.bohr_magneton / c.reduced_planck
    base_rate = phase_rate(probe, zeeman, field_at_ions)
    dm = probe.delta_m
    dm_total = sum(dm)                                        # exactly 0.0 (DFS)
    grad_coupling = sum(d * p.z for d, p in zip(dm, probe.ion_positions))

    shot = np.arange(plan.shots, dtype=np.uint64) * np.uint64(_SLOTS_PER_SHOT)
    seed = plan.rng_seed
    common = noise.common_mode_rms * rng.gaussian(seed, shot, shot + np.uint64(1))
    gradient = noise.gradient_rms * rng.gaussian(seed, shot + np.uint64(2), shot + np.uint64(3))
    draw = rng.uniform(seed, shot + np.uint64(4))

    # The common-mode term multiplies the exact zero weight sum: it is kept in
    # the rate expression to mirror the physics but cannot move any phase.
    shot_rate = base_rate + coeff * gradient * grad_coupling + coeff * common * dm_total
    phases = probe.phase + shot_rate * plan.interaction_time

    contrast = probe.contrast * noise.contrast
    p_even = 0.5 * (1.0 + contrast * np.cos(phases + plan.bias_phase))
    parities = np.where(draw < p_even, 1, -1).astype(np.int64)

    # Map the same uniform onto a concrete spin pattern: even patterns share
    # p_even uniformly, odd patterns share 1 - p_even.
    pattern_parity = outcome_parities(probe.n_ions)
    even_patterns = np.flatnonzero(pattern_parity > 0)
    odd_patterns = np.flatnonzero(pattern_parity < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac_even = np.where(p_even > 0, draw / p_even, 0.0)
        frac_odd = np.where(p_even < 1, (draw - p_even) / (1.0 - p_even), 0.0)
    k_even = np.minimum((frac_even * len(even_patterns)).astype(np.int64),
                        len(even_patterns) - 1)
    k_odd = np.minimum((frac_odd * len(odd_patterns)).astype(np.int64),
                       len(odd_patterns) - 1)
    k_even = np.maximum(k_even, 0)
    k_odd = np.maximum(k_odd, 0)
    indices = np.where(parities > 0, even_patterns[k_even], odd_patterns[k_odd])
    return ShotOutcomes(parities=parities, outcome_indices=indices, phases=phases)


def parity_estimate(outcomes, true_parity: float | None = None) -> EstimationResult:
    """Parity estimate with projection-noise standard error.

    std_error = sqrt((1 - P^2)/N); a saturated estimate (P = +-1) substitutes
    the rule-of-three bound 3/N so downstream SNRs stay finite.
    """
    parities = outcomes.parities if isinstance(outcomes, ShotOutcomes) else np.asarray(outcomes)
    n = len(parities)
    if n < 1:
        raise ConfigurationError("parity_estimate needs at least one outcome")
    p_hat = float(np.sum(parities)) / n
    if abs(p_hat) >= 1.0:
        std_error = 3.0 / n
    else:
        std_error = math.sqrt((1.0 - p_hat * p_hat) / n)
    return EstimationResult(parity_estimate=p_hat, std_error=std_error,
                            snr=abs(p_hat) / std_error, shots_used=n,
                            true_parity=true_parity)


def _true_parity(plan, probe, zeeman, fields, noise) -> float:
    rate = phase_rate(probe, zeeman, fields)
    return probe.contrast * noise.contrast * math.cos(
        probe.phase + rate * plan.interaction_time + plan.bias_phase)


def spin_discrimination_snr(plan: ExperimentPlan, probe: ProbeState, zeeman: ZeemanConfig,
                            fields_up: Sequence[float], fields_down: Sequence[float],
                            noise: NoiseModel) -> DiscriminationResult:
    """Two-hypothesis flip experiment: plan.shots per hypothesis, pooled errors.

    snr = |P_down - P_up| / sqrt(se_up^2 + se_down^2), computed from the
    Monte Carlo estimates. Each arm runs on an independent sub-seed derived
    from plan.rng_seed.
    """
    results = []
    for arm, fields in enumerate((fields_up, fields_down)):
        arm_plan = replace(plan, rng_seed=rng.derive_seed(plan.rng_seed, arm))
        outcomes = simulate_shots(arm_plan, probe, zeeman, fields, noise)
        results.append(parity_estimate(
            outcomes, true_parity=_true_parity(plan, probe, zeeman, fields, noise)))
    up, down = results
    snr = abs(down.parity_estimate - up.parity_estimate) / math.sqrt(
        up.std_error ** 2 + down.std_error ** 2)
    return DiscriminationResult(snr=snr, up=up, down=down)


def analytic_snr(shots: int, parity_swing: float) -> float:
    """Projection-noise SNR for a symmetric two-hypothesis split P = +-swing/2.

    Uses per-arm variance (1 - P^2)/N; a full-contrast flip (swing = 2) has
    zero binomial variance, so the rule-of-three guard 3/N stands in, which
    keeps this model consistent with the Monte Carlo estimator.
    """
    p = parity_swing / 2.0
    if p >= 1.0:
        variance = (3.0 / shots) ** 2
    else:
        variance = (1.0 - p * p) / shots
    return parity_swing / math.sqrt(2.0 * variance)


def required_shots(target_snr: float, parity_swing: float) -> int:
    """Smallest per-hypothesis shot count whose analytic SNR meets the target."""
    if not (target_snr > 0):
        raise ConfigurationError(f"target_snr must be > 0, got {target_snr}")
    if parity_swing <= 0:
        raise InfeasibleError("parity swing is zero: no shot count reaches the target SNR")
    if parity_swing > 2:
        raise ConfigurationError(f"parity swing cannot exceed 2, got {parity_swing}")
    p = parity_swing / 2.0
    if p >= 1.0:
        n = math.ceil(3.0 * math.sqrt(2.0) * target_snr / parity_swing)
    else:
        n = math.ceil(2.0 * target_snr ** 2 * (1.0 - p * p) / parity_swing ** 2)
    n = max(n, 1)
    while analytic_snr(n, parity_swing) < target_snr:
        n += 1
    while n > 1 and analytic_snr(n - 1, parity_swing) >= target_snr:
        n -= 1
    return n


def dephasing_contrast(gradient_rms: float, probe: ProbeState, zeeman: ZeemanConfig,
                       duration: float) -> float:
    """Fringe contrast multiplier exp(-sigma_phi^2 / 2) from quasi-static gradient noise.

    sigma_phi is the phase spread of the same weighted-field coupling used by
    phase_rate, accumulated over the interaction time.
    """
    if gradient_rms < 0 or duration < 0:
        raise ConfigurationError("gradient_rms and duration must be >= 0")
    c = constants()
    coeff = zeeman.g_factor * c.bohr_magneton / c.reduced_planck
    coupling = sum(d * p.z for d, p in zip(probe.delta_m, probe.ion_positions))
    sigma_phi = coeff * gradient_rms * abs(coupling) * duration
    return math.exp(-0.5 * sigma_phi * sigma_phi)
