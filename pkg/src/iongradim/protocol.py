"""Probe-state model: preparation, differential Zeeman phase, parity readout.

The probe is a two-branch superposition over ground-state Zeeman sublevels
(m = +-1/2). Each branch assigns one m value per probe ion and the two
branches are spin complements of each other; within every branch the m
values sum to zero, which is the decoherence-free condition: a spatially
uniform field shifts both branches identically and contributes exactly no
relative phase. Only field differences across the ions drive the phase,

    d(phi)/dt = (g mu_B / hbar) * sum_i dm_i B_i,

with dm_i the branch-1 minus branch-2 magnetic quantum number of ion i
(+-1 for complementary patterns). All observables used here depend only on
phi and a contrast factor, so the state is represented by (branch patterns,
phi, contrast) rather than a density matrix; for the noise model in use
this is exact.

Parity convention: P(phi) = contrast * cos(phi), so P falls from +1 through
the zero crossing at phi = pi/2 to -1 at phi = pi. After the analysis pulse
with adjustable phase beta, the outcome distribution over the 2^N spin
patterns is

    p(s) = (1 + parity(s) * contrast * cos(phi + beta)) / 2^N

with parity(s) the product of the single-ion outcomes (+1 up, -1 down).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .constants import Vec3, constants
from .errors import ConfigurationError

BELL = "bell"
GHZ = "ghz"

# Default branch patterns (branch 1; branch 2 is the complement).
_BELL_PATTERN = (0.5, -0.5)
_GHZ4_PATTERN = (0.5, -0.5, -0.5, 0.5)   # up, down, (sensed ion), down, up


@dataclass(frozen=True)
class ZeemanConfig:
    """Linear Zeeman coupling: Lande g-factor and the sublevels in use."""

    g_factor: float
    magnetic_quantum_numbers: tuple[float, float] = (0.5, -0.5)

    def __post_init__(self):
        if not (self.g_factor > 0):
            raise ConfigurationError(f"g_factor must be > 0, got {self.g_factor}")


@dataclass(frozen=True)
class ProbeState:
    """Immutable probe state; evolve() returns a new instance."""

    kind: str                                   # BELL or GHZ
    ion_positions: tuple[Vec3, ...]             # probe ions only, excluding the sensed spin
    branch_weights: tuple[tuple[float, ...], tuple[float, ...]]  # m values per branch, per ion
    phase: float = 0.0                          # rad
    contrast: float = 1.0

    def __post_init__(self):
        n = len(self.ion_positions)
        if self.kind not in (BELL, GHZ):
            raise ConfigurationError(f"unknown probe kind {self.kind!r}")
        if self.kind == BELL and n != 2:
            raise ConfigurationError(f"Bell probe needs exactly 2 ions, got {n}")
        if self.kind == GHZ and (n < 2 or n % 2):
            raise ConfigurationError(f"GHZ probe needs an even ion count >= 2, got {n}")
        b1, b2 = self.branch_weights
        if len(b1) != n or len(b2) != n:
            raise ConfigurationError("branch weight length does not match ion count")
        for branch in (b1, b2):
            if any(abs(w) != 0.5 for w in branch):
                raise ConfigurationError("branch weights must be +-1/2")
            if sum(branch) != 0.0:
                raise ConfigurationError(
                    "branch weights must sum to zero (decoherence-free condition)")
        if any(w1 != -w2 for w1, w2 in zip(b1, b2)):
            raise ConfigurationError("branches must be spin complements of each other")
        if not (0.0 <= self.contrast <= 1.0):
            raise ConfigurationError(f"contrast must be in [0, 1], got {self.contrast}")
        if not math.isfinite(self.phase):
            raise ConfigurationError("phase must be finite")

    @property
    def n_ions(self) -> int:
        return len(self.ion_positions)

    @property
    def delta_m(self) -> tuple[float, ...]:
        """Branch-1 minus branch-2 magnetic quantum number per ion (+-1)."""
        b1, b2 = self.branch_weights
        return tuple(w1 - w2 for w1, w2 in zip(b1, b2))


def prepare_probe(kind: str, ion_positions: Sequence[Vec3], fidelity: float,
                  branch_weights: tuple[tuple[float, ...], tuple[float, ...]] | None = None,
                  ) -> ProbeState:
    """Entanglement transfer and preparation, idealized to a contrast factor.

    Returns a probe with phase 0 and contrast equal to the preparation
    fidelity. Default branch patterns exist for 2 ions (up-down) and 4 ions
    (up-down-down-up around a central sensed spin); other even counts need
    explicit branch_weights.
    """
    if not (0.0 <= fidelity <= 1.0):
        raise ConfigurationError(f"fidelity must be in [0, 1], got {fidelity}")
    n = len(ion_positions)
    if branch_weights is None:
        if n == 2:
            pattern = _BELL_PATTERN
        elif n == 4 and kind == GHZ:
            pattern = _GHZ4_PATTERN
        else:
            raise ConfigurationError(
                f"no default branch pattern for kind={kind!r} with {n} ions; pass branch_weights")
        branch_weights = (pattern, tuple(-w for w in pattern))
    return ProbeState(kind=kind, ion_positions=tuple(ion_positions),
                      branch_weights=branch_weights, phase=0.0, contrast=fidelity)


def phase_rate(probe: ProbeState, zeeman: ZeemanConfig,
               field_at_ions: Sequence[float]) -> float:
    """Differential Zeeman phase rate (rad/s) for per-ion axial fields (T).

    Reduces to (g mu_B / hbar) * (B_1 - B_2) for the standard Bell pair. A
    uniform field contributes exactly zero because the +-1 weights cancel
    term by term.
    """
    if len(field_at_ions) != probe.n_ions:
        raise ConfigurationError(
            f"expected {probe.n_ions} field values, got {len(field_at_ions)}")
    c = constants()
    weighted = sum(dm * b for dm, b in zip(probe.delta_m, field_at_ions))
    return zeeman.g_factor * c.bohr_magneton / c.reduced_planck * weighted


def evolve(probe: ProbeState, zeeman: ZeemanConfig, field_at_ions: Sequence[float],
           duration: float) -> ProbeState:
    """Free evolution for duration >= 0 seconds; contrast is left unchanged."""
    if duration < 0:
        raise ConfigurationError(f"duration must be >= 0, got {duration}")
    return replace(probe, phase=probe.phase + phase_rate(probe, zeeman, field_at_ions) * duration)


def parity(probe: ProbeState) -> float:
    """Parity expectation P = contrast * cos(phase)."""
    return probe.contrast * math.cos(probe.phase)


def outcome_parities(n_ions: int) -> np.ndarray:
    """Parity (+-1) of each of the 2^N measurement patterns, indexed by bitmask.

    Bit i of the index is ion i's outcome (0 up, 1 down); parity is the
    product of single-ion outcomes.
    """
    idx = np.arange(2 ** n_ions, dtype=np.uint32)
    ones = np.zeros(2 ** n_ions, dtype=np.int64)
    for bit in range(n_ions):
        ones += (idx >> bit) & 1
    return np.where(ones % 2 == 0, 1, -1).astype(np.int64)


def outcome_probabilities(probe: ProbeState, bias_phase: float = 0.0) -> np.ndarray:
    """Measurement distribution over the 2^N spin patterns after the analysis pulse.

    The pulse is ideal; its adjustable phase enters as bias_phase added to
    the accumulated probe phase. Probabilities are nonnegative and sum to 1.
    """
    signs = outcome_parities(probe.n_ions)
    fringe = probe.contrast * math.cos(probe.phase + bias_phase)
    return (1.0 + signs * fringe) / float(2 ** probe.n_ions)


@dataclass(frozen=True)
class ParityRecord:
    """One point of a parity trajectory."""

    time: float     # s
    parity: float
    phase: float    # rad
