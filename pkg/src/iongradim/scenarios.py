"""Preconfigured end-to-end sensing experiments.

Each runner wires crystal geometry, dipole fields, probe-state evolution,
and Monte Carlo estimation into a ScenarioReport. Every scenario can run in
two modes:

  computed mode      fields evaluated from the dipole law and the solved
                     geometry (first principles);
  paper-values mode  the published feasibility-estimate numbers are injected
                     in place of computed differential fields, for
                     reproducing the quoted timing and SNR benchmarks.

The published absolute field values are about 2.2x smaller than the dipole
law evaluated with the CODATA electron moment at the same distances. Reports
never blend the two: each number is labeled with the mode that produced it,
and annotations carry the published values alongside computed ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import Vec3, constants
from .crystal import CrystalGeometry, TrapConfig, equilibrium_positions, spacing
from .errors import ConfigurationError, InfeasibleError
from .estimation import (ExperimentPlan, NoiseModel, required_shots,
                         spin_discrimination_snr)
from .magnetostatics import (DipoleSource, axial_bz, compensation_gradient,
                             differential_field, total_differential_field)
from .protocol import (BELL, GHZ, ParityRecord, ProbeState, ZeemanConfig,
                       phase_rate, prepare_probe)

THREE_ION_SPIN = "three_ion_spin"
MOLECULAR_STATE_CHANGE = "molecular_state_change"
DOUBLE_WELL = "double_well"
GHZ_CHAIN = "ghz_chain"
SCENARIO_KINDS = (THREE_ION_SPIN, MOLECULAR_STATE_CHANGE, DOUBLE_WELL, GHZ_CHAIN)

MODE_COMPUTED = "computed"
MODE_PAPER = "paper-values"

# Published reference values reproduced by paper-values mode.
REFERENCE_DELTA_B_T = 6.8e-13          # three-ion differential field
REFERENCE_NEAR_FIELD_T = 7.8e-13       # field at the near probe ion (1.03 um)
REFERENCE_FAR_FIELD_T = 9.7e-14        # field at the far probe ion (2.06 um)
REFERENCE_DW_DELTA_B_T = 1.3e-11       # double-well single-atom imbalance
REFERENCE_T_PI_S = 26.0                # quoted +1 -> -1 parity rotation time
REFERENCE_TOTAL_TIME_S = 60.0          # quoted total measurement time bound

_TRAJECTORY_POINTS = 101
_MAX_SCAN_DELTA_N = 10_000

# Probe branch order chosen so the reported phase rate is positive when the
# near ion sees the larger field; physically identical to the swapped order.
_PAIR_WEIGHTS = ((-0.5, 0.5), (0.5, -0.5))


@dataclass(frozen=True)
class ScenarioConfig:
    """One scenario run: shared machinery plus kind-specific parameters."""

    kind: str
    trap: TrapConfig
    zeeman: ZeemanConfig
    noise: NoiseModel
    plan: ExperimentPlan
    paper_values: bool = False
    preparation_fidelity: float = 0.99
    target_snr: float = 2.0
    overhead_per_shot: float = 1.0       # s of cooling/readout per shot
    source_moment: float | None = None   # J/T; default |electron moment|
    # molecular_state_change:
    moment_before: float | None = None   # J/T
    moment_after: float | None = None    # J/T
    # double_well:
    well_separation: float | None = None  # m
    probe_spacing: float | None = None    # m
    atom_moment: float | None = None      # J/T per excess atom
    delta_n: int | None = None            # atom-number imbalance
    # ghz_chain:
    n_ions: int | None = None

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigurationError(f"unknown scenario kind {self.kind!r}")
        if not (0.0 <= self.preparation_fidelity <= 1.0):
            raise ConfigurationError("preparation_fidelity must be in [0, 1]")
        if not (self.target_snr > 0):
            raise ConfigurationError("target_snr must be > 0")
        if self.overhead_per_shot < 0:
            raise ConfigurationError("overhead_per_shot must be >= 0")
        if self.kind == MOLECULAR_STATE_CHANGE:
            if self.moment_before is None or self.moment_after is None:
                raise ConfigurationError(
                    "molecular_state_change needs moment_before and moment_after")
            if self.moment_before < 0 or self.moment_after < 0:
                raise ConfigurationError("moment magnitudes must be >= 0")
        if self.kind == DOUBLE_WELL:
            if self.well_separation is None or self.probe_spacing is None:
                raise ConfigurationError(
                    "double_well needs well_separation and probe_spacing")
            if self.well_separation <= 0 or self.probe_spacing <= 0:
                raise ConfigurationError("double-well geometry must be positive")
            if self.probe_spacing >= self.well_separation:
                raise ConfigurationError(
                    "probe pair must fit inside the double well "
                    f"(spacing {self.probe_spacing} >= separation {self.well_separation})")
            if self.delta_n is None or not isinstance(self.delta_n, int) or self.delta_n < 0:
                raise ConfigurationError("delta_n must be an integer >= 0")
        if self.kind == GHZ_CHAIN:
            n = 5 if self.n_ions is None else self.n_ions
            if n != 5:
                raise ConfigurationError(
                    f"ghz_chain is defined for a 5-ion crystal (4 probes + central spin), got {n}")

    @property
    def mode(self) -> str:
        return MODE_PAPER if self.paper_values else MODE_COMPUTED

    def moment_magnitude(self) -> float:
        if self.source_moment is not None:
            if self.source_moment < 0:
                raise ConfigurationError("source_moment must be >= 0")
            return self.source_moment
        return abs(constants().electron_magnetic_moment)


@dataclass(frozen=True)
class FieldRow:
    """One field-table row; column names match the CSV schema."""

    ion_index: int
    z_m: float
    bz_t: float


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    mode: str
    seed: int
    geometry: dict[str, float]
    field_table: tuple[FieldRow, ...]
    delta_b: float
    trajectories: tuple[tuple[str, tuple[ParityRecord, ...]], ...]
    estimation: dict[str, float]
    annotations: tuple[str, ...] = field(default_factory=tuple)

    def payload(self) -> dict:
        """Plain-type nested dict; serializing it is byte-stable for a fixed config."""
        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "seed": self.seed,
            "geometry": dict(self.geometry),
            "field_table": [
                {"ion_index": r.ion_index, "z_m": r.z_m, "bz_t": r.bz_t}
                for r in self.field_table],
            "delta_b_t": self.delta_b,
            "trajectories": {
                label: [{"time_s": p.time, "phase_rad": p.phase, "parity": p.parity}
                        for p in records]
                for label, records in self.trajectories},
            "estimation": dict(self.estimation),
            "annotations": list(self.annotations),
        }


def _trajectory(rate: float, contrast: float, t_max: float,
                n_points: int = _TRAJECTORY_POINTS) -> tuple[ParityRecord, ...]:
    times = np.linspace(0.0, t_max, n_points)
    return tuple(ParityRecord(time=float(t), parity=contrast * math.cos(rate * t),
                              phase=rate * float(t)) for t in times)


def _pair_probe(positions: tuple[Vec3, Vec3], fidelity: float) -> ProbeState:
    return prepare_probe(BELL, positions, fidelity, branch_weights=_PAIR_WEIGHTS)


def _three_ion_layout(config: ScenarioConfig):
    """Solve the 3-ion chain; the sensed spin sits at the positive end."""
    geometry = equilibrium_positions(3, config.trap)
    z_far, z_near, z_x = geometry.positions
    probes = (Vec3(0.0, 0.0, z_far), Vec3(0.0, 0.0, z_near))
    source = DipoleSource(Vec3(0.0, 0.0, z_x),
                          Vec3(0.0, 0.0, config.moment_magnitude()))
    return geometry, probes, source


def spacing_of_near_pair(geometry: CrystalGeometry) -> float:
    """Adjacent spacing d12 of the solved chain (uniform for 3 ions)."""
    return spacing(geometry, 0, 1)


def run_three_ion_spin(config: ScenarioConfig) -> ScenarioReport:
    """Spin-state detection of the end ion by the adjacent Bell pair.

    The external compensation gradient nulls the differential field for spin
    up; a flip to spin down doubles it. The report carries the crystal
    spacing, the per-ion fields, the time to a pi phase rotation, and the
    Monte Carlo flip-discrimination SNR at the configured operating point.
    """
    if config.kind != THREE_ION_SPIN:
        raise ConfigurationError(f"expected kind {THREE_ION_SPIN!r}, got {config.kind!r}")
    geometry, probes, source = _three_ion_layout(config)
    d12 = spacing_of_near_pair(geometry)
    b_far = axial_bz(source, probes[0].z)
    b_near = axial_bz(source, probes[1].z)
    delta_computed = differential_field(source, probes[0], probes[1])

    if config.paper_values:
        delta_used = REFERENCE_DELTA_B_T
        fields_used = (0.0, delta_used)
        fields_up = (0.0, 0.0)
        fields_down = (0.0, -2.0 * delta_used)
    else:
        delta_used = delta_computed
        fields_used = (b_far, b_near)
        gradient = compensation_gradient(source, probes[0], probes[1])
        fields_up = (0.0, total_differential_field(source, probes[0], probes[1], gradient))
        fields_down = (0.0, total_differential_field(source.flipped(), probes[0],
                                                     probes[1], gradient))

    probe = _pair_probe(probes, config.preparation_fidelity)
    rate = phase_rate(probe, config.zeeman, fields_used)
    rate_up = phase_rate(probe, config.zeeman, fields_up)
    rate_down = phase_rate(probe, config.zeeman, fields_down)
    t_pi = math.pi / abs(rate) if rate != 0.0 else math.inf
    t_max = 1.25 * t_pi if math.isfinite(t_pi) else config.plan.interaction_time
    contrast = config.preparation_fidelity * config.noise.contrast

    discrimination = spin_discrimination_snr(config.plan, probe, config.zeeman,
                                             fields_up, fields_down, config.noise)
    time_per_hypothesis = config.plan.shots * (config.plan.interaction_time
                                               + config.overhead_per_shot)
    total_time = 2.0 * time_per_hypothesis

    annotations = (
        f"mode={config.mode}: differential field in use {delta_used:.6e} T",
        f"computed differential field {delta_computed:.6e} T vs published "
        f"{REFERENCE_DELTA_B_T:.1e} T (ratio {delta_computed / REFERENCE_DELTA_B_T:.2f})",
        f"computed near/far fields {b_near:.6e} / {b_far:.6e} T vs published "
        f"{REFERENCE_NEAR_FIELD_T:.1e} / {REFERENCE_FAR_FIELD_T:.1e} T",
        f"time to pi phase rotation {t_pi:.2f} s (published estimate "
        f"{REFERENCE_T_PI_S:.0f} s)",
        "compensation engaged: spin-up differential field is nulled and the "
        "parity stays constant; a spin flip doubles the differential field",
        f"measurement time {time_per_hypothesis:.1f} s per hypothesis with "
        f"{config.plan.shots} shots ({total_time:.1f} s for both arms; "
        f"published bound {REFERENCE_TOTAL_TIME_S:.0f} s)",
    )
    return ScenarioReport(
        scenario=THREE_ION_SPIN, mode=config.mode, seed=config.plan.rng_seed,
        geometry={
            "length_scale_m": geometry.length_scale,
            "d12_m": d12,
            "z_far_m": probes[0].z, "z_near_m": probes[1].z,
            "z_source_m": source.position.z,
        },
        field_table=(FieldRow(0, probes[0].z, fields_used[0]),
                     FieldRow(1, probes[1].z, fields_used[1])),
        delta_b=delta_used,
        trajectories=(
            ("free_evolution", _trajectory(rate, contrast, t_max)),
            ("compensated_spin_up", _trajectory(rate_up, contrast, t_max)),
            ("compensated_spin_down", _trajectory(rate_down, contrast, t_max)),
        ),
        estimation={
            "phase_rate_rad_per_s": rate,
            "t_pi_s": t_pi,
            "snr": discrimination.snr,
            "parity_up": discrimination.up.parity_estimate,
            "parity_down": discrimination.down.parity_estimate,
            "std_error_up": discrimination.up.std_error,
            "std_error_down": discrimination.down.std_error,
            "shots_per_hypothesis": float(config.plan.shots),
            "time_per_hypothesis_s": time_per_hypothesis,
            "total_measurement_time_s": total_time,
        },
        annotations=annotations,
    )


def run_molecular_state_change(config: ScenarioConfig) -> ScenarioReport:
    """Detect a magnetic-moment change of the co-trapped molecular ion.

    Runs the three-ion geometry with the moment before and after the
    candidate excitation and reports how many shots distinguish the two
    parity signals at the target SNR. Identical moments are reported as
    infeasible rather than raised.
    """
    if config.kind != MOLECULAR_STATE_CHANGE:
        raise ConfigurationError(f"expected kind {MOLECULAR_STATE_CHANGE!r}, got {config.kind!r}")
    geometry, probes, _ = _three_ion_layout(config)
    mu_e = abs(constants().electron_magnetic_moment)

    def delta_b_for(moment: float) -> float:
        if config.paper_values:
            # Published three-ion value, scaled linearly with the moment.
            return REFERENCE_DELTA_B_T * moment / mu_e
        src = DipoleSource(Vec3(0.0, 0.0, geometry.positions[2]), Vec3(0.0, 0.0, moment))
        return differential_field(src, probes[0], probes[1])

    probe = _pair_probe(probes, config.preparation_fidelity)
    contrast = config.preparation_fidelity * config.noise.contrast
    t = config.plan.interaction_time
    deltas = {"before": delta_b_for(config.moment_before),
              "after": delta_b_for(config.moment_after)}
    rates = {k: phase_rate(probe, config.zeeman, (0.0, d)) for k, d in deltas.items()}
    swing = 2.0 * contrast * abs(math.sin(0.5 * (rates["after"] - rates["before"]) * t))

    try:
        shots_needed = float(required_shots(config.target_snr, swing))
    except InfeasibleError:
        shots_needed = math.inf
    total_time = (2.0 * shots_needed * (t + config.overhead_per_shot)
                  if math.isfinite(shots_needed) else math.inf)

    annotations = (
        f"mode={config.mode}: differential fields before/after "
        f"{deltas['before']:.6e} / {deltas['after']:.6e} T",
        "differential field and phase rate scale linearly with the molecular moment",
        ("discrimination infeasible: the two moments produce identical parity signals"
         if not math.isfinite(shots_needed) else
         f"{shots_needed:.0f} shots per hypothesis reach SNR "
         f"{config.target_snr:.1f} at the symmetric operating point"),
    )
    return ScenarioReport(
        scenario=MOLECULAR_STATE_CHANGE, mode=config.mode, seed=config.plan.rng_seed,
        geometry={
            "length_scale_m": geometry.length_scale,
            "d12_m": spacing_of_near_pair(geometry),
            "z_far_m": probes[0].z, "z_near_m": probes[1].z,
        },
        field_table=(FieldRow(0, probes[0].z, 0.0),
                     FieldRow(1, probes[1].z, deltas["before"])),
        delta_b=deltas["before"],
        trajectories=(
            ("moment_before", _trajectory(rates["before"], contrast, t)),
            ("moment_after", _trajectory(rates["after"], contrast, t)),
        ),
        estimation={
            "delta_b_before_t": deltas["before"],
            "delta_b_after_t": deltas["after"],
            "phase_rate_before_rad_per_s": rates["before"],
            "phase_rate_after_rad_per_s": rates["after"],
            "parity_swing": swing,
            "shots_required": shots_needed,
            "total_measurement_time_s": total_time,
        },
        annotations=annotations,
    )


def run_double_well(config: ScenarioConfig) -> ScenarioReport:
    """Atom-number imbalance sensing between two neutral-atom wells.

    The probe pair sits centered between the wells; each excess atom is
    aggregated into a point dipole at the nearer well center. The report
    gives the imbalance differential field, the accumulated phase, the
    parity modulation away from the zero-crossing operating point, and the
    smallest detectable imbalance within the configured shot budget.
    """
    if config.kind != DOUBLE_WELL:
        raise ConfigurationError(f"expected kind {DOUBLE_WELL!r}, got {config.kind!r}")
    half_sep = config.well_separation / 2.0
    half_probe = config.probe_spacing / 2.0
    probes = (Vec3(0.0, 0.0, -half_probe), Vec3(0.0, 0.0, half_probe))
    atom_moment = config.atom_moment if config.atom_moment is not None \
        else constants().bohr_magneton
    if atom_moment <= 0:
        raise ConfigurationError("atom_moment must be > 0")

    def delta_b_for(imbalance: int) -> float:
        if config.paper_values:
            return REFERENCE_DW_DELTA_B_T * imbalance
        source = DipoleSource(Vec3(0.0, 0.0, half_sep),
                              Vec3(0.0, 0.0, imbalance * atom_moment))
        return differential_field(source, probes[0], probes[1])

    probe = _pair_probe(probes, config.preparation_fidelity)
    contrast = config.preparation_fidelity * config.noise.contrast
    t = config.plan.interaction_time
    delta_used = delta_b_for(config.delta_n)
    rate = phase_rate(probe, config.zeeman, (0.0, delta_used))
    phase_at_t = rate * t
    modulation = contrast * abs(math.sin(phase_at_t))

    rate_unit = phase_rate(probe, config.zeeman, (0.0, delta_b_for(1)))
    min_detectable = math.inf
    for k in range(1, _MAX_SCAN_DELTA_N + 1):
        swing_k = 2.0 * contrast * abs(math.sin(0.5 * k * rate_unit * t))
        if swing_k > 0 and required_shots(config.target_snr, swing_k) <= config.plan.shots:
            min_detectable = float(k)
            break

    annotations = [
        f"mode={config.mode}: imbalance of {config.delta_n} atoms gives a "
        f"differential field of {delta_used:.6e} T "
        f"(published single-atom value {REFERENCE_DW_DELTA_B_T:.1e} T)",
        f"parity modulation {modulation:.3f} away from the zero crossing "
        "(published estimate: +-30%)",
        "differential field is linear in the imbalance (superposition of "
        "single-atom dipoles)",
    ]
    if abs(phase_at_t) > math.pi:
        annotations.append(
            f"accumulated phase {phase_at_t:.3f} rad exceeds pi at "
            f"t = {t:.3g} s: the parity fringe order is ambiguous")
    if config.delta_n == 0:
        annotations.append("balanced wells: zero differential field, flat parity")

    return ScenarioReport(
        scenario=DOUBLE_WELL, mode=config.mode, seed=config.plan.rng_seed,
        geometry={
            "well_separation_m": config.well_separation,
            "probe_spacing_m": config.probe_spacing,
            "probe_to_near_well_m": half_sep - half_probe,
            "probe_to_far_well_m": half_sep + half_probe,
        },
        field_table=(FieldRow(0, probes[0].z, 0.0),
                     FieldRow(1, probes[1].z, delta_used)),
        delta_b=delta_used,
        trajectories=(("imbalance_evolution", _trajectory(rate, contrast, t)),),
        estimation={
            "delta_n": float(config.delta_n),
            "phase_rate_rad_per_s": rate,
            "phase_at_t_rad": phase_at_t,
            "parity_modulation": modulation,
            "min_detectable_delta_n": min_detectable,
            "shots_budget": float(config.plan.shots),
        },
        annotations=tuple(annotations),
    )


def run_ghz_chain(config: ScenarioConfig) -> ScenarioReport:
    """Four-probe GHZ chain around a central sensed spin.

    Compares the GHZ phase rate against the Bell pair on one side of the
    sensed spin (same near-ion differential field). For a mirror-symmetric
    chain the opposite-side Zeeman shifts add constructively and the ratio
    is exactly 2.
    """
    if config.kind != GHZ_CHAIN:
        raise ConfigurationError(f"expected kind {GHZ_CHAIN!r}, got {config.kind!r}")
    geometry = equilibrium_positions(5, config.trap)
    z = geometry.positions
    source = DipoleSource(Vec3(0.0, 0.0, z[2]),
                          Vec3(0.0, 0.0, config.moment_magnitude()))
    probe_idx = (0, 1, 3, 4)
    positions = tuple(Vec3(0.0, 0.0, z[i]) for i in probe_idx)
    fields = tuple(axial_bz(source, p.z) for p in positions)

    ghz = prepare_probe(GHZ, positions, config.preparation_fidelity)
    # Bell baseline on the left side pair (outer, inner), with the branch
    # order matching the GHZ pattern so the rate ratio comes out +2.
    bell = prepare_probe(BELL, (positions[0], positions[1]), config.preparation_fidelity)
    contrast = config.preparation_fidelity * config.noise.contrast

    rate_ghz = phase_rate(ghz, config.zeeman, fields)
    rate_bell = phase_rate(bell, config.zeeman, (fields[0], fields[1]))
    ratio = rate_ghz / rate_bell if rate_bell != 0.0 else math.nan
    t = config.plan.interaction_time

    annotations = (
        f"mode={config.mode}: fields computed from the dipole law "
        "(no published value to inject for this configuration)",
        f"GHZ phase rate is {ratio:.6f}x the side-pair Bell rate "
        "(constructive addition from the two sides of the chain)"
        if not math.isnan(ratio) else
        "zero source moment: both phase rates vanish",
        f"inner spacing {spacing(geometry, 1, 2):.4e} m is below the outer "
        f"spacing {spacing(geometry, 0, 1):.4e} m",
    )
    return ScenarioReport(
        scenario=GHZ_CHAIN, mode=config.mode, seed=config.plan.rng_seed,
        geometry={
            "length_scale_m": geometry.length_scale,
            "inner_spacing_m": spacing(geometry, 1, 2),
            "outer_spacing_m": spacing(geometry, 0, 1),
            "z_source_m": z[2],
        },
        field_table=tuple(FieldRow(i, positions[k].z, fields[k])
                          for k, i in enumerate(probe_idx)),
        delta_b=fields[1] - fields[0],
        trajectories=(
            ("ghz", _trajectory(rate_ghz, contrast, t)),
            ("bell_side_pair", _trajectory(rate_bell, contrast, t)),
        ),
        estimation={
            "phase_rate_ghz_rad_per_s": rate_ghz,
            "phase_rate_bell_rad_per_s": rate_bell,
            "rate_ratio": ratio,
            "t_pi_ghz_s": math.pi / abs(rate_ghz) if rate_ghz else math.inf,
            "t_pi_bell_s": math.pi / abs(rate_bell) if rate_bell else math.inf,
        },
        annotations=annotations,
    )


_RUNNERS = {
    THREE_ION_SPIN: run_three_ion_spin,
    MOLECULAR_STATE_CHANGE: run_molecular_state_change,
    DOUBLE_WELL: run_double_well,
    GHZ_CHAIN: run_ghz_chain,
}


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Dispatch to the runner for config.kind."""
    return _RUNNERS[config.kind](config)
