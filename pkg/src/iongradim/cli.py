"""Command-line entry point: strict config files in, deterministic tables out.

Config files are UTF-8 text, one `key = value` assignment per line, with
`#` starting a comment. Keys are lowercase identifiers; values are integers,
floats, bare strings, or on/off booleans. Unknown keys, duplicate keys, and
out-of-range values are hard errors (a silently ignored typo in a physics
config produces wrong science). All quantities are base SI with the unit in
the key name; frequencies are given in Hz and converted to rad/s internally.

Outputs are CSV tables (one file per table, scientific notation with 16
significant digits, `#` provenance header line) plus a provenance file
carrying the seed, the config hash, and the normalized config echo from
which the hash can be recomputed. Identical config and seed produce
byte-identical files. Exit codes: 0 success, 1 config error, 2 runtime or
solver error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .constants import Vec3, constants
from .crystal import MAX_IONS, TrapConfig, equilibrium_positions, spacing
from .errors import (ConfigurationError, FieldSingularityError, InfeasibleError,
                     SolverError)
from .estimation import ExperimentPlan, NoiseModel, parity_estimate, simulate_shots
from .magnetostatics import (DipoleSource, FieldSample, axial_bz,
                             compensation_gradient, dipole_field)
from .protocol import BELL, ZeemanConfig, phase_rate, prepare_probe
from .scenarios import SCENARIO_KINDS, ScenarioConfig, run_scenario

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_INT_RE = re.compile(r"^[+-]?[0-9]+$")

DEFAULT_ION_MASS_KG = 40.0 * constants().atomic_mass_unit   # Ca-40
_PAIR_WEIGHTS = ((-0.5, 0.5), (0.5, -0.5))


class ConfigFileError(ConfigurationError):
    """Config file failed to parse or validate; message lists each problem."""


@dataclass(frozen=True)
class FieldSpec:
    kind: str                       # int | float | bool | str
    required: bool = False
    default: object = None
    minimum: float | None = None
    maximum: float | None = None
    exclusive_minimum: bool = False
    choices: tuple[str, ...] | None = None


def _f(kind="float", **kw) -> FieldSpec:
    return FieldSpec(kind=kind, **kw)


_COMMON_FIELDS = {
    "seed": _f("int", default=0, minimum=0, maximum=2 ** 64 - 1),
    "output_format": _f("str", default="csv", choices=("csv", "text")),
}

_SCENARIO_FIELDS = {
    "scenario": _f("str", required=True, choices=SCENARIO_KINDS),
    "axial_frequency_hz": _f(default=10e6, minimum=0, exclusive_minimum=True),
    "ion_mass_kg": _f(default=DEFAULT_ION_MASS_KG, minimum=0, exclusive_minimum=True),
    "shots": _f("int", default=10, minimum=1),
    "interaction_time_s": _f(default=5.0, minimum=0),
    "bias_phase_rad": _f(default=math.pi / 2),
    "g_factor": _f(default=constants().ca40_g_factor, minimum=0, exclusive_minimum=True),
    "preparation_fidelity": _f(default=0.99, minimum=0, maximum=1),
    "readout_contrast": _f(default=1.0, minimum=0, maximum=1),
    "gradient_rms_t_per_m": _f(default=0.0, minimum=0),
    "common_mode_rms_t": _f(default=0.0, minimum=0),
    "target_snr": _f(default=2.0, minimum=0, exclusive_minimum=True),
    "overhead_s_per_shot": _f(default=1.0, minimum=0),
    "paper_values": _f("bool", default=False),
    "source_moment_j_per_t": _f(default=None, minimum=0),
    "moment_before_j_per_t": _f(default=None, minimum=0),
    "moment_after_j_per_t": _f(default=None, minimum=0),
    "well_separation_m": _f(default=4.4e-6, minimum=0, exclusive_minimum=True),
    "probe_spacing_m": _f(default=3.5e-6, minimum=0, exclusive_minimum=True),
    "atom_moment_j_per_t": _f(default=None, minimum=0, exclusive_minimum=True),
    "delta_n": _f("int", default=1, minimum=0),
    "n_ions": _f("int", default=None, minimum=1, maximum=MAX_IONS),
}

COMMAND_SCHEMAS: dict[str, dict[str, FieldSpec]] = {
    "crystal": {
        **_COMMON_FIELDS,
        "n_ions": _f("int", required=True, minimum=1, maximum=MAX_IONS),
        "axial_frequency_hz": _f(required=True, minimum=0, exclusive_minimum=True),
        "ion_mass_kg": _f(required=True, minimum=0, exclusive_minimum=True),
        "ion_charge_c": _f(default=constants().elementary_charge,
                           minimum=0, exclusive_minimum=True),
    },
    "field": {
        **_COMMON_FIELDS,
        "source_moment_j_per_t": _f(required=True),
        "source_z_m": _f(default=0.0),
        "z_start_m": _f(required=True),
        "z_stop_m": _f(required=True),
        "n_points": _f("int", default=101, minimum=2, maximum=100000),
        "pair_z1_m": _f(default=None),
        "pair_z2_m": _f(default=None),
    },
    "protocol": {
        **_COMMON_FIELDS,
        "delta_b_t": _f(required=True),
        "g_factor": _f(default=constants().ca40_g_factor, minimum=0, exclusive_minimum=True),
        "contrast": _f(default=1.0, minimum=0, maximum=1),
        "duration_s": _f(required=True, minimum=0),
        "n_steps": _f("int", default=101, minimum=2, maximum=100000),
    },
    "montecarlo": {
        **_COMMON_FIELDS,
        "shots": _f("int", required=True, minimum=1),
        "interaction_time_s": _f(required=True, minimum=0),
        "delta_b_t": _f(required=True),
        "bias_phase_rad": _f(default=0.0),
        "g_factor": _f(default=constants().ca40_g_factor, minimum=0, exclusive_minimum=True),
        "contrast": _f(default=1.0, minimum=0, maximum=1),
        "gradient_rms_t_per_m": _f(default=0.0, minimum=0),
        "common_mode_rms_t": _f(default=0.0, minimum=0),
        "probe_spacing_m": _f(default=1.03e-6, minimum=0, exclusive_minimum=True),
    },
    "scenario": {**_COMMON_FIELDS, **_SCENARIO_FIELDS},
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict
    seed: int
    output_format: str


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class ResultBundle:
    provenance: dict
    config_echo: str
    tables: tuple[Table, ...]
    annotations: tuple[str, ...] = field(default_factory=tuple)


def _parse_value(raw: str, spec: FieldSpec, key: str, line_no: int) -> object:
    where = f"line {line_no}: {key}"
    if spec.kind == "int":
        if not _INT_RE.match(raw):
            raise ConfigFileError(f"{where}: expected an integer, got {raw!r}")
        value = int(raw)
    elif spec.kind == "float":
        try:
            value = float(raw)
        except ValueError:
            raise ConfigFileError(f"{where}: expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigFileError(f"{where}: value must be finite, got {raw!r}")
    elif spec.kind == "bool":
        lowered = raw.lower()
        if lowered in ("on", "true"):
            return True
        if lowered in ("off", "false"):
            return False
        raise ConfigFileError(f"{where}: expected on/off, got {raw!r}")
    else:
        value = raw
    if spec.choices is not None and value not in spec.choices:
        raise ConfigFileError(
            f"{where}: must be one of {', '.join(spec.choices)}; got {raw!r}")
    if spec.minimum is not None and isinstance(value, (int, float)):
        if spec.exclusive_minimum and value <= spec.minimum:
            raise ConfigFileError(f"{where}: must be > {spec.minimum}, got {raw}")
        if not spec.exclusive_minimum and value < spec.minimum:
            raise ConfigFileError(f"{where}: must be >= {spec.minimum}, got {raw}")
    if spec.maximum is not None and isinstance(value, (int, float)) and value > spec.maximum:
        raise ConfigFileError(f"{where}: must be <= {spec.maximum}, got {raw}")
    return value


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; raises ConfigFileError listing every problem."""
    assignments: dict[str, tuple[str, int]] = {}
    errors: list[str] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {line_no}: expected 'key = value', got {raw_line.strip()!r}")
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not _KEY_RE.match(key):
            errors.append(f"line {line_no}: invalid key {key!r}")
            continue
        if not value:
            errors.append(f"line {line_no}: empty value for key {key!r}")
            continue
        if key in assignments:
            first_line = assignments[key][1]
            errors.append(f"line {line_no}: duplicate key {key!r} "
                          f"(first set on line {first_line})")
            continue
        assignments[key] = (value, line_no)
    if errors:
        raise ConfigFileError("\n".join(errors))

    if "command" not in assignments:
        raise ConfigFileError("missing required key 'command'")
    command, command_line = assignments.pop("command")
    if command not in COMMAND_SCHEMAS:
        raise ConfigFileError(
            f"line {command_line}: unknown command {command!r}; "
            f"expected one of {', '.join(sorted(COMMAND_SCHEMAS))}")
    schema = COMMAND_SCHEMAS[command]

    parameters: dict = {}
    for key, (raw, line_no) in assignments.items():
        if key not in schema:
            errors.append(f"line {line_no}: unknown key {key!r} for command {command!r}")
            continue
        try:
            parameters[key] = _parse_value(raw, schema[key], key, line_no)
        except ConfigFileError as exc:
            errors.append(str(exc))
    for key, spec in schema.items():
        if key in parameters:
            continue
        if spec.required:
            errors.append(f"missing required key {key!r} for command {command!r}")
        else:
            parameters[key] = spec.default
    if errors:
        raise ConfigFileError("\n".join(errors))

    seed = parameters.pop("seed")
    output_format = parameters.pop("output_format")
    return RunConfig(command=command, parameters=parameters,
                     seed=seed, output_format=output_format)


def _format_config_value(value: object) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def normalized_config(run: RunConfig) -> str:
    """Canonical config echo: parses back to an identical RunConfig."""
    lines = [f"command = {run.command}",
             f"seed = {run.seed}",
             f"output_format = {run.output_format}"]
    for key in sorted(run.parameters):
        value = run.parameters[key]
        if value is None:
            continue
        lines.append(f"{key} = {_format_config_value(value)}")
    return "\n".join(lines) + "\n"


def config_hash(echo: str) -> str:
    return hashlib.sha256(echo.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# command execution

def _execute_crystal(params: dict) -> tuple[tuple[Table, ...], tuple[str, ...]]:
    trap = TrapConfig(axial_frequency=2.0 * math.pi * params["axial_frequency_hz"],
                      ion_mass=params["ion_mass_kg"],
                      ion_charge=params["ion_charge_c"])
    geometry = equilibrium_positions(params["n_ions"], trap)
    n = geometry.n_ions
    positions = Table("positions", ("ion_index", "z_m"),
                      tuple((i, z) for i, z in enumerate(geometry.positions)))
    spacings = Table("spacings", ("i", "j", "distance_m"),
                     tuple((i, i + 1, spacing(geometry, i, i + 1)) for i in range(n - 1)))
    d12 = spacing(geometry, 0, 1) if n >= 2 else math.nan
    summary = Table("summary", ("n_ions", "length_scale_m", "d12_m"),
                    ((n, geometry.length_scale, d12),))
    return (positions, spacings, summary), ()


def _execute_field(params: dict) -> tuple[tuple[Table, ...], tuple[str, ...]]:
    source = DipoleSource(Vec3(0.0, 0.0, params["source_z_m"]),
                          Vec3(0.0, 0.0, params["source_moment_j_per_t"]))
    zs = np.linspace(params["z_start_m"], params["z_stop_m"], params["n_points"])
    samples = [FieldSample(point=Vec3(0.0, 0.0, float(z)),
                           b_field=dipole_field(source, Vec3(0.0, 0.0, float(z))))
               for z in zs]
    rows = tuple((s.point.z, s.b_field.z) for s in samples)
    tables = [Table("axial_field", ("z_m", "Bz_T"), rows)]
    z1, z2 = params["pair_z1_m"], params["pair_z2_m"]
    if (z1 is None) != (z2 is None):
        raise ConfigurationError("pair_z1_m and pair_z2_m must be given together")
    if z1 is not None:
        p1, p2 = Vec3(0.0, 0.0, z1), Vec3(0.0, 0.0, z2)
        delta = axial_bz(source, z2) - axial_bz(source, z1)
        grad = compensation_gradient(source, p1, p2)
        tables.append(Table("pair_differential",
                            ("z1_m", "z2_m", "delta_b_t", "compensation_gradient_t_per_m"),
                            ((z1, z2, delta, grad.dbz_dz),)))
    return tuple(tables), ()


def _protocol_pair(spacing_m: float, contrast: float):
    positions = (Vec3(0.0, 0.0, 0.0), Vec3(0.0, 0.0, spacing_m))
    return prepare_probe(BELL, positions, contrast, branch_weights=_PAIR_WEIGHTS)


def _execute_protocol(params: dict) -> tuple[tuple[Table, ...], tuple[str, ...]]:
    zeeman = ZeemanConfig(g_factor=params["g_factor"])
    probe = _protocol_pair(1e-6, params["contrast"])
    fields = (0.0, params["delta_b_t"])
    rate = phase_rate(probe, zeeman, fields)
    times = np.linspace(0.0, params["duration_s"], params["n_steps"])
    rows = tuple((float(t), rate * float(t),
                  params["contrast"] * math.cos(rate * float(t))) for t in times)
    t_pi = math.pi / abs(rate) if rate != 0.0 else math.inf
    tables = (Table("parity_trajectory", ("time_s", "phase_rad", "parity"), rows),
              Table("summary", ("phase_rate_rad_per_s", "t_pi_s"), ((rate, t_pi),)))
    return tables, (f"time to a pi phase rotation: {t_pi:.4f} s",)


def _execute_montecarlo(params: dict, seed: int) -> tuple[tuple[Table, ...], tuple[str, ...]]:
    zeeman = ZeemanConfig(g_factor=params["g_factor"])
    probe = _protocol_pair(params["probe_spacing_m"], 1.0)
    noise = NoiseModel(common_mode_rms=params["common_mode_rms_t"],
                       gradient_rms=params["gradient_rms_t_per_m"],
                       contrast=params["contrast"])
    plan = ExperimentPlan(shots=params["shots"],
                          interaction_time=params["interaction_time_s"],
                          bias_phase=params["bias_phase_rad"], rng_seed=seed)
    fields = (0.0, params["delta_b_t"])
    outcomes = simulate_shots(plan, probe, zeeman, fields, noise)
    rate = phase_rate(probe, zeeman, fields)
    true_parity = params["contrast"] * math.cos(
        rate * plan.interaction_time + plan.bias_phase)
    result = parity_estimate(outcomes, true_parity=true_parity)
    estimate = Table("estimate",
                     ("parity_estimate", "std_error", "snr", "true_parity", "shots"),
                     ((result.parity_estimate, result.std_error, result.snr,
                       true_parity, result.shots_used),))
    values, counts = np.unique(outcomes.outcome_indices, return_counts=True)
    count_rows = tuple((int(v), int(c)) for v, c in zip(values, counts))
    counts_table = Table("outcome_counts", ("outcome_index", "count"), count_rows)
    return (estimate, counts_table), ()


def _execute_scenario(params: dict, seed: int) -> tuple[tuple[Table, ...], tuple[str, ...]]:
    trap = TrapConfig(axial_frequency=2.0 * math.pi * params["axial_frequency_hz"],
                      ion_mass=params["ion_mass_kg"])
    config = ScenarioConfig(
        kind=params["scenario"], trap=trap,
        zeeman=ZeemanConfig(g_factor=params["g_factor"]),
        noise=NoiseModel(common_mode_rms=params["common_mode_rms_t"],
                         gradient_rms=params["gradient_rms_t_per_m"],
                         contrast=params["readout_contrast"]),
        plan=ExperimentPlan(shots=params["shots"],
                            interaction_time=params["interaction_time_s"],
                            bias_phase=params["bias_phase_rad"], rng_seed=seed),
        paper_values=params["paper_values"],
        preparation_fidelity=params["preparation_fidelity"],
        target_snr=params["target_snr"],
        overhead_per_shot=params["overhead_s_per_shot"],
        source_moment=params["source_moment_j_per_t"],
        moment_before=params["moment_before_j_per_t"],
        moment_after=params["moment_after_j_per_t"],
        well_separation=params["well_separation_m"],
        probe_spacing=params["probe_spacing_m"],
        atom_moment=params["atom_moment_j_per_t"],
        delta_n=params["delta_n"],
        n_ions=params["n_ions"],
    )
    report = run_scenario(config)
    tables = [
        Table("geometry", ("quantity", "value"),
              tuple((k, v) for k, v in report.geometry.items())),
        Table("field_table", ("ion_index", "z_m", "Bz_T"),
              tuple((r.ion_index, r.z_m, r.bz_t) for r in report.field_table)),
        Table("estimation", ("quantity", "value"),
              tuple((k, v) for k, v in report.estimation.items())),
    ]
    for label, records in report.trajectories:
        tables.append(Table(f"parity_trajectory_{label}", ("time_s", "phase_rad", "parity"),
                            tuple((p.time, p.phase, p.parity) for p in records)))
    return tuple(tables), report.annotations


def execute(run: RunConfig) -> ResultBundle:
    """Dispatch the parsed config and bundle the outputs with provenance."""
    echo = normalized_config(run)
    log.info("executing command %r (seed %d)", run.command, run.seed)
    if run.command == "crystal":
        tables, annotations = _execute_crystal(run.parameters)
    elif run.command == "field":
        tables, annotations = _execute_field(run.parameters)
    elif run.command == "protocol":
        tables, annotations = _execute_protocol(run.parameters)
    elif run.command == "montecarlo":
        tables, annotations = _execute_montecarlo(run.parameters, run.seed)
    elif run.command == "scenario":
        tables, annotations = _execute_scenario(run.parameters, run.seed)
    else:
        raise ConfigurationError(f"unknown command {run.command!r}")
    provenance = {
        "artifact": "iongradim",
        "version": __version__,
        "command": run.command,
        "seed": run.seed,
        "config_sha256": config_hash(echo),
    }
    return ResultBundle(provenance=provenance, config_echo=echo,
                        tables=tables, annotations=tuple(annotations))


# ---------------------------------------------------------------------------
# output formatting

def format_number(value) -> str:
    """Numbers formatted to re-parse within 1 ulp of the 16th significant digit."""
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.15e}"


def _csv_cell(value) -> str:
    if isinstance(value, str):
        if any(ch in value for ch in (",", '"', "\n")):
            return '"' + value.replace('"', '""') + '"'
        return value
    return format_number(value)


def _header_line(provenance: dict) -> str:
    return (f"# {provenance['artifact']} {provenance['version']} "
            f"command={provenance['command']} seed={provenance['seed']} "
            f"config_sha256={provenance['config_sha256']}")


def emit(bundle: ResultBundle, output_format: str, out_dir: str | Path) -> list[Path]:
    """Write the bundle; returns the written paths. Byte-stable for fixed inputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if output_format == "csv":
        for table in bundle.tables:
            path = out / f"{table.name}.csv"
            lines = [_header_line(bundle.provenance), ",".join(table.columns)]
            lines.extend(",".join(_csv_cell(cell) for cell in row) for row in table.rows)
            path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
            written.append(path)
        written.append(_write_provenance(bundle, out))
    elif output_format == "text":
        lines = [_header_line(bundle.provenance), ""]
        if bundle.annotations:
            lines.append("annotations:")
            lines.extend(f"  - {note}" for note in bundle.annotations)
            lines.append("")
        for table in bundle.tables:
            lines.append(f"[{table.name}]")
            lines.append("  " + "  ".join(table.columns))
            for row in table.rows:
                lines.append("  " + "  ".join(_csv_cell(cell) for cell in row))
            lines.append("")
        lines.append("config echo:")
        lines.extend("  " + line for line in bundle.config_echo.splitlines())
        path = out / "report.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        written.append(path)
    else:
        raise ConfigurationError(f"unknown output format {output_format!r}")
    return written


def _write_provenance(bundle: ResultBundle, out: Path) -> Path:
    lines = [_header_line(bundle.provenance), ""]
    if bundle.annotations:
        lines.append("annotations:")
        lines.extend(f"  - {note}" for note in bundle.annotations)
        lines.append("")
    lines.append("config echo (sha256 of this block is the config hash):")
    lines.append(bundle.config_echo.rstrip("\n"))
    path = out / "provenance.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iongradim",
        description="Entangled-ion magnetic gradient sensing simulator.")
    parser.add_argument("--config", required=True, help="path to the run config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed (64-bit unsigned)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "text"), default=None,
                        help="override the config output format")
    parser.add_argument("--paper-values", choices=("on", "off"), default=None,
                        help="scenario runs: use published reference values "
                             "instead of computed fields")
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("IONGRADIM_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run = parse_config(text)
        if args.seed is not None:
            if not (0 <= args.seed < 2 ** 64):
                raise ConfigurationError("--seed must fit in 64 bits")
            run = RunConfig(run.command, run.parameters, args.seed, run.output_format)
        if args.format is not None:
            run = RunConfig(run.command, run.parameters, run.seed, args.format)
        if args.paper_values is not None:
            if run.command == "scenario":
                run.parameters["paper_values"] = args.paper_values == "on"
            else:
                log.warning("--paper-values only applies to scenario runs; ignored")
        bundle = execute(run)
    except (ConfigurationError, FieldSingularityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, InfeasibleError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        written = emit(bundle, run.output_format, args.out)
    except OSError as exc:
        print(f"runtime error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
