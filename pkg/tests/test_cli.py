import pytest

from iongradim.cli import (ConfigFileError, config_hash, emit, execute, main,
                           normalized_config, parse_config)
from iongradim.errors import ConfigurationError

CRYSTAL_CFG = """\
# three-ion chain, Ca-40 at 10 MHz
command = crystal
n_ions = 3
axial_frequency_hz = 10e6
ion_mass_kg = 6.6421562664e-26
"""

SCENARIO_CFG = """\
command = scenario
scenario = three_ion_spin
g_factor = 2.002
paper_values = on
seed = 42
"""


# ---------------------------------------------------------------------------
# parsing

def test_parse_minimal_crystal_config():
    run = parse_config(CRYSTAL_CFG)
    assert run.command == "crystal"
    assert run.parameters["n_ions"] == 3
    assert run.parameters["axial_frequency_hz"] == 10e6
    assert run.seed == 0
    assert run.output_format == "csv"


def test_negative_frequency_names_the_field():
    bad = CRYSTAL_CFG.replace("10e6", "-10e6")
    with pytest.raises(ConfigFileError, match="axial_frequency_hz"):
        parse_config(bad)


def test_duplicate_key_rejected():
    with pytest.raises(ConfigFileError, match="duplicate key"):
        parse_config(CRYSTAL_CFG + "n_ions = 4\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigFileError, match="unknown key"):
        parse_config(CRYSTAL_CFG + "n_irons = 4\n")


def test_syntax_error_carries_line_number():
    with pytest.raises(ConfigFileError, match="line 2"):
        parse_config("command = crystal\nwhat is this\nn_ions = 3\n")


def test_missing_required_key():
    with pytest.raises(ConfigFileError, match="n_ions"):
        parse_config("command = crystal\naxial_frequency_hz = 10e6\n"
                     "ion_mass_kg = 6.64e-26\n")


def test_missing_command():
    with pytest.raises(ConfigFileError, match="command"):
        parse_config("n_ions = 3\n")


def test_unknown_command():
    with pytest.raises(ConfigFileError, match="unknown command"):
        parse_config("command = warp\n")


def test_int_field_rejects_float():
    with pytest.raises(ConfigFileError, match="integer"):
        parse_config(CRYSTAL_CFG.replace("n_ions = 3", "n_ions = 3.5"))


def test_multiple_errors_reported_together():
    bad = ("command = crystal\nn_ions = 99\naxial_frequency_hz = -1\n"
           "ion_mass_kg = 6.64e-26\nbogus = 1\n")
    with pytest.raises(ConfigFileError) as exc:
        parse_config(bad)
    message = str(exc.value)
    assert "n_ions" in message and "axial_frequency_hz" in message and "bogus" in message


def test_round_trip_normalization():
    run = parse_config(SCENARIO_CFG)
    echo = normalized_config(run)
    again = parse_config(echo)
    assert again == run
    assert normalized_config(again) == echo
    assert config_hash(echo) == config_hash(normalized_config(again))


# ---------------------------------------------------------------------------
# execution

def test_crystal_execution_reports_d12():
    bundle = execute(parse_config(CRYSTAL_CFG))
    summary = next(t for t in bundle.tables if t.name == "summary")
    d12 = summary.rows[0][summary.columns.index("d12_m")]
    assert d12 == pytest.approx(1.03e-6, rel=0.01)


def test_scenario_execution_annotates_pi_time():
    bundle = execute(parse_config(SCENARIO_CFG))
    assert any("26" in note and "pi" in note for note in bundle.annotations)
    names = {t.name for t in bundle.tables}
    assert {"geometry", "field_table", "estimation"} <= names


def test_field_table_schema():
    bundle = execute(parse_config(SCENARIO_CFG))
    table = next(t for t in bundle.tables if t.name == "field_table")
    assert table.columns == ("ion_index", "z_m", "Bz_T")


def test_trajectory_schema():
    bundle = execute(parse_config(SCENARIO_CFG))
    trajectory = next(t for t in bundle.tables if t.name.startswith("parity_trajectory"))
    assert trajectory.columns == ("time_s", "phase_rad", "parity")


def test_field_command_pair_requires_both():
    cfg = ("command = field\nsource_moment_j_per_t = 9.285e-24\n"
           "z_start_m = 1e-6\nz_stop_m = 5e-6\npair_z1_m = 1e-6\n")
    with pytest.raises(ConfigurationError):
        execute(parse_config(cfg))


def test_montecarlo_deterministic_bundle():
    cfg = ("command = montecarlo\nshots = 200\ninteraction_time_s = 5\n"
           "delta_b_t = 6.8e-13\nbias_phase_rad = 1.5707963267948966\nseed = 9\n")
    a, b = execute(parse_config(cfg)), execute(parse_config(cfg))
    assert a == b


# ---------------------------------------------------------------------------
# emission

def test_csv_numbers_reparse_to_12_significant_digits(tmp_path):
    bundle = execute(parse_config(CRYSTAL_CFG))
    paths = emit(bundle, "csv", tmp_path)
    positions = next(p for p in paths if p.name == "positions.csv")
    lines = positions.read_text().splitlines()
    assert lines[0].startswith("#") and "seed=0" in lines[0] and "config_sha256=" in lines[0]
    assert lines[1] == "ion_index,z_m"
    geometry = execute(parse_config(CRYSTAL_CFG)).tables[0]
    for line, row in zip(lines[2:], geometry.rows):
        cells = line.split(",")
        reparsed = float(cells[1])
        exact = row[1]
        assert reparsed == pytest.approx(exact, rel=1e-12, abs=0.0) or exact == reparsed == 0.0


def test_emitted_files_byte_identical_between_runs(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    code_a = main(["--config", str(_write_cfg(tmp_path, SCENARIO_CFG)), "--out", str(out_a)])
    code_b = main(["--config", str(_write_cfg(tmp_path, SCENARIO_CFG)), "--out", str(out_b)])
    assert code_a == code_b == 0
    files_a = sorted(p.name for p in out_a.iterdir())
    files_b = sorted(p.name for p in out_b.iterdir())
    assert files_a == files_b and files_a
    for name in files_a:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def _write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_provenance_hash_recomputable(tmp_path):
    out = tmp_path / "out"
    assert main(["--config", str(_write_cfg(tmp_path, CRYSTAL_CFG)),
                 "--out", str(out)]) == 0
    provenance = (out / "provenance.txt").read_text()
    header, _, rest = provenance.partition("config echo (sha256 of this block is the config hash):\n")
    echo = rest
    stated = header.split("config_sha256=")[1].split()[0]
    assert config_hash(echo) == stated


def test_text_format(tmp_path):
    out = tmp_path / "out"
    code = main(["--config", str(_write_cfg(tmp_path, CRYSTAL_CFG)),
                 "--out", str(out), "--format", "text"])
    assert code == 0
    report = (out / "report.txt").read_text()
    assert "[summary]" in report and "config echo:" in report


def test_exit_codes(tmp_path):
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 1
    bad = _write_cfg(tmp_path, "command = crystal\nn_ions = 0\n"
                               "axial_frequency_hz = 1e6\nion_mass_kg = 1e-26\n",
                     name="bad.cfg")
    assert main(["--config", str(bad), "--out", str(tmp_path / "x")]) == 1


def test_seed_flag_overrides_config(tmp_path):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    cfg = _write_cfg(tmp_path, SCENARIO_CFG)
    assert main(["--config", str(cfg), "--out", str(out1), "--seed", "7"]) == 0
    assert main(["--config", str(cfg), "--out", str(out2), "--seed", "8"]) == 0
    est1 = (out1 / "estimation.csv").read_text()
    est2 = (out2 / "estimation.csv").read_text()
    assert "seed=7" in est1 and "seed=8" in est2
    assert est1 != est2


def test_paper_values_flag_overrides(tmp_path):
    out = tmp_path / "pv"
    cfg = _write_cfg(tmp_path, SCENARIO_CFG.replace("paper_values = on",
                                                    "paper_values = off"))
    assert main(["--config", str(cfg), "--out", str(out), "--paper-values", "on"]) == 0
    provenance = (out / "provenance.txt").read_text()
    assert "paper_values = on" in provenance
    assert "mode=paper-values" in provenance
