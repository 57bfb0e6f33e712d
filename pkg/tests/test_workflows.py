import json
import numpy as np
import pandas as pd
import pytest
import yaml
from pathlib import Path
from ringtrap.constants import (
    COMPLETED_STATUS,
    CONFIG_DIR_PATH,
    ERROR_STATUS,
    EXIT_CONFIG_ERROR,
    EXIT_PHYSICS_DOMAIN_ERROR,
    EXIT_SUCCESS
)
from ringtrap.entrypoints.cli import run_command
from ringtrap.services.artifacts import read_csv, read_provenance

COARSE_GRID = """
grid:
  spacing_nm: 40
  window_rho_um: 3.2
  window_z_um: 3
  z_center_um: -0.15
"""

MEASURED_REPORT = """
schema_version: 1
command: report
geometry:
  radius_um: 16
  width_um: 1.1
  height_um: 0.29
mode:
  wavelength_nm: 894
  polarization: TM
atom:
  species: cesium
  height_nm: 100
resonator:
  measured: true
  kappa_MHz: 1010
  coupling_g_MHz: 170
run:
  cache: false
""" + COARSE_GRID

SPECTRUM_FIT = f"""
schema_version: 1
command: spectrum-fit
spectrum:
  input: {CONFIG_DIR_PATH}/sample_spectrum.csv
  kappa_c_GHz: 0.5
"""


def _run_record(out_dir):
    return json.loads((out_dir / "run.json").read_text())


def test_measured_report(write_config, tmp_path):
    out_dir = tmp_path / "out"
    code = run_command("report", str(write_config(MEASURED_REPORT)), str(out_dir))
    assert code == EXIT_SUCCESS
    body = json.loads((out_dir / "report.json").read_text())
    assert body["C"] == pytest.approx(24.88, abs=0.01)
    assert body["source"] == "measured"
    assert body["provenance"]["command"] == "report"
    assert read_provenance(out_dir / "report.csv")["command"] == "report"
    record = _run_record(out_dir)
    assert record["status"] == COMPLETED_STATUS
    assert record["artifacts"] == ["report.csv", "report.json"]
    assert "Completed 'report'" in (out_dir / "run.log").read_text()


def test_spectrum_fit(write_config, tmp_path):
    out_dir = tmp_path / "out"
    code = run_command("spectrum-fit", str(write_config(SPECTRUM_FIT)), str(out_dir))
    assert code == EXIT_SUCCESS
    summary = json.loads((out_dir / "spectrum_fit.json").read_text())
    assert summary["kappa_over_2pi_GHz"] == pytest.approx(1.0, rel=0.05)
    assert summary["resonator"]["kappa_c_over_2pi_GHz"] == pytest.approx(0.5)
    assert (out_dir / "spectrum_fit_curve.csv").is_file()


def test_relative_spectrum_path(write_config, tmp_path):
    frequencies = 335116.0 + np.linspace(-1, 1, 30)
    pd.DataFrame({"frequency_GHz": frequencies, "counts": np.full(30, 10.0)}) \
        .to_csv(tmp_path / "flat.csv", index=False)
    config = write_config("""
        schema_version: 1
        command: spectrum-fit
        spectrum:
          input: flat.csv
    """)
    out_dir = tmp_path / "out"
    assert run_command("spectrum-fit", str(config), str(out_dir)) == EXIT_PHYSICS_DOMAIN_ERROR
    record = _run_record(out_dir)
    assert record["status"] == ERROR_STATUS
    assert record["last_error_message"].startswith("Failed to")
    assert record["last_error_message"].count("Failed to") == 1


def test_missing_spectrum_file(write_config, tmp_path):
    config = write_config("""
        schema_version: 1
        command: spectrum-fit
        spectrum:
          input: nowhere.csv
    """)
    assert run_command("spectrum-fit", str(config), str(tmp_path / "out")) == EXIT_CONFIG_ERROR


def test_command_mismatch(write_config, tmp_path):
    code = run_command("modes", str(write_config(SPECTRUM_FIT)), str(tmp_path / "out"))
    assert code == EXIT_CONFIG_ERROR


def test_missing_config(tmp_path):
    assert run_command("report", str(tmp_path / "absent.yaml"), str(tmp_path / "out")) == EXIT_CONFIG_ERROR


def test_report_needs_roughness_or_measurement(write_config, tmp_path):
    text = MEASURED_REPORT.replace("measured: true", "measured: false")
    code = run_command("report", str(write_config(text)), str(tmp_path / "out"))
    assert code == EXIT_CONFIG_ERROR


def test_modes_run(write_config, tmp_path):
    config = write_config("""
schema_version: 1
command: modes
geometry:
  radius_um: 16
  width_um: 1.1
  height_um: 0.29
mode:
  wavelength_nm: 894
run:
  cache: false
""" + COARSE_GRID)
    out_dir = tmp_path / "out"
    assert run_command("modes", str(config), str(out_dir)) == EXIT_SUCCESS
    table = read_csv(out_dir / "modes.csv")
    assert "TM" in set(table["polarization"])
    assert np.allclose(table["normalization_ratio"], 1.0)
    assert (out_dir / "fields").is_dir()


def test_loss_run(write_config, tmp_path):
    text = Path(CONFIG_DIR_PATH, "loss.yaml").read_text() + COARSE_GRID + "run:\n  cache: false\n"
    out_dir = tmp_path / "out"
    assert run_command("loss", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS
    report = json.loads((out_dir / "loss_report.json").read_text())
    assert report["q"]["q_total"] > 0
    assert report["fundamental_limit"]["q"]["q_total"] >= report["q"]["q_total"]
    surfaces = read_csv(out_dir / "loss_surfaces.csv")
    assert list(surfaces["surface"]) == ["top", "bottom", "sidewall_inner", "sidewall_outer"]


def _bundled(fname: str, **sections) -> str:
    """A bundled config with some sections overridden, as YAML text.
    """
    raw = yaml.safe_load(Path(CONFIG_DIR_PATH, fname).read_text())
    for section, values in sections.items():
        raw.setdefault(section, {}).update(values)
    return yaml.safe_dump(raw, sort_keys=False)


def _assert_table(fpath: Path, command: str, columns) -> pd.DataFrame:
    table = read_csv(fpath)
    assert set(columns) <= set(table.columns)
    assert read_provenance(fpath)["command"] == command
    return table


WIDE_GRID = {"spacing_nm": 40, "window_rho_um": 4.4, "window_z_um": 4, "z_center_um": -0.15}

COARSE_TRAP = {"spacing_nm": 20, "l_samples": 8}

NO_CACHE = {"cache": False, "jobs": 1}

TRAP_COLUMNS = ["z_t_nm", "rho_t_minus_rho_w_nm", "depth_uK", "f_rho_kHz", "f_l_kHz", "f_z_kHz", "open"]


def test_two_color_trap_run(write_config, tmp_path):
    text = _bundled("trap.yaml", grid=WIDE_GRID, trap=COARSE_TRAP, run=NO_CACHE)
    out_dir = tmp_path / "out"
    assert run_command("trap", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS

    tones = _assert_table(
        out_dir / "trap_tones.csv", "trap",
        ["color", "scheme", "goal", "port", "detuning_over_2pi_GHz", "power_uW", "I_buildup", "I_tilde"])
    assert set(tones["color"]) == {"red", "blue"}
    assert (tones["power_uW"] >= 0).all()

    report = json.loads((out_dir / "trap_report.json").read_text())
    assert report["kind"] == "two-color"
    assert report["provenance"]["command"] == "trap"
    assert report["depth_uK"] > 0
    assert report["lattice_period_nm"] == pytest.approx(935.3 / (2 * report["n_eff"]["red"]), rel=1e-6)
    assert report["n_eff"]["red"] > 1 and report["n_eff"]["blue"] > 1
    assert {"center_nm", "saddle_nm", "frequencies_kHz", "site_barrier_uK"} <= set(report)

    for fname in ("trap_slice_rho_z.csv", "trap_slice_rho_l.csv", "trap_vector_ratio.csv"):
        assert read_provenance(out_dir / fname)["command"] == "trap"
    _assert_table(out_dir / "trap_vector_ratio.csv", "trap", ["rho_um", "z_nm"])

    record = _run_record(out_dir)
    assert record["status"] == COMPLETED_STATUS
    assert {
        "trap_tones.csv",
        "trap_report.json",
        "trap_slice_rho_z.csv",
        "trap_slice_rho_l.csv",
        "trap_vector_ratio.csv",
    } <= set(record["artifacts"])


def test_top_illumination_trap_run(write_config, tmp_path):
    text = _bundled("top_illumination.yaml", trap={"spacing_nm": 20, "l_samples": 8}, run=NO_CACHE)
    out_dir = tmp_path / "out"
    assert run_command("trap", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS
    report = json.loads((out_dir / "trap_report.json").read_text())
    assert report["kind"] == "top-illumination"
    assert report["beam"]["wavelength_nm"] == pytest.approx(935.3)
    assert report["center_nm"]["z"] > 0
    assert (out_dir / "trap_slice_rho_z.csv").is_file()
    assert not (out_dir / "trap_tones.csv").exists()


def test_thickness_scan_run(write_config, tmp_path):
    text = _bundled(
        "thickness_scan.yaml",
        trap={"spacing_nm": 20, "l_samples": 8},
        scan={"thickness_nm": [150, 250]},
        run=NO_CACHE)
    out_dir = tmp_path / "out"
    assert run_command("trap-scan", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS
    table = _assert_table(out_dir / "trap_scan.csv", "trap-scan", ["thickness_nm"] + TRAP_COLUMNS)
    assert list(table["thickness_nm"]) == pytest.approx([150, 250])
    summary = json.loads((out_dir / "trap_scan_summary.json").read_text())
    assert summary["kind"] == "thickness"
    assert summary["n_points"] == 2
    assert summary["quarter_wavelength_nm"] == pytest.approx(935.3 / 4)


def test_power_ratio_scan_run(write_config, tmp_path):
    text = _bundled(
        "trap_scan.yaml",
        grid=WIDE_GRID,
        trap=COARSE_TRAP,
        scan={"ratios": [0.8, 1.2]},
        run=NO_CACHE)
    out_dir = tmp_path / "out"
    assert run_command("trap-scan", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS
    table = _assert_table(out_dir / "trap_scan.csv", "trap-scan", ["ratio"] + TRAP_COLUMNS)
    assert list(table["ratio"]) == pytest.approx([0.8, 1.2])
    summary = json.loads((out_dir / "trap_scan_summary.json").read_text())
    assert summary["kind"] == "power-ratio"
    assert summary["n_points"] == 2
    assert summary["blue_buildup_total"] > 0
    assert isinstance(summary["z_t_monotonic"], bool)


def test_transport_run(write_config, tmp_path):
    text = _bundled(
        "transport.yaml",
        grid=WIDE_GRID,
        trap=COARSE_TRAP,
        transport={"power_start_mW": 2.0, "power_stop_mW": 2.5, "power_step_mW": 0.25, "l_step_fraction": 0.125},
        run=NO_CACHE)
    out_dir = tmp_path / "out"
    assert run_command("transport", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS

    rows = _assert_table(
        out_dir / "transport.csv", "transport",
        ["step", "P_tw_mW", "l_tw_nm", "l_t_nm", "depth_uK", "site_barrier_uK"])
    summary = json.loads((out_dir / "transport_summary.json").read_text())
    assert summary["n_steps"] == len(rows)
    assert summary["n_ramp_steps"] == 3
    assert list(rows["P_tw_mW"][:3]) == pytest.approx([2.0, 2.25, 2.5])
    assert {"connected", "max_step_nm", "min_site_barrier_uK"} <= set(summary)
    assert isinstance(summary["connected"], bool)
    assert summary["max_step_nm"] >= 0
    assert "site_barrier_uK" in summary["ramp_end"] and "site_barrier_uK" in summary["final"]
    assert summary["final"]["l_t_nm"] == pytest.approx(rows["l_t_nm"].iloc[-1])
    assert read_provenance(out_dir / "transport_final_slice_rho_l.csv")["command"] == "transport"
    assert "transport_summary.json" in _run_record(out_dir)["artifacts"]


def test_sweep_run(write_config, tmp_path):
    text = _bundled(
        "sweep.yaml",
        grid=WIDE_GRID,
        sweep={"width_um": [1.1], "height_um": [0.29], "radius_um": [16]},
        run=NO_CACHE)
    out_dir = tmp_path / "out"
    assert run_command("sweep", str(write_config(text)), str(out_dir)) == EXIT_SUCCESS
    table = _assert_table(
        out_dir / "sweep.csv", "sweep",
        ["W_um", "H_um", "R_um", "excluded", "reason"])
    assert len(table) == 1
    summary = json.loads((out_dir / "sweep_summary.json").read_text())
    assert summary["n_points"] == 1
    assert summary["polarization"] == "TM"
    if not table["excluded"].iloc[0]:
        assert summary["best"]["C"] == pytest.approx(table["C"].iloc[0])
    assert read_provenance(out_dir / "sweep_C_R_16.00um.csv")["command"] == "sweep"
