import math
import pytest
from ringtrap.constants import CONFIG_DIR_PATH, EXIT_CONFIG_ERROR
from ringtrap.models.errors import ConfigError
from ringtrap.services.config_loader import load_config, parse_config

MODES_DOC = """
schema_version: 1
command: modes
geometry:
  radius_um: 16
  width_um: 1.1
  height_nm: 290
mode:
  wavelength_nm: 894
"""


def test_lengths_are_normalized_to_si():
    config = parse_config(MODES_DOC)
    geometry = config.geometry()
    assert geometry.radius == pytest.approx(16e-6)
    assert geometry.width == pytest.approx(1.1e-6)
    assert geometry.height == pytest.approx(290e-9)
    assert config.get("mode", "wavelength") == pytest.approx(894e-9)


def test_defaults_fill_missing_keys():
    config = parse_config(MODES_DOC)
    assert config.get("mode", "polarization") == "TM"
    assert config.get("atom", "species") == "cesium"
    assert config.stack().layers == ((550e-9, 2.0), (2e-6, 1.45))


def test_frequencies_are_stored_as_angular():
    config = parse_config(MODES_DOC + "resonator:\n  kappa_GHz: 1.5\n")
    assert config.get("resonator", "kappa") == pytest.approx(2 * math.pi * 1.5e9)


def test_hash_tracks_the_text():
    first = parse_config(MODES_DOC)
    second = parse_config(MODES_DOC + "\n# comment\n")
    assert first.config_hash != second.config_hash
    assert parse_config(MODES_DOC).config_hash == first.config_hash


@pytest.mark.parametrize("edit, key_path", [
    (("width_um: 1.1", "width: 1.1"), "geometry.width"),
    (("width_um: 1.1", "width_GHz: 1.1"), "geometry.width_GHz"),
    (("width_um: 1.1", "width_furlong: 1.1"), "geometry.width_furlong"),
    (("width_um: 1.1", "width_um: -1.1"), "geometry.width_um"),
    (("width_um: 1.1", "breadth_um: 1.1"), "geometry.breadth_um"),
    (("schema_version: 1", "schema_version: 7"), "schema_version"),
    (("command: modes", "command: dance"), "command"),
])
def test_invalid_keys_name_their_path(edit, key_path):
    with pytest.raises(ConfigError) as info:
        parse_config(MODES_DOC.replace(*edit))
    assert info.value.key_path == key_path
    assert info.value.exit_code == EXIT_CONFIG_ERROR


def test_required_key_missing():
    with pytest.raises(ConfigError) as info:
        parse_config(MODES_DOC.replace("  radius_um: 16\n", ""))
    assert info.value.key_path == "geometry.radius"
    assert "_um" in str(info.value)


def test_range_mapping_includes_stop():
    doc = """
    schema_version: 1
    command: sweep
    mode:
      wavelength_nm: 894
    roughness: {sigma_pm_nm: 2, L_pm_nm: 60, sigma_t_nm: 1, L_t_nm: 70, sigma_b_nm: 1, L_b_nm: 80}
    sweep:
      width_um: {start: 0.8, stop: 1.0, step: 0.1}
      height_um: [0.25, 0.3]
      radius_um: 16
    """
    config = parse_config(doc.replace("\n    ", "\n"))
    widths = config.ranges("sweep", ["width"])["width"]
    assert widths == pytest.approx([0.8e-6, 0.9e-6, 1.0e-6])
    assert config.get("sweep", "height") == pytest.approx([0.25e-6, 0.3e-6])


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yaml"))


def test_malformed_yaml():
    with pytest.raises(ConfigError):
        parse_config("schema_version: [1\n")


def test_source_path_is_recorded(write_config):
    fpath = write_config(MODES_DOC)
    assert load_config(str(fpath)).source_path == str(fpath)


@pytest.mark.parametrize("fname", [
    "baseline.yaml",
    "spectrum_fit.yaml",
    "trap.yaml",
    "top_illumination.yaml",
    "trap_scan.yaml",
    "thickness_scan.yaml",
    "transport.yaml",
    "loss.yaml",
    "sweep.yaml",
    "report.yaml",
])
def test_bundled_configs_validate(fname):
    config = load_config(f"{CONFIG_DIR_PATH}/{fname}")
    assert config.schema_version == 1
