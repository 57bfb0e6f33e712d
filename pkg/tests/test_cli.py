from click.testing import CliRunner
from ringtrap.constants import COMMANDS, CONFIG_DIR_PATH, EXIT_CONFIG_ERROR, EXIT_SUCCESS
from ringtrap.entrypoints.cli import main


def test_every_command_is_registered():
    result = CliRunner().invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in COMMANDS:
        assert command in result.output


def test_config_option_is_required():
    result = CliRunner().invoke(main, ["report"])
    assert result.exit_code == 2
    assert "--config" in result.output


def test_jobs_must_be_positive():
    result = CliRunner().invoke(main, ["sweep", "--config", "x.yaml", "--jobs", "0"])
    assert result.exit_code == 2


def test_spectrum_fit_exit_code(tmp_path):
    result = CliRunner().invoke(main, [
        "spectrum-fit",
        "--config", f"{CONFIG_DIR_PATH}/spectrum_fit.yaml",
        "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == EXIT_SUCCESS
    assert (tmp_path / "out" / "spectrum_fit.json").is_file()


def test_wrong_config_exit_code(tmp_path):
    result = CliRunner().invoke(main, [
        "modes",
        "--config", f"{CONFIG_DIR_PATH}/spectrum_fit.yaml",
        "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == EXIT_CONFIG_ERROR
