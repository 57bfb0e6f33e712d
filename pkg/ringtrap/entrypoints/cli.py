"""The `ringtrap` command-line front end. Loads a run configuration,
executes the matching workflow and exits with the documented code:
0 success, 2 configuration error, 3 physics-domain error and 4
numerical failure.
"""

import click
import logging
from pathlib import Path
from ringtrap.constants import (
    COMMANDS,
    EXIT_NUMERICAL_ERROR,
    EXIT_SUCCESS
)
from ringtrap.models.errors import ConfigError, RingtrapError
from ringtrap.services.config_loader import load_config
from ringtrap.services.logger import LoggerFactory
from ringtrap.services.registry import workflow_registry
from typing import Optional

DEFAULT_OUT_DIR = 'ringtrap-out'


#region ----------------Setup---------------------

# Create logger
logger = LoggerFactory.get("ringtrap")

#endregion ----------------Setup---------------------


def run_command(
    command: str,
    config_path: str,
    out_dir: Optional[str] = None,
    jobs: Optional[int] = None,
    verbose: bool = False) -> int:
    """Runs one subcommand and maps its outcome to an exit code.

    Args:
        command (str): The subcommand (e.g., "modes").

        config_path (str): Path to the YAML run configuration.

        out_dir (str): Output directory. Defaults to
            `ringtrap-out/<command>` under the working directory.

        jobs (int): Worker processes for scans and sweeps.

        verbose (bool): Log at DEBUG instead of INFO.

    Returns:
        (int): The process exit code.
    """
    level = logging.DEBUG if verbose else logging.INFO
    LoggerFactory.get("ringtrap", level)
    out_dir = out_dir or str(Path(DEFAULT_OUT_DIR) / command)

    try:
        # Load and check configuration
        config = load_config(config_path, logger)
        if config.command != command:
            raise ConfigError(
                f"The configuration is written for '{config.command}', "
                f"not '{command}'.", key_path="command")

        # Execute workflow
        workflow = workflow_registry[command](logger)
        workflow.execute(config, out_dir, jobs)

    except RingtrapError as e:
        logger.error(f"'{command}' failed with exit code {e.exit_code}. {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"'{command}' failed unexpectedly. {e}")
        return EXIT_NUMERICAL_ERROR

    return EXIT_SUCCESS


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main() -> None:
    """Microring resonator and trapped-atom toolkit.
    """


def _register(command: str) -> None:
    """Adds one subcommand sharing the common options.
    """
    workflow_cls = workflow_registry[command]

    @main.command(name=command, help=(workflow_cls.__doc__ or "").strip())
    @click.option("--config", "config_path", required=True, help="Path to the YAML run configuration.")
    @click.option("--out", "out_dir", default=None, help="Output directory.")
    @click.option("--jobs", type=click.IntRange(min=1), default=None, help="Worker processes.")
    @click.option("--verbose", is_flag=True, default=False, help="Log at DEBUG level.")
    @click.pass_context
    def _subcommand(ctx: click.Context, config_path: str, out_dir: str, jobs: int, verbose: bool) -> None:
        ctx.exit(run_command(command, config_path, out_dir, jobs, verbose))


for _command in COMMANDS:
    _register(_command)


if __name__ == "__main__":
    main()
