"""Functionality common to all command workflows.
"""

import json
import pandas as pd
from abc import ABC, abstractmethod, abstractproperty
from logging import Logger
from pathlib import Path
from ringtrap.models.config import RunConfig
from ringtrap.models.errors import ConfigError, RingtrapError
from ringtrap.models.fields import ModeField
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.run import RunProvenance
from ringtrap.models.species import AtomSpecies, load_species
from ringtrap.physics.mode_solver import SolveSettings, cached_geometry_modes, select_mode
from ringtrap.services.artifacts import atomic_write_text, jsonable, write_csv, write_json
from ringtrap.services.cache import ModeCache, resolve_cache_dir
from ringtrap.services.logger import LoggerFactory
from ringtrap.services.pool import default_jobs
from typing import Dict, List, Optional, Union

RUN_RECORD_FNAME = 'run.json'
RUN_LOG_FNAME = 'run.log'


class BaseWorkflow(ABC):
    """An abstract class representing one command run: it reads a
    validated configuration, computes and writes artifacts into an
    output directory, and records the run's status and provenance.
    """

    def __init__(self, logger: Logger) -> None:
        """Initializes a new instance of a `BaseWorkflow`.

        Args:
            logger (`Logger`): An instance of the logging class.

        Returns:
            None
        """
        self._logger = logger


    @abstractproperty
    def command(self) -> str:
        """The subcommand this workflow implements.
        """
        raise NotImplementedError


    @abstractmethod
    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Computes the command's results and writes its artifacts.
        Implementation differs by command.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory, already created.

            provenance (`RunProvenance`): The run record. Artifact
                writers stamp its header and append to its artifacts.

            jobs (int): Worker processes available to the command.

        Returns:
            None
        """
        raise NotImplementedError


    def execute(
        self,
        config: RunConfig,
        out_dir: Union[str, Path],
        jobs: Optional[int] = None) -> RunProvenance:
        """Executes the workflow.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (str or `Path`): Directory receiving the artifacts.

            jobs (int): Worker processes. Defaults to `run.jobs` from
                the configuration, then to the machine's CPU count.

        Returns:
            (`RunProvenance`): The completed run record.

        Raises:
            `RingtrapError`: Any stage failed. Toolkit errors keep
                their class so the exit code survives; other
                exceptions are wrapped.
        """
        # Begin tracking the run
        out_dir = Path(out_dir)
        provenance = RunProvenance(self.command, config.config_hash, config.as_dict())
        provenance.start()
        jobs = jobs or config.get("run", "jobs") or default_jobs()
        self._logger.info(f"Running '{self.command}' into '{out_dir}' with {jobs} job(s).")

        log_handler = None
        try:
            # Prepare output directory and run log
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                log_handler = LoggerFactory.attach_file(self._logger, out_dir / RUN_LOG_FNAME)
            except OSError as e:
                raise self._stage_error("create output directory", e)

            # Compute and write artifacts
            self.run(config, out_dir, provenance, jobs)

        except Exception as e:
            # Log error
            error = self._stage_error(f"run the '{self.command}' workflow", e)
            self._logger.error(str(error))

            # Record failure
            provenance.fail(error)
            self._write_run_record(out_dir, provenance)

            # Bubble up error
            raise error

        else:
            # Record success
            provenance.complete()
            self._write_run_record(out_dir, provenance)
            self._logger.info(
                f"Completed '{self.command}': {len(provenance.artifacts)} artifact(s) written.")
            return provenance

        finally:
            if log_handler is not None:
                LoggerFactory.detach_file(self._logger, log_handler)


    def _stage_error(self, description: str, e: Exception) -> RingtrapError:
        """Prefixes an error message with the failed stage.

        Toolkit errors are updated in place and keep their class;
        anything else becomes a `RingtrapError` chained to the original.
        An error that already names its stage is returned unchanged.
        """
        if isinstance(e, RingtrapError) and e.stage is not None:
            return e
        message = f"Failed to {description}. {e}"
        if isinstance(e, RingtrapError):
            e.args = (message,) + tuple(e.args[1:])
            e.stage = description
            return e
        error = RingtrapError(message)
        error.__cause__ = e
        error.stage = description
        return error


    def _write_run_record(self, out_dir: Path, provenance: RunProvenance) -> None:
        """Writes the status record; a failure here is logged, not raised.
        """
        try:
            text = json.dumps(jsonable(provenance.summary()), sort_keys=True, indent=2) + "\n"
            atomic_write_text(out_dir / RUN_RECORD_FNAME, text)
        except OSError as e:
            self._logger.warning(f"Could not write run record to '{out_dir}'. {e}")


    def _write_table(
        self,
        rows: Union[List[Dict], pd.DataFrame],
        out_dir: Path,
        fname: str,
        provenance: RunProvenance) -> Path:
        """Writes a CSV artifact and records it.
        """
        df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
        fpath = write_csv(df, out_dir / fname, provenance.header())
        provenance.artifacts.append(fname)
        self._logger.info(f"Wrote {len(df)} row(s) to '{fname}'.")
        return fpath


    def _write_report(
        self,
        report: Dict,
        out_dir: Path,
        fname: str,
        provenance: RunProvenance) -> Path:
        """Writes a JSON artifact and records it.
        """
        fpath = write_json(report, out_dir / fname, provenance.header())
        provenance.artifacts.append(fname)
        self._logger.info(f"Wrote report '{fname}'.")
        return fpath


    def _species(self, config: RunConfig) -> AtomSpecies:
        name = config.get("atom", "species")
        try:
            return load_species(name)
        except KeyError as e:
            raise ConfigError(str(e).strip("'\""), key_path="atom.species")


    def _solve_settings(self, config: RunConfig) -> SolveSettings:
        return SolveSettings(
            spacing=config.get("grid", "spacing"),
            window_rho=config.get("grid", "window_rho"),
            window_z=config.get("grid", "window_z"),
            z_center=config.get("grid", "z_center", 0.0),
            z_spacing=config.get("grid", "z_spacing"),
            n_modes=config.get("mode", "n_modes"),
            bend=config.get("mode", "bend"))


    def _cache_dir(self, config: RunConfig, out_dir: Path) -> Optional[Path]:
        """Mode cache root, or None when caching is off.
        """
        if not config.get("run", "cache"):
            return None
        return resolve_cache_dir(str(out_dir))


    def _mode_cache(self, config: RunConfig, out_dir: Path) -> Optional[ModeCache]:
        cache_dir = self._cache_dir(config, out_dir)
        return ModeCache(cache_dir, self._logger) if cache_dir else None


    def _solve_mode(
        self,
        config: RunConfig,
        geometry: RingGeometry,
        wavelength: float,
        polarization: str,
        out_dir: Path) -> ModeField:
        """Solves (or loads from cache) the fundamental mode of one
        polarization at one wavelength.
        """
        self._logger.info(
            f"Solving {polarization} mode at {wavelength * 1e9:.2f} nm for "
            f"(W, H, R) = ({geometry.width * 1e6:.3f}, {geometry.height * 1e6:.3f}, "
            f"{geometry.radius * 1e6:.2f}) um.")
        modes = cached_geometry_modes(
            geometry,
            wavelength,
            self._solve_settings(config),
            self._mode_cache(config, out_dir),
            self._logger)
        mode = select_mode(modes, polarization)
        self._logger.info(f"{polarization} mode found with n_eff = {mode.n_eff:.5f}.")
        return mode


class ScanWorkflow(BaseWorkflow):
    """An abstract class for commands that evaluate many independent
    points across worker processes and write one table plus a summary.
    """

    @property
    def table_fname(self) -> str:
        return f"{self.command}.csv"


    @property
    def summary_fname(self) -> str:
        return f"{self.command}_summary.json"


    @abstractmethod
    def scan(
        self,
        config: RunConfig,
        out_dir: Path,
        jobs: int) -> Dict:
        """Evaluates every scan point. Implementation differs by command.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            jobs (int): Worker processes.

        Returns:
            (dict): "rows" (list of dict, one per point, in scan order)
                and "summary" (dict).
        """
        raise NotImplementedError


    def write_extras(
        self,
        result: Dict,
        out_dir: Path,
        provenance: RunProvenance) -> None:
        """Hook for additional artifacts derived from the scan.
        """
        return None


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Scans, then writes the table, the summary and any extras.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            provenance (`RunProvenance`): The run record.

            jobs (int): Worker processes.

        Returns:
            None
        """
        # Evaluate scan points
        try:
            result = self.scan(config, out_dir, jobs)
        except Exception as e:
            raise self._stage_error("evaluate scan points", e)

        # Persist results
        try:
            self._write_table(result["rows"], out_dir, self.table_fname, provenance)
            self._write_report(result["summary"], out_dir, self.summary_fname, provenance)
            self.write_extras(result, out_dir, provenance)
        except Exception as e:
            raise self._stage_error("write scan artifacts", e)
