"""Fits the doublet model to a measured scattered-intensity spectrum.
"""

import numpy as np
import pandas as pd
from pathlib import Path
from ringtrap.abstract.base_workflow import BaseWorkflow
from ringtrap.constants import SPECTRUM_FIT_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.errors import ConfigError
from ringtrap.models.run import RunProvenance
from ringtrap.physics.resonator import model_spectrum
from ringtrap.physics.spectrum_fit import GHZ, fit_spectrum, fit_summary, read_spectrum
from ringtrap.services.artifacts import read_csv


def resolve_input(config: RunConfig) -> Path:
    """The spectrum path, relative paths taken from the config's folder.
    """
    fpath = Path(config.require("spectrum", "input"))
    if not fpath.is_absolute() and config.source_path:
        fpath = Path(config.source_path).parent / fpath
    if not fpath.is_file():
        raise ConfigError(f"Spectrum file '{fpath}' does not exist.", key_path="spectrum.input")
    return fpath


class SpectrumFitWorkflow(BaseWorkflow):
    """Reads a (frequency_GHz, counts) table, fits (omega0, kappa, beta)
    and reports resonator parameters with uncertainties.
    """

    @property
    def command(self) -> str:
        return SPECTRUM_FIT_COMMAND


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Executes the fit.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            provenance (`RunProvenance`): The run record.

            jobs (int): Unused.

        Returns:
            None
        """
        # Read spectrum
        try:
            fpath = resolve_input(config)
            omegas, counts = read_spectrum(read_csv(fpath))
            self._logger.info(f"Read {len(omegas)} spectrum sample(s) from '{fpath}'.")
        except Exception as e:
            raise self._stage_error("read the spectrum", e)

        # Fit doublet
        try:
            fit = fit_spectrum(
                omegas,
                counts,
                slope=config.get("spectrum", "slope"),
                max_evaluations=config.get("spectrum", "max_evaluations"),
                logger=self._logger)
            kappa_c = config.get("spectrum", "kappa_c", 0.0)
            params = fit.to_params(kappa_c=kappa_c, xi=config.get("resonator", "xi", 0.0))
        except ValueError as e:
            raise self._stage_error("fit the spectrum", ConfigError(str(e), key_path="spectrum.kappa_c"))
        except Exception as e:
            raise self._stage_error("fit the spectrum", e)
        self._logger.info(
            f"Fit: kappa/2pi = {fit.kappa / GHZ:.4f} GHz, beta/2pi = {fit.beta / GHZ:.4f} GHz, "
            f"Q = {fit.quality_factor:.3e}.")

        # Persist results
        try:
            summary = fit_summary(fit)
            summary["resonator"] = {
                "kappa_i_over_2pi_GHz": params.kappa_i / GHZ,
                "kappa_c_over_2pi_GHz": params.kappa_c / GHZ,
                "kappa_c_source": "config" if kappa_c else "not supplied",
            }
            summary["input"] = str(fpath)
            self._write_report(summary, out_dir, "spectrum_fit.json", provenance)

            order = np.argsort(omegas)
            model = model_spectrum(
                fit.to_params(), fit.amplitude, fit.baseline, omegas[order], slope=fit.slope)
            self._write_table(pd.DataFrame({
                "frequency_GHz": omegas[order] / GHZ,
                "counts": counts[order],
                "model_counts": model,
                "residual_counts": counts[order] - model,
            }), out_dir, "spectrum_fit_curve.csv", provenance)
        except Exception as e:
            raise self._stage_error("write fit artifacts", e)
