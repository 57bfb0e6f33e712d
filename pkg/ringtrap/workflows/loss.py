"""Builds the quality-factor budget of one resonator.
"""

import numpy as np
from pathlib import Path
from ringtrap.abstract.base_workflow import BaseWorkflow
from ringtrap.constants import LOSS_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.run import RunProvenance
from ringtrap.physics.loss_model import (
    SURFACES,
    breakdown_summary,
    fit_kappa_to_q,
    fundamental_limit_q,
    loss_budget,
    scatterer_volumes,
    scattering_loss_rates,
    surface_field_averages
)


class LossWorkflow(BaseWorkflow):
    """Surface scattering per face, bend radiation and absorption
    combined into Q and kappa.
    """

    @property
    def command(self) -> str:
        return LOSS_COMMAND


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Executes the loss budget.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            provenance (`RunProvenance`): The run record.

            jobs (int): Unused.

        Returns:
            None
        """
        # Solve mode
        try:
            geometry = config.geometry()
            roughness = config.roughness()
            mode = self._solve_mode(
                config, geometry, config.require("mode", "wavelength"),
                config.get("mode", "polarization"), out_dir)
        except Exception as e:
            raise self._stage_error("solve the resonator mode", e)

        # Combine loss channels
        q_absorption = config.get("loss", "q_absorption")
        try:
            breakdown = loss_budget(
                mode,
                geometry,
                roughness,
                q_absorption if config.get("loss", "include_absorption") else None,
                config.get("loss", "include_bend"))
            averages = surface_field_averages(mode, geometry)
            volumes = scatterer_volumes(geometry, roughness)
            rates = scattering_loss_rates(mode, geometry, roughness)
            limit = (
                fundamental_limit_q(mode, geometry, q_absorption)
                if config.get("loss", "fundamental_limit") else None)
        except Exception as e:
            raise self._stage_error("compute the loss budget", e)
        kappa = fit_kappa_to_q(mode.omega, breakdown.q_total)
        self._logger.info(
            f"Q_ss = {breakdown.q_ss.value:.3e}, Q_total = {breakdown.q_total.value:.3e}, "
            f"kappa/2pi = {kappa / (2 * np.pi) / 1e6:.1f} MHz.")

        # Persist results
        try:
            rows = []
            for surface in SURFACES:
                rows.append({
                    "surface": surface,
                    "E2_rho": averages[surface]["rho"],
                    "E2_phi": averages[surface]["phi"],
                    "E2_z": averages[surface]["z"],
                    "V_scatterer_nm3": volumes[surface] * 1e27,
                    "inverse_Q": rates[surface],
                })
            self._write_table(rows, out_dir, "loss_surfaces.csv", provenance)

            summary = breakdown_summary(breakdown, roughness)
            summary.update({
                "polarization": mode.polarization,
                "n_eff": mode.n_eff,
                "wavelength_nm": mode.wavelength * 1e9,
                "kappa_over_2pi_MHz": kappa / (2 * np.pi) / 1e6,
            })
            if limit is not None:
                summary["fundamental_limit"] = {
                    "q": limit.as_dict(),
                    "kappa_over_2pi_MHz": fit_kappa_to_q(mode.omega, limit.q_total) / (2 * np.pi) / 1e6,
                }
            self._write_report(summary, out_dir, "loss_report.json", provenance)
        except Exception as e:
            raise self._stage_error("write loss artifacts", e)
