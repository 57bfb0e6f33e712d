"""Aggregates the cavity QED figures of merit for one atom position.
"""

import numpy as np
from pathlib import Path
from ringtrap.abstract.base_workflow import BaseWorkflow
from ringtrap.constants import REPORT_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.errors import ConfigError
from ringtrap.models.report import CqedReport
from ringtrap.models.run import RunProvenance
from ringtrap.physics.cqed_metrics import (
    check_cooperativity_identity,
    cqed_report,
    fundamental_limit,
    surface_emitter_report
)
from ringtrap.physics.loss_model import breakdown_summary, loss_budget
from typing import Dict

TWO_PI_MHZ = 2 * np.pi * 1e6


def report_body(report: CqedReport) -> Dict:
    """JSON-ready report in MHz and micrometres.
    """
    body = report.as_row()
    body.update({
        "vacuum_rabi_over_2pi_MHz": report.vacuum_rabi_frequency / TWO_PI_MHZ,
        "gamma_over_2pi_MHz": report.gamma / TWO_PI_MHZ,
        "atom_position_nm": {
            "rho_minus_rho_w": (report.atom_position[0] - report.geometry.rho_w) * 1e9,
            "z": report.atom_position[1] * 1e9,
        },
    })
    if report.q_breakdown is not None:
        body["q_breakdown"] = report.q_breakdown.as_dict()
    return body


class ReportWorkflow(BaseWorkflow):
    """Mode area, g, kappa and cooperativity from either measured rates
    or the simulated loss budget.
    """

    @property
    def command(self) -> str:
        return REPORT_COMMAND


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Executes the report.

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
            species = self._species(config)
            mode = self._solve_mode(
                config, geometry, config.require("mode", "wavelength"),
                config.get("mode", "polarization"), out_dir)
        except Exception as e:
            raise self._stage_error("solve the resonator mode", e)

        atom_pos = (
            geometry.rho_w + config.get("atom", "rho_offset"),
            config.get("atom", "height"))
        q_absorption = config.get("loss", "q_absorption")

        # Assemble figures of merit
        try:
            if config.get("resonator", "measured"):
                report = cqed_report(
                    mode, geometry, species, atom_pos,
                    kappa=config.get("resonator", "kappa"),
                    g=config.get("resonator", "coupling_g"))
                source = "measured"
            else:
                if config.get("roughness", "sigma_pm") is None:
                    raise ConfigError(
                        "A roughness section is needed unless resonator.measured is set.",
                        key_path="roughness.sigma_pm_nm")
                breakdown = loss_budget(
                    mode,
                    geometry,
                    config.roughness(),
                    q_absorption if config.get("loss", "include_absorption") else None,
                    config.get("loss", "include_bend"))
                report = cqed_report(mode, geometry, species, atom_pos, breakdown)
                source = "simulated"
            residual = (
                check_cooperativity_identity(report)
                if config.get("resonator", "coupling_g") is None or source == "simulated" else None)
        except Exception as e:
            raise self._stage_error("assemble the cavity QED report", e)
        self._logger.info(
            f"C = {report.cooperativity:.2f} with (g, kappa, gamma)/2pi = "
            f"({report.g / TWO_PI_MHZ:.1f}, {report.kappa / TWO_PI_MHZ:.1f}, "
            f"{report.gamma / TWO_PI_MHZ:.2f}) MHz.")

        # Fundamental limit
        limit = None
        if config.get("loss", "fundamental_limit"):
            try:
                smooth = fundamental_limit(mode, geometry, species, atom_pos, q_absorption)
                limit = report_body(smooth)
                limit["surface_emitter"] = surface_emitter_report(
                    mode, geometry, smooth.quality_factor)
            except Exception as e:
                raise self._stage_error("evaluate the fundamental limit", e)

        # Persist results
        try:
            self._write_table([report.as_row()], out_dir, "report.csv", provenance)
            body = report_body(report)
            body.update({
                "source": source,
                "identity_residual": residual,
                "fundamental_limit": limit,
            })
            if source == "simulated":
                body["roughness"] = breakdown_summary(report.q_breakdown, config.roughness())["roughness_nm"]
            self._write_report(body, out_dir, "report.json", provenance)
        except Exception as e:
            raise self._stage_error("write report artifacts", e)
