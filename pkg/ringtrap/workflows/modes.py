"""Solves the guided modes of one cross-section and reports their
diagnostics, mode area and coupling strength.
"""

import numpy as np
import pandas as pd
from pathlib import Path
from ringtrap.abstract.base_workflow import BaseWorkflow
from ringtrap.constants import MODES_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.errors import DielectricPositionError
from ringtrap.models.fields import ModeField
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.run import RunProvenance
from ringtrap.models.species import AtomSpecies
from ringtrap.physics.cqed_metrics import coupling_g, mode_area
from ringtrap.physics.loss_model import bend_q
from ringtrap.physics.mode_solver import cached_geometry_modes, convergence_study, mode_diagnostics
from ringtrap.physics.trap_composer import lattice_period
from ringtrap.services.artifacts import write_mode_field
from typing import Dict, Tuple


class ModesWorkflow(BaseWorkflow):
    """Mode solve, per-mode diagnostics, A_m and g at the configured
    atom position, and optionally a grid convergence check.
    """

    @property
    def command(self) -> str:
        return MODES_COMMAND


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Executes the mode solve.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            provenance (`RunProvenance`): The run record.

            jobs (int): Unused.

        Returns:
            None
        """
        # Solve modes
        try:
            geometry = config.geometry()
            species = self._species(config)
            wavelength = config.require("mode", "wavelength")
            modes = cached_geometry_modes(
                geometry,
                wavelength,
                self._solve_settings(config),
                self._mode_cache(config, out_dir),
                self._logger)
        except Exception as e:
            raise self._stage_error("solve the waveguide modes", e)

        # Evaluate each mode at the atom
        atom_pos = (
            geometry.rho_w + config.get("atom", "rho_offset"),
            config.get("atom", "height"))
        try:
            rows = [self._mode_row(i, m, geometry, species, atom_pos) for i, m in enumerate(modes)]
        except Exception as e:
            raise self._stage_error("evaluate mode diagnostics", e)

        # Optional grid convergence check
        convergence = None
        if config.get("mode", "convergence"):
            try:
                convergence = convergence_study(
                    geometry,
                    wavelength,
                    config.get("grid", "spacing"),
                    config.get("grid", "window_rho"),
                    config.get("grid", "window_z"),
                    config.get("mode", "polarization"),
                    config.get("grid", "z_center", 0.0),
                    config.get("mode", "bend"),
                    self._logger)
            except Exception as e:
                raise self._stage_error("run the grid convergence check", e)

        # Persist results
        try:
            self._write_table(rows, out_dir, "modes.csv", provenance)
            for i, mode in enumerate(modes):
                self._write_maps(i, mode, out_dir, provenance)
                if config.get("mode", "write_fields"):
                    name = f"fields/mode_{i}_{mode.polarization}"
                    write_mode_field(mode, out_dir / name)
                    provenance.artifacts.append(name)
            self._write_report({
                "wavelength_nm": wavelength * 1e9,
                "atom_position_nm": {
                    "rho_minus_rho_w": config.get("atom", "rho_offset") * 1e9,
                    "z": atom_pos[1] * 1e9,
                },
                "resonator_length_um": geometry.circumference * 1e6,
                "modes": rows,
                "convergence": convergence,
            }, out_dir, "modes_report.json", provenance)
        except Exception as e:
            raise self._stage_error("write mode artifacts", e)


    def _mode_row(
        self,
        index: int,
        mode: ModeField,
        geometry: RingGeometry,
        species: AtomSpecies,
        atom_pos: Tuple[float, float]) -> Dict:
        """One table row per mode.
        """
        row = {
            "mode": index,
            "polarization": mode.polarization,
            "n_eff": mode.n_eff,
            "wavelength_nm": mode.wavelength * 1e9,
            "m_azimuthal": mode.m_azimuthal,
            "lattice_period_nm": lattice_period(mode) * 1e9,
            "normalization_ratio": mode.normalization_ratio(),
            "Q_bend": bend_q(mode, geometry).value,
        }
        try:
            area = mode_area(mode, mode.eps, atom_pos)
        except DielectricPositionError as e:
            self._logger.warning(f"Mode {index}: no mode area reported. {e}")
            area = np.nan
        volume = area * mode.circumference
        row.update({
            "Am_um2": area * 1e12,
            "Vm_um3": volume * 1e18,
            "g_over_2pi_MHz": (
                coupling_g(volume, species, mode.omega) / (2 * np.pi) / 1e6
                if np.isfinite(volume) else np.nan),
        })
        self._logger.info(
            f"Mode {index} ({mode.polarization}): n_eff = {mode.n_eff:.5f}, "
            f"A_m = {row['Am_um2']:.3f} um^2, g/2pi = {row['g_over_2pi_MHz']:.1f} MHz.")
        return row


    def _write_maps(self, index: int, mode: ModeField, out_dir: Path, provenance: RunProvenance) -> None:
        """Plot-ready field components and diagnostic maps.
        """
        diag = mode_diagnostics(mode)
        rho, z = np.meshgrid(mode.rho_samples, mode.z_samples, indexing="ij")
        df = pd.DataFrame({
            "rho_um": rho.ravel() * 1e6,
            "z_nm": z.ravel() * 1e9,
            "eps": mode.eps.values.ravel(),
            "E_rho": mode.e_rho.values.ravel(),
            "E_phi_im": mode.e_phi_im.values.ravel(),
            "E_z": mode.e_z.values.ravel(),
            "eps_E2": diag.intensity_map.values.ravel(),
            "v": diag.v_map.values.ravel(),
            "f_rho": diag.f_rho_map.values.ravel(),
            "f_z": diag.f_z_map.values.ravel(),
        })
        self._write_table(df, out_dir, f"mode_{index}_{mode.polarization}_maps.csv", provenance)
