"""Composes and analyzes a single trap: the two-color evanescent trap or
the top-illumination trap.
"""

import numpy as np
import pandas as pd
from pathlib import Path
from ringtrap.abstract.base_workflow import BaseWorkflow
from ringtrap.constants import K_B, TRAP_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.potential import PotentialGrid, TrapReport
from ringtrap.models.run import RunProvenance
from ringtrap.models.species import AtomSpecies
from ringtrap.physics.stark_shift import vector_scalar_ratio, vector_shift, vector_shift_sublevels
from ringtrap.physics.top_illumination import TweezerBeam
from ringtrap.physics.trap_analysis import LOWEST_SITE, SURFACE_SITE, analyze_trap
from ringtrap.physics.trap_composer import (
    TrapAxes,
    report_summary,
    top_illumination_potential,
    trap_axes,
    two_color_trap
)
from ringtrap.services.artifacts import write_potential_slice
from ringtrap.workflows.two_color import BLUE, RED, TwoColorSetup, prepare_two_color, scheme_rows
from typing import Dict

TWO_COLOR_KIND = 'two-color'
TOP_ILLUMINATION_KIND = 'top-illumination'


def tweezer_beam(config: RunConfig, geometry: RingGeometry) -> TweezerBeam:
    """The configured top beam, centered over the waveguide.
    """
    return TweezerBeam(
        wavelength=config.get("tweezer", "wavelength"),
        waist=config.get("tweezer", "waist"),
        power=config.get("tweezer", "power"),
        center_rho=geometry.rho_w,
        center_l=config.get("tweezer", "center_l"))


def tweezer_axes(config: RunConfig, geometry: RingGeometry, beam: TweezerBeam) -> TrapAxes:
    """Sampling across one beam waist along the ring, with the beam axis
    on a sample.
    """
    n_l = config.get("trap", "l_samples")
    if n_l % 2 == 0:
        n_l += 1
    return trap_axes(
        geometry,
        config.get("trap", "window_rho"),
        config.get("trap", "z_top"),
        config.get("trap", "spacing"),
        l_samples=n_l,
        l_span=(beam.center_l - beam.waist, beam.center_l + beam.waist))


def nearest_index(samples: np.ndarray, value: float) -> int:
    return int(np.argmin(np.abs(np.asarray(samples) - value)))


class TrapWorkflow(BaseWorkflow):
    """Builds the configured trap potential, locates its minimum and
    writes the trap report and plot-ready potential slices.
    """

    @property
    def command(self) -> str:
        return TRAP_COMMAND


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Executes the trap computation.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            provenance (`RunProvenance`): The run record.

            jobs (int): Unused; a single trap is evaluated in-process.

        Returns:
            None
        """
        # Build the resonator and atom
        try:
            geometry = config.geometry()
            species = self._species(config)
        except Exception as e:
            raise self._stage_error("set up the resonator and atom", e)

        kind = config.get("trap", "kind")
        if kind == TOP_ILLUMINATION_KIND:
            self._run_top_illumination(config, geometry, species, out_dir, provenance)
        else:
            self._run_two_color(config, geometry, species, out_dir, provenance)


    def _run_two_color(
        self,
        config: RunConfig,
        geometry: RingGeometry,
        species: AtomSpecies,
        out_dir: Path,
        provenance: RunProvenance) -> None:
        """Red lattice plus smooth blue wall plus surface attraction.
        """
        polarization = config.get("mode", "polarization")

        # Solve the red and blue modes
        try:
            mode_r = self._solve_mode(
                config, geometry, config.get("trap", "red_wavelength"), polarization, out_dir)
            mode_b = self._solve_mode(
                config, geometry, config.get("trap", "blue_wavelength"), polarization, out_dir)
        except Exception as e:
            raise self._stage_error("solve the trapping modes", e)

        # Choose drive tones
        try:
            setup = prepare_two_color(config, geometry, mode_r, mode_b, self._logger)
        except Exception as e:
            raise self._stage_error("configure the drive tones", e)

        # Persist drive tones
        tones = (
            scheme_rows(RED, setup.scheme_r, setup.powers_r, setup.tones_r)
            + scheme_rows(BLUE, setup.scheme_b, setup.powers_b, setup.tones_b))
        self._write_table(tones, out_dir, "trap_tones.csv", provenance)

        # Compose and analyze the potential
        try:
            U = two_color_trap(
                setup.mode_r,
                setup.mode_b,
                setup.tones_r,
                setup.tones_b,
                species,
                geometry,
                setup.axes,
                setup.diag_r,
                setup.diag_b,
                include_casimir_polder=config.get("trap", "casimir_polder"))
            report = analyze_trap(U, species, site=LOWEST_SITE)
        except Exception as e:
            raise self._stage_error("analyze the two-color trap", e)
        self._log_report(report, geometry)

        # Persist results
        try:
            summary = report_summary(report, geometry.rho_w)
            summary.update({
                "kind": TWO_COLOR_KIND,
                "lattice_period_nm": setup.lattice_period * 1e9,
                "red_wavelength_nm": mode_r.wavelength * 1e9,
                "blue_wavelength_nm": mode_b.wavelength * 1e9,
                "n_eff": {"red": mode_r.n_eff, "blue": mode_b.n_eff},
                "schemes": {
                    "red": setup.scheme_r.label,
                    "blue": setup.scheme_b.label,
                    "red_combined_visibility": setup.scheme_r.combined_visibility,
                    "blue_combined_visibility": setup.scheme_b.combined_visibility,
                },
                "required_power_uW": {
                    "red": sum(setup.powers_r) * 1e6,
                    "blue": sum(setup.powers_b) * 1e6,
                },
                "vector_shift": self._sublevel_spread(setup, species, report),
            })
            self._write_report(summary, out_dir, "trap_report.json", provenance)
            self._write_slices(U, report, out_dir, provenance)
            self._write_vector_ratio(setup, species, out_dir, provenance)
        except Exception as e:
            raise self._stage_error("write trap artifacts", e)


    def _run_top_illumination(
        self,
        config: RunConfig,
        geometry: RingGeometry,
        species: AtomSpecies,
        out_dir: Path,
        provenance: RunProvenance) -> None:
        """Planar standing wave of a top beam plus surface attraction.
        """
        # Compose and analyze the potential
        try:
            beam = tweezer_beam(config, geometry)
            axes = tweezer_axes(config, geometry, beam)
            U = top_illumination_potential(
                geometry, beam, species, axes, config.get("trap", "casimir_polder"))
            report = analyze_trap(U, species, site=SURFACE_SITE)
        except Exception as e:
            raise self._stage_error("analyze the top-illumination trap", e)
        self._log_report(report, geometry)

        # Persist results
        try:
            summary = report_summary(report, geometry.rho_w)
            summary.update({
                "kind": TOP_ILLUMINATION_KIND,
                "beam": {
                    "wavelength_nm": beam.wavelength * 1e9,
                    "waist_um": beam.waist * 1e6,
                    "power_mW": beam.power * 1e3,
                    "center_l_nm": beam.center_l * 1e9,
                },
                "stack_thickness_nm": [t * 1e9 for t, _ in geometry.stack.layers],
            })
            self._write_report(summary, out_dir, "trap_report.json", provenance)
            self._write_slices(U, report, out_dir, provenance)
        except Exception as e:
            raise self._stage_error("write trap artifacts", e)


    def _log_report(self, report: TrapReport, geometry: RingGeometry) -> None:
        f_rho, f_l, f_z = report.frequencies_kHz
        self._logger.info(
            f"Trap at (rho - rho_w, z) = ({(report.center[0] - geometry.rho_w) * 1e9:.0f}, "
            f"{report.center[2] * 1e9:.0f}) nm, depth {report.depth_uK:.1f} uK, "
            f"frequencies ({f_rho:.0f}, {f_l:.0f}, {f_z:.0f}) kHz.")


    def _sublevel_spread(self, setup: TwoColorSetup, species: AtomSpecies, report: TrapReport) -> Dict:
        """Ground-state sublevel energies under the summed vector shift at
        the trap center.
        """
        rho = np.array([report.center[0]])
        z = np.array([report.center[2]])
        diag_total, offdiag_total = 0.0, 0.0
        for mode, diag, responses in (
            (setup.mode_r, setup.diag_r, setup.tones_r),
            (setup.mode_b, setup.diag_b, setup.tones_b)):
            pol = species.polarizability(mode.wavelength)
            for response in responses:
                d, o = vector_shift(mode, diag, response, pol, (0.0,), rho, z)
                diag_total += float(d.values.ravel()[0])
                offdiag_total += float(o.values.ravel()[0])
        energies = vector_shift_sublevels(diag_total, offdiag_total, species.F)
        return {
            "F": species.F,
            "sublevel_shifts_uK": list(energies / K_B * 1e6),
            "spread_uK": float((energies.max() - energies.min()) / K_B * 1e6),
        }


    def _write_slices(
        self,
        U: PotentialGrid,
        report: TrapReport,
        out_dir: Path,
        provenance: RunProvenance) -> None:
        """Transverse slice through the trap center and longitudinal
        slice at the trap height.
        """
        l_index = nearest_index(U.l_samples, report.center[1])
        z_index = nearest_index(U.z_samples, report.center[2])
        for fname, kwargs in (
            ("trap_slice_rho_z.csv", {"l_index": l_index}),
            ("trap_slice_rho_l.csv", {"z_index": z_index})):
            write_potential_slice(U, out_dir / fname, provenance.header(), **kwargs)
            provenance.artifacts.append(fname)
            self._logger.info(f"Wrote potential slice '{fname}'.")


    def _write_vector_ratio(
        self,
        setup: TwoColorSetup,
        species: AtomSpecies,
        out_dir: Path,
        provenance: RunProvenance) -> None:
        """Vector-to-scalar shift estimate of the strongest red tone.
        """
        strongest = max(setup.tones_r, key=lambda r: r.I_buildup)
        pol = species.polarizability(setup.mode_r.wavelength)
        ratio_z, ratio_x = vector_scalar_ratio(setup.diag_r, strongest, pol)
        rho, z = np.meshgrid(ratio_z.rho_samples, ratio_z.z_samples, indexing="ij")
        df = pd.DataFrame({
            "rho_um": rho.ravel() * 1e6,
            "z_nm": z.ravel() * 1e9,
            "ratio_Fz": ratio_z.values.ravel(),
            "ratio_Fx": ratio_x.values.ravel(),
        })
        self._write_table(df, out_dir, "trap_vector_ratio.csv", provenance)
