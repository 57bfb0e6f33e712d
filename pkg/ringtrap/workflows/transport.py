"""Hands an atom from the evanescent lattice to a top tweezer and carries
it one lattice site along the ring.
"""

import numpy as np
from pathlib import Path
from ringtrap.abstract.base_workflow import BaseWorkflow
from ringtrap.constants import TRANSPORT_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.potential import TrapReport
from ringtrap.models.run import RunProvenance
from ringtrap.physics.stark_shift import casimir_polder
from ringtrap.physics.trap_composer import (
    trap_axes,
    tweezer_plus_lattice,
    tweezer_potential,
    two_color_trap
)
from ringtrap.physics.transport import (
    trajectory_summary,
    transport_rows,
    transport_schedule,
    transport_sequence
)
from ringtrap.services.artifacts import write_potential_slice
from ringtrap.workflows.trap import nearest_index, tweezer_beam
from ringtrap.workflows.two_color import prepare_two_color
from typing import Optional


def _barrier_uK(report: TrapReport) -> Optional[float]:
    return None if report.site_barrier is None else report.site_barrier_uK


class TransportWorkflow(BaseWorkflow):
    """Ramps the tweezer up over the site at l = -d, then translates it
    to l = 0, tracking the same minimum at every step.
    """

    @property
    def command(self) -> str:
        return TRANSPORT_COMMAND


    def run(
        self,
        config: RunConfig,
        out_dir: Path,
        provenance: RunProvenance,
        jobs: int) -> None:
        """Executes the transport schedule.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory.

            provenance (`RunProvenance`): The run record.

            jobs (int): Unused; the schedule is sequential.

        Returns:
            None
        """
        # Build the evanescent lattice
        try:
            geometry = config.geometry()
            species = self._species(config)
            polarization = config.get("mode", "polarization")
            mode_r = self._solve_mode(
                config, geometry, config.get("trap", "red_wavelength"), polarization, out_dir)
            mode_b = self._solve_mode(
                config, geometry, config.get("trap", "blue_wavelength"), polarization, out_dir)
            setup = prepare_two_color(config, geometry, mode_r, mode_b, self._logger)

            tones_r = setup.tones_r
            lattice_power = config.get("transport", "lattice_power")
            if lattice_power is not None and sum(setup.powers_r) > 0:
                factor = lattice_power / sum(setup.powers_r)
                tones_r = [t.scaled(factor) for t in tones_r]

            d = setup.lattice_period
            n_l = 2 * config.get("trap", "l_samples") + 1
            axes = trap_axes(
                geometry,
                config.get("trap", "window_rho"),
                config.get("trap", "z_top"),
                config.get("trap", "spacing"),
                l_samples=n_l,
                l_span=(-1.5 * d, 0.5 * d))
            ev = two_color_trap(
                setup.mode_r, setup.mode_b, tones_r, setup.tones_b, species, geometry, axes,
                setup.diag_r, setup.diag_b, include_casimir_polder=False)
            cp = casimir_polder(geometry, species, axes.rho_samples, axes.l_samples, axes.z_samples)
        except Exception as e:
            raise self._stage_error("build the evanescent lattice", e)

        # Follow the atom through the schedule
        try:
            schedule = transport_schedule(
                config.get("transport", "power_start"),
                config.get("transport", "power_stop"),
                config.get("transport", "power_step"),
                -d,
                0.0,
                d * config.get("transport", "l_step_fraction"))
            beam = tweezer_beam(config, geometry)
            self._logger.info(
                f"Transport over {len(schedule)} step(s): lattice period {d * 1e9:.1f} nm.")
            trajectory = transport_sequence(
                ev, cp, geometry, beam, species, schedule, d, logger=self._logger)
        except Exception as e:
            raise self._stage_error("transport the atom", e)

        # Persist results
        try:
            rows = transport_rows(schedule, trajectory, geometry.rho_w)
            self._write_table(rows, out_dir, "transport.csv", provenance)

            n_ramp = sum(1 for _, center in schedule if center == schedule[0][1])
            ramp_end, final = trajectory[n_ramp - 1], trajectory[-1]
            self._write_report({
                "lattice_period_nm": d * 1e9,
                "n_steps": len(schedule),
                "n_ramp_steps": n_ramp,
                **trajectory_summary(trajectory, d),
                "ramp_end": {
                    "P_tw_mW": schedule[n_ramp - 1][0] * 1e3,
                    "z_t_nm": ramp_end.center[2] * 1e9,
                    "depth_uK": ramp_end.depth_uK,
                    "site_barrier_uK": _barrier_uK(ramp_end),
                },
                "final": {
                    "l_t_nm": final.center[1] * 1e9,
                    "z_t_nm": final.center[2] * 1e9,
                    "depth_uK": final.depth_uK,
                    "site_barrier_uK": _barrier_uK(final),
                },
                "min_depth_uK": float(np.min([r.depth_uK for r in trajectory])),
            }, out_dir, "transport_summary.json", provenance)

            power, center = schedule[-1]
            U = tweezer_plus_lattice(
                ev, tweezer_potential(geometry, beam.moved(center, power), species, axes), cp)
            fname = "transport_final_slice_rho_l.csv"
            write_potential_slice(
                U, out_dir / fname, provenance.header(),
                z_index=nearest_index(axes.z_samples, final.center[2]))
            provenance.artifacts.append(fname)
        except Exception as e:
            raise self._stage_error("write transport artifacts", e)
