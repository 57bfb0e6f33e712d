"""Scans the trap over the red-to-blue build-up ratio or over one
membrane layer's thickness.
"""

import numpy as np
from pathlib import Path
from ringtrap.abstract.base_workflow import ScanWorkflow
from ringtrap.constants import TRAP_SCAN_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.physics.transport import power_ratio_scan, thickness_scan
from ringtrap.workflows.trap import tweezer_axes, tweezer_beam
from ringtrap.workflows.two_color import prepare_two_color
from typing import Dict, List

POWER_RATIO_KIND = 'power-ratio'
THICKNESS_KIND = 'thickness'


def closed_range(rows: List[Dict], label: str) -> Dict:
    """Extent of the scan variable and trap height over the closed traps.
    """
    closed = [row for row in rows if not row["open"]]
    first_open = next((row[label] for row in rows if row["open"]), None)
    if not closed:
        return {"n_points": len(rows), "n_open": len(rows), "first_open": first_open}
    z = [row["z_t_nm"] for row in closed]
    return {
        "n_points": len(rows),
        "n_open": len(rows) - len(closed),
        "first_open": first_open,
        f"{label}_closed_min": min(row[label] for row in closed),
        f"{label}_closed_max": max(row[label] for row in closed),
        "z_t_nm_min": min(z),
        "z_t_nm_max": max(z),
        "depth_uK_max": max(row["depth_uK"] for row in closed),
    }


class TrapScanWorkflow(ScanWorkflow):
    """Evaluates the trap at every scan point, in parallel.
    """

    @property
    def command(self) -> str:
        return TRAP_SCAN_COMMAND


    @property
    def table_fname(self) -> str:
        return "trap_scan.csv"


    @property
    def summary_fname(self) -> str:
        return "trap_scan_summary.json"


    def scan(self, config: RunConfig, out_dir: Path, jobs: int) -> Dict:
        """Runs the configured scan.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory (for the mode cache).

            jobs (int): Worker processes.

        Returns:
            (dict): Scan rows and summary.
        """
        geometry = config.geometry()
        species = self._species(config)
        kind = config.get("scan", "kind")

        if kind == THICKNESS_KIND:
            thicknesses = list(config.require("scan", "thickness"))
            beam = tweezer_beam(config, geometry)
            axes = tweezer_axes(config, geometry, beam)
            rows = thickness_scan(
                geometry, beam, species, axes, thicknesses,
                config.get("scan", "layer"), jobs, self._logger)
            summary = closed_range(rows, "thickness_nm")
            closed = [row for row in rows if not row["open"]]
            quarter_wave_nm = beam.wavelength / 4 * 1e9
            summary.update({
                "kind": THICKNESS_KIND,
                "layer": config.get("scan", "layer"),
                "quarter_wavelength_nm": quarter_wave_nm,
                "n_below_quarter_wavelength": sum(row["z_t_nm"] < quarter_wave_nm for row in closed),
            })
            return {"rows": rows, "summary": summary}

        ratios = list(config.require("scan", "ratios"))
        polarization = config.get("mode", "polarization")
        mode_r = self._solve_mode(config, geometry, config.get("trap", "red_wavelength"), polarization, out_dir)
        mode_b = self._solve_mode(config, geometry, config.get("trap", "blue_wavelength"), polarization, out_dir)
        setup = prepare_two_color(config, geometry, mode_r, mode_b, self._logger)
        rows = power_ratio_scan(
            setup.mode_r,
            setup.mode_b,
            setup.tones_r,
            setup.tones_b,
            ratios,
            species,
            geometry,
            setup.axes,
            setup.diag_r,
            setup.diag_b,
            jobs,
            self._logger)
        summary = closed_range(rows, "ratio")
        closed_z = np.array([row["z_t_nm"] for row in rows if not row["open"]])
        summary.update({
            "kind": POWER_RATIO_KIND,
            "blue_buildup_total": sum(t.I_buildup for t in setup.tones_b),
            "z_t_monotonic": bool(closed_z.size < 2 or np.all(np.diff(closed_z) <= 0)),
        })
        return {"rows": rows, "summary": summary}
