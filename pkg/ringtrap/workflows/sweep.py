"""Maps cooperativity over waveguide width, height and ring radius.
"""

from pathlib import Path
from ringtrap.abstract.base_workflow import ScanWorkflow
from ringtrap.constants import SWEEP_COMMAND
from ringtrap.models.config import RunConfig
from ringtrap.models.run import RunProvenance
from ringtrap.physics.cqed_metrics import geometry_sweep, pivot_by_radius
from typing import Dict


class SweepWorkflow(ScanWorkflow):
    """Solves every (W, H, R) point in parallel and reports C, Q and V_m,
    the best point and per-radius heatmap tables.
    """

    @property
    def command(self) -> str:
        return SWEEP_COMMAND


    def scan(self, config: RunConfig, out_dir: Path, jobs: int) -> Dict:
        """Runs the geometry sweep.

        Args:
            config (`RunConfig`): The validated configuration.

            out_dir (`Path`): The output directory (for the mode cache).

            jobs (int): Worker processes.

        Returns:
            (dict): Sweep rows and summary.
        """
        ranges = config.ranges("sweep", ["width", "height", "radius"])
        widths, heights, radii = ranges["width"], ranges["height"], ranges["radius"]
        base = config.geometry(width=widths[0], height=heights[0], radius=radii[0])
        polarization = config.get("sweep", "polarization")
        q_absorption = (
            config.get("loss", "q_absorption") if config.get("loss", "include_absorption") else None)

        rows, best = geometry_sweep(
            base,
            widths,
            heights,
            radii,
            config.roughness(),
            self._species(config),
            config.require("mode", "wavelength"),
            self._solve_settings(config),
            polarization=polarization,
            z_a=config.get("atom", "height"),
            q_absorption=q_absorption,
            cache_dir=self._cache_dir(config, out_dir),
            jobs=jobs,
            logger=self._logger)
        if best is not None:
            self._logger.info(
                f"Best C = {best['C']:.1f} at (W, H, R) = ({best['W_um']:.3f}, "
                f"{best['H_um']:.3f}, {best['R_um']:.2f}) um.")
        else:
            self._logger.warning("No swept geometry guides a bound mode.")

        summary = {
            "polarization": polarization,
            "n_points": len(rows),
            "n_excluded": sum(1 for row in rows if row["excluded"]),
            "atom_height_nm": config.get("atom", "height") * 1e9,
            "best": best,
        }
        return {"rows": rows, "summary": summary}


    def write_extras(self, result: Dict, out_dir: Path, provenance: RunProvenance) -> None:
        """One W x H cooperativity table per radius.
        """
        for radius, table in pivot_by_radius(result["rows"], "C").items():
            table = table.rename(columns=lambda w: f"C_W_{w:.3f}um").reset_index()
            self._write_table(table, out_dir, f"sweep_C_R_{radius:.2f}um.csv", provenance)
