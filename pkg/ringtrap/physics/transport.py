"""Scans of trap potentials over drive ratio and membrane thickness, and
tweezer-assisted transport of a trapped atom along the lattice.
"""

import numpy as np
from dataclasses import replace
from logging import Logger
from ringtrap.models.errors import OpenTrapError, TransportFailureError
from ringtrap.models.fields import ModeDiagnostics, ModeField
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.potential import PotentialGrid, TrapReport
from ringtrap.models.resonator import DriveResponse
from ringtrap.models.species import AtomSpecies
from ringtrap.physics.mode_solver import mode_diagnostics
from ringtrap.physics.top_illumination import TweezerBeam
from ringtrap.physics.trap_analysis import LOWEST_SITE, SURFACE_SITE, analyze_trap
from ringtrap.physics.trap_composer import (
    TrapAxes,
    analyze_or_open,
    top_illumination_potential,
    trap_row,
    tweezer_plus_lattice,
    tweezer_potential,
    two_color_trap
)
from ringtrap.services.pool import parallel_map
from typing import Dict, List, Optional, Sequence, Tuple


def _ratio_point(args: Tuple) -> Dict[str, float]:
    """Evaluates one power-ratio scan point.
    """
    ratio, mode_r, mode_b, tones_r, tones_b, species, geometry, axes, diag_r, diag_b = args
    blue_total = sum(t.I_buildup for t in tones_b)
    red_total = sum(t.I_buildup for t in tones_r)
    factor = ratio * blue_total / red_total
    scaled = [t.scaled(factor) for t in tones_r]
    U = two_color_trap(mode_r, mode_b, scaled, tones_b, species, geometry, axes, diag_r, diag_b)
    report = analyze_or_open(U, species, LOWEST_SITE)
    return trap_row({"ratio": ratio}, report, geometry.rho_w)


def power_ratio_scan(
    mode_r: ModeField,
    mode_b: ModeField,
    tones_r: Sequence[DriveResponse],
    tones_b: Sequence[DriveResponse],
    ratios: Sequence[float],
    species: AtomSpecies,
    geometry: RingGeometry,
    axes: TrapAxes,
    diag_r: Optional[ModeDiagnostics] = None,
    diag_b: Optional[ModeDiagnostics] = None,
    jobs: Optional[int] = None,
    logger: Optional[Logger] = None) -> List[Dict[str, float]]:
    """Analyzes the two-color trap for each red-to-blue build-up ratio.

    The blue tones stay fixed; the red tones keep their relative weights
    and are scaled so their total build-up is `ratio` times the blue
    total. Open traps are rows with open = True.

    Args:
        mode_r (`ModeField`): Red mode.

        mode_b (`ModeField`): Blue mode.

        tones_r (list of `DriveResponse`): Red tones at any scale.

        tones_b (list of `DriveResponse`): Fixed blue tones.

        ratios (list of float): Positive build-up ratios.

        species (`AtomSpecies`): The atom.

        geometry (`RingGeometry`): The resonator.

        axes (`TrapAxes`): Sampling.

        diag_r (`ModeDiagnostics`): Red diagnostics, optional.

        diag_b (`ModeDiagnostics`): Blue diagnostics, optional.

        jobs (int): Worker processes.

        logger (`Logger`): Optional logger.

    Returns:
        (list of dict): One row per ratio, in input order.
    """

    if any(r <= 0 for r in ratios):
        raise ValueError("Build-up ratios must be positive.")
    if sum(t.I_buildup for t in tones_r) <= 0:
        raise ValueError("Red tones carry no build-up to scale.")
    diag_r = diag_r or mode_diagnostics(mode_r)
    diag_b = diag_b or mode_diagnostics(mode_b)
    items = [
        (ratio, mode_r, mode_b, list(tones_r), list(tones_b), species, geometry, axes, diag_r, diag_b)
        for ratio in ratios
    ]
    rows = parallel_map(_ratio_point, items, jobs, logger)
    opened = [row["ratio"] for row in rows if row["open"]]
    if logger and opened:
        logger.info(f"Trap open at {len(opened)} of {len(rows)} ratio(s), first at {opened[0]:.4g}.")
    return rows


def _thickness_point(args: Tuple) -> Dict[str, float]:
    thickness, layer, geometry, beam, species, axes = args
    stack = geometry.stack.with_layer_thickness(layer, thickness)
    scanned = replace(geometry, stack=stack)
    U = top_illumination_potential(scanned, beam, species, axes)
    report = analyze_or_open(U, species, SURFACE_SITE)
    return trap_row({"thickness_nm": thickness * 1e9}, report, geometry.rho_w)


def thickness_scan(
    geometry: RingGeometry,
    beam: TweezerBeam,
    species: AtomSpecies,
    axes: TrapAxes,
    thicknesses: Sequence[float],
    layer: int = -1,
    jobs: Optional[int] = None,
    logger: Optional[Logger] = None) -> List[Dict[str, float]]:
    """Tracks the top-illumination site nearest the surface while one
    membrane layer's thickness varies.

    Args:
        geometry (`RingGeometry`): The resonator; `layer` of its stack
            is replaced at each point.

        beam (`TweezerBeam`): The top beam.

        species (`AtomSpecies`): The atom.

        axes (`TrapAxes`): Sampling.

        thicknesses (list of float): Layer thicknesses, m.

        layer (int): Stack layer index (bottom first). Defaults to
            the layer touching the waveguide.

        jobs (int): Worker processes.

        logger (`Logger`): Optional logger.

    Returns:
        (list of dict): One row per thickness.
    """
    if any(t <= 0 for t in thicknesses):
        raise ValueError("Layer thicknesses must be positive.")
    items = [(t, layer, geometry, beam, species, axes) for t in thicknesses]
    return parallel_map(_thickness_point, items, jobs, logger)


def transport_schedule(
    power_start: float,
    power_stop: float,
    power_step: float,
    l_start: float,
    l_stop: float,
    l_step: float) -> List[Tuple[float, float]]:
    """Ramp the tweezer power at `l_start`, then translate it to `l_stop`
    at the final power.

    Returns:
        (list of (float, float)): (power W, beam center l m) per step.
    """
    if power_step <= 0 or l_step <= 0:
        raise ValueError("Schedule steps must be positive.")
    n_power = int(np.floor(abs(power_stop - power_start) / power_step + 1e-9))
    powers = list(power_start + np.sign(power_stop - power_start) * power_step * np.arange(n_power + 1))
    if not np.isclose(powers[-1], power_stop):
        powers.append(power_stop)
    n_l = int(np.floor(abs(l_stop - l_start) / l_step + 1e-9))
    centers = list(l_start + np.sign(l_stop - l_start) * l_step * np.arange(1, n_l + 1))
    if n_l == 0 or not np.isclose(centers[-1], l_stop, rtol=0, atol=l_step * 1e-6):
        if not np.isclose(l_start, l_stop):
            centers.append(l_stop)
    return [(float(p), float(l_start)) for p in powers] + [(float(power_stop), float(c)) for c in centers]


def transport_sequence(
    ev: PotentialGrid,
    cp: PotentialGrid,
    geometry: RingGeometry,
    beam: TweezerBeam,
    species: AtomSpecies,
    schedule: Sequence[Tuple[float, float]],
    lattice_period: float,
    start: Optional[Tuple[float, float, float]] = None,
    logger: Optional[Logger] = None) -> List[TrapReport]:
    """Follows one trapped atom through a tweezer power and position
    schedule.

    Each step analyzes U_ev + U_tw + U_cp and keeps the local minimum
    closest to the previous one, which must lie within a quarter
    lattice period.

    Args:
        ev (`PotentialGrid`): Evanescent lattice without the surface term.

        cp (`PotentialGrid`): Casimir-Polder term on the same sampling.

        geometry (`RingGeometry`): The resonator.

        beam (`TweezerBeam`): Tweezer template; power and center come
            from the schedule.

        species (`AtomSpecies`): The atom.

        schedule (list of (float, float)): (power W, center l m).

        lattice_period (float): Lattice constant d, m.

        start (tuple of float): (rho, l, z) near the atom at the first
            step. Defaults to the lowest minimum nearest the first
            beam center.

        logger (`Logger`): Optional logger.

    Returns:
        (list of `TrapReport`): One report per step.

    Raises:
        `TransportFailureError`: The tracked minimum vanished or jumped
            by more than d / 4.
    """
    if not schedule:
        raise ValueError("Transport schedule is empty.")
    axes = TrapAxes(ev.rho_samples, ev.l_samples, ev.z_samples, ev.periodic_l)
    trajectory = []
    previous = start
    for step, (power, center) in enumerate(schedule):
        tw = tweezer_potential(geometry, beam.moved(center, power), species, axes)
        U = tweezer_plus_lattice(ev, tw, cp)
        try:
            if previous is None:
                guess = (geometry.rho_w, center, float(np.mean(ev.z_samples)))
                report = analyze_trap(U, species, near=guess)
            else:
                report = analyze_trap(U, species, near=previous, max_distance=lattice_period / 4)
        except OpenTrapError as e:
            raise TransportFailureError(str(e), step) from e
        if logger:
            logger.debug(
                f"Transport step {step}: P = {power * 1e3:.3f} mW, l_tw = {center * 1e9:.1f} nm, "
                f"site at l = {report.center[1] * 1e9:.1f} nm, z = {report.center[2] * 1e9:.1f} nm, "
                f"depth {report.depth_uK:.1f} uK.")
        trajectory.append(report)
        previous = report.center
    return trajectory


def transport_rows(schedule: Sequence[Tuple[float, float]], trajectory: Sequence[TrapReport], rho_w: float) -> List[Dict[str, float]]:
    """Trajectory table rows.
    """
    rows = []
    for step, ((power, center), report) in enumerate(zip(schedule, trajectory)):
        row = trap_row(
            {"step": step, "P_tw_mW": power * 1e3, "l_tw_nm": center * 1e9},
            report,
            rho_w)
        row["l_t_nm"] = report.center[1] * 1e9
        row["site_barrier_uK"] = report.site_barrier_uK
        rows.append(row)
    return rows


def trajectory_summary(trajectory: Sequence[TrapReport], lattice_period: float) -> Dict[str, object]:
    """Connectivity of a tracked trajectory.

    The trajectory is connected when no step moves the site by more
    than a quarter lattice period.

    Returns:
        (dict): `connected`, the largest step in nm and the lowest
            barrier to a neighbouring site in uK (None if no step has
            a reachable neighbour).
    """
    centers = np.array([report.center for report in trajectory])
    jumps = np.linalg.norm(np.diff(centers, axis=0), axis=1) if len(centers) > 1 else np.zeros(1)
    barriers = [r.site_barrier_uK for r in trajectory if r.site_barrier is not None]
    return {
        "connected": bool(np.all(jumps <= lattice_period / 4)),
        "max_step_nm": float(jumps.max()) * 1e9,
        "min_site_barrier_uK": float(min(barriers)) if barriers else None,
    }
