"""Mode area, atom-photon coupling and cooperativity, and the sweep of
these over the resonator cross-section and radius.
"""

import itertools
import math
import numpy as np
import pandas as pd
from logging import Logger
from pathlib import Path
from ringtrap.constants import C_LIGHT, DEFAULT_ATOM_HEIGHT, DEFAULT_Q_ABSORPTION
from ringtrap.models.errors import (
    CutoffError,
    DielectricPositionError,
    GridSizingError,
    PhysicsDomainError,
    RadiativeError,
    RingtrapError
)
from ringtrap.models.fields import ModeField
from ringtrap.models.geometry import Grid2D, RingGeometry
from ringtrap.models.loss import QBreakdown, RoughnessSpec
from ringtrap.models.report import CqedReport
from ringtrap.models.species import AtomSpecies
from ringtrap.physics.loss_model import fit_kappa_to_q, fundamental_limit_q, loss_budget
from ringtrap.physics.mode_solver import SolveSettings, cached_geometry_modes, select_mode
from ringtrap.services.cache import ModeCache
from ringtrap.services.pool import parallel_map
from typing import Dict, List, Optional, Sequence, Tuple

IDENTITY_TOLERANCE = 1e-12
VACUUM_EPS_TOLERANCE = 1e-9


def _bilinear(grid: Grid2D, rho: float, z: float) -> float:
    rho_samples = grid.rho_samples
    z_samples = grid.z_samples
    if not (rho_samples[0] <= rho <= rho_samples[-1] and z_samples[0] <= z <= z_samples[-1]):
        raise PhysicsDomainError(
            f"Atom position ({rho * 1e6:.4f}, {z * 1e6:.4f}) um lies outside the mode grid.")
    return float(grid.interpolate(np.array([rho]), np.array([z]))[0, 0])


def field_at(mode: ModeField, atom_pos: Tuple[float, float]) -> float:
    """|E|^2 at (rho_a, z_a), bilinear in each component's square.
    """
    rho, z = atom_pos
    return sum(
        _bilinear(grid.with_values(grid.values ** 2), rho, z)
        for grid in (mode.e_rho, mode.e_phi_im, mode.e_z))


def mode_area(
    mode: ModeField,
    eps_map: Grid2D,
    atom_pos: Tuple[float, float],
    allow_dielectric: bool = False) -> float:
    """Effective mode area at the atom,

    A_m = int(eps |E|^2) d rho dz / (eps(r_a) |E(r_a)|^2).

    Args:
        mode (`ModeField`): The mode.

        eps_map (`Grid2D`): Relative permittivity on the mode grid.

        atom_pos (tuple of float): (rho_a, z_a) in m.

        allow_dielectric (bool): Accept positions inside a dielectric,
            as for an embedded emitter.

    Returns:
        (float): A_m in m^2.

    Raises:
        `DielectricPositionError`: The atom sits inside a dielectric.

        `PhysicsDomainError`: The atom lies outside the grid or the
            field vanishes there.
    """
    rho, z = atom_pos
    eps_atom = _bilinear(eps_map, rho, z)
    if not allow_dielectric and abs(eps_atom - 1.0) > VACUUM_EPS_TOLERANCE:
        raise DielectricPositionError(
            f"Atom at ({rho * 1e6:.4f}, {z * 1e6:.4f}) um sits in a medium "
            f"with eps = {eps_atom:.4f}.")
    local = eps_atom * field_at(mode, atom_pos)
    if local <= 0:
        raise PhysicsDomainError("The mode field vanishes at the atom position.")
    total = float(np.sum(eps_map.values * mode.intensity) * eps_map.cell_area)
    return total / local


def mode_volume(
    mode: ModeField,
    eps_map: Grid2D,
    atom_pos: Tuple[float, float],
    allow_dielectric: bool = False) -> float:
    """V_m = A_m L with L the resonator length the mode was built for.
    """
    return mode_area(mode, eps_map, atom_pos, allow_dielectric) * mode.circumference


def coupling_g(mode_volume: float, species: AtomSpecies, omega: float) -> float:
    """g = sqrt(3 lambda^3 omega gamma / (16 pi^2 V_m)) for the reduced
    dipole moment, rad/s.
    """
    if mode_volume <= 0:
        raise ValueError("Mode volume must be positive.")
    wavelength = 2 * np.pi * C_LIGHT / omega
    return math.sqrt(3 * wavelength ** 3 * omega * species.gamma / (16 * np.pi ** 2 * mode_volume))


def cooperativity(g: float, kappa: float, gamma: float) -> float:
    """C = 4 g^2 / (kappa gamma).
    """
    if kappa <= 0 or gamma <= 0:
        raise ValueError("Loss rates must be positive.")
    return 4 * g ** 2 / (kappa * gamma)


def cooperativity_from_q(wavelength: float, q: float, mode_volume: float) -> float:
    """C = (3 lambda^3 / 4 pi^2) (Q / V_m).
    """
    return 3 * wavelength ** 3 * q / (4 * np.pi ** 2 * mode_volume)


def check_cooperativity_identity(report: CqedReport) -> float:
    """Relative mismatch between 4g^2/(kappa gamma) and the Q/V form.

    Raises:
        `RingtrapError`: The two forms disagree beyond round-off.
    """
    wavelength = 2 * np.pi * C_LIGHT / report.omega
    c_qv = cooperativity_from_q(wavelength, report.quality_factor, report.mode_volume)
    mismatch = abs(report.cooperativity - c_qv) / max(abs(c_qv), np.finfo(float).tiny)
    if mismatch > IDENTITY_TOLERANCE:
        raise RingtrapError(
            f"Cooperativity forms disagree: {report.cooperativity:.15g} vs {c_qv:.15g}.")
    return mismatch


def cqed_report(
    mode: ModeField,
    geometry: RingGeometry,
    species: AtomSpecies,
    atom_pos: Tuple[float, float],
    q_breakdown: Optional[QBreakdown] = None,
    kappa: Optional[float] = None,
    g: Optional[float] = None,
    allow_dielectric: bool = False) -> CqedReport:
    """Assembles A_m, V_m, g, kappa and C for one atom position.

    kappa comes from the argument when given (a measured value),
    otherwise from the Q budget.

    Raises:
        ValueError: Neither kappa nor a Q budget was given, or the Q
            budget is above the reporting ceiling.
    """
    if kappa is None:
        if q_breakdown is None:
            raise ValueError("A loss rate or a Q budget is required.")
        kappa = fit_kappa_to_q(mode.omega, q_breakdown.q_total)
    if kappa <= 0:
        raise ValueError("The Q budget leaves no loss; kappa must be positive.")
    area = mode_area(mode, mode.eps, atom_pos, allow_dielectric)
    volume = area * mode.circumference
    g_value = coupling_g(volume, species, mode.omega) if g is None else g
    report = CqedReport(
        mode_area=area,
        mode_volume=volume,
        g=g_value,
        kappa=kappa,
        gamma=species.gamma,
        cooperativity=cooperativity(g_value, kappa, species.gamma),
        q_breakdown=q_breakdown,
        geometry=geometry,
        atom_position=atom_pos,
        omega=mode.omega,
        n_eff=mode.n_eff)
    if g is None:
        check_cooperativity_identity(report)
    return report


def surface_position(mode: ModeField, geometry: RingGeometry) -> Tuple[float, float]:
    """The first sample row above the waveguide top, at rho_w.
    """
    z = mode.z_samples
    row = int(np.searchsorted(z, 0.0, side="left"))
    if row >= z.size:
        raise PhysicsDomainError("The mode grid holds no samples above the waveguide.")
    return geometry.rho_w, float(z[row])


def surface_emitter_report(
    mode: ModeField,
    geometry: RingGeometry,
    q: float,
    host_index: Optional[float] = None) -> Dict[str, float]:
    """Mode volume and cooperativity of an emitter on the waveguide top
    surface, in units of lambda^3 and (lambda / n)^3.

    Args:
        mode (`ModeField`): The mode.

        geometry (`RingGeometry`): The resonator.

        q (float): Total quality factor.

        host_index (float): Index n of the emitter host. Defaults to
            the core index.

    Returns:
        (dict): Surface mode volume and the radiative-limit cooperativity.
    """
    n = host_index or geometry.core_index
    wavelength = mode.wavelength
    position = surface_position(mode, geometry)
    volume = mode_volume(mode, mode.eps, position)
    return {
        "z_surface_nm": position[1] * 1e9,
        "Vm_um3": volume * 1e18,
        "Vm_lambda3": volume / wavelength ** 3,
        "Vm_lambda_over_n3": volume / (wavelength / n) ** 3,
        "host_index": n,
        "C": cooperativity_from_q(wavelength, q, volume),
    }


def fundamental_limit(
    mode: ModeField,
    geometry: RingGeometry,
    species: AtomSpecies,
    atom_pos: Tuple[float, float],
    q_absorption: float = DEFAULT_Q_ABSORPTION) -> CqedReport:
    """Cooperativity of a perfectly smooth resonator limited by absorption
    and bend radiation only.
    """
    breakdown = fundamental_limit_q(mode, geometry, q_absorption)
    return cqed_report(mode, geometry, species, atom_pos, breakdown)


def _sweep_point(args: Tuple) -> Dict[str, object]:
    """Solves and evaluates one sweep geometry. Geometries without a
    guided, bound mode come back as excluded rows.
    """
    geometry, wavelength, polarization, settings, roughness, species, z_a, q_absorption, cache_dir = args
    cache = ModeCache(Path(cache_dir)) if cache_dir else None
    row = {
        "W_um": geometry.width * 1e6,
        "H_um": geometry.height * 1e6,
        "R_um": geometry.radius * 1e6,
    }
    try:
        modes = cached_geometry_modes(geometry, wavelength, settings, cache)
        mode = select_mode(modes, polarization)
        breakdown = loss_budget(mode, geometry, roughness, q_absorption)
        report = cqed_report(mode, geometry, species, (geometry.rho_w, z_a), breakdown)
    except (CutoffError, GridSizingError, RadiativeError) as e:
        row.update({"excluded": True, "reason": str(e)})
        return row
    row.update(report.as_row())
    row.update({"excluded": False, "reason": ""})
    return row


def sweep_geometries(
    base: RingGeometry,
    widths: Sequence[float],
    heights: Sequence[float],
    radii: Sequence[float]) -> List[RingGeometry]:
    """Every (W, H, R) combination in width, height, radius order.
    """
    if not widths or not heights or not radii:
        raise ValueError("Sweep ranges must be nonempty.")
    return [
        RingGeometry(
            radius=R, width=W, height=H,
            core_index=base.core_index,
            stack=base.stack,
            shape=base.shape,
            straight_length=base.straight_length)
        for W, H, R in itertools.product(widths, heights, radii)
    ]


def geometry_sweep(
    base: RingGeometry,
    widths: Sequence[float],
    heights: Sequence[float],
    radii: Sequence[float],
    roughness: RoughnessSpec,
    species: AtomSpecies,
    wavelength: float,
    settings: SolveSettings,
    polarization: str = "TM",
    z_a: float = DEFAULT_ATOM_HEIGHT,
    q_absorption: Optional[float] = None,
    cache_dir: Optional[Path] = None,
    jobs: Optional[int] = None,
    logger: Optional[Logger] = None) -> Tuple[List[Dict[str, object]], Optional[Dict[str, object]]]:
    """Cooperativity over a grid of cross-sections and radii.

    Each point solves the mode, combines surface scattering with bend
    radiation (plus absorption when `q_absorption` is set), converts
    the total Q to kappa and evaluates A_m, V_m, g and C at
    (rho_w, z_a) with no bus coupling.

    Args:
        base (`RingGeometry`): Supplies the core index, stack and shape.

        widths (list of float): W values, m.

        heights (list of float): H values, m.

        radii (list of float): R values, m.

        roughness (`RoughnessSpec`): Roughness statistics.

        species (`AtomSpecies`): The atom.

        wavelength (float): Mode wavelength, m.

        settings (`SolveSettings`): Solver window and spacing.

        polarization (str): "TE" or "TM".

        z_a (float): Atom height above the waveguide, m.

        q_absorption (float): Absorption Q, or None to leave it out.

        cache_dir (`Path`): Mode cache root, or None to disable caching.

        jobs (int): Worker processes.

        logger (`Logger`): Optional logger.

    Returns:
        ((list of dict, dict)): Rows in (W, H, R) order, and the row of
            largest C among the included points (None when every point
            is excluded). Ties go to the first row in that order.
    """
    geometries = sweep_geometries(base, widths, heights, radii)
    items = [
        (g, wavelength, polarization, settings, roughness, species, z_a, q_absorption,
         str(cache_dir) if cache_dir else None)
        for g in geometries
    ]
    if logger:
        logger.info(f"Sweeping {len(items)} geometries ({polarization}).")
    rows = parallel_map(_sweep_point, items, jobs, logger)
    included = [row for row in rows if not row["excluded"]]
    if logger:
        logger.info(f"{len(included)} of {len(rows)} geometries guide a bound mode.")
    if not included:
        return rows, None
    best = max(range(len(included)), key=lambda i: (included[i]["C"], -i))
    return rows, included[best]


def pivot_by_radius(rows: List[Dict[str, object]], value: str = "C") -> Dict[float, pd.DataFrame]:
    """Heatmap-ready W x H tables of one column, one per radius.
    """
    frame = pd.DataFrame([row for row in rows if not row["excluded"]])
    if frame.empty:
        return {}
    return {
        float(R): group.pivot_table(index="H_um", columns="W_um", values=value)
        for R, group in frame.groupby("R_um")
    }
