"""Builds total trap potentials from light shifts, the surface attraction
and a top-illuminating beam, and scans them over drive and stack
parameters.
"""

import numpy as np
from dataclasses import dataclass
from ringtrap.constants import K_B
from ringtrap.models.errors import OpenTrapError
from ringtrap.models.fields import ModeDiagnostics, ModeField
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.potential import PotentialGrid, TrapReport
from ringtrap.models.resonator import DriveResponse, DriveTone, ResonatorParams, SchemeResult
from ringtrap.models.species import AtomSpecies
from ringtrap.physics.mode_solver import mode_diagnostics
from ringtrap.physics.resonator import drive_response, required_power
from ringtrap.physics.stark_shift import casimir_polder, scalar_shift
from ringtrap.physics.top_illumination import TweezerBeam, top_illumination_intensity
from ringtrap.physics.trap_analysis import LOWEST_SITE, analyze_trap
from typing import Dict, List, Optional, Sequence, Tuple

RED_TERM = 'red_scalar'
BLUE_TERM = 'blue_scalar'
TWEEZER_TERM = 'tweezer'


@dataclass(frozen=True)
class TrapAxes:
    """Sampling of a trap potential.

    Attributes:
        rho_samples (`np.ndarray`): Radial positions, m.

        l_samples (`np.ndarray`): Arc positions, m.

        z_samples (`np.ndarray`): Heights above the waveguide, m.

        periodic_l (bool): Whether l spans exactly one lattice period.
    """
    rho_samples: np.ndarray
    l_samples: np.ndarray
    z_samples: np.ndarray
    periodic_l: bool = False


def lattice_period(mode: ModeField) -> float:
    """Standing-wave period pi / k along the ring.
    """
    return float(np.pi / mode.k)


def trap_axes(
    geometry: RingGeometry,
    window_rho: float,
    z_top: float,
    spacing: float,
    l_period: Optional[float] = None,
    l_samples: int = 24,
    l_span: Optional[Tuple[float, float]] = None) -> TrapAxes:
    """Uniform axes above the waveguide.

    rho spans rho_w +/- window_rho / 2 and z runs from one spacing up to
    `z_top`. With `l_period`, l covers one period [-d/2, d/2) with l = 0
    sampled; with `l_span`, l covers the closed interval at the same
    step count.
    """
    half = int(round(window_rho / (2 * spacing)))
    rho = geometry.rho_w + np.arange(-half, half + 1) * spacing
    n_z = max(int(round(z_top / spacing)), 1)
    z = np.arange(1, n_z + 1) * spacing
    if l_span is not None:
        l = np.linspace(l_span[0], l_span[1], l_samples)
        return TrapAxes(rho, l, z, periodic_l=False)
    if l_period is None:
        return TrapAxes(rho, np.array([0.0]), z, periodic_l=False)
    if l_samples % 2:
        l_samples += 1
    l = (np.arange(l_samples) - l_samples // 2) * l_period / l_samples
    return TrapAxes(rho, l, z, periodic_l=True)


def responses_for_buildup(
    params: ResonatorParams,
    scheme: SchemeResult,
    buildups: Sequence[float]) -> List[DriveResponse]:
    """Drive responses for scheme tones with the bus powers that reach
    the target build-ups.
    """
    if len(buildups) != len(scheme.tones):
        raise ValueError(
            f"Scheme {scheme.label} has {len(scheme.tones)} tone(s) but "
            f"{len(buildups)} build-up factor(s) were given.")
    responses = []
    for tone, target in zip(scheme.tones, buildups):
        power = required_power(params, tone.detuning, target)
        drive = DriveTone(tone.port, power, params.omega0 + tone.detuning)
        responses.append(drive_response(params, drive))
    return responses


def lattice_offset(mode: ModeField, responses: Sequence[DriveResponse]) -> float:
    """Shift of the l origin that puts an intensity maximum of the summed
    corrugation at l = 0.
    """
    phasor = sum(r.sign * r.I_buildup * r.visibility_V * np.exp(1j * r.xi_pm) for r in responses)
    if abs(phasor) == 0:
        return 0.0
    return float((np.pi / 2 - np.angle(phasor)) / (2 * mode.k))


def compose(grids: Sequence[PotentialGrid]) -> PotentialGrid:
    """Exact pointwise sum of potentials on one sampling.

    Terms are added in sorted label order, so any ordering of the
    inputs yields the same result. Masks are combined.

    Raises:
        ValueError: The grids are sampled differently.
    """
    if not grids:
        raise ValueError("Nothing to compose.")
    first = grids[0]
    for grid in grids[1:]:
        if not first.same_sampling(grid):
            raise ValueError("Potential grids are sampled on different axes.")
    ordered = sorted(grids, key=lambda g: g.terms)
    values = ordered[0].values.copy()
    mask = ordered[0].mask.copy()
    for grid in ordered[1:]:
        values = values + grid.values
        mask = mask | grid.mask
    terms = tuple(t for g in ordered for t in g.terms)
    return first.with_values(values, terms, mask)


def two_color_trap(
    mode_r: ModeField,
    mode_b: ModeField,
    tones_r: Sequence[DriveResponse],
    tones_b: Sequence[DriveResponse],
    species: AtomSpecies,
    geometry: RingGeometry,
    axes: TrapAxes,
    diag_r: Optional[ModeDiagnostics] = None,
    diag_b: Optional[ModeDiagnostics] = None,
    include_casimir_polder: bool = True) -> PotentialGrid:
    """Red lattice plus blue barrier plus surface attraction.

    U = sum over red tones of -alpha0_r |E_r|^2
        + sum over blue tones of -alpha0_b |E_b|^2 + U_cp

    with the l origin shifted so a red lattice site sits at l = 0.

    Args:
        mode_r (`ModeField`): Red-detuned mode.

        mode_b (`ModeField`): Blue-detuned mode.

        tones_r (list of `DriveResponse`): Red tone responses.

        tones_b (list of `DriveResponse`): Blue tone responses.

        species (`AtomSpecies`): The atom.

        geometry (`RingGeometry`): The resonator.

        axes (`TrapAxes`): Sampling.

        diag_r (`ModeDiagnostics`): Red diagnostics, if precomputed.

        diag_b (`ModeDiagnostics`): Blue diagnostics, if precomputed.

        include_casimir_polder (bool): Whether to add U_cp.

    Returns:
        (`PotentialGrid`): Total potential, J.

    Raises:
        ValueError: A mode or its tones are missing.
    """

    if mode_r is None or mode_b is None:
        raise ValueError("Both the red and the blue mode are required.")
    if not tones_r or not tones_b:
        raise ValueError("At least one red and one blue tone are required.")
    diag_r = diag_r or mode_diagnostics(mode_r)
    diag_b = diag_b or mode_diagnostics(mode_b)
    pol_r = species.polarizability(mode_r.wavelength)
    pol_b = species.polarizability(mode_b.wavelength)

    l_shifted = axes.l_samples + lattice_offset(mode_r, tones_r)
    parts = []
    for term, mode, diag, pol, tones in (
        (RED_TERM, mode_r, diag_r, pol_r, tones_r),
        (BLUE_TERM, mode_b, diag_b, pol_b, tones_b)):
        for response in tones:
            shift = scalar_shift(
                mode, diag, response, pol, l_shifted, axes.rho_samples, axes.z_samples, axes.periodic_l)
            parts.append(PotentialGrid(
                axes.rho_samples, axes.l_samples, axes.z_samples, shift.values, (term,), axes.periodic_l))
    if include_casimir_polder:
        parts.append(casimir_polder(
            geometry, species, axes.rho_samples, axes.l_samples, axes.z_samples, axes.periodic_l))
    return compose(parts)


def tweezer_potential(
    geometry: RingGeometry,
    beam: TweezerBeam,
    species: AtomSpecies,
    axes: TrapAxes) -> PotentialGrid:
    """Scalar shift of the top-illuminating beam alone.
    """
    pol = species.polarizability(beam.wavelength)
    intensity = top_illumination_intensity(
        geometry, beam, axes.rho_samples, axes.l_samples, axes.z_samples)
    return PotentialGrid(
        axes.rho_samples,
        axes.l_samples,
        axes.z_samples,
        -pol.alpha0_si * intensity,
        (TWEEZER_TERM,),
        axes.periodic_l)


def top_illumination_potential(
    geometry: RingGeometry,
    beam: TweezerBeam,
    species: AtomSpecies,
    axes: TrapAxes,
    include_casimir_polder: bool = True) -> PotentialGrid:
    """Planar-multilayer approximation of a focused top-illuminating trap,
    plus the surface attraction.
    """
    parts = [tweezer_potential(geometry, beam, species, axes)]
    if include_casimir_polder:
        parts.append(casimir_polder(
            geometry, species, axes.rho_samples, axes.l_samples, axes.z_samples, axes.periodic_l))
    return compose(parts)


def tweezer_plus_lattice(ev: PotentialGrid, tw: PotentialGrid, cp: PotentialGrid) -> PotentialGrid:
    """U_ev + U_tw + U_cp on one sampling.

    Raises:
        ValueError: The grids are sampled differently.
    """
    return compose([ev, tw, cp])


def trap_row(label: Dict[str, float], report: Optional[TrapReport], rho_w: float) -> Dict[str, float]:
    """One scan-table row; NaNs and open = True when no trap exists.
    """
    row = dict(label)
    if report is None:
        row.update({
            "z_t_nm": np.nan,
            "rho_t_minus_rho_w_nm": np.nan,
            "depth_uK": np.nan,
            "f_rho_kHz": np.nan,
            "f_l_kHz": np.nan,
            "f_z_kHz": np.nan,
            "open": True,
        })
        return row
    f_rho, f_l, f_z = report.frequencies_kHz
    row.update({
        "z_t_nm": report.center[2] * 1e9,
        "rho_t_minus_rho_w_nm": (report.center[0] - rho_w) * 1e9,
        "depth_uK": report.depth_uK,
        "f_rho_kHz": f_rho,
        "f_l_kHz": f_l,
        "f_z_kHz": f_z,
        "open": False,
    })
    return row


def analyze_or_open(U: PotentialGrid, species: AtomSpecies, site: str = LOWEST_SITE) -> Optional[TrapReport]:
    """`analyze_trap`, returning None for an open trap.
    """
    try:
        return analyze_trap(U, species, site=site)
    except OpenTrapError:
        return None


def report_summary(report: TrapReport, rho_w: float) -> Dict[str, object]:
    """JSON-ready trap report in nm, uK and kHz.
    """
    return {
        "center_nm": {
            "rho_minus_rho_w": (report.center[0] - rho_w) * 1e9,
            "l": report.center[1] * 1e9,
            "z": report.center[2] * 1e9,
        },
        "value_uK": report.value / K_B * 1e6,
        "depth_uK": report.depth_uK,
        "site_barrier_uK": None if report.site_barrier is None else report.site_barrier_uK,
        "saddle_nm": {
            "rho_minus_rho_w": (report.saddle[0] - rho_w) * 1e9,
            "z": report.saddle[1] * 1e9,
        },
        "frequencies_kHz": dict(zip(("rho_prime", "l", "z_prime"), report.frequencies_kHz)),
        "principal_axes": [list(axis) for axis in report.principal_axes],
        "tilt_angle_rad": report.tilt_angle,
    }
