"""Light shifts of a ground-state atom in a driven ring field, and the
Casimir-Polder attraction to the waveguide surface.

Energies use U = -alpha |E|^2 with |E|^2 the normalized mode intensity
times the build-up factor; no extra time-averaging factor is applied.
"""

import numpy as np
from ringtrap.constants import CASIMIR_POLDER_MASK_HEIGHT, PLANCK_H
from ringtrap.models.errors import PhysicsDomainError
from ringtrap.models.fields import ModeDiagnostics, ModeField
from ringtrap.models.geometry import Grid2D, RingGeometry
from ringtrap.models.potential import PotentialGrid, ShiftField
from ringtrap.models.resonator import DriveResponse
from ringtrap.models.species import AtomSpecies, PolarizabilitySet
from ringtrap.physics.resonator import standing_wave_volume
from typing import Dict, Optional, Sequence, Tuple, Union

SCALAR_TERM = 'scalar'
VECTOR_DIAG_TERM = 'vector_diag'
VECTOR_OFFDIAG_TERM = 'vector_offdiag'
CASIMIR_POLDER_TERM = 'casimir_polder'


def _axes(
    mode: ModeField,
    rho_samples: Optional[np.ndarray],
    z_samples: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, bool]:
    rho = mode.rho_samples if rho_samples is None else np.asarray(rho_samples, dtype=float)
    z = mode.z_samples if z_samples is None else np.asarray(z_samples, dtype=float)
    native = (
        rho.shape == mode.rho_samples.shape and np.array_equal(rho, mode.rho_samples)
        and z.shape == mode.z_samples.shape and np.array_equal(z, mode.z_samples))
    return rho, z, native


def _resample(grid: Grid2D, rho: np.ndarray, z: np.ndarray, native: bool) -> np.ndarray:
    return grid.values if native else grid.interpolate(rho, z)


def resample_mode(
    mode: ModeField,
    diag: ModeDiagnostics,
    rho_samples: Optional[np.ndarray] = None,
    z_samples: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """Field components and diagnostic maps on new (rho, z) axes.

    Returns:
        (dict of str to `np.ndarray`): "e_rho", "e_phi", "e_z",
            "intensity" and "v", each of shape (n_rho, n_z).
    """
    rho, z, native = _axes(mode, rho_samples, z_samples)
    e_rho = _resample(mode.e_rho, rho, z, native)
    e_phi = _resample(mode.e_phi_im, rho, z, native)
    e_z = _resample(mode.e_z, rho, z, native)
    return {
        "e_rho": e_rho,
        "e_phi": e_phi,
        "e_z": e_z,
        "intensity": e_rho ** 2 + e_phi ** 2 + e_z ** 2,
        "v": _resample(diag.v_map, rho, z, native),
    }


def _potential(
    rho: np.ndarray,
    l_samples: np.ndarray,
    z: np.ndarray,
    values: np.ndarray,
    term: str,
    periodic_l: bool) -> PotentialGrid:
    return PotentialGrid(rho, l_samples, z, values, (term,), periodic_l)


def scalar_shift(
    mode: ModeField,
    diag: ModeDiagnostics,
    response: DriveResponse,
    pol: PolarizabilitySet,
    l_samples: Union[Sequence[float], np.ndarray],
    rho_samples: Optional[np.ndarray] = None,
    z_samples: Optional[np.ndarray] = None,
    periodic_l: bool = False) -> PotentialGrid:
    """Scalar light shift of one tone, -alpha0 |E|^2, on a (rho, l, z) grid.

    Args:
        mode (`ModeField`): Normalized mode at the tone frequency.

        diag (`ModeDiagnostics`): Diagnostics of `mode`.

        response (`DriveResponse`): The tone's response.

        pol (`PolarizabilitySet`): Polarizabilities at the tone
            wavelength.

        l_samples (array of float): Arc positions, m.

        rho_samples (`np.ndarray`): Radial axis. Defaults to the
            mode grid.

        z_samples (`np.ndarray`): Vertical axis. Defaults to the
            mode grid.

        periodic_l (bool): Whether `l_samples` span one period.

    Returns:
        (`PotentialGrid`): Energy in J.
    """
    rho, z, native = _axes(mode, rho_samples, z_samples)
    l_samples = np.asarray(l_samples, dtype=float)
    if native:
        intensity = standing_wave_volume(mode, response, l_samples, diag)
    else:
        maps = resample_mode(mode, diag, rho, z)
        corrugation = np.sin(2 * mode.k * l_samples + response.xi_pm)
        modulation = 1 + response.sign * response.visibility_V \
            * maps["v"][:, None, :] * corrugation[None, :, None]
        intensity = response.I_buildup * maps["intensity"][:, None, :] * modulation
    return _potential(rho, l_samples, z, -pol.alpha0_si * intensity, SCALAR_TERM, periodic_l)


def vector_shift(
    mode: ModeField,
    diag: ModeDiagnostics,
    response: DriveResponse,
    pol: PolarizabilitySet,
    l_samples: Union[Sequence[float], np.ndarray] = (0.0,),
    rho_samples: Optional[np.ndarray] = None,
    z_samples: Optional[np.ndarray] = None,
    periodic_l: bool = False) -> Tuple[PotentialGrid, PotentialGrid]:
    """Vector light-shift operator coefficients of one tone, for an atom
    quantized along z.

    U_v = diag F_z / F + offdiag (F+ + F-) / 2F with
    diag = -/+ alpha1 I~ E_phi E_rho and offdiag = +/- alpha1 I~ E_phi E_z,
    upper signs for the plus port. Both are uniform along the ring.

    Returns:
        ((`PotentialGrid`, `PotentialGrid`)): diag and offdiag, in J.
    """
    rho, z, _ = _axes(mode, rho_samples, z_samples)
    l_samples = np.asarray(l_samples, dtype=float)
    maps = resample_mode(mode, diag, rho, z)
    scale = pol.alpha1_si * response.I_tilde * maps["e_phi"]
    diag_values = -response.sign * scale * maps["e_rho"]
    offdiag_values = response.sign * scale * maps["e_z"]
    ones = np.ones((1, l_samples.size, 1))
    return (
        _potential(rho, l_samples, z, diag_values[:, None, :] * ones, VECTOR_DIAG_TERM, periodic_l),
        _potential(rho, l_samples, z, offdiag_values[:, None, :] * ones, VECTOR_OFFDIAG_TERM, periodic_l))


def shift_field(
    mode: ModeField,
    diag: ModeDiagnostics,
    response: DriveResponse,
    pol: PolarizabilitySet,
    l_samples: Union[Sequence[float], np.ndarray],
    rho_samples: Optional[np.ndarray] = None,
    z_samples: Optional[np.ndarray] = None,
    periodic_l: bool = False,
    label: str = "") -> ShiftField:
    """Scalar and vector shifts of one tone bundled together.
    """
    scalar = scalar_shift(mode, diag, response, pol, l_samples, rho_samples, z_samples, periodic_l)
    vector_diag, vector_offdiag = vector_shift(
        mode, diag, response, pol, l_samples, rho_samples, z_samples, periodic_l)
    description = label or (
        f"sign {response.sign:+d}, omega {response.omega:.6e} rad/s, "
        f"I {response.I_buildup:.4e}, I~ {response.I_tilde:.4e}")
    return ShiftField(scalar, vector_diag, vector_offdiag, mode.wavelength, (description,))


def sum_shift_fields(fields: Sequence[ShiftField]) -> ShiftField:
    """Incoherent sum of shift fields sampled on the same grid.
    """
    if not fields:
        raise ValueError("Nothing to sum.")
    first = fields[0]
    for other in fields[1:]:
        if not first.scalar.same_sampling(other.scalar):
            raise ValueError("Shift fields are sampled on different grids.")

    def total(name):
        grids = [getattr(f, name) for f in fields]
        return grids[0].with_values(sum(g.values for g in grids), grids[0].terms)

    provenance = tuple(p for f in fields for p in f.provenance)
    return ShiftField(
        total("scalar"), total("vector_diag"), total("vector_offdiag"), first.wavelength, provenance)


def vector_scalar_ratio(
    diag: ModeDiagnostics,
    response: DriveResponse,
    pol: PolarizabilitySet) -> Tuple[Grid2D, Grid2D]:
    """Estimated vector-to-scalar shift ratio near the lattice antinodes,
    (alpha1 / alpha0) f_mu I~ / I.

    Returns:
        ((`Grid2D`, `Grid2D`)): Ratios for the F_z/F coefficient and
            the (F+ + F-)/2F coefficient.
    """
    if response.I_buildup == 0:
        zeros = np.zeros(diag.v_map.shape)
        return diag.v_map.with_values(zeros), diag.v_map.with_values(zeros)
    factor = pol.vector_ratio * response.I_tilde / response.I_buildup
    return (
        diag.f_z_map.with_values(factor * diag.f_z_map.values),
        diag.f_rho_map.with_values(factor * diag.f_rho_map.values))


def angular_momentum_matrices(F: float) -> Tuple[np.ndarray, np.ndarray]:
    """F_z and F_x in the |F, m_F> basis ordered m_F = F, F-1, ..., -F.
    """
    m = np.arange(F, -F - 1, -1, dtype=float)
    f_z = np.diag(m)
    ladder = np.sqrt(F * (F + 1) - m[1:] * (m[1:] + 1))
    f_plus = np.diag(ladder, k=1)
    f_x = (f_plus + f_plus.T) / 2
    return f_z, f_x


def vector_shift_sublevels(diag_value: float, offdiag_value: float, F: int) -> np.ndarray:
    """Energies of the 2F + 1 sublevels under the vector shift at one point.

    Args:
        diag_value (float): Coefficient of F_z / F, J.

        offdiag_value (float): Coefficient of (F+ + F-) / 2F, J.

        F (int): Total angular momentum.

    Returns:
        (`np.ndarray`): Ascending eigenvalues, J.
    """
    f_z, f_x = angular_momentum_matrices(F)
    hamiltonian = (diag_value * f_z + offdiag_value * f_x) / F
    return np.linalg.eigvalsh(hamiltonian)


def casimir_polder_energy(z: Union[float, np.ndarray], species: AtomSpecies) -> Union[float, np.ndarray]:
    """-h C4 / (z^3 (z + lambda_bar)) above a flat nitride surface.

    Raises:
        `PhysicsDomainError`: Any height is not positive.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise PhysicsDomainError("The Casimir-Polder potential is only defined above the surface (z > 0).")
    energy = -PLANCK_H * species.c4_over_h / (z ** 3 * (z + species.lambda_bar))
    return float(energy) if energy.ndim == 0 else energy


def casimir_polder(
    geometry: RingGeometry,
    species: AtomSpecies,
    rho_samples: np.ndarray,
    l_samples: np.ndarray,
    z_samples: np.ndarray,
    periodic_l: bool = False) -> PotentialGrid:
    """Casimir-Polder potential above the waveguide top face.

    Nonzero only for |rho - rho_w| <= W/2. Samples below 5 nm are
    masked out of minimum searches.

    Raises:
        `PhysicsDomainError`: A z sample is not positive.
    """
    rho = np.asarray(rho_samples, dtype=float)
    l_samples = np.asarray(l_samples, dtype=float)
    z = np.asarray(z_samples, dtype=float)
    profile = np.asarray(casimir_polder_energy(z, species)).reshape(-1)
    inside = np.abs(rho - geometry.rho_w) <= geometry.width / 2
    values = inside[:, None, None] * np.ones((1, l_samples.size, 1)) * profile[None, None, :]
    mask = np.broadcast_to(z[None, None, :] < CASIMIR_POLDER_MASK_HEIGHT, values.shape)
    return PotentialGrid(rho, l_samples, z, values, (CASIMIR_POLDER_TERM,), periodic_l, mask)
