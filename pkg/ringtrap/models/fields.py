"""Guided-mode fields and their derived diagnostic maps.
"""

import numpy as np
from dataclasses import dataclass
from ringtrap.constants import C_LIGHT, EPS0, HBAR
from ringtrap.models.geometry import Grid2D
from typing import Optional, Tuple

TE_POLARIZATION = 'TE'
TM_POLARIZATION = 'TM'


@dataclass(frozen=True, eq=False)
class ModeField:
    """A vectorial eigenmode on the (rho, z) cross-section.

    The field is E = [e_rho rho + i e_phi_im phi + e_z z] exp(i k l),
    with all three stored components real and in V/m.

    Attributes:
        e_rho (`Grid2D`): Radial component.

        e_phi_im (`Grid2D`): Magnitude of the out-of-phase
            longitudinal component.

        e_z (`Grid2D`): Vertical component.

        eps (`Grid2D`): Relative permittivity used for the
            normalization and energy weighting.

        n_eff (float): Effective index.

        k (float): Propagation wavenumber, rad/m.

        m_azimuthal (float): k R for a bent mode (not forced to an
            integer); k times the effective radius otherwise.

        omega (float): Angular frequency, rad/s.

        polarization (str): "TE" or "TM".

        circumference (float): Resonator length L entering the
            normalization 2 eps0 L int(eps |E|^2) dA = hbar omega.

        bend_radius (float): Bend radius used in the solve, if any.

        normalized (bool): Whether the normalization holds.
    """
    e_rho: Grid2D
    e_phi_im: Grid2D
    e_z: Grid2D
    eps: Grid2D
    n_eff: float
    k: float
    m_azimuthal: float
    omega: float
    polarization: str
    circumference: float
    bend_radius: Optional[float] = None
    normalized: bool = False

    @property
    def wavelength(self) -> float:
        return 2 * np.pi * C_LIGHT / self.omega

    @property
    def rho_samples(self) -> np.ndarray:
        return self.e_rho.rho_samples

    @property
    def z_samples(self) -> np.ndarray:
        return self.e_rho.z_samples

    @property
    def intensity(self) -> np.ndarray:
        """|E|^2 summed over the three components.
        """
        return self.e_rho.values ** 2 + self.e_phi_im.values ** 2 + self.e_z.values ** 2

    def energy_integral(self) -> float:
        """int(eps |E|^2) dA over the cross-section, in V^2.
        """
        return float(np.sum(self.eps.values * self.intensity) * self.eps.cell_area)

    def normalization_ratio(self) -> float:
        """2 eps0 L int(eps |E|^2) dA / (hbar omega); 1 for a normalized mode.
        """
        return 2 * EPS0 * self.circumference * self.energy_integral() / (HBAR * self.omega)

    def scaled(self, factor: float) -> "ModeField":
        """Returns a copy with every field component multiplied by `factor`.
        """
        return ModeField(
            e_rho=self.e_rho.with_values(self.e_rho.values * factor),
            e_phi_im=self.e_phi_im.with_values(self.e_phi_im.values * factor),
            e_z=self.e_z.with_values(self.e_z.values * factor),
            eps=self.eps,
            n_eff=self.n_eff,
            k=self.k,
            m_azimuthal=self.m_azimuthal,
            omega=self.omega,
            polarization=self.polarization,
            circumference=self.circumference,
            bend_radius=self.bend_radius,
            normalized=False)


@dataclass(frozen=True, eq=False)
class ModeDiagnostics:
    """Pointwise maps derived from a normalized mode.

    Attributes:
        v_map (`Grid2D`): Visibility amplitude 1 - 2|E_phi|^2/|E|^2.

        f_rho_map (`Grid2D`): Polarization factor weighting the
            (F+ + F-)/2F term, E_phi E_z / 2|E|^2.

        f_z_map (`Grid2D`): Polarization factor weighting the F_z/F
            term, E_phi E_rho / 2|E|^2.

        intensity_map (`Grid2D`): eps |E|^2.
    """
    v_map: Grid2D
    f_rho_map: Grid2D
    f_z_map: Grid2D
    intensity_map: Grid2D


@dataclass(frozen=True, eq=False)
class StandingModeField:
    """One of the two back-scattering-mixed normal modes.

    E1 = s [e_t cos(m phi + xi/2) - e_phi sin(m phi + xi/2) phi]
    E2 = i s [e_t sin(m phi + xi/2) + e_phi cos(m phi + xi/2) phi]

    where e_t is the transverse part of the travelling mode and s the
    normalization scale (sqrt(2) for a normalized travelling mode).

    Attributes:
        mode (`ModeField`): The travelling mode the field is built from.

        xi (float): Scattering phase, rad.

        index (int): 1 or 2.

        scale (float): Overall amplitude factor s.
    """
    mode: ModeField
    xi: float
    index: int
    scale: float

    def __post_init__(self) -> None:
        if self.index not in (1, 2):
            raise ValueError("Mixed mode index must be 1 or 2.")

    @property
    def phase_factor(self) -> complex:
        """Global factor multiplying the real components (1 or i).
        """
        return 1.0 if self.index == 1 else 1j

    def components(self, phi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Real (rho, phi, z) components at azimuth `phi`, excluding the
        global phase factor.
        """
        theta = self.mode.m_azimuthal * phi + self.xi / 2
        if self.index == 1:
            transverse, axial = np.cos(theta), -np.sin(theta)
        else:
            transverse, axial = np.sin(theta), np.cos(theta)
        return (
            self.scale * transverse * self.mode.e_rho.values,
            self.scale * axial * self.mode.e_phi_im.values,
            self.scale * transverse * self.mode.e_z.values)

    def intensity(self, phi: float) -> np.ndarray:
        e_rho, e_phi, e_z = self.components(phi)
        return e_rho ** 2 + e_phi ** 2 + e_z ** 2

    def normalization_ratio(self, n_phi: int = 16) -> float:
        """2 eps0 L <int(eps |E|^2) dA>_phi / (hbar omega), averaging
        over one period of m phi.
        """
        period = 2 * np.pi / self.mode.m_azimuthal
        phis = np.arange(n_phi) * period / n_phi
        cell = self.mode.eps.cell_area
        energies = [np.sum(self.mode.eps.values * self.intensity(phi)) * cell for phi in phis]
        return 2 * EPS0 * self.mode.circumference * float(np.mean(energies)) / (HBAR * self.mode.omega)
