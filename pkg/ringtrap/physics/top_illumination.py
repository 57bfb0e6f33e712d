"""Standing wave above a planar multilayer lit from the top at normal
incidence.

This is a planar approximation of a focused beam: the reflection of each
vertical column is computed with the recursive transfer-matrix relation
and the transverse profile is a Gaussian envelope.
"""

import numpy as np
from dataclasses import dataclass
from ringtrap.constants import C_LIGHT, EPS0
from ringtrap.models.errors import PhysicsDomainError
from ringtrap.models.geometry import RingGeometry
from typing import Sequence, Tuple, Union


@dataclass(frozen=True)
class TweezerBeam:
    """A Gaussian beam focused onto the waveguide from above.

    Attributes:
        wavelength (float): Vacuum wavelength, m.

        waist (float): 1/e^2 intensity radius, m.

        power (float): Beam power, W.

        center_rho (float): Beam axis radial position, m.

        center_l (float): Beam axis arc position, m.

        polarization (str): Label only; at normal incidence both
            polarizations see the same planar reflection.
    """
    wavelength: float
    waist: float
    power: float
    center_rho: float
    center_l: float = 0.0
    polarization: str = "rho"

    def __post_init__(self) -> None:
        if self.wavelength <= 0 or self.waist <= 0:
            raise ValueError("Beam wavelength and waist must be positive.")
        if self.power < 0:
            raise ValueError("Beam power must be non-negative.")

    @property
    def peak_intensity(self) -> float:
        """2P / (pi w^2), W/m^2.
        """
        return 2 * self.power / (np.pi * self.waist ** 2)

    def moved(self, center_l: float, power: float = None) -> "TweezerBeam":
        return TweezerBeam(
            self.wavelength,
            self.waist,
            self.power if power is None else power,
            self.center_rho,
            center_l,
            self.polarization)


def _check_index(index: complex) -> float:
    if np.iscomplexobj(index) and np.imag(index) != 0:
        raise PhysicsDomainError(
            f"Absorbing layer index {index} is not supported by the planar model.")
    index = float(np.real(index))
    if not np.isfinite(index) or index < 1:
        raise PhysicsDomainError(f"Invalid layer index {index}; indices must be real and >= 1.")
    return index


def reflection_coefficient(
    layers: Sequence[Tuple[float, complex]],
    wavelength: float,
    incident_index: float = 1.0,
    substrate_index: float = 1.0) -> complex:
    """Amplitude reflection of a multilayer at normal incidence.

    Args:
        layers (list of (float, float)): (thickness m, index) pairs
            ordered from the top surface downward.

        wavelength (float): Vacuum wavelength, m.

        incident_index (float): Index of the medium the light comes
            from. Defaults to vacuum.

        substrate_index (float): Index of the half-space below the
            last layer. Defaults to vacuum.

    Returns:
        (complex): r referenced to the top surface, for fields
            written as exp(-i k z) + r exp(i k z).

    Raises:
        `PhysicsDomainError`: A layer is absorbing, has an index
            below one, or a negative thickness.
    """
    k0 = 2 * np.pi / wavelength
    indices = [_check_index(incident_index)]
    thicknesses = []
    for thickness, index in layers:
        if thickness < 0 or not np.isfinite(thickness):
            raise PhysicsDomainError(f"Invalid layer thickness {thickness}.")
        indices.append(_check_index(index))
        thicknesses.append(thickness)
    substrate = _check_index(substrate_index)

    gamma = (indices[-1] - substrate) / (indices[-1] + substrate)
    for j in range(len(indices) - 1, 0, -1):
        upper, lower = indices[j - 1], indices[j]
        interface = (upper - lower) / (upper + lower)
        round_trip = np.exp(2j * k0 * lower * thicknesses[j - 1])
        gamma = (interface + gamma * round_trip) / (1 + interface * gamma * round_trip)
    return complex(gamma)


def column_layers(geometry: RingGeometry, above_core: bool) -> Tuple[Sequence[Tuple[float, float]], float]:
    """Layers below a vertical column and the height of its top surface.

    Above the core the column starts with the waveguide layer at z = 0;
    elsewhere it starts with the membrane top at z = -H.
    """
    stack = [(t, n) for t, n in reversed(geometry.stack.layers)]
    if above_core:
        return [(geometry.height, geometry.core_index)] + stack, 0.0
    return stack, -geometry.height


def standing_wave_factor(
    r: complex,
    z: Union[float, np.ndarray],
    surface: float,
    wavelength: float,
    incident_index: float = 1.0) -> np.ndarray:
    """|1 + r exp(2 i k (z - surface))|^2.
    """
    k = 2 * np.pi * incident_index / wavelength
    z = np.asarray(z, dtype=float)
    return np.abs(1 + r * np.exp(2j * k * (z - surface))) ** 2


def top_illumination_intensity(
    geometry: RingGeometry,
    beam: TweezerBeam,
    rho_samples: np.ndarray,
    l_samples: np.ndarray,
    z_samples: np.ndarray) -> np.ndarray:
    """|E|^2 above the structure, V^2/m^2, shape (n_rho, n_l, n_z).

    |E|^2 = I_peak / (2 c eps0) |1 + r exp(2ik(z - z_s))|^2
            exp(-2((rho - rho0)^2 + (l - l0)^2) / w^2)

    Raises:
        `PhysicsDomainError`: The waist is below half a wavelength, a
            sample lies at or below a column's top surface, or the
            layer data are invalid.
    """
    if beam.waist < beam.wavelength / 2:
        raise PhysicsDomainError(
            f"Beam waist {beam.waist * 1e9:.1f} nm is below half the wavelength; "
            "the planar Gaussian model does not apply.")
    rho = np.asarray(rho_samples, dtype=float)
    l_samples = np.asarray(l_samples, dtype=float)
    z = np.asarray(z_samples, dtype=float)
    if np.any(z <= 0):
        raise PhysicsDomainError("Top illumination is evaluated above the waveguide top (z > 0) only.")

    superstrate = geometry.stack.superstrate_index
    profiles = {}
    for above_core in (True, False):
        layers, surface = column_layers(geometry, above_core)
        r = reflection_coefficient(layers, beam.wavelength, superstrate, superstrate)
        profiles[above_core] = standing_wave_factor(r, z, surface, beam.wavelength, superstrate)

    over_core = np.abs(rho - geometry.rho_w) <= geometry.width / 2
    vertical = np.where(over_core[:, None], profiles[True][None, :], profiles[False][None, :])
    envelope = np.exp(
        -2 * ((rho[:, None] - beam.center_rho) ** 2 + (l_samples[None, :] - beam.center_l) ** 2)
        / beam.waist ** 2)
    amplitude = beam.peak_intensity / (2 * C_LIGHT * EPS0)
    return amplitude * envelope[:, :, None] * vertical[:, None, :]
