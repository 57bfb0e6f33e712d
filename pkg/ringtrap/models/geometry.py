"""Geometry descriptions of a resonator, its membrane and a sampling grid.
"""

import numpy as np
from dataclasses import dataclass, field, replace
from scipy.interpolate import RegularGridInterpolator
from typing import Tuple

RING_SHAPE = 'ring'
RACETRACK_SHAPE = 'racetrack'


@dataclass(frozen=True)
class MembraneStack:
    """The layered membrane beneath the waveguide core.

    Attributes:
        layers (tuple of (float, float)): (thickness in m, refractive
            index) pairs ordered bottom-to-top; the last layer touches
            the waveguide.

        superstrate_index (float): Index of the medium above the
            structure. Defaults to vacuum.
    """
    layers: Tuple[Tuple[float, float], ...] = ()
    superstrate_index: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(
            (float(t), float(n)) for t, n in self.layers))
        for i, (thickness, index) in enumerate(self.layers):
            if thickness <= 0:
                raise ValueError(f"Layer {i} thickness must be positive.")
            if index < 1:
                raise ValueError(f"Layer {i} refractive index must be >= 1.")
        if self.superstrate_index < 1:
            raise ValueError("Superstrate index must be >= 1.")

    @property
    def total_thickness(self) -> float:
        return sum(t for t, _ in self.layers)

    @property
    def top_index(self) -> float:
        """The index directly beneath the waveguide core.
        """
        return self.layers[-1][1] if self.layers else self.superstrate_index

    def with_layer_thickness(self, position: int, thickness: float) -> "MembraneStack":
        """Returns a copy with one layer thickness replaced.
        """
        layers = list(self.layers)
        layers[position] = (thickness, layers[position][1])
        return replace(self, layers=tuple(layers))


@dataclass(frozen=True)
class RingGeometry:
    """A microring or racetrack waveguide cross-section and its footprint.

    The waveguide top surface sits at z = 0 and the core occupies
    [rho_w - W/2, rho_w + W/2] x [-H, 0] with rho_w = radius.
    """
    radius: float
    width: float
    height: float
    core_index: float
    stack: MembraneStack = field(default_factory=MembraneStack)
    shape: str = RING_SHAPE
    straight_length: float = 0.0

    def __post_init__(self) -> None:
        if self.shape not in (RING_SHAPE, RACETRACK_SHAPE):
            raise ValueError(f"Unknown resonator shape '{self.shape}'.")
        for name in ("radius", "width", "height"):
            if getattr(self, name) <= 0:
                raise ValueError(f"Geometry {name} must be positive.")
        if self.core_index < 1:
            raise ValueError("Core index must be >= 1.")
        if self.shape == RING_SHAPE and self.straight_length != 0:
            raise ValueError("A ring has no straight section.")
        if self.straight_length < 0:
            raise ValueError("Straight length must be non-negative.")

    @property
    def rho_w(self) -> float:
        return self.radius

    @property
    def circumference(self) -> float:
        return 2 * np.pi * self.radius + 2 * self.straight_length

    @property
    def effective_radius(self) -> float:
        """Radius of the ring with the same circumference.
        """
        return self.circumference / (2 * np.pi)

    @property
    def cladding_index(self) -> float:
        """Largest index among the non-core materials.
        """
        indices = [self.stack.superstrate_index] + [n for _, n in self.stack.layers]
        return max(indices)


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Values sampled on a uniform (rho, z) grid.

    Attributes:
        rho_samples (`np.ndarray`): Strictly increasing, uniformly
            spaced rho coordinates in m.

        z_samples (`np.ndarray`): Strictly increasing, uniformly
            spaced z coordinates in m.

        values (`np.ndarray`): Array of shape (n_rho, n_z).
    """
    rho_samples: np.ndarray
    z_samples: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        for name in ("rho_samples", "z_samples"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size < 2:
                raise ValueError(f"{name} must be a 1-D array of two or more samples.")
            steps = np.diff(axis)
            if np.any(steps <= 0):
                raise ValueError(f"{name} must be strictly increasing.")
            if not np.allclose(steps, steps[0], rtol=1e-6, atol=0):
                raise ValueError(f"{name} must be uniformly spaced.")
            axis.setflags(write=False)
            object.__setattr__(self, name, axis)
        values = np.asarray(self.values)
        if values.shape != (self.rho_samples.size, self.z_samples.size):
            raise ValueError(
                f"Grid values have shape {values.shape}, expected "
                f"({self.rho_samples.size}, {self.z_samples.size}).")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def d_rho(self) -> float:
        return float(self.rho_samples[1] - self.rho_samples[0])

    @property
    def d_z(self) -> float:
        return float(self.z_samples[1] - self.z_samples[0])

    @property
    def cell_area(self) -> float:
        return self.d_rho * self.d_z

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def with_values(self, values: np.ndarray) -> "Grid2D":
        """Returns a grid on the same sampling holding new values.
        """
        return Grid2D(self.rho_samples, self.z_samples, values)

    def same_sampling(self, other: "Grid2D") -> bool:
        return (
            self.rho_samples.shape == other.rho_samples.shape
            and self.z_samples.shape == other.z_samples.shape
            and np.array_equal(self.rho_samples, other.rho_samples)
            and np.array_equal(self.z_samples, other.z_samples)
        )

    def interpolate(self, rho_samples: np.ndarray, z_samples: np.ndarray) -> np.ndarray:
        """Bilinear interpolation onto the outer product of new axes.

        Points outside the sampled window take the nearest edge value.
        """
        rho = np.clip(np.asarray(rho_samples, dtype=float), self.rho_samples[0], self.rho_samples[-1])
        z = np.clip(np.asarray(z_samples, dtype=float), self.z_samples[0], self.z_samples[-1])
        interpolator = RegularGridInterpolator((self.rho_samples, self.z_samples), self.values)
        points = np.stack(np.meshgrid(rho, z, indexing="ij"), axis=-1)
        return interpolator(points)


    def integrate(self) -> float:
        """Integrates the values over the window as a midpoint sum.
        """
        return float(np.sum(self.values) * self.cell_area)

    @staticmethod
    def uniform(
        rho_center: float,
        rho_width: float,
        z_bottom: float,
        z_top: float,
        spacing: float,
        z_spacing: float = None) -> "Grid2D":
        """Builds an empty cell-centered grid covering the given window.

        Args:
            rho_center (float): Window center along rho, in m.

            rho_width (float): Window extent along rho, in m.

            z_bottom (float): Lower window edge, in m.

            z_top (float): Upper window edge, in m.

            spacing (float): Cell size along rho, in m.

            z_spacing (float): Cell size along z. Defaults to `spacing`.

        Returns:
            (`Grid2D`): Grid of zeros.
        """
        z_spacing = z_spacing or spacing
        n_rho = int(round(rho_width / spacing))
        n_z = int(round((z_top - z_bottom) / z_spacing))
        rho = rho_center - rho_width / 2 + (np.arange(n_rho) + 0.5) * spacing
        z = z_bottom + (np.arange(n_z) + 0.5) * z_spacing
        return Grid2D(rho, z, np.zeros((n_rho, n_z)))
