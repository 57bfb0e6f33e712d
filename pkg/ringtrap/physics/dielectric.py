"""Relative permittivity maps of the waveguide cross-section and
polarizability unit conversion.
"""

import numpy as np
from ringtrap.constants import ATOMIC_POLARIZABILITY_UNIT, MIN_WINDOW_MARGIN
from ringtrap.models.errors import GridSizingError
from ringtrap.models.geometry import Grid2D, RingGeometry
from typing import Union

WINDOW_TOLERANCE = 1e-12


def mode_grid(
    geometry: RingGeometry,
    spacing: float,
    window_rho: float,
    window_z: float,
    z_center: float = 0.0,
    z_spacing: float = None) -> Grid2D:
    """Builds the cell-centered solver window around the waveguide.
    """
    return Grid2D.uniform(
        rho_center=geometry.rho_w,
        rho_width=window_rho,
        z_bottom=z_center - window_z / 2,
        z_top=z_center + window_z / 2,
        spacing=spacing,
        z_spacing=z_spacing)


def check_window(geometry: RingGeometry, grid: Grid2D, margin: float = MIN_WINDOW_MARGIN) -> None:
    """Ensures the window holds the core plus `margin` on every side.

    Raises:
        `GridSizingError`: The window is too small.
    """
    rho_lo = grid.rho_samples[0] - grid.d_rho / 2
    rho_hi = grid.rho_samples[-1] + grid.d_rho / 2
    z_lo = grid.z_samples[0] - grid.d_z / 2
    z_hi = grid.z_samples[-1] + grid.d_z / 2
    need = {
        "rho min": (rho_lo, geometry.rho_w - geometry.width / 2 - margin, -1),
        "rho max": (rho_hi, geometry.rho_w + geometry.width / 2 + margin, 1),
        "z min": (z_lo, -geometry.height - margin, -1),
        "z max": (z_hi, margin, 1),
    }
    problems = []
    for side, (edge, required, direction) in need.items():
        if direction * (edge - required) < -WINDOW_TOLERANCE:
            problems.append(
                f"{side} edge at {edge * 1e6:.3f} um, needs {required * 1e6:.3f} um")
    if problems:
        raise GridSizingError(
            f"Grid window too small for a {geometry.width * 1e6:.3f} x "
            f"{geometry.height * 1e6:.3f} um core with {margin * 1e6:.2f} um margin: "
            + "; ".join(problems) + ".")


def build_epsilon_map(geometry: RingGeometry, grid: Grid2D, wavelength: float) -> Grid2D:
    """Samples the relative permittivity at every cell center.

    The core fills [rho_w - W/2, rho_w + W/2] x [-H, 0]. The membrane
    layers extend across the whole window beneath z = -H, stacked
    downward from the layer touching the core. Everything else holds
    the superstrate.

    Args:
        geometry (`RingGeometry`): The resonator cross-section.

        grid (`Grid2D`): Sampling window; its values are ignored.

        wavelength (float): Vacuum wavelength in m. Indices are
            per-wavelength constants, so this only labels the map.

    Returns:
        (`Grid2D`): eps = n^2 on the same sampling.

    Raises:
        `GridSizingError`: The window does not contain the core with
            the minimum margin.
    """
    check_window(geometry, grid)

    rho = grid.rho_samples[:, None]
    z = grid.z_samples[None, :]
    eps = np.full(grid.shape, geometry.stack.superstrate_index ** 2)

    top = -geometry.height
    for thickness, index in reversed(geometry.stack.layers):
        bottom = top - thickness
        inside = (z >= bottom) & (z < top)
        eps = np.where(np.broadcast_to(inside, grid.shape), index ** 2, eps)
        top = bottom

    core = (
        (rho >= geometry.rho_w - geometry.width / 2)
        & (rho < geometry.rho_w + geometry.width / 2)
        & (z >= -geometry.height)
        & (z < 0))
    eps = np.where(core, geometry.core_index ** 2, eps)
    return grid.with_values(eps)


def convert_polarizability(alpha_au: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Converts a polarizability from atomic units to C^2 m^2 / J.
    """
    return alpha_au * ATOMIC_POLARIZABILITY_UNIT
