"""Sampled trap potentials and trap analysis reports.
"""

import numpy as np
from dataclasses import dataclass, field
from ringtrap.constants import K_B
from typing import Optional, Tuple


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    """A potential U(rho, l, z) in joules.

    Attributes:
        rho_samples (`np.ndarray`): Uniform rho coordinates, m.

        l_samples (`np.ndarray`): Uniform arc-length coordinates, m.

        z_samples (`np.ndarray`): Uniform z coordinates, m.

        values (`np.ndarray`): Array of shape (n_rho, n_l, n_z).

        terms (tuple of str): Labels of the additive contributions.

        periodic_l (bool): Whether the l axis wraps (one lattice period).

        mask (`np.ndarray`): Boolean array, True where samples are
            excluded from minimum and saddle searches.
    """
    rho_samples: np.ndarray
    l_samples: np.ndarray
    z_samples: np.ndarray
    values: np.ndarray
    terms: Tuple[str, ...] = ()
    periodic_l: bool = False
    mask: Optional[np.ndarray] = field(default=None)

    def __post_init__(self) -> None:
        for name in ("rho_samples", "l_samples", "z_samples"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size < 1:
                raise ValueError(f"{name} must be a non-empty 1-D array.")
            if axis.size > 1 and np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be strictly increasing.")
            axis.setflags(write=False)
            object.__setattr__(self, name, axis)
        expected = (self.rho_samples.size, self.l_samples.size, self.z_samples.size)
        values = np.array(self.values, dtype=float)
        if values.shape != expected:
            raise ValueError(f"Potential values have shape {values.shape}, expected {expected}.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        mask = np.zeros(expected, dtype=bool) if self.mask is None else np.array(self.mask, dtype=bool)
        if mask.shape != expected:
            raise ValueError("Potential mask shape does not match the values.")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.values.shape

    @property
    def spacings(self) -> Tuple[float, float, float]:
        def step(axis):
            return float(axis[1] - axis[0]) if axis.size > 1 else 0.0
        return step(self.rho_samples), step(self.l_samples), step(self.z_samples)

    def same_sampling(self, other: "PotentialGrid") -> bool:
        return all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in (
                (self.rho_samples, other.rho_samples),
                (self.l_samples, other.l_samples),
                (self.z_samples, other.z_samples))
        ) and self.periodic_l == other.periodic_l

    def with_values(
        self,
        values: np.ndarray,
        terms: Tuple[str, ...],
        mask: Optional[np.ndarray] = None) -> "PotentialGrid":
        return PotentialGrid(
            self.rho_samples,
            self.l_samples,
            self.z_samples,
            values,
            terms,
            self.periodic_l,
            self.mask if mask is None else mask)

    def coordinates(self, index: Tuple[int, int, int]) -> Tuple[float, float, float]:
        i, j, k = index
        return (
            float(self.rho_samples[i]),
            float(self.l_samples[j]),
            float(self.z_samples[k]))


@dataclass(frozen=True)
class ShiftField:
    """Scalar and vector light-shift contributions of a set of tones.

    Attributes:
        scalar (`PotentialGrid`): Scalar shift, J.

        vector_diag (`PotentialGrid`): Coefficient of F_z/F, J.

        vector_offdiag (`PotentialGrid`): Coefficient of (F+ + F-)/2F, J.

        wavelength (float): Drive wavelength, m.

        provenance (tuple of str): Tone descriptions.
    """
    scalar: PotentialGrid
    vector_diag: PotentialGrid
    vector_offdiag: PotentialGrid
    wavelength: float
    provenance: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TrapReport:
    """Location, depth and curvature of a trap minimum.

    Attributes:
        center (tuple of float): (rho_t, l_t, z_t) in m.

        value (float): Potential at the center, J.

        depth (float): Barrier height U(saddle) - U(center), J.

        saddle (tuple of float): (rho_s, z_s) in m of the lowest escape
            point through the rho or z faces of the grid.

        frequencies (tuple of float): Angular trap frequencies along the
            principal axes ordered (rho', l, z'), rad/s.

        principal_axes (tuple of tuples): Unit vectors in (rho, l, z)
            matching `frequencies`.

        tilt_angle (float): Angle of the rho' axis from rho in the
            rho-z plane, rad.

        site_barrier (float): U(lowest pass to another local minimum)
            - U(center), J. None when no other minimum is reachable.
    """
    center: Tuple[float, float, float]
    value: float
    depth: float
    saddle: Tuple[float, float]
    frequencies: Tuple[float, float, float]
    principal_axes: Tuple[Tuple[float, float, float], ...]
    tilt_angle: float
    site_barrier: Optional[float] = None

    @property
    def depth_uK(self) -> float:
        return self.depth / K_B * 1e6

    @property
    def site_barrier_uK(self) -> float:
        """Site barrier in uK, NaN when there is none.
        """
        if self.site_barrier is None:
            return float("nan")
        return self.site_barrier / K_B * 1e6

    @property
    def frequencies_kHz(self) -> Tuple[float, float, float]:
        return tuple(f / (2 * np.pi) / 1e3 for f in self.frequencies)
