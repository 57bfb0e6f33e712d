"""Atomic species data used by the light-shift and coupling calculations.
"""

import json
import math
from dataclasses import dataclass, field
from ringtrap.constants import ATOMIC_POLARIZABILITY_UNIT, SPECIES_FPATH
from typing import Dict, Optional


@dataclass(frozen=True)
class PolarizabilitySet:
    """Dynamic polarizabilities at one wavelength, in atomic units.
    """
    alpha0: float
    alpha1: float
    alpha2: float = 0.0

    @property
    def alpha0_si(self) -> float:
        return self.alpha0 * ATOMIC_POLARIZABILITY_UNIT

    @property
    def alpha1_si(self) -> float:
        return self.alpha1 * ATOMIC_POLARIZABILITY_UNIT

    @property
    def vector_ratio(self) -> float:
        return self.alpha1 / self.alpha0


@dataclass(frozen=True)
class AtomSpecies:
    """An atom with its D1 line, ground-state polarizability table and
    surface interaction coefficients.

    Attributes:
        name (str): Species label.

        gamma (float): Excited-state decay rate, rad/s.

        lambda_d1 (float): D1 transition wavelength, m.

        F (int): Ground-state total angular momentum quantum number.

        polarizabilities (dict of float to `PolarizabilitySet`):
            Table keyed by wavelength in m.

        c4_over_h (float): Casimir-Polder coefficient C4/h, Hz m^4.

        lambda_bar (float): Casimir-Polder crossover length, m.

        mass (float): Atomic mass, kg.

        ground_state_l (int): Orbital angular momentum of the ground
            state; S states carry no tensor polarizability.
    """
    name: str
    gamma: float
    lambda_d1: float
    F: int
    c4_over_h: float
    lambda_bar: float
    mass: float
    polarizabilities: Dict[float, PolarizabilitySet] = field(default_factory=dict)
    ground_state_l: int = 0

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError("Species decay rate must be positive.")
        if self.c4_over_h <= 0:
            raise ValueError("Casimir-Polder coefficient must be positive.")
        if self.ground_state_l == 0:
            for wavelength, pol in self.polarizabilities.items():
                if pol.alpha2 != 0:
                    raise ValueError(
                        f"S-state species '{self.name}' cannot carry a tensor "
                        f"polarizability (found at {wavelength:.4g} m).")

    def __hash__(self) -> int:
        return hash((self.name, self.gamma, self.lambda_d1, self.F))

    def polarizability(
        self,
        wavelength: float,
        rel_tol: float = 1e-4) -> PolarizabilitySet:
        """Looks up the polarizability entry at a trap wavelength.

        Args:
            wavelength (float): Wavelength in m.

            rel_tol (float): Relative tolerance when matching table
                wavelengths. Defaults to 1e-4.

        Returns:
            (`PolarizabilitySet`): The matching entry.

        Raises:
            KeyError: No entry within tolerance.
        """
        for key, pol in self.polarizabilities.items():
            if abs(key - wavelength) <= rel_tol * wavelength:
                return pol
        known = ", ".join(f"{k * 1e9:.1f} nm" for k in sorted(self.polarizabilities))
        raise KeyError(
            f"No polarizability entry for {self.name} at "
            f"{wavelength * 1e9:.2f} nm. Known wavelengths: {known}.")


def load_species(name: str, fpath: Optional[str] = None) -> AtomSpecies:
    """Loads a species from the bundled species table.

    Args:
        name (str): Species key (e.g., "cesium").

        fpath (str): Alternate JSON table path. Defaults to the
            bundled `species.json`.

    Returns:
        (`AtomSpecies`): The species.
    """
    with open(fpath or SPECIES_FPATH, "r", encoding="utf-8") as stream:
        table = json.load(stream)
    try:
        entry = table[name]
    except KeyError:
        raise KeyError(f"Unknown atom species '{name}'. "
            f"Available: {', '.join(sorted(table))}.")

    polarizabilities = {
        float(row["wavelength_nm"]) * 1e-9: PolarizabilitySet(
            alpha0=float(row["alpha0_au"]),
            alpha1=float(row["alpha1_au"]),
            alpha2=float(row.get("alpha2_au", 0.0)))
        for row in entry["polarizabilities"]
    }
    return AtomSpecies(
        name=name,
        gamma=2 * math.pi * float(entry["gamma_over_2pi_MHz"]) * 1e6,
        lambda_d1=float(entry["lambda_d1_nm"]) * 1e-9,
        F=int(entry["F"]),
        c4_over_h=float(entry["c4_over_h_Hz_um4"]) * 1e-24,
        lambda_bar=float(entry["lambda_bar_nm"]) * 1e-9,
        mass=float(entry["mass_kg"]),
        polarizabilities=polarizabilities,
        ground_state_l=int(entry.get("ground_state_l", 0)))
