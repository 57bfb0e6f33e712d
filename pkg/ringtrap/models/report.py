"""Cavity QED figures of merit for one geometry and atom position.
"""

import numpy as np
from dataclasses import dataclass
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.loss import QBreakdown
from typing import Dict, Optional, Tuple


@dataclass(frozen=True)
class CqedReport:
    """Mode area, coupling and cooperativity.

    Attributes:
        mode_area (float): A_m at the atom, m^2.

        mode_volume (float): V_m = A_m L, m^3.

        g (float): Atom-photon coupling, rad/s.

        kappa (float): Total photon loss rate, rad/s.

        gamma (float): Atomic decay rate, rad/s.

        cooperativity (float): 4 g^2 / (kappa gamma).

        q_breakdown (`QBreakdown`): Loss budget behind kappa, if any.

        geometry (`RingGeometry`): The resonator.

        atom_position (tuple of float): (rho_a, z_a) in m.

        omega (float): Mode angular frequency, rad/s.

        n_eff (float): Effective index of the mode.
    """
    mode_area: float
    mode_volume: float
    g: float
    kappa: float
    gamma: float
    cooperativity: float
    q_breakdown: Optional[QBreakdown]
    geometry: RingGeometry
    atom_position: Tuple[float, float]
    omega: float
    n_eff: float

    @property
    def vacuum_rabi_frequency(self) -> float:
        return 2 * self.g

    @property
    def quality_factor(self) -> float:
        return self.omega / self.kappa

    def as_row(self) -> Dict[str, float]:
        """Flat, unit-labelled record for tabular output.
        """
        two_pi = 2 * np.pi
        row = {
            "W_um": self.geometry.width * 1e6,
            "H_um": self.geometry.height * 1e6,
            "R_um": self.geometry.radius * 1e6,
            "n_eff": self.n_eff,
            "Am_um2": self.mode_area * 1e12,
            "Vm_um3": self.mode_volume * 1e18,
            "g_over_2pi_MHz": self.g / two_pi / 1e6,
            "kappa_over_2pi_MHz": self.kappa / two_pi / 1e6,
            "Q_total": self.quality_factor,
            "C": self.cooperativity,
        }
        if self.q_breakdown is not None:
            row["Q_ss"] = self.q_breakdown.q_ss.value
            row["Q_bend"] = (
                self.q_breakdown.q_bend.value if self.q_breakdown.q_bend is not None
                else float("nan"))
        return row
