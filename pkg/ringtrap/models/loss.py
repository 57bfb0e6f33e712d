"""Surface roughness statistics and quality-factor budgets.
"""

from dataclasses import dataclass
from ringtrap.constants import Q_CEILING
from typing import Dict, Optional


@dataclass(frozen=True)
class RoughnessSpec:
    """RMS roughness and correlation length of each waveguide surface, in m.
    """
    sigma_pm: float
    L_pm: float
    sigma_t: float
    L_t: float
    sigma_b: float
    L_b: float

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"Roughness {name} must be non-negative.")

    def as_dict(self) -> Dict[str, float]:
        return {
            "sigma_pm": self.sigma_pm,
            "L_pm": self.L_pm,
            "sigma_t": self.sigma_t,
            "L_t": self.L_t,
            "sigma_b": self.sigma_b,
            "L_b": self.L_b,
        }

    def scaled_sigma(self, factor: float) -> "RoughnessSpec":
        return RoughnessSpec(
            self.sigma_pm * factor, self.L_pm,
            self.sigma_t * factor, self.L_t,
            self.sigma_b * factor, self.L_b)


@dataclass(frozen=True)
class QValue:
    """A quality factor that may lie above the reporting ceiling.
    """
    value: float
    above_ceiling: bool = False

    @staticmethod
    def from_loss_rate(inverse_q: float) -> "QValue":
        """Builds a Q from 1/Q, flagging vanishing loss.
        """
        if inverse_q <= 1.0 / Q_CEILING:
            return QValue(Q_CEILING, True)
        return QValue(1.0 / inverse_q, False)

    @property
    def inverse(self) -> float:
        return 0.0 if self.above_ceiling else 1.0 / self.value


@dataclass(frozen=True)
class QBreakdown:
    """Per-channel quality factors and their harmonic combination.

    Channels left as None are excluded from the total.
    """
    q_ss_top: Optional[QValue]
    q_ss_bottom: Optional[QValue]
    q_ss_sidewalls: Optional[QValue]
    q_bend: Optional[QValue]
    q_absorption: Optional[QValue]
    q_total: QValue

    @property
    def q_ss(self) -> QValue:
        """Surface-scattering channels combined.
        """
        parts = [q for q in (self.q_ss_top, self.q_ss_bottom, self.q_ss_sidewalls) if q is not None]
        return QValue.from_loss_rate(sum(q.inverse for q in parts))

    def as_dict(self) -> Dict[str, Optional[float]]:
        def out(q: Optional[QValue]):
            return None if q is None else q.value
        return {
            "q_ss_top": out(self.q_ss_top),
            "q_ss_bottom": out(self.q_ss_bottom),
            "q_ss_sidewalls": out(self.q_ss_sidewalls),
            "q_ss": self.q_ss.value,
            "q_bend": out(self.q_bend),
            "q_absorption": out(self.q_absorption),
            "q_total": self.q_total.value,
            "q_total_above_ceiling": self.q_total.above_ceiling,
        }
