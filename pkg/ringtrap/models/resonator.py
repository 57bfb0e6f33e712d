"""Coupled-mode state of a back-scattering-split resonance and its drives.
"""

import numpy as np
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

PLUS_PORT = 'plus'
MINUS_PORT = 'minus'

ZERO_VECTOR_SHIFT_GOAL = 'zero-vector-shift'
ZERO_LATTICE_GOAL = 'zero-lattice'
BOTH_GOAL = 'both'


@dataclass(frozen=True)
class ResonatorParams:
    """One ring resonance in angular-frequency units.

    Attributes:
        omega0 (float): Bare resonance, rad/s.

        kappa_i (float): Intrinsic loss rate, rad/s.

        kappa_c (float): Bus coupling rate, rad/s.

        beta (float): Coherent back-scattering rate, rad/s.

        xi (float): Scattering phase, rad.
    """
    omega0: float
    kappa_i: float
    kappa_c: float
    beta: float
    xi: float = 0.0

    def __post_init__(self) -> None:
        if self.kappa_i < 0 or self.kappa_c < 0:
            raise ValueError("Loss rates must be non-negative.")
        if self.beta < 0:
            raise ValueError("Back-scattering rate must be non-negative.")

    @property
    def kappa(self) -> float:
        return self.kappa_i + self.kappa_c

    @property
    def quality_factor(self) -> float:
        return self.omega0 / self.kappa if self.kappa > 0 else float("inf")

    @staticmethod
    def from_total_kappa(
        omega0: float,
        kappa: float,
        beta: float,
        kappa_c: float = 0.0,
        xi: float = 0.0) -> "ResonatorParams":
        """Builds parameters from a total loss rate and a coupling rate.
        """
        return ResonatorParams(omega0, kappa - kappa_c, kappa_c, beta, xi)


@dataclass(frozen=True)
class DriveTone:
    """A laser tone injected from one end of the bus waveguide.

    Attributes:
        port (str): "plus" or "minus".

        power (float): Bus power, W.

        omega (float): Angular frequency, rad/s.
    """
    port: str
    power: float
    omega: float

    def __post_init__(self) -> None:
        if self.port not in (PLUS_PORT, MINUS_PORT):
            raise ValueError(f"Unknown port '{self.port}'.")
        if self.power < 0:
            raise ValueError("Tone power must be non-negative.")

    @property
    def sign(self) -> int:
        return 1 if self.port == PLUS_PORT else -1


@dataclass(frozen=True)
class DriveResponse:
    """Intracavity response to one tone.

    Attributes:
        alpha (complex): kappa/2 + i detuning, rad/s.

        I_buildup (float): Energy build-up factor.

        I_tilde (float): Vector-shift build-up factor.

        visibility_V (float): Standing-wave visibility per unit v.

        xi_pm (float): Standing-wave phase xi +/- arg(alpha), rad.

        sign (int): +1 for the plus port, -1 for the minus port.

        omega (float): Tone angular frequency, rad/s.
    """
    alpha: complex
    I_buildup: float
    I_tilde: float
    visibility_V: float
    xi_pm: float
    sign: int
    omega: float = 0.0

    def scaled(self, factor: float) -> "DriveResponse":
        """The response to the same tone at `factor` times the power.
        """
        return DriveResponse(
            self.alpha,
            self.I_buildup * factor,
            self.I_tilde * factor,
            self.visibility_V,
            self.xi_pm,
            self.sign,
            self.omega)


@dataclass(frozen=True)
class SchemeTone:
    """A tone selected by an elimination scheme with its predicted response
    per unit build-up scale.
    """
    port: str
    detuning: float
    I_buildup: float
    I_tilde: float
    visibility_V: float
    xi_pm: float


@dataclass(frozen=True)
class SchemeResult:
    """The tones an elimination scheme prescribes.

    Attributes:
        label (str): Scheme identifier ("a", "b" or "c").

        goal (str): The requested goal.

        tones (list of `SchemeTone`): Selected tones, predicted at
            unit drive (kappa_c P / hbar omega = 1 s^-2).

        combined_visibility (float): Visibility of the incoherent
            sum, per unit v.
    """
    label: str
    goal: str
    tones: Tuple[SchemeTone, ...]
    combined_visibility: float


@dataclass(frozen=True)
class SpectrumFitResult:
    """Parameters recovered from a scattered-intensity spectrum.

    Attributes:
        omega0 (float): Bare resonance, rad/s.

        kappa (float): Total loss rate, rad/s.

        beta (float): Back-scattering rate, rad/s.

        amplitude (float): Peak counts above baseline.

        baseline (float): Constant background counts.

        slope (float): Baseline slope in counts per rad/s (0 when the
            slope term is off).

        uncertainties (dict of str to float): One-sigma errors in the
            parameter units above.

        covariance (`np.ndarray`): Parameter covariance in fit units
            (GHz and counts).

        residual_norm (float): Euclidean norm of the residuals.

        n_evaluations (int): Model evaluations used.

        parameter_names (list of str): Order of the covariance rows.
    """
    omega0: float
    kappa: float
    beta: float
    amplitude: float
    baseline: float
    slope: float
    uncertainties: Dict[str, float]
    covariance: np.ndarray = field(compare=False)
    residual_norm: float = 0.0
    n_evaluations: int = 0
    parameter_names: List[str] = field(default_factory=list)

    @property
    def quality_factor(self) -> float:
        return self.omega0 / self.kappa

    def to_params(self, kappa_c: float = 0.0, xi: float = 0.0) -> ResonatorParams:
        """Resonator parameters with an externally supplied coupling rate.
        """
        return ResonatorParams.from_total_kappa(
            self.omega0, self.kappa, self.beta, kappa_c=kappa_c, xi=xi)