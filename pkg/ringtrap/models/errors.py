"""Exceptions raised across the toolkit. Each class carries the process
exit code the command-line front end reports for it.
"""

from ringtrap.constants import (
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
    EXIT_PHYSICS_DOMAIN_ERROR
)
from typing import Optional, Tuple


class RingtrapError(Exception):
    """Base class for all toolkit errors.

    `stage` names the workflow stage that failed once a workflow has
    prefixed the message with it.
    """
    exit_code: int = EXIT_NUMERICAL_ERROR
    stage: Optional[str] = None


class ConfigError(RingtrapError):
    """A run configuration could not be read or validated.
    """
    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, message: str, key_path: Optional[str] = None) -> None:
        """Initializes a new instance of a `ConfigError`.

        Args:
            message (str): The failure description.

            key_path (str): The dotted path of the offending key,
                if any (e.g., "geometry.width_um").

        Returns:
            None
        """
        self.key_path = key_path
        prefix = f"{key_path}: " if key_path else ""
        super().__init__(f"{prefix}{message}")


class PhysicsDomainError(RingtrapError):
    """The inputs are valid but ask for something outside the
    physical model's domain.
    """
    exit_code = EXIT_PHYSICS_DOMAIN_ERROR


class GridSizingError(PhysicsDomainError):
    """The computational window does not contain the structure
    with the required margin.
    """


class CutoffError(PhysicsDomainError):
    """No guided mode exists above the cladding index.
    """


class RadiativeError(PhysicsDomainError):
    """The mode index lies at or below the cladding index.
    """


class DielectricPositionError(PhysicsDomainError):
    """A quantity defined in vacuum was requested inside a dielectric.
    """


class SchemeInfeasibleError(PhysicsDomainError):
    """A drive scheme cannot reach its goal for the given resonator.
    """


class OpenTrapError(PhysicsDomainError):
    """The potential has no bound minimum.
    """

    def __init__(
        self,
        message: str,
        escape_direction: Optional[Tuple[float, float, float]] = None) -> None:
        """Initializes a new instance of an `OpenTrapError`.

        Args:
            message (str): The failure description.

            escape_direction (tuple of float): Unit vector in
                (rho, l, z) along which the potential keeps
                decreasing, if known.

        Returns:
            None
        """
        self.escape_direction = escape_direction
        suffix = ""
        if escape_direction is not None:
            suffix = " Escape direction (rho, l, z): " \
                f"({escape_direction[0]:.3f}, {escape_direction[1]:.3f}, " \
                f"{escape_direction[2]:.3f})."
        super().__init__(f"Open trap. {message}{suffix}")


class TransportFailureError(PhysicsDomainError):
    """The tracked trap minimum vanished during a transport schedule.
    """

    def __init__(self, message: str, step: int) -> None:
        self.step = step
        super().__init__(f"Transport failed at step {step}. {message}")


class NumericalConvergenceError(RingtrapError):
    """An iterative solver or fit did not converge.
    """
    exit_code = EXIT_NUMERICAL_ERROR

    def __init__(
        self,
        message: str,
        iterations: Optional[int] = None,
        best_so_far: Optional[dict] = None) -> None:
        self.iterations = iterations
        self.best_so_far = best_so_far
        details = ""
        if iterations is not None:
            details += f" Iterations: {iterations}."
        if best_so_far:
            details += f" Best so far: {best_so_far}."
        super().__init__(f"{message}{details}")
