"""Resonator drives and sampling shared by the commands that build the
two-color evanescent trap.
"""

import numpy as np
from dataclasses import dataclass
from logging import Logger
from ringtrap.models.config import RunConfig
from ringtrap.models.errors import ConfigError
from ringtrap.models.fields import ModeDiagnostics, ModeField
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.resonator import (
    DriveResponse,
    ResonatorParams,
    SchemeResult,
    ZERO_LATTICE_GOAL,
    ZERO_VECTOR_SHIFT_GOAL
)
from ringtrap.physics.mode_solver import mode_diagnostics
from ringtrap.physics.resonator import (
    drive_response,
    elimination_scheme,
    required_power,
    scheme_drive_tones
)
from ringtrap.physics.trap_composer import TrapAxes, lattice_period, trap_axes
from typing import Dict, List, Optional, Tuple

RED = 'red'
BLUE = 'blue'


@dataclass(frozen=True)
class TwoColorSetup:
    """Everything needed to compose the two-color trap.

    Attributes:
        mode_r (`ModeField`): Red-detuned mode.

        mode_b (`ModeField`): Blue-detuned mode.

        diag_r (`ModeDiagnostics`): Red mode diagnostics.

        diag_b (`ModeDiagnostics`): Blue mode diagnostics.

        scheme_r (`SchemeResult`): Red tones (zero vector shift).

        scheme_b (`SchemeResult`): Blue tones (zero lattice).

        tones_r (list of `DriveResponse`): Red responses.

        tones_b (list of `DriveResponse`): Blue responses.

        powers_r (list of float): Red bus powers, W.

        powers_b (list of float): Blue bus powers, W.

        axes (`TrapAxes`): One lattice period of sampling.
    """
    mode_r: ModeField
    mode_b: ModeField
    diag_r: ModeDiagnostics
    diag_b: ModeDiagnostics
    scheme_r: SchemeResult
    scheme_b: SchemeResult
    tones_r: List[DriveResponse]
    tones_b: List[DriveResponse]
    powers_r: List[float]
    powers_b: List[float]
    axes: TrapAxes

    @property
    def lattice_period(self) -> float:
        return lattice_period(self.mode_r)


def resonator_params(config: RunConfig, omega0: float) -> ResonatorParams:
    """The configured resonance rates around a mode frequency.
    """
    try:
        return ResonatorParams.from_total_kappa(
            omega0,
            config.get("resonator", "kappa"),
            config.get("resonator", "beta"),
            kappa_c=config.get("resonator", "kappa_c"),
            xi=config.get("resonator", "xi"))
    except ValueError as e:
        raise ConfigError(str(e), key_path="resonator.kappa_c")


def tone_powers(config: RunConfig, color: str, params: ResonatorParams, scheme: SchemeResult) -> List[float]:
    """Per-tone bus powers from a build-up target or a fixed power.

    `trap.<color>_buildup` is the energy build-up of each tone and wins
    over `trap.<color>_power`, the bus power of each tone.
    """
    buildup = config.get("trap", f"{color}_buildup")
    if buildup is not None:
        return [required_power(params, tone.detuning, buildup) for tone in scheme.tones]
    power = config.get("trap", f"{color}_power")
    if power is not None:
        return [power] * len(scheme.tones)
    raise ConfigError(
        f"Give a per-tone build-up or bus power for the {color} drive.",
        key_path=f"trap.{color}_buildup")


def scheme_rows(color: str, scheme: SchemeResult, powers: List[float], responses: List[DriveResponse]) -> List[Dict]:
    """Table rows describing each tone of a scheme.
    """
    two_pi = 2 * np.pi
    return [
        {
            "color": color,
            "scheme": scheme.label,
            "goal": scheme.goal,
            "port": tone.port,
            "detuning_over_2pi_GHz": tone.detuning / two_pi / 1e9,
            "power_uW": power * 1e6,
            "I_buildup": response.I_buildup,
            "I_tilde": response.I_tilde,
            "visibility_V": response.visibility_V,
        }
        for tone, power, response in zip(scheme.tones, powers, responses)
    ]


def prepare_two_color(
    config: RunConfig,
    geometry: RingGeometry,
    mode_r: ModeField,
    mode_b: ModeField,
    logger: Optional[Logger] = None) -> TwoColorSetup:
    """Selects the drive schemes, sets the tone powers and samples one
    lattice period above the waveguide.

    Red tones cancel the vector shift; blue tones cancel their
    standing wave so the repulsive wall is smooth along the ring.

    Raises:
        `ConfigError`: A drive strength is missing.
        `SchemeInfeasibleError`: A scheme cannot be realized.
    """
    red_sign = config.get("resonator", "red_detuning_sign")
    responses: Dict[str, Tuple] = {}
    for color, mode, goal in ((RED, mode_r, ZERO_VECTOR_SHIFT_GOAL), (BLUE, mode_b, ZERO_LATTICE_GOAL)):
        params = resonator_params(config, mode.omega)
        scheme = elimination_scheme(params, goal, red_sign, logger=logger)
        powers = tone_powers(config, color, params, scheme)
        drives = scheme_drive_tones(params, scheme, powers)
        responses[color] = (scheme, powers, [drive_response(params, d) for d in drives])
        if logger:
            logger.info(
                f"{color.capitalize()} scheme {scheme.label}: {len(powers)} tone(s), "
                f"total bus power {sum(powers) * 1e6:.1f} uW.")

    axes = trap_axes(
        geometry,
        config.get("trap", "window_rho"),
        config.get("trap", "z_top"),
        config.get("trap", "spacing"),
        l_period=lattice_period(mode_r),
        l_samples=config.get("trap", "l_samples"))
    scheme_r, powers_r, tones_r = responses[RED]
    scheme_b, powers_b, tones_b = responses[BLUE]
    return TwoColorSetup(
        mode_r=mode_r,
        mode_b=mode_b,
        diag_r=mode_diagnostics(mode_r),
        diag_b=mode_diagnostics(mode_b),
        scheme_r=scheme_r,
        scheme_b=scheme_b,
        tones_r=tones_r,
        tones_b=tones_b,
        powers_r=powers_r,
        powers_b=powers_b,
        axes=axes)
