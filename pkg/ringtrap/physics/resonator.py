"""Coupled-mode response of a resonance split by coherent back-scattering.

A tone launched from one end of the bus excites both circulating modes.
The intracavity field is a partial standing wave whose energy build-up,
vector-shift build-up and corrugation visibility all follow from the
complex detuning alpha = kappa/2 + i detuning and the back-scattering
rate beta.
"""

import numpy as np
from itertools import combinations
from logging import Logger
from ringtrap.constants import HBAR, MIN_TONE_SEPARATION, NORMALIZATION_TOLERANCE
from ringtrap.models.errors import PhysicsDomainError, SchemeInfeasibleError
from ringtrap.models.fields import ModeDiagnostics, ModeField, StandingModeField
from ringtrap.models.geometry import Grid2D
from ringtrap.models.resonator import (
    BOTH_GOAL,
    MINUS_PORT,
    PLUS_PORT,
    ZERO_LATTICE_GOAL,
    ZERO_VECTOR_SHIFT_GOAL,
    DriveResponse,
    DriveTone,
    ResonatorParams,
    SchemeResult,
    SchemeTone
)
from ringtrap.physics.mode_solver import mode_diagnostics
from scipy.optimize import brentq, minimize_scalar
from typing import Iterable, List, Optional, Sequence, Tuple, Union

GOALS = (ZERO_VECTOR_SHIFT_GOAL, ZERO_LATTICE_GOAL, BOTH_GOAL)
ROOT_XTOL = 1e-14


def _check_kappa(params: ResonatorParams) -> None:
    if params.kappa <= 0:
        raise PhysicsDomainError(
            "Total loss rate kappa must be positive to evaluate a drive response.")


def buildup_factors(
    kappa: float,
    beta: float,
    detuning: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Energy and vector-shift build-up factors per unit drive.

    Args:
        kappa (float): Total loss rate.

        beta (float): Back-scattering rate, same units as `kappa`.

        detuning (float or `np.ndarray`): Detuning from the bare
            resonance, same units.

    Returns:
        ((`np.ndarray`, `np.ndarray`)): (|a|^2 + b^2, |a|^2 - b^2),
            each divided by |a^2 + b^2|^2, in units of 1 / kappa^2.
    """
    alpha = kappa / 2 + 1j * np.asarray(detuning, dtype=float)
    mag2 = np.abs(alpha) ** 2
    denominator = np.abs(alpha ** 2 + beta ** 2) ** 2
    return (mag2 + beta ** 2) / denominator, (mag2 - beta ** 2) / denominator


def peak_detuning(params: ResonatorParams) -> float:
    """Non-negative detuning of the build-up maximum.

    The build-up is even in the detuning. It peaks on resonance when
    beta <= kappa / (2 sqrt 3), and at +/- sqrt(2 beta sqrt(S) - S) with
    S = kappa^2 / 4 + beta^2 otherwise.
    """
    s = params.kappa ** 2 / 4 + params.beta ** 2
    return float(np.sqrt(max(0.0, 2 * params.beta * np.sqrt(s) - s)))


def _response(
    params: ResonatorParams,
    detuning: float,
    sign: int,
    drive: float,
    omega: float) -> DriveResponse:
    alpha = params.kappa / 2 + 1j * detuning
    f, f_tilde = buildup_factors(params.kappa, params.beta, detuning)
    mag = abs(alpha)
    visibility = 2 * mag * params.beta / (mag ** 2 + params.beta ** 2)
    return DriveResponse(
        alpha=complex(alpha),
        I_buildup=float(drive * f),
        I_tilde=float(drive * f_tilde),
        visibility_V=float(visibility),
        xi_pm=float(params.xi + sign * np.angle(alpha)),
        sign=sign,
        omega=omega)


def drive_response(params: ResonatorParams, tone: DriveTone) -> DriveResponse:
    """Intracavity build-up, visibility and standing-wave phase for one tone.

    The model holds for detunings much smaller than the free spectral
    range; this is not checked.

    Args:
        params (`ResonatorParams`): The resonance.

        tone (`DriveTone`): The tone and the bus port it enters.

    Returns:
        (`DriveResponse`): The response. Build-up factors scale with
            kappa_c P / (hbar omega).

    Raises:
        `PhysicsDomainError`: The total loss rate is zero.
    """
    _check_kappa(params)
    drive = params.kappa_c * tone.power / (HBAR * tone.omega)
    return _response(params, tone.omega - params.omega0, tone.sign, drive, tone.omega)


def mode_amplitudes(params: ResonatorParams, tone: DriveTone) -> Tuple[complex, complex]:
    """Counter-clockwise and clockwise mode amplitudes for one tone through
    a lossless coupler K = i sqrt(kappa_c).

    |a+|^2 + |a-|^2 is the intracavity photon number, equal to the
    energy build-up factor of `drive_response`.
    """
    _check_kappa(params)
    amplitude = np.sqrt(tone.power / (HBAR * tone.omega))
    s_plus = amplitude if tone.port == PLUS_PORT else 0.0
    s_minus = amplitude if tone.port == MINUS_PORT else 0.0
    k = 1j * np.sqrt(params.kappa_c)
    alpha = params.kappa / 2 + 1j * (tone.omega - params.omega0)
    beta_plus = params.beta * np.exp(1j * params.xi)
    beta_minus = params.beta * np.exp(-1j * params.xi)
    denominator = alpha ** 2 + params.beta ** 2
    a_plus = k * (alpha * s_plus + 1j * beta_plus * s_minus) / denominator
    a_minus = k * (1j * beta_minus * s_plus + alpha * s_minus) / denominator
    return complex(a_plus), complex(a_minus)


def standing_wave_volume(
    mode: ModeField,
    response: DriveResponse,
    l_samples: Union[Sequence[float], np.ndarray],
    diag: Optional[ModeDiagnostics] = None) -> np.ndarray:
    """|E|^2 of a driven, back-scattering-mixed field on a (rho, l, z) grid.

    |E|^2 = I |E0|^2 [1 + sign V v sin(2 k l + xi_pm)]

    Args:
        mode (`ModeField`): A normalized mode at the tone frequency.

        response (`DriveResponse`): The tone's response.

        l_samples (array of float): Arc positions along the ring, m.

        diag (`ModeDiagnostics`): Precomputed diagnostics. Computed
            from `mode` when omitted.

    Returns:
        (`np.ndarray`): Intensity in V^2/m^2, shape (n_rho, n_l, n_z).
    """

    diag = diag or mode_diagnostics(mode)
    l_samples = np.asarray(l_samples, dtype=float)
    corrugation = np.sin(2 * mode.k * l_samples + response.xi_pm)
    modulation = 1 + response.sign * response.visibility_V \
        * diag.v_map.values[:, None, :] * corrugation[None, :, None]
    return response.I_buildup * mode.intensity[:, None, :] * modulation


def standing_wave_intensity(
    mode: ModeField,
    response: DriveResponse,
    l: float,
    diag: Optional[ModeDiagnostics] = None) -> Grid2D:
    """|E|^2 of the driven field on the cross-section at arc position `l`.
    """
    values = standing_wave_volume(mode, response, [l], diag)[:, 0, :]
    return mode.eps.with_values(values)


def mixed_mode_fields(
    mode: ModeField,
    params: ResonatorParams) -> Tuple[StandingModeField, StandingModeField]:
    """The two standing-wave normal modes of the split resonance.

    Each field is rescaled so its period-averaged energy integral
    equals hbar omega.

    Args:
        mode (`ModeField`): The travelling mode.

        params (`ResonatorParams`): Supplies the scattering phase xi.

    Returns:
        ((`StandingModeField`, `StandingModeField`)): E1 and E2.
    """
    fields = []
    for index in (1, 2):
        trial = StandingModeField(mode, params.xi, index, np.sqrt(2.0))
        ratio = trial.normalization_ratio()
        if ratio <= 0:
            raise PhysicsDomainError("Cannot normalize a mixed mode with zero energy.")
        fields.append(StandingModeField(mode, params.xi, index, np.sqrt(2.0 / ratio)))
    return fields[0], fields[1]


def model_spectrum(
    params: ResonatorParams,
    amplitude: float,
    baseline: float,
    omegas: Union[Sequence[float], np.ndarray],
    slope: float = 0.0) -> np.ndarray:
    """Scattered-intensity spectrum of the doublet.

    s(omega) = amplitude I(omega) / I_peak + baseline
               + slope (omega - omega0)

    Args:
        params (`ResonatorParams`): The resonance.

        amplitude (float): Peak counts above the baseline.

        baseline (float): Background counts.

        omegas (array of float): Angular frequencies, rad/s.

        slope (float): Baseline slope in counts per rad/s.

    Returns:
        (`np.ndarray`): Counts at each frequency.
    """
    _check_kappa(params)
    omegas = np.asarray(omegas, dtype=float)
    detuning = omegas - params.omega0
    f, _ = buildup_factors(params.kappa, params.beta, detuning)
    f_peak, _ = buildup_factors(params.kappa, params.beta, peak_detuning(params))
    return amplitude * f / f_peak + baseline + slope * detuning


def combined_visibility(
    I_plus: float,
    I_minus: float,
    V_plus: float,
    V_minus: float,
    delta_xi: float,
    same_port: bool = False) -> float:
    """Visibility of the incoherent sum of two standing waves.

    Tones entering opposite ports carry corrugations of opposite sign,
    so equal tones with equal phases cancel. Set `same_port` when both
    tones share a port.

    Args:
        I_plus (float): Build-up of the first tone.

        I_minus (float): Build-up of the second tone.

        V_plus (float): Visibility of the first tone.

        V_minus (float): Visibility of the second tone.

        delta_xi (float): Standing-wave phase difference, rad.

        same_port (bool): Whether both tones enter the same port.

    Returns:
        (float): The combined visibility, in the units of the inputs.
    """
    total = I_plus + I_minus
    if total <= 0:
        raise ValueError("Combined visibility needs a positive total build-up.")
    a = I_plus * V_plus
    b = I_minus * V_minus
    cross = 2 * a * b * np.cos(abs(delta_xi))
    square = a ** 2 + b ** 2 + (cross if same_port else -cross)
    return float(np.sqrt(max(square, 0.0)) / total)


def required_power(
    params: ResonatorParams,
    detuning: float,
    target_buildup: float,
    omega: Optional[float] = None) -> float:
    """Bus power giving an energy build-up `target_buildup` at `detuning`.

    Raises:
        `PhysicsDomainError`: kappa or kappa_c is zero.
    """
    _check_kappa(params)
    if params.kappa_c <= 0:
        raise PhysicsDomainError("A bus coupling rate kappa_c > 0 is needed to drive the ring.")
    omega = params.omega0 + detuning if omega is None else omega
    f, _ = buildup_factors(params.kappa, params.beta, detuning)
    return float(target_buildup * HBAR * omega / (params.kappa_c * f))


def ensure_incoherent(
    omegas: Iterable[float],
    min_separation: float = MIN_TONE_SEPARATION) -> None:
    """Checks that distinct tones are far enough apart to add incoherently.

    Raises:
        `PhysicsDomainError`: Two tones are closer than `min_separation`
            without being at the same frequency.
    """
    for a, b in combinations(list(omegas), 2):
        gap = abs(a - b)
        if 0 < gap < min_separation:
            raise PhysicsDomainError(
                f"Tones separated by {gap / (2 * np.pi) / 1e6:.3f} MHz cannot be summed "
                f"incoherently; the minimum is {min_separation / (2 * np.pi) / 1e6:.3f} MHz.")


def _scheme_tone(params: ResonatorParams, port: str, detuning: float) -> SchemeTone:
    sign = 1 if port == PLUS_PORT else -1
    response = _response(params, detuning, sign, 1.0, params.omega0 + detuning)
    return SchemeTone(
        port=port,
        detuning=float(detuning),
        I_buildup=response.I_buildup,
        I_tilde=response.I_tilde,
        visibility_V=response.visibility_V,
        xi_pm=response.xi_pm)


def _equal_tilde_detuning(kappa: float, beta: float, first: float) -> float:
    """Detuning beyond the vector build-up maximum whose vector build-up
    matches the one at `first`, in units of kappa.
    """
    def tilde(u):
        return float(buildup_factors(1.0, beta / kappa, u)[1])

    u1 = first / kappa
    target = tilde(u1)
    upper = u1 + 10 * (1 + beta / kappa)
    best = minimize_scalar(
        lambda u: -tilde(u),
        bounds=(u1, upper),
        method="bounded",
        options={"xatol": 1e-12})
    u_max = float(best.x)
    if tilde(u_max) <= target * (1 + 1e-9) or u_max <= u1:
        raise SchemeInfeasibleError(
            "No second detuning matches the vector build-up of the peak tone; "
            "the vector build-up falls monotonically away from the peak. "
            "Use the zero-lattice scheme instead.")
    far = upper
    while tilde(far) >= target:
        far *= 2
    u2 = brentq(lambda u: tilde(u) - target, u_max, far, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
    return u2 * kappa


def elimination_scheme(
    params: ResonatorParams,
    goal: str,
    red_sign: int = 1,
    min_separation: float = MIN_TONE_SEPARATION,
    logger: Optional[Logger] = None) -> SchemeResult:
    """Selects drive tones that cancel the vector light shift, the
    standing-wave lattice, or both.

    Scheme "a" (beta > kappa/2, zero-vector-shift): one tone where
    |alpha| = beta. Scheme "b" (beta <= kappa/2, zero-vector-shift): a
    plus-port tone at the build-up peak and a minus-port tone on the
    same side of resonance with the same vector build-up. Scheme "c"
    (zero-lattice or both): equal tones on opposite ports at opposite
    detunings.

    Args:
        params (`ResonatorParams`): The resonance.

        goal (str): "zero-vector-shift", "zero-lattice" or "both".

        red_sign (int): Side of resonance for the plus-port tone.

        min_separation (float): Minimum separation of distinct tones,
            rad/s.

        logger (`Logger`): Optional logger.

    Returns:
        (`SchemeResult`): The tones, predicted at unit drive.

    Raises:
        `SchemeInfeasibleError`: The goal cannot be met for these rates.
    """
    _check_kappa(params)
    if goal not in GOALS:
        raise ValueError(f"Unknown elimination goal '{goal}'. Expected one of {', '.join(GOALS)}.")
    if red_sign not in (1, -1):
        raise ValueError("Detuning sign must be +1 or -1.")

    kappa, beta = params.kappa, params.beta
    single = beta > kappa / 2
    matched = np.sqrt(beta ** 2 - kappa ** 2 / 4) if single else 0.0

    if goal == ZERO_VECTOR_SHIFT_GOAL and single:
        label = "a"
        tones = (_scheme_tone(params, PLUS_PORT, red_sign * matched),)
    elif goal == ZERO_VECTOR_SHIFT_GOAL:
        label = "b"
        first = peak_detuning(params)
        second = _equal_tilde_detuning(kappa, beta, first)
        tones = (
            _scheme_tone(params, PLUS_PORT, red_sign * first),
            _scheme_tone(params, MINUS_PORT, red_sign * second))
    else:
        label = "c"
        detuning = matched if single else peak_detuning(params)
        tones = (
            _scheme_tone(params, PLUS_PORT, red_sign * detuning),
            _scheme_tone(params, MINUS_PORT, -red_sign * detuning))

    if len(tones) == 2:
        gap = abs(tones[0].detuning - tones[1].detuning)
        if gap < min_separation:
            raise SchemeInfeasibleError(
                f"Scheme {label} needs tones {gap / (2 * np.pi) / 1e6:.3f} MHz apart, below the "
                f"{min_separation / (2 * np.pi) / 1e6:.3f} MHz needed for incoherent summation "
                f"(kappa/2pi = {kappa / (2 * np.pi) / 1e9:.4g} GHz, "
                f"beta/2pi = {beta / (2 * np.pi) / 1e9:.4g} GHz).")
        visibility = combined_visibility(
            tones[0].I_buildup,
            tones[1].I_buildup,
            tones[0].visibility_V,
            tones[1].visibility_V,
            tones[0].xi_pm - tones[1].xi_pm)
    else:
        visibility = tones[0].visibility_V

    if logger:
        detunings = ", ".join(f"{t.port} {t.detuning / (2 * np.pi) / 1e9:+.4f} GHz" for t in tones)
        logger.debug(f"Scheme {label} for goal '{goal}': {detunings}; V' = {visibility:.4f}.")
    return SchemeResult(label=label, goal=goal, tones=tones, combined_visibility=visibility)


def scheme_drive_tones(
    params: ResonatorParams,
    scheme: SchemeResult,
    powers: Sequence[float]) -> List[DriveTone]:
    """Turns scheme detunings into drive tones with the given bus powers.
    """
    if len(powers) != len(scheme.tones):
        raise ValueError(f"Scheme {scheme.label} needs {len(scheme.tones)} power(s), got {len(powers)}.")
    return [
        DriveTone(tone.port, power, params.omega0 + tone.detuning)
        for tone, power in zip(scheme.tones, powers)
    ]


def buildup_power_scale(params: ResonatorParams, tone: DriveTone) -> float:
    """kappa_c P / (hbar omega) for a tone, the drive entering every
    build-up factor.
    """
    return params.kappa_c * tone.power / (HBAR * tone.omega)


def energy_balance_error(params: ResonatorParams, tone: DriveTone) -> float:
    """Relative mismatch between |a+|^2 + |a-|^2 and the energy build-up.
    """
    a_plus, a_minus = mode_amplitudes(params, tone)
    expected = drive_response(params, tone).I_buildup
    if expected == 0:
        return abs(a_plus) ** 2 + abs(a_minus) ** 2
    return abs(abs(a_plus) ** 2 + abs(a_minus) ** 2 - expected) / expected


if __name__ == "__main__":
    from ringtrap.services.logger import LoggerFactory
    logger = LoggerFactory.get("resonator")
    two_pi = 2 * np.pi
    params = ResonatorParams.from_total_kappa(
        two_pi * 335e12, two_pi * 1e9, two_pi * 0.4e9, kappa_c=two_pi * 0.5e9)
    scheme = elimination_scheme(params, ZERO_VECTOR_SHIFT_GOAL)
    for tone in scheme.tones:
        logger.info(tone)
