"""Least-squares fit of the doublet model to a scattered-intensity spectrum.

Frequencies are fitted in GHz relative to the centre of the sampled band
so all parameters stay of order one. Only the total loss rate is
identifiable from scattered light; splitting it into intrinsic and
coupling parts needs an external kappa_c.
"""

import numpy as np
import pandas as pd
from logging import Logger
from ringtrap.constants import DEFAULT_FIT_MAX_EVALUATIONS, MIN_SPECTRUM_SAMPLES
from ringtrap.models.errors import NumericalConvergenceError, PhysicsDomainError
from ringtrap.models.resonator import ResonatorParams, SpectrumFitResult
from ringtrap.physics.resonator import model_spectrum
from scipy.optimize import least_squares
from scipy.signal import find_peaks, peak_widths
from typing import Optional, Sequence, Tuple, Union

GHZ = 2 * np.pi * 1e9
FLAT_TOLERANCE = 1e-12
PEAK_PROMINENCE_FRACTION = 0.3
FIT_TOLERANCE = 1e-12
MIN_FIT_KAPPA = 1e-9
PARAMETER_NAMES = ("omega0", "kappa", "beta", "amplitude", "baseline")


def _model(x: np.ndarray, nu: np.ndarray, slope: bool) -> np.ndarray:
    """Doublet model in GHz units with x = (nu0, kappa, beta, A, B[, s]).
    """
    params = ResonatorParams(x[0] * GHZ, max(abs(x[1]), MIN_FIT_KAPPA) * GHZ, 0.0, abs(x[2]) * GHZ)
    tilt = x[5] / GHZ if slope else 0.0
    return model_spectrum(params, x[3], x[4], nu * GHZ, slope=tilt)


def initial_guess(nu: np.ndarray, counts: np.ndarray) -> Tuple[float, float, float, float, float]:
    """Starting point from the tallest one or two peaks.

    Args:
        nu (`np.ndarray`): Frequencies, GHz, sorted ascending.

        counts (`np.ndarray`): Counts.

    Returns:
        (tuple of float): (nu0, kappa, beta, amplitude, baseline) in
            GHz and counts.
    """
    baseline = float(np.min(counts))
    amplitude = float(np.max(counts) - baseline)
    span = float(nu[-1] - nu[0])
    step = span / max(len(nu) - 1, 1)

    peaks, _ = find_peaks(counts, prominence=PEAK_PROMINENCE_FRACTION * amplitude)
    if len(peaks) == 0:
        peaks = np.array([int(np.argmax(counts))])
    tallest = peaks[np.argsort(counts[peaks])[::-1][:2]]
    widths = peak_widths(counts, tallest, rel_height=0.5)[0] * step
    kappa = float(max(np.min(widths), 2 * step))

    if len(tallest) == 2:
        nu0 = float(np.mean(nu[tallest]))
        beta = float(abs(nu[tallest[0]] - nu[tallest[1]]) / 2)
    else:
        nu0 = float(nu[tallest[0]])
        beta = kappa / 4
    return nu0, kappa, beta, amplitude, baseline


def fit_spectrum(
    omegas: Union[Sequence[float], np.ndarray],
    counts: Union[Sequence[float], np.ndarray],
    slope: bool = False,
    max_evaluations: int = DEFAULT_FIT_MAX_EVALUATIONS,
    logger: Optional[Logger] = None) -> SpectrumFitResult:
    """Fits (omega0, kappa, beta, amplitude, baseline) with Levenberg-Marquardt.

    Args:
        omegas (array of float): Angular frequencies, rad/s.

        counts (array of float): Scattered counts.

        slope (bool): Whether to fit a linear baseline slope.

        max_evaluations (int): Model evaluation limit.

        logger (`Logger`): Optional logger.

    Returns:
        (`SpectrumFitResult`): Best-fit parameters with one-sigma
            uncertainties, covariance and residual norm.

    Raises:
        `PhysicsDomainError`: Too few samples or flat data.
        `NumericalConvergenceError`: The fit did not converge.
    """
    omegas = np.asarray(omegas, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if omegas.shape != counts.shape or omegas.ndim != 1:
        raise ValueError("Frequencies and counts must be 1-D arrays of equal length.")
    if len(omegas) < MIN_SPECTRUM_SAMPLES:
        raise PhysicsDomainError(
            f"A spectrum fit needs at least {MIN_SPECTRUM_SAMPLES} samples, got {len(omegas)}.")
    if not (np.all(np.isfinite(omegas)) and np.all(np.isfinite(counts))):
        raise PhysicsDomainError("Spectrum contains non-finite samples.")
    if np.ptp(counts) <= FLAT_TOLERANCE * max(np.max(np.abs(counts)), 1.0):
        raise PhysicsDomainError("Spectrum is flat; there is no resonance to fit.")

    order = np.argsort(omegas)
    nu = omegas[order] / GHZ
    y = counts[order]
    reference = float(np.mean(nu))
    nu = nu - reference

    x0 = list(initial_guess(nu, y))
    names = list(PARAMETER_NAMES)
    if slope:
        x0.append(0.0)
        names.append("slope")

    def residuals(x):
        return _model(x, nu, slope) - y

    try:
        result = least_squares(
            residuals,
            np.array(x0),
            method="lm",
            x_scale="jac",
            ftol=FIT_TOLERANCE,
            xtol=FIT_TOLERANCE,
            gtol=FIT_TOLERANCE,
            max_nfev=max_evaluations)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise NumericalConvergenceError(f"Spectrum fit failed. {e}") from e

    best = dict(zip(names, (float(v) for v in result.x)))
    if logger:
        logger.debug(f"Spectrum fit status {result.status} after {result.nfev} evaluations: {result.message}")
    if not result.success or result.status == 0:
        raise NumericalConvergenceError(
            "Spectrum fit did not converge.", iterations=int(result.nfev), best_so_far=best)

    x = result.x.copy()
    x[1], x[2] = abs(x[1]), abs(x[2])
    dof = max(len(y) - len(x), 1)
    residual_norm = float(np.linalg.norm(result.fun))
    variance = residual_norm ** 2 / dof
    covariance = np.linalg.pinv(result.jac.T @ result.jac) * variance
    sigma = np.sqrt(np.clip(np.diag(covariance), 0.0, None))

    uncertainties = {
        "omega0": float(sigma[0] * GHZ),
        "kappa": float(sigma[1] * GHZ),
        "beta": float(sigma[2] * GHZ),
        "amplitude": float(sigma[3]),
        "baseline": float(sigma[4]),
    }
    if slope:
        uncertainties["slope"] = float(sigma[5] / GHZ)

    return SpectrumFitResult(
        omega0=float((x[0] + reference) * GHZ),
        kappa=float(x[1] * GHZ),
        beta=float(x[2] * GHZ),
        amplitude=float(x[3]),
        baseline=float(x[4]),
        slope=float(x[5] / GHZ) if slope else 0.0,
        uncertainties=uncertainties,
        covariance=covariance,
        residual_norm=residual_norm,
        n_evaluations=int(result.nfev),
        parameter_names=names)


def read_spectrum(df: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray]:
    """Extracts (omega, counts) from a (frequency_GHz, counts) table.

    Raises:
        `PhysicsDomainError`: Required columns are missing.
    """
    missing = {"frequency_GHz", "counts"} - set(df.columns)
    if missing:
        raise PhysicsDomainError(
            f"Spectrum table is missing column(s): {', '.join(sorted(missing))}.")
    omegas = df["frequency_GHz"].to_numpy(dtype=float) * GHZ
    return omegas, df["counts"].to_numpy(dtype=float)


def fit_summary(fit: SpectrumFitResult) -> dict:
    """Report fields in ordinary-frequency units.
    """
    u = fit.uncertainties
    return {
        "omega0_over_2pi_GHz": fit.omega0 / GHZ,
        "kappa_over_2pi_GHz": fit.kappa / GHZ,
        "beta_over_2pi_GHz": fit.beta / GHZ,
        "splitting_over_2pi_GHz": 2 * fit.beta / GHZ,
        "quality_factor": fit.quality_factor,
        "amplitude_counts": fit.amplitude,
        "baseline_counts": fit.baseline,
        "slope_counts_per_GHz": fit.slope * GHZ,
        "uncertainties": {
            "omega0_over_2pi_GHz": u["omega0"] / GHZ,
            "kappa_over_2pi_GHz": u["kappa"] / GHZ,
            "beta_over_2pi_GHz": u["beta"] / GHZ,
            "amplitude_counts": u["amplitude"],
            "baseline_counts": u["baseline"],
            **({"slope_counts_per_GHz": u["slope"] * GHZ} if "slope" in u else {}),
        },
        "residual_norm": fit.residual_norm,
        "n_evaluations": fit.n_evaluations,
        "parameter_names": fit.parameter_names,
        "caveat": "Scattered intensity constrains only the total loss rate kappa.",
    }
