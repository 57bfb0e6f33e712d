"""Quality-factor budget of a ring resonator.

Surface scattering follows the volume current method: each of the four
waveguide surfaces radiates as an ensemble of small, spherically
symmetric scatterers with Gaussian-correlated roughness, weighted by the
mode field on the outer side of that surface. Bend radiation and
material absorption enter as separate channels.
"""

import math
import numpy as np
from ringtrap.constants import (
    DEFAULT_Q_ABSORPTION,
    EPS0,
    GEOMETRIC_RADIATION_ETA,
    HBAR,
    SIDEWALL_QUADRATURE_ORDER
)
from ringtrap.models.errors import PhysicsDomainError
from ringtrap.models.fields import ModeField
from ringtrap.models.geometry import RingGeometry
from ringtrap.models.loss import QBreakdown, QValue, RoughnessSpec
from ringtrap.physics.mode_solver import bend_loss_q
from typing import Dict, Optional, Union

TOP_SURFACE = 'top'
BOTTOM_SURFACE = 'bottom'
INNER_SIDEWALL = 'sidewall_inner'
OUTER_SIDEWALL = 'sidewall_outer'
SURFACES = (TOP_SURFACE, BOTTOM_SURFACE, INNER_SIDEWALL, OUTER_SIDEWALL)

NORMALIZATION_CHECK_TOLERANCE = 1e-6

QInput = Optional[Union[float, QValue]]


def _require_normalized(mode: ModeField) -> None:
    ratio = mode.normalization_ratio()
    if not mode.normalized or abs(ratio - 1) > NORMALIZATION_CHECK_TOLERANCE:
        raise PhysicsDomainError(
            f"Surface scattering needs a normalized mode; the normalization "
            f"ratio is {ratio:.9g}.")


def _components(mode: ModeField) -> Dict[str, np.ndarray]:
    return {
        "rho": mode.e_rho.values,
        "phi": mode.e_phi_im.values,
        "z": mode.e_z.values,
    }


def sidewall_weights(k_tilde: np.ndarray) -> Dict[str, np.ndarray]:
    """Polarization weights of sidewall radiation against the normalized
    vertical wavenumber k~ in [-1, 1].
    """
    transverse = (1 + k_tilde ** 2) / 2
    return {"rho": transverse, "phi": transverse, "z": 1 - k_tilde ** 2}


def surrounding_indices(geometry: RingGeometry, overrides: Optional[Dict[str, float]] = None) -> Dict[str, float]:
    """Index of the medium beyond each surface.

    The top face and both sidewalls face the superstrate; the bottom
    face sits on the membrane layer touching the core.
    """
    indices = {
        TOP_SURFACE: geometry.stack.superstrate_index,
        BOTTOM_SURFACE: geometry.stack.top_index,
        INNER_SIDEWALL: geometry.stack.superstrate_index,
        OUTER_SIDEWALL: geometry.stack.superstrate_index,
    }
    for surface, index in (overrides or {}).items():
        if surface not in indices:
            raise ValueError(f"Unknown surface '{surface}'.")
        indices[surface] = index
    return indices


def surface_field_averages(mode: ModeField, geometry: RingGeometry) -> Dict[str, Dict[str, float]]:
    """Weighted mean-square field per surface and component, V^2/m^2.

    Top and bottom use the rho-weighted row average across the core
    width, (1 / R W) int rho |E_a|^2 d rho. Sidewalls use the
    interference-weighted column average
    (1 / eta H^2) int |int E_a exp(-i k k~ z) dz|^2 eta_a(k~) dk~
    with Gauss-Legendre nodes in k~. Every row or column is taken on
    the cladding side of its surface. For a racetrack, rho is rescaled
    to the ring of equal circumference.

    Raises:
        `PhysicsDomainError`: The grid holds no samples across the core
            or on the outer side of a surface.
    """
    rho = mode.rho_samples
    z = mode.z_samples
    d_rho = mode.e_rho.d_rho
    d_z = mode.e_rho.d_z
    R = geometry.effective_radius
    scale = R / geometry.radius
    rho_lo = geometry.rho_w - geometry.width / 2
    rho_hi = geometry.rho_w + geometry.width / 2

    across = (rho >= rho_lo) & (rho < rho_hi)
    through = (z >= -geometry.height) & (z < 0)
    if not across.any() or not through.any():
        raise PhysicsDomainError("The mode grid does not resolve the waveguide core.")

    rows = {
        TOP_SURFACE: int(np.searchsorted(z, 0.0, side="left")),
        BOTTOM_SURFACE: int(np.searchsorted(z, -geometry.height, side="left")) - 1,
    }
    columns = {
        INNER_SIDEWALL: int(np.searchsorted(rho, rho_lo, side="left")) - 1,
        OUTER_SIDEWALL: int(np.searchsorted(rho, rho_hi, side="left")),
    }
    for surface, index in {**rows, **columns}.items():
        limit = z.size if surface in rows else rho.size
        if index < 0 or index >= limit:
            raise PhysicsDomainError(f"No grid samples outside the {surface} surface.")

    components = _components(mode)
    averages = {}
    weight = rho[across] * scale
    for surface, row in rows.items():
        averages[surface] = {
            name: float(np.sum(weight * values[across, row] ** 2) * d_rho / (R * geometry.width))
            for name, values in components.items()
        }

    k = 2 * np.pi / mode.wavelength
    nodes, quad_weights = np.polynomial.legendre.leggauss(SIDEWALL_QUADRATURE_ORDER)
    eta_alpha = sidewall_weights(nodes)
    z_local = z[through] + geometry.height
    phases = np.exp(-1j * k * np.outer(nodes, z_local)) * d_z
    norm = GEOMETRIC_RADIATION_ETA * geometry.height ** 2
    for surface, column in columns.items():
        averages[surface] = {}
        for name, values in components.items():
            transform = phases @ values[column, through]
            averages[surface][name] = float(
                np.sum(quad_weights * np.abs(transform) ** 2 * eta_alpha[name]) / norm)
    return averages


def scatterer_volumes(geometry: RingGeometry, roughness: RoughnessSpec) -> Dict[str, float]:
    """Effective scatterer volume per surface, m^3.

    V_t(b) = sigma L sqrt(R W) and V_+/- = sigma H sqrt(L rho_+/-).
    """
    R = geometry.effective_radius
    return {
        TOP_SURFACE: roughness.sigma_t * roughness.L_t * math.sqrt(R * geometry.width),
        BOTTOM_SURFACE: roughness.sigma_b * roughness.L_b * math.sqrt(R * geometry.width),
        INNER_SIDEWALL: roughness.sigma_pm * geometry.height
            * math.sqrt(roughness.L_pm * (R - geometry.width / 2)),
        OUTER_SIDEWALL: roughness.sigma_pm * geometry.height
            * math.sqrt(roughness.L_pm * (R + geometry.width / 2)),
    }


def scattering_loss_rates(
    mode: ModeField,
    geometry: RingGeometry,
    roughness: RoughnessSpec,
    core_index: Optional[float] = None,
    surrounding: Optional[Dict[str, float]] = None) -> Dict[str, float]:
    """1/Q contributed by each surface.

    1/Q_i = 8 pi^(7/2) de_i^2 V_i^2 sum_a |u_i,a|^2 / (3 lambda^3)

    with de_i = n_core^2 - n_i^2 and |u|^2 = 2 eps0 |E|^2 / (hbar omega),
    the field average per unit stored energy of the normalized mode.
    """
    _require_normalized(mode)
    n_core = core_index or geometry.core_index
    indices = surrounding_indices(geometry, surrounding)
    averages = surface_field_averages(mode, geometry)
    volumes = scatterer_volumes(geometry, roughness)
    energy_scale = 2 * EPS0 / (HBAR * mode.omega)
    prefactor = 8 * np.pi ** 3.5 / (3 * mode.wavelength ** 3)
    rates = {}
    for surface in SURFACES:
        delta_eps = n_core ** 2 - indices[surface] ** 2
        density = energy_scale * sum(averages[surface].values())
        rates[surface] = prefactor * delta_eps ** 2 * volumes[surface] ** 2 * density
    return rates


def q_surface_scattering(
    mode: ModeField,
    geometry: RingGeometry,
    roughness: RoughnessSpec,
    core_index: Optional[float] = None,
    surrounding: Optional[Dict[str, float]] = None) -> Dict[str, QValue]:
    """Surface-scattering Q of the top face, the bottom face and the two
    sidewalls together.

    Args:
        mode (`ModeField`): Normalized mode of the resonator.

        geometry (`RingGeometry`): The resonator.

        roughness (`RoughnessSpec`): Roughness statistics per surface.

        core_index (float): Core index. Defaults to the geometry's.

        surrounding (dict of str to float): Per-surface index overrides
            keyed by "top", "bottom", "sidewall_inner" or
            "sidewall_outer".

    Returns:
        (dict of str to `QValue`): Keys "top", "bottom" and "sidewalls".
            Vanishing loss is flagged above the ceiling.

    Raises:
        `PhysicsDomainError`: The mode is not normalized or the grid
            does not resolve the surfaces.
    """
    rates = scattering_loss_rates(mode, geometry, roughness, core_index, surrounding)
    return {
        TOP_SURFACE: QValue.from_loss_rate(rates[TOP_SURFACE]),
        BOTTOM_SURFACE: QValue.from_loss_rate(rates[BOTTOM_SURFACE]),
        "sidewalls": QValue.from_loss_rate(rates[INNER_SIDEWALL] + rates[OUTER_SIDEWALL]),
    }


def _as_q(value: QInput, name: str) -> Optional[QValue]:
    if value is None or isinstance(value, QValue):
        return value
    if math.isinf(value):
        return QValue.from_loss_rate(0.0)
    if not value > 0:
        raise ValueError(f"Quality factor {name} must be positive, got {value}.")
    return QValue.from_loss_rate(1.0 / value)


def combine_q(
    q_ss_top: QInput = None,
    q_ss_bottom: QInput = None,
    q_ss_sidewalls: QInput = None,
    q_bend: QInput = None,
    q_absorption: QInput = None) -> QBreakdown:
    """Harmonic combination of the included loss channels.

    Channels given as None are left out; infinite Q contributes no loss.

    Raises:
        ValueError: A channel Q is not positive.
    """
    channels = {
        "q_ss_top": _as_q(q_ss_top, "q_ss_top"),
        "q_ss_bottom": _as_q(q_ss_bottom, "q_ss_bottom"),
        "q_ss_sidewalls": _as_q(q_ss_sidewalls, "q_ss_sidewalls"),
        "q_bend": _as_q(q_bend, "q_bend"),
        "q_absorption": _as_q(q_absorption, "q_absorption"),
    }
    total = sum(q.inverse for q in channels.values() if q is not None)
    return QBreakdown(q_total=QValue.from_loss_rate(total), **channels)


def fit_kappa_to_q(omega0: float, q: Union[float, QValue]) -> float:
    """kappa = omega0 / Q, zero for a Q above the reporting ceiling.
    """
    if isinstance(q, QValue):
        return 0.0 if q.above_ceiling else omega0 / q.value
    if math.isinf(q):
        return 0.0
    if q <= 0:
        raise ValueError(f"Quality factor must be positive, got {q}.")
    return omega0 / q


def bend_q(mode: ModeField, geometry: RingGeometry) -> QValue:
    """Bend-radiation Q at the geometry's radius, radiating into the
    superstrate.
    """

    q = bend_loss_q(
        mode,
        geometry.radius,
        geometry.width,
        geometry.core_index,
        geometry.stack.superstrate_index)
    return _as_q(q, "q_bend")


def loss_budget(
    mode: ModeField,
    geometry: RingGeometry,
    roughness: RoughnessSpec,
    q_absorption: Optional[float] = DEFAULT_Q_ABSORPTION,
    include_bend: bool = True,
    surrounding: Optional[Dict[str, float]] = None) -> QBreakdown:
    """Surface scattering, bend radiation and absorption combined.

    Args:
        mode (`ModeField`): Normalized mode.

        geometry (`RingGeometry`): The resonator.

        roughness (`RoughnessSpec`): Roughness statistics.

        q_absorption (float): Material absorption Q, or None to leave
            the channel out.

        include_bend (bool): Whether to include bend radiation.

        surrounding (dict of str to float): Per-surface index overrides.

    Returns:
        (`QBreakdown`): All channels and the total.
    """
    scattering = q_surface_scattering(mode, geometry, roughness, surrounding=surrounding)
    return combine_q(
        scattering[TOP_SURFACE],
        scattering[BOTTOM_SURFACE],
        scattering["sidewalls"],
        bend_q(mode, geometry) if include_bend else None,
        q_absorption)


def fundamental_limit_q(
    mode: ModeField,
    geometry: RingGeometry,
    q_absorption: float = DEFAULT_Q_ABSORPTION) -> QBreakdown:
    """Intrinsic Q of a perfectly smooth resonator: absorption and bend
    radiation only.
    """
    return combine_q(q_bend=bend_q(mode, geometry), q_absorption=q_absorption)


def breakdown_summary(breakdown: QBreakdown, roughness: Optional[RoughnessSpec] = None) -> Dict[str, object]:
    """JSON-ready Q budget with the roughness echoed in nm.
    """
    summary = {"q": breakdown.as_dict()}
    if roughness is not None:
        summary["roughness_nm"] = {name: value * 1e9 for name, value in roughness.as_dict().items()}
    return summary
