"""Full-vectorial finite-difference eigenmodes of a (possibly bent)
waveguide cross-section.

The transverse electric field (E_rho, E_z) is discretized on a Yee
grid: E_rho at (i + 1/2, j), E_z at (i, j + 1/2) and the longitudinal
component at the permittivity cell centers (i, j). The eigenvalue of
the assembled operator is the squared propagation constant. A bend of
radius R is handled by the conformal map eps -> eps exp(2 (rho - R) / R).
"""

import math
import numpy as np
from dataclasses import dataclass
from logging import Logger
from ringtrap.constants import (
    C_LIGHT,
    DEFAULT_MODE_MARGIN,
    EIGS_MAX_ITERATIONS,
    EPS0,
    FIELD_DECAY_TOLERANCE,
    HBAR
)
from ringtrap.models.errors import (
    CutoffError,
    GridSizingError,
    NumericalConvergenceError,
    RadiativeError
)
from ringtrap.models.fields import ModeDiagnostics, ModeField, TE_POLARIZATION, TM_POLARIZATION
from ringtrap.models.geometry import Grid2D, RING_SHAPE, RingGeometry
from ringtrap.physics.dielectric import build_epsilon_map, mode_grid
from ringtrap.services.cache import ModeCache
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigs
from typing import Any, Dict, List, Optional, Tuple

# The operator is assembled in micrometres for conditioning.
_UM = 1e-6


def _forward_difference(n: int, h: float) -> sparse.csr_matrix:
    """Forward difference with a zero field beyond the last sample.
    """
    return ((sparse.eye(n, k=1) - sparse.eye(n)) / h).tocsr()


def _derivatives(nx: int, ny: int, hx: float, hy: float) -> Tuple[sparse.csr_matrix, ...]:
    """Forward and backward derivative operators on C-ordered (nx, ny) arrays.
    """
    dfx = sparse.kron(_forward_difference(nx, hx), sparse.eye(ny), format="csr")
    dfy = sparse.kron(sparse.eye(nx), _forward_difference(ny, hy), format="csr")
    return dfx, dfy, -dfx.T.tocsr(), -dfy.T.tocsr()


def _staggered_permittivity(eps: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Averages cell permittivity onto the E_rho and E_z positions.
    """
    eps_xx = eps.copy()
    eps_xx[:-1, :] = (eps[:-1, :] + eps[1:, :]) / 2
    eps_yy = eps.copy()
    eps_yy[:, :-1] = (eps[:, :-1] + eps[:, 1:]) / 2
    return eps_xx, eps_yy


def waveguide_operator(
    eps: np.ndarray,
    k0: float,
    hx: float,
    hy: float) -> Tuple[sparse.csr_matrix, Dict[str, object]]:
    """Assembles the transverse-E waveguide operator.

    Args:
        eps (`np.ndarray`): Cell permittivity, shape (nx, ny).

        k0 (float): Vacuum wavenumber in the grid's length unit.

        hx (float): Spacing along rho.

        hy (float): Spacing along z.

    Returns:
        (tuple): The sparse operator acting on [E_rho, E_z] and the
            pieces needed to rebuild the longitudinal field.
    """
    nx, ny = eps.shape
    dfx, dfy, dbx, dby = _derivatives(nx, ny, hx, hy)
    eps_xx, eps_yy = _staggered_permittivity(eps)
    eps_xy = sparse.diags(np.concatenate([eps_xx.ravel(), eps_yy.ravel()]))
    eps_z_inv = sparse.diags(1.0 / eps.ravel())

    op = (k0 ** 2) * eps_xy \
        + sparse.vstack([-dby, dbx]) @ sparse.hstack([-dfy, dfx]) \
        + sparse.vstack([dfx, dfy]) @ eps_z_inv @ sparse.hstack([dbx, dby]) @ eps_xy
    parts = {"dbx": dbx, "dby": dby, "eps_xx": eps_xx, "eps_yy": eps_yy}
    return op.tocsc(), parts


def _boundary_max(values: np.ndarray) -> float:
    return float(max(
        np.abs(values[0, :]).max(), np.abs(values[-1, :]).max(),
        np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max()))


def mapped_permittivity(eps_map: Grid2D, bend_radius: Optional[float] = None) -> np.ndarray:
    """The permittivity the operator sees: eps exp(2 (rho - R) / R) for a
    bend, eps itself for a straight guide.
    """
    eps = np.array(eps_map.values, dtype=float)
    if bend_radius is None:
        return eps
    rho = eps_map.rho_samples[:, None]
    return eps * np.exp(2 * (rho - bend_radius) / bend_radius)


def index_bounds(eps_map: Grid2D, bend_radius: Optional[float] = None) -> Tuple[float, float]:
    """Cladding and core indices bracketing a guided n_eff.

    The core bound and the eigen-shift use the mapped permittivity. The
    map is the identity at rho = R, so the cladding bound is the
    unmapped boundary index there; leaky bend candidates fail the
    boundary-decay test instead.

    Returns:
        (tuple of float): (n_clad, n_core).
    """
    eps_op = mapped_permittivity(eps_map, bend_radius)
    n_clad = math.sqrt(max(_boundary_max(eps_map.values), 1.0))
    return n_clad, math.sqrt(float(eps_op.max()))


def _to_cell_centers(e_x: np.ndarray, e_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    e_x_c = e_x.copy()
    e_x_c[1:, :] += e_x[:-1, :]
    e_y_c = e_y.copy()
    e_y_c[:, 1:] += e_y[:, :-1]
    return e_x_c / 2, e_y_c / 2


def solve_modes(
    eps_map: Grid2D,
    wavelength: float,
    n_modes: int = 1,
    bend_radius: Optional[float] = None,
    circumference: Optional[float] = None,
    logger: Optional[Logger] = None) -> List[ModeField]:
    """Solves for the guided modes with the largest effective indices.

    Args:
        eps_map (`Grid2D`): Relative permittivity on a uniform grid.

        wavelength (float): Vacuum wavelength in m.

        n_modes (int): Number of guided modes wanted.

        bend_radius (float): Bend radius in m, or None for a straight
            waveguide. Must exceed the window half-width.

        circumference (float): Resonator length entering the
            normalization. Defaults to 2 pi `bend_radius`.

        logger (`Logger`): Optional logger for solver diagnostics.

    Candidates whose field at the window boundary exceeds
    `FIELD_DECAY_TOLERANCE` of its peak are not guided and are dropped.

    Returns:
        (list of `ModeField`): Normalized modes sorted by n_eff,
            TE before TM at equal n_eff.

    Raises:
        `CutoffError`: No mode lies above the cladding index.

        `GridSizingError`: Guided candidates exist but none decays
            inside the window.

        `NumericalConvergenceError`: The eigensolver did not converge.
    """
    if n_modes < 1:
        raise ValueError("At least one mode must be requested.")
    if circumference is None:
        if bend_radius is None:
            raise ValueError("A straight waveguide needs an explicit circumference.")
        circumference = 2 * math.pi * bend_radius

    rho = eps_map.rho_samples
    half_width = (rho[-1] - rho[0] + eps_map.d_rho) / 2
    if bend_radius is not None and bend_radius <= half_width:
        raise ValueError(
            f"Bend radius {bend_radius * 1e6:.3f} um must exceed the window "
            f"half-width {half_width * 1e6:.3f} um.")

    eps = np.array(eps_map.values, dtype=float)
    eps_op = mapped_permittivity(eps_map, bend_radius)

    k0 = 2 * math.pi / (wavelength / _UM)
    hx, hy = eps_map.d_rho / _UM, eps_map.d_z / _UM
    nx, ny = eps.shape
    n_clad, n_core = index_bounds(eps_map, bend_radius)

    op, parts = waveguide_operator(eps_op, k0, hx, hy)
    n_eig = min(n_modes + DEFAULT_MODE_MARGIN, op.shape[0] - 2)
    sigma = (k0 * n_core) ** 2
    if logger:
        logger.debug(
            f"Solving {op.shape[0]}-unknown eigenproblem for {n_eig} modes "
            f"near n = {n_core:.4f} (cladding {n_clad:.4f}).")
    try:
        values, vectors = eigs(
            op, k=n_eig, sigma=sigma, which="LM",
            v0=np.ones(op.shape[0]), maxiter=EIGS_MAX_ITERATIONS)
    except ArpackNoConvergence as e:
        raise NumericalConvergenceError(
            "Mode eigensolver did not converge.",
            iterations=EIGS_MAX_ITERATIONS,
            best_so_far={"n_eff": [
                float(np.sqrt(abs(v.real)) / k0) for v in e.eigenvalues]})

    omega = 2 * math.pi * C_LIGHT / wavelength
    cell_area = eps_map.cell_area
    modes = []
    undecayed = 0
    for value, vector in zip(values, vectors.T):
        beta_sq = float(value.real)
        if beta_sq <= 0:
            continue
        beta = math.sqrt(beta_sq)
        n_eff = beta / k0
        if not (n_clad < n_eff < n_core):
            if logger:
                logger.debug(f"Discarding unguided eigenvalue n = {n_eff:.6f}.")
            continue

        pivot = np.argmax(np.abs(vector))
        vector = (vector * np.exp(-1j * np.angle(vector[pivot]))).real
        n_cells = nx * ny
        e_x = vector[:n_cells]
        e_y = vector[n_cells:]
        div = parts["dbx"] @ (parts["eps_xx"].ravel() * e_x) \
            + parts["dby"] @ (parts["eps_yy"].ravel() * e_y)
        e_phi = (div / (beta * eps_op.ravel())).reshape(nx, ny)
        e_rho, e_z = _to_cell_centers(e_x.reshape(nx, ny), e_y.reshape(nx, ny))

        te_weight = float(np.sum(eps * e_rho ** 2))
        tm_weight = float(np.sum(eps * e_z ** 2))
        polarization = TE_POLARIZATION if te_weight >= tm_weight else TM_POLARIZATION
        dominant = e_rho if polarization == TE_POLARIZATION else e_z
        sign = 1.0 if dominant.flat[np.argmax(np.abs(dominant))] >= 0 else -1.0

        energy = float(np.sum(eps * (e_rho ** 2 + e_z ** 2 + e_phi ** 2)) * cell_area)
        scale = sign * math.sqrt(HBAR * omega / (2 * EPS0 * circumference * energy))
        e_rho, e_z, e_phi = e_rho * scale, e_z * scale, e_phi * scale

        intensity = np.sqrt(e_rho ** 2 + e_z ** 2 + e_phi ** 2)
        decay = _boundary_max(intensity) / intensity.max()
        if decay > FIELD_DECAY_TOLERANCE:
            undecayed += 1
            if logger:
                logger.warning(
                    f"Dropping {polarization} candidate n_eff = {n_eff:.5f}: {decay:.2e} "
                    "of its peak field sits at the window boundary.")
            continue

        k = beta / _UM
        radius = bend_radius if bend_radius is not None else circumference / (2 * math.pi)
        modes.append(ModeField(
            e_rho=eps_map.with_values(e_rho),
            e_phi_im=eps_map.with_values(e_phi),
            e_z=eps_map.with_values(e_z),
            eps=eps_map,
            n_eff=n_eff,
            k=k,
            m_azimuthal=k * radius,
            omega=omega,
            polarization=polarization,
            circumference=circumference,
            bend_radius=bend_radius,
            normalized=True))

    if not modes and undecayed:
        raise GridSizingError(
            f"None of the {undecayed} guided candidates at {wavelength * 1e9:.1f} nm "
            f"decays below {FIELD_DECAY_TOLERANCE:.0e} of its peak inside the window; "
            "enlarge the window.")
    if not modes:
        raise CutoffError(
            f"No guided mode above the cladding index {n_clad:.4f} at "
            f"{wavelength * 1e9:.1f} nm.")

    modes.sort(key=lambda m: (-round(m.n_eff, 12), m.polarization != TE_POLARIZATION))
    if logger:
        found = ", ".join(f"{m.polarization} {m.n_eff:.5f}" for m in modes[:n_modes])
        logger.debug(f"Guided modes: {found}.")
    return modes[:n_modes]


def solve_geometry_modes(
    geometry: RingGeometry,
    wavelength: float,
    spacing: float,
    window_rho: float,
    window_z: float,
    z_center: float = 0.0,
    z_spacing: Optional[float] = None,
    n_modes: int = 4,
    bend: bool = True,
    logger: Optional[Logger] = None) -> List[ModeField]:
    """Builds the solver window for a resonator and solves its modes.

    Rings are solved with the conformal bend unless `bend` is off;
    racetracks are solved as straight sections.
    """
    grid = mode_grid(geometry, spacing, window_rho, window_z, z_center, z_spacing)
    eps_map = build_epsilon_map(geometry, grid, wavelength)
    bend_radius = geometry.radius if (bend and geometry.shape == RING_SHAPE) else None
    return solve_modes(
        eps_map, wavelength, n_modes,
        bend_radius=bend_radius,
        circumference=geometry.circumference,
        logger=logger)


@dataclass(frozen=True)
class SolveSettings:
    """Solver window and discretization shared by every solve of a run.
    """
    spacing: float
    window_rho: float
    window_z: float
    z_center: float = 0.0
    z_spacing: Optional[float] = None
    n_modes: int = 4
    bend: bool = True

    def cache_inputs(self, geometry: RingGeometry, wavelength: float) -> Dict[str, Any]:
        """Everything a solve depends on, as a canonical-JSON-ready dict.
        """
        return {
            "geometry": {
                "radius": geometry.radius,
                "width": geometry.width,
                "height": geometry.height,
                "core_index": geometry.core_index,
                "shape": geometry.shape,
                "straight_length": geometry.straight_length,
                "layers": [list(layer) for layer in geometry.stack.layers],
                "superstrate_index": geometry.stack.superstrate_index,
            },
            "wavelength": wavelength,
            "spacing": self.spacing,
            "z_spacing": self.z_spacing,
            "window_rho": self.window_rho,
            "window_z": self.window_z,
            "z_center": self.z_center,
            "n_modes": self.n_modes,
            "bend": self.bend,
        }


def cached_geometry_modes(
    geometry: RingGeometry,
    wavelength: float,
    settings: SolveSettings,
    cache: Optional[ModeCache] = None,
    logger: Optional[Logger] = None) -> List[ModeField]:
    """`solve_geometry_modes`, reusing a cached solve with identical inputs.
    """
    inputs = settings.cache_inputs(geometry, wavelength)
    if cache is not None:
        modes = cache.get(inputs)
        if modes is not None:
            return modes
    modes = solve_geometry_modes(
        geometry, wavelength, settings.spacing, settings.window_rho, settings.window_z,
        settings.z_center, settings.z_spacing, settings.n_modes, settings.bend, logger)
    if cache is not None:
        cache.put(inputs, modes)
    return modes


def select_mode(modes: List[ModeField], polarization: str) -> ModeField:
    """The highest-index mode of one polarization.

    Raises:
        `CutoffError`: No mode of that polarization was found.
    """
    for mode in modes:
        if mode.polarization == polarization:
            return mode
    raise CutoffError(f"No guided {polarization} mode among the solved modes.")


def mode_diagnostics(mode: ModeField) -> ModeDiagnostics:
    """Pointwise visibility amplitude, polarization factors and
    eps-weighted intensity.

    Where the field vanishes the visibility amplitude is taken as 1
    and the polarization factors as 0.
    """
    e_rho = mode.e_rho.values
    e_phi = mode.e_phi_im.values
    e_z = mode.e_z.values
    total = mode.intensity
    nonzero = total > 0

    v = np.ones_like(total)
    np.divide(total - 2 * e_phi ** 2, total, out=v, where=nonzero)
    f_rho = np.zeros_like(total)
    np.divide(e_phi * e_z, 2 * total, out=f_rho, where=nonzero)
    f_z = np.zeros_like(total)
    np.divide(e_phi * e_rho, 2 * total, out=f_z, where=nonzero)

    return ModeDiagnostics(
        v_map=mode.eps.with_values(np.clip(v, -1.0, 1.0)),
        f_rho_map=mode.eps.with_values(f_rho),
        f_z_map=mode.eps.with_values(f_z),
        intensity_map=mode.eps.with_values(mode.eps.values * total))


def bend_loss_q(
    mode: ModeField,
    R: float,
    width: float,
    core_index: Optional[float] = None,
    cladding_index: float = 1.0) -> float:
    """Whispering-gallery bend-radiation Q from the tunneling estimate
    of a slab of half-width W/2 bent to radius R.

    Args:
        mode (`ModeField`): Mode solved at the same bend radius.

        R (float): Bend radius, m.

        width (float): Waveguide width, m.

        core_index (float): Core index. Defaults to the largest index
            in the mode's permittivity map.

        cladding_index (float): Index of the medium the bend radiates
            into. Defaults to vacuum.

    Returns:
        (float): Q_b, or `math.inf` when radiation is negligible at
            double precision.

    Raises:
        `RadiativeError`: n_eff does not exceed the cladding index.
    """
    if mode.n_eff <= cladding_index:
        raise RadiativeError(
            f"Mode index {mode.n_eff:.5f} does not exceed the cladding index "
            f"{cladding_index:.5f}; the bend is radiative.")
    n1 = core_index or math.sqrt(float(mode.eps.values.max()))
    k0 = mode.omega / C_LIGHT
    beta = mode.n_eff * k0
    kappa = math.sqrt(max(n1 ** 2 * k0 ** 2 - beta ** 2, 0.0))
    gamma = math.sqrt(beta ** 2 - cladding_index ** 2 * k0 ** 2)
    d = width / 2

    # log of the attenuation per unit length
    log_alpha = (
        2 * math.log(gamma) + 2 * math.log(kappa) + 2 * gamma * d
        - math.log(beta * (1 + gamma * d) * (n1 ** 2 - cladding_index ** 2) * k0 ** 2)
        - 2 * gamma ** 3 * R / (3 * beta ** 2)) if kappa > 0 else -math.inf
    log_q = math.log(beta) - log_alpha
    return math.exp(log_q) if log_q < 700 else math.inf


def convergence_study(
    geometry: RingGeometry,
    wavelength: float,
    spacing: float,
    window_rho: float,
    window_z: float,
    polarization: str,
    z_center: float = 0.0,
    bend: bool = True,
    logger: Optional[Logger] = None) -> Dict[str, float]:
    """Solves at spacing h and h/2 and reports the effective-index change.
    """
    results = {}
    for label, h in (("coarse", spacing), ("fine", spacing / 2)):
        modes = solve_geometry_modes(
            geometry, wavelength, h, window_rho, window_z, z_center,
            n_modes=4, bend=bend, logger=logger)
        results[label] = select_mode(modes, polarization).n_eff
    delta = abs(results["fine"] - results["coarse"])
    if logger:
        logger.info(
            f"Grid convergence at {spacing * 1e9:.1f} nm: n_eff "
            f"{results['coarse']:.6f} -> {results['fine']:.6f} (change {delta:.2e}).")
    return {
        "spacing_nm": spacing * 1e9,
        "n_eff_coarse": results["coarse"],
        "n_eff_fine": results["fine"],
        "delta_n_eff": delta,
    }


if __name__ == "__main__":
    from ringtrap.models.geometry import MembraneStack
    from ringtrap.services.logger import LoggerFactory
    logger = LoggerFactory.get("mode-solver")
    geometry = RingGeometry(
        radius=16e-6, width=1.1e-6, height=0.29e-6, core_index=2.0,
        stack=MembraneStack(((550e-9, 2.0), (2e-6, 1.45))))
    modes = solve_geometry_modes(geometry, 894e-9, 20e-9, 4e-6, 3e-6, logger=logger)
    for m in modes:
        logger.info(f"{m.polarization}: n_eff = {m.n_eff:.5f}")
