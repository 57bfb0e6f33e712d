import math
import numpy as np
import pytest
from ringtrap.constants import FIELD_DECAY_TOLERANCE
from ringtrap.models.errors import CutoffError, GridSizingError, RadiativeError
from ringtrap.models.geometry import MembraneStack, RingGeometry
from ringtrap.physics.dielectric import build_epsilon_map, mode_grid
from ringtrap.physics.mode_solver import (
    bend_loss_q,
    convergence_study,
    index_bounds,
    mode_diagnostics,
    select_mode,
    solve_geometry_modes,
    solve_modes,
    waveguide_operator
)
from scipy.optimize import brentq
from scipy.sparse.linalg import eigs

WAVELENGTH = 894e-9


def test_modes_are_normalized(coarse_modes):
    for mode in coarse_modes:
        assert mode.normalized
        assert mode.normalization_ratio() == pytest.approx(1.0, rel=1e-9)


def test_modes_are_guided_and_sorted(coarse_modes):
    indices = [m.n_eff for m in coarse_modes]
    assert indices == sorted(indices, reverse=True)
    assert all(1.45 < n < 2.0 for n in indices)


def test_tm_mode_is_vertically_polarized(tm_mode):
    eps = tm_mode.eps.values
    assert np.sum(eps * tm_mode.e_z.values ** 2) > np.sum(eps * tm_mode.e_rho.values ** 2)
    assert tm_mode.k == pytest.approx(2 * math.pi * tm_mode.n_eff / WAVELENGTH, rel=1e-9)
    assert tm_mode.m_azimuthal == pytest.approx(tm_mode.k * 16e-6)


def test_te_mode_is_more_confined(coarse_modes, tm_mode):
    assert select_mode(coarse_modes, "TE").n_eff > tm_mode.n_eff


def test_missing_polarization(coarse_modes):
    te_only = [m for m in coarse_modes if m.polarization == "TE"]
    with pytest.raises(CutoffError):
        select_mode(te_only, "TM")


def test_small_window_is_rejected(baseline_geometry):
    with pytest.raises(GridSizingError):
        solve_geometry_modes(baseline_geometry, WAVELENGTH, 40e-9, 2e-6, 3e-6, z_center=-0.15e-6)


def test_mode_count_must_be_positive(baseline_geometry):
    grid = mode_grid(baseline_geometry, 40e-9, 3.2e-6, 3e-6, -0.15e-6)
    eps_map = build_epsilon_map(baseline_geometry, grid, WAVELENGTH)
    with pytest.raises(ValueError):
        solve_modes(eps_map, WAVELENGTH, 0, bend_radius=16e-6)


def test_large_bend_matches_straight_guide():
    radius = 1.1
    geometry = RingGeometry(
        radius=radius,
        width=1.1e-6,
        height=0.29e-6,
        core_index=2.0,
        stack=MembraneStack(((550e-9, 2.0), (2e-6, 1.45))))
    grid = mode_grid(geometry, 40e-9, 3.2e-6, 3e-6, -0.15e-6)
    eps_map = build_epsilon_map(geometry, grid, WAVELENGTH)
    bent = select_mode(solve_modes(eps_map, WAVELENGTH, 4, bend_radius=radius), "TM")
    straight = select_mode(
        solve_modes(eps_map, WAVELENGTH, 4, circumference=2 * math.pi * radius), "TM")
    assert bent.n_eff == pytest.approx(straight.n_eff, abs=1e-6)


def test_modes_decay_inside_the_window(coarse_modes):
    for mode in coarse_modes:
        field = np.sqrt(mode.e_rho.values ** 2 + mode.e_z.values ** 2 + mode.e_phi_im.values ** 2)
        edge = max(field[0].max(), field[-1].max(), field[:, 0].max(), field[:, -1].max())
        assert edge <= FIELD_DECAY_TOLERANCE * field.max()


def test_bend_bounds_use_the_mapped_permittivity(baseline_geometry):
    grid = mode_grid(baseline_geometry, 40e-9, 3.2e-6, 3e-6, -0.15e-6)
    eps_map = build_epsilon_map(baseline_geometry, grid, WAVELENGTH)
    n_clad, n_core = index_bounds(eps_map)
    assert (n_clad, n_core) == pytest.approx((1.45, 2.0))

    bent_clad, bent_core = index_bounds(eps_map, 16e-6)
    outer_edge = grid.rho_samples[grid.rho_samples < baseline_geometry.rho_w + 0.55e-6].max()
    assert bent_clad == pytest.approx(1.45)
    assert bent_core == pytest.approx(2.0 * math.exp((outer_edge - 16e-6) / 16e-6), rel=1e-9)


def _slab_index(n_core, n_clad, thickness, wavelength):
    k0 = 2 * math.pi / wavelength

    def even_te(n):
        kz = k0 * math.sqrt(n_core ** 2 - n ** 2)
        gamma = k0 * math.sqrt(n ** 2 - n_clad ** 2)
        return kz * math.tan(kz * thickness / 2) - gamma

    return brentq(even_te, n_clad + 1e-9, n_core - 1e-9, xtol=1e-12)


def test_slab_limit_matches_the_dispersion_relation():
    n_core, n_clad, thickness = 1.5, 1.45, 1.0
    hz = 0.01
    rho = np.arange(20) * 2.0
    z = (np.arange(600) + 0.5) * hz - 3.0
    eps = np.where(np.abs(z) < thickness / 2, n_core ** 2, n_clad ** 2)
    eps = np.broadcast_to(eps, (rho.size, z.size)).copy()
    k0 = 2 * math.pi / 0.894

    op, _ = waveguide_operator(eps, k0, 2.0, hz)
    values = eigs(op, k=3, sigma=(k0 * n_core) ** 2, which="LM", return_eigenvectors=False)
    n_eff = math.sqrt(max(values.real)) / k0
    assert n_eff == pytest.approx(_slab_index(n_core, n_clad, thickness, 0.894), abs=1e-4)


def test_straight_guide_is_mirror_symmetric(baseline_geometry):
    modes = solve_geometry_modes(
        baseline_geometry, WAVELENGTH, 40e-9, 3.2e-6, 3e-6, z_center=-0.15e-6, bend=False)
    for mode in modes:
        np.testing.assert_allclose(
            mode.intensity, mode.intensity[::-1], rtol=0, atol=1e-6 * mode.intensity.max())


def test_convergence_study(baseline_geometry):
    result = convergence_study(
        baseline_geometry, WAVELENGTH, 40e-9, 3.2e-6, 3e-6, "TM", z_center=-0.15e-6)
    assert result["spacing_nm"] == pytest.approx(40.0)
    assert result["delta_n_eff"] == pytest.approx(
        abs(result["n_eff_fine"] - result["n_eff_coarse"]))
    assert result["delta_n_eff"] < 1e-2
    assert 1.45 < result["n_eff_fine"] < 2.0


def test_diagnostic_maps(tm_mode):
    diagnostics = mode_diagnostics(tm_mode)
    v = diagnostics.v_map.values
    assert np.all((v >= -1.0) & (v <= 1.0))
    np.testing.assert_allclose(
        diagnostics.intensity_map.values, tm_mode.eps.values * tm_mode.intensity)
    assert diagnostics.f_rho_map.values.shape == tm_mode.eps.shape


def test_bend_q_grows_with_radius(tm_mode):
    small = bend_loss_q(tm_mode, 5e-6, 1.1e-6, 2.0)
    large = bend_loss_q(tm_mode, 16e-6, 1.1e-6, 2.0)
    assert large > 10 * small
    assert large > 1e8


def test_bend_below_cladding_is_radiative(tm_mode):
    with pytest.raises(RadiativeError):
        bend_loss_q(tm_mode, 16e-6, 1.1e-6, 2.0, cladding_index=1.99)


@pytest.mark.published
def test_tm_visibility_above_the_waveguide(baseline_geometry):
    modes = solve_geometry_modes(baseline_geometry, WAVELENGTH, 10e-9, 4e-6, 3e-6, z_center=-0.15e-6)
    diagnostics = mode_diagnostics(select_mode(modes, "TM"))
    v = diagnostics.v_map.interpolate(np.array([16e-6]), np.array([100e-9]))[0, 0]
    assert v == pytest.approx(0.2, abs=0.1)
