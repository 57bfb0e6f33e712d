import math
import numpy as np
import pytest
from dataclasses import replace
from ringtrap.constants import C_LIGHT, K_B
from ringtrap.models.errors import TransportFailureError
from ringtrap.models.potential import PotentialGrid
from ringtrap.models.resonator import DriveResponse, ResonatorParams
from ringtrap.models.species import PolarizabilitySet
from ringtrap.physics.mode_solver import mode_diagnostics
from ringtrap.physics.resonator import mixed_mode_fields, standing_wave_intensity, standing_wave_volume
from ringtrap.physics.stark_shift import scalar_shift, vector_scalar_ratio, vector_shift
from ringtrap.physics.top_illumination import TweezerBeam
from ringtrap.physics.trap_composer import (
    TrapAxes,
    lattice_period,
    top_illumination_potential,
    trap_axes,
    tweezer_plus_lattice,
    two_color_trap
)
from ringtrap.physics.transport import power_ratio_scan, transport_rows, transport_sequence

POL = PolarizabilitySet(3033.0, -1632.0)


def _response(omega, I=3.0, I_tilde=0.0, V=0.0, sign=1):
    return DriveResponse(0.5e9 + 0j, I, I_tilde, V, 0.0, sign, omega)


def _at_wavelength(mode, wavelength):
    return replace(mode, omega=2 * math.pi * C_LIGHT / wavelength)


def test_uniform_standing_wave(tm_mode):
    response = _response(tm_mode.omega)
    grid = standing_wave_intensity(tm_mode, response, 0.1e-6)
    np.testing.assert_allclose(grid.values, 3.0 * tm_mode.intensity)


def test_corrugation_averages_out(tm_mode):
    response = _response(tm_mode.omega, V=0.8)
    l = np.arange(8) * lattice_period(tm_mode) / 8
    volume = standing_wave_volume(tm_mode, response, l)
    np.testing.assert_allclose(
        volume.mean(axis=1), 3.0 * tm_mode.intensity, atol=1e-9 * volume.max())
    assert not np.allclose(volume[:, 0, :], volume[:, 2, :])


def test_mixed_modes_are_normalized(tm_mode):
    params = ResonatorParams(tm_mode.omega, 1e9, 1e9, 2e9, xi=0.3)
    e1, e2 = mixed_mode_fields(tm_mode, params)
    assert (e1.index, e2.index) == (1, 2)
    assert e1.normalization_ratio() == pytest.approx(1.0, rel=1e-9)
    assert e2.normalization_ratio() == pytest.approx(1.0, rel=1e-9)


def test_scalar_shift_follows_intensity(tm_mode):
    diag = mode_diagnostics(tm_mode)
    U = scalar_shift(tm_mode, diag, _response(tm_mode.omega), POL, [0.0, 50e-9])
    assert U.values.shape == (tm_mode.rho_samples.size, 2, tm_mode.z_samples.size)
    assert U.terms == ("scalar",)
    np.testing.assert_allclose(U.values[:, 1, :], -POL.alpha0_si * 3.0 * tm_mode.intensity)


def test_vector_shift_needs_helicity(tm_mode):
    diag = mode_diagnostics(tm_mode)
    diagonal, offdiagonal = vector_shift(tm_mode, diag, _response(tm_mode.omega), POL)
    assert not np.any(diagonal.values)
    assert not np.any(offdiagonal.values)


def test_vector_shift_flips_with_port(tm_mode):
    diag = mode_diagnostics(tm_mode)
    plus, _ = vector_shift(tm_mode, diag, _response(tm_mode.omega, I_tilde=2.0), POL)
    minus, _ = vector_shift(tm_mode, diag, _response(tm_mode.omega, I_tilde=2.0, sign=-1), POL)
    assert np.any(plus.values)
    np.testing.assert_allclose(plus.values, -minus.values)


def test_vector_scalar_ratio_follows_helicity(tm_mode):
    diag = mode_diagnostics(tm_mode)
    along_z, transverse = vector_scalar_ratio(diag, _response(tm_mode.omega, I_tilde=2.0), POL)
    factor = POL.vector_ratio * 2.0 / 3.0
    np.testing.assert_allclose(along_z.values, factor * diag.f_z_map.values)
    np.testing.assert_allclose(transverse.values, factor * diag.f_rho_map.values)

    balanced, _ = vector_scalar_ratio(diag, _response(tm_mode.omega, I_tilde=0.0), POL)
    assert not np.any(balanced.values)
    dark, _ = vector_scalar_ratio(diag, _response(tm_mode.omega, I=0.0), POL)
    assert not np.any(dark.values)


def _two_color_inputs(tm_mode, baseline_geometry):
    red = _at_wavelength(tm_mode, 935.3e-9)
    blue = _at_wavelength(tm_mode, 793.5e-9)
    axes = trap_axes(baseline_geometry, 0.4e-6, 0.32e-6, 40e-9)
    return red, blue, axes


def test_two_color_trap_sums_its_terms(tm_mode, baseline_geometry, cesium):
    red, blue, axes = _two_color_inputs(tm_mode, baseline_geometry)
    tone_r, tone_b = _response(red.omega), _response(blue.omega, I=5.0)
    U = two_color_trap(red, blue, [tone_r], [tone_b], cesium, baseline_geometry, axes)
    assert U.terms == ("blue_scalar", "casimir_polder", "red_scalar")

    bare = two_color_trap(
        red, blue, [tone_r], [tone_b], cesium, baseline_geometry, axes, include_casimir_polder=False)
    expected = sum(
        scalar_shift(mode, mode_diagnostics(mode), tone, cesium.polarizability(mode.wavelength),
                     axes.l_samples, axes.rho_samples, axes.z_samples).values
        for mode, tone in ((red, tone_r), (blue, tone_b)))
    np.testing.assert_allclose(bare.values, expected)
    assert np.all(U.values <= bare.values)


def test_lattice_repeats_every_period(tm_mode, baseline_geometry, cesium):
    red, blue, _ = _two_color_inputs(tm_mode, baseline_geometry)
    d = lattice_period(red)
    base = trap_axes(baseline_geometry, 0.4e-6, 0.32e-6, 40e-9)
    axes = TrapAxes(base.rho_samples, np.arange(17) * d / 8, base.z_samples)
    U = two_color_trap(
        red, blue, [_response(red.omega, V=0.5)], [_response(blue.omega, I=5.0)],
        cesium, baseline_geometry, axes)
    np.testing.assert_allclose(
        U.values[:, 8:, :], U.values[:, :9, :], rtol=1e-9, atol=1e-12 * np.abs(U.values).max())
    assert not np.allclose(U.values[:, 0, :], U.values[:, 2, :])


def test_unmodulated_trap_is_uniform_along_l(tm_mode, baseline_geometry, cesium):
    red, blue, _ = _two_color_inputs(tm_mode, baseline_geometry)
    base = trap_axes(baseline_geometry, 0.4e-6, 0.32e-6, 40e-9)
    axes = TrapAxes(base.rho_samples, np.linspace(0.0, 1e-6, 7), base.z_samples)
    U = two_color_trap(
        red, blue, [_response(red.omega)], [_response(blue.omega, I=5.0)],
        cesium, baseline_geometry, axes)
    for j in range(1, 7):
        np.testing.assert_allclose(
            U.values[:, j, :], U.values[:, 0, :], rtol=1e-12, atol=1e-14 * np.abs(U.values).max())


def test_two_color_trap_needs_both_colors(tm_mode, baseline_geometry, cesium):
    red, blue, axes = _two_color_inputs(tm_mode, baseline_geometry)
    with pytest.raises(ValueError):
        two_color_trap(red, blue, [_response(red.omega)], [], cesium, baseline_geometry, axes)


def test_power_ratio_scan_keeps_order(tm_mode, baseline_geometry, cesium):
    red, blue, _ = _two_color_inputs(tm_mode, baseline_geometry)
    axes = trap_axes(baseline_geometry, 0.4e-6, 0.32e-6, 40e-9, l_period=lattice_period(red), l_samples=8)
    rows = power_ratio_scan(
        red, blue, [_response(red.omega, V=0.5)], [_response(blue.omega)], [0.5, 2.0],
        cesium, baseline_geometry, axes, jobs=1)
    assert [row["ratio"] for row in rows] == [0.5, 2.0]
    assert all(isinstance(row["open"], bool) for row in rows)


def test_power_ratio_scan_rejects_bad_ratios(tm_mode, baseline_geometry, cesium):
    red, blue, axes = _two_color_inputs(tm_mode, baseline_geometry)
    with pytest.raises(ValueError):
        power_ratio_scan(
            red, blue, [_response(red.omega)], [_response(blue.omega)], [0.0],
            cesium, baseline_geometry, axes, jobs=1)


def test_top_illumination_peaks_on_the_beam_axis(baseline_geometry, cesium):
    axes = trap_axes(baseline_geometry, 0.4e-6, 0.4e-6, 40e-9, l_span=(-0.2e-6, 0.2e-6), l_samples=5)
    beam = TweezerBeam(935.3e-9, 1.2e-6, 3.5e-3, center_rho=baseline_geometry.rho_w)
    U = top_illumination_potential(baseline_geometry, beam, cesium, axes, include_casimir_polder=False)
    assert U.terms == ("tweezer",)
    assert np.all(U.values <= 0)
    center = np.argmin(np.abs(axes.rho_samples - baseline_geometry.rho_w))
    column = U.values[:, 2, :]
    assert np.all(column[center] <= column)
    ratio = U.values[center + 2, 2, :] / U.values[center, 2, :]
    offset = axes.rho_samples[center + 2] - axes.rho_samples[center]
    np.testing.assert_allclose(ratio, np.exp(-2 * offset ** 2 / beam.waist ** 2))


def _grid(values, terms, axes):
    return PotentialGrid(axes.rho_samples, axes.l_samples, axes.z_samples, values, terms)


def test_tweezer_plus_lattice_is_a_sum():
    axes = TrapAxes(np.arange(3.0), np.arange(4.0), np.arange(1.0, 3.0))
    rng = np.random.default_rng(7)
    ev, tw, cp = (_grid(rng.normal(size=(3, 4, 2)), (name,), axes) for name in ("ev", "tw", "cp"))
    U = tweezer_plus_lattice(ev, tw, cp)
    np.testing.assert_allclose(U.values, ev.values + tw.values + cp.values)
    assert U.terms == ("cp", "ev", "tw")


def _lattice_well(geometry):
    half = 0.25e-6
    axes = TrapAxes(
        geometry.rho_w + np.linspace(-half, half, 31),
        np.linspace(-half, half, 31),
        0.3e-6 + np.linspace(-half, half, 31))
    R, L, Z = np.meshgrid(axes.rho_samples, axes.l_samples, axes.z_samples, indexing="ij")
    r2 = (R - geometry.rho_w) ** 2 + L ** 2 + (Z - 0.3e-6) ** 2
    values = -100e-6 * K_B * np.exp(-r2 / (2 * 200e-9 ** 2))
    return axes, _grid(values, ("lattice",), axes)


def test_transport_holds_an_unpowered_site(baseline_geometry, cesium):
    axes, ev = _lattice_well(baseline_geometry)
    cp = _grid(np.zeros(ev.shape), ("casimir_polder",), axes)
    beam = TweezerBeam(935.3e-9, 1.2e-6, 0.0, center_rho=baseline_geometry.rho_w)
    schedule = [(0.0, 0.0)] * 3
    trajectory = transport_sequence(ev, cp, baseline_geometry, beam, cesium, schedule, 290e-9)
    assert len(trajectory) == 3
    for report in trajectory:
        np.testing.assert_allclose(report.center, (baseline_geometry.rho_w, 0.0, 0.3e-6), atol=3e-9)


def test_transport_needs_a_schedule(baseline_geometry, cesium):
    axes, ev = _lattice_well(baseline_geometry)
    beam = TweezerBeam(935.3e-9, 1.2e-6, 0.0, center_rho=baseline_geometry.rho_w)
    with pytest.raises(ValueError):
        transport_sequence(ev, ev, baseline_geometry, beam, cesium, [], 290e-9)


def test_transport_rows_carry_the_site_barrier(baseline_geometry, cesium):
    axes, ev = _lattice_well(baseline_geometry)
    cp = _grid(np.zeros(ev.shape), ("casimir_polder",), axes)
    beam = TweezerBeam(935.3e-9, 1.2e-6, 0.0, center_rho=baseline_geometry.rho_w)
    schedule = [(0.0, 0.0), (0.0, 0.0)]
    trajectory = transport_sequence(ev, cp, baseline_geometry, beam, cesium, schedule, 290e-9)
    rows = transport_rows(schedule, trajectory, baseline_geometry.rho_w)
    assert [row["step"] for row in rows] == [0, 1]
    assert all(np.isnan(row["site_barrier_uK"]) for row in rows)
    assert rows[0]["l_t_nm"] == pytest.approx(0.0, abs=3.0)


def test_transport_fails_where_the_site_vanishes(baseline_geometry, cesium):
    axes, ev = _lattice_well(baseline_geometry)
    cp = _grid(np.zeros(ev.shape), ("casimir_polder",), axes)
    beam = TweezerBeam(793.5e-9, 1.2e-6, 0.0, center_rho=baseline_geometry.rho_w)
    schedule = [(0.0, 0.0), (1.0, 0.0)]
    with pytest.raises(TransportFailureError) as info:
        transport_sequence(ev, cp, baseline_geometry, beam, cesium, schedule, 290e-9)
    assert info.value.step == 1
    assert "step 1" in str(info.value)
