import math
import pytest
from conftest import COARSE_SETTINGS
from dataclasses import replace
from ringtrap.models.errors import DielectricPositionError, PhysicsDomainError, RingtrapError
from ringtrap.models.loss import RoughnessSpec
from ringtrap.physics.cqed_metrics import (
    check_cooperativity_identity,
    cooperativity,
    cooperativity_from_q,
    coupling_g,
    cqed_report,
    geometry_sweep,
    mode_area,
    pivot_by_radius,
    surface_emitter_report
)
from ringtrap.physics.loss_model import combine_q
from ringtrap.physics.mode_solver import select_mode, solve_geometry_modes

TWO_PI = 2 * math.pi
ATOM = (16e-6, 100e-9)
ROUGHNESS = RoughnessSpec(2e-9, 60e-9, 1.4e-9, 73e-9, 1.6e-9, 84e-9)


def test_cooperativity_of_measured_rates():
    c = cooperativity(TWO_PI * 170e6, TWO_PI * 1010e6, TWO_PI * 4.6e6)
    assert c == pytest.approx(24.88, abs=0.01)


def test_cooperativity_needs_positive_rates():
    with pytest.raises(ValueError):
        cooperativity(1.0, 0.0, 1.0)


def test_measured_report(tm_mode, baseline_geometry, cesium):
    report = cqed_report(
        tm_mode, baseline_geometry, cesium, ATOM,
        kappa=TWO_PI * 1010e6, g=TWO_PI * 170e6)
    assert report.cooperativity == pytest.approx(24.88, abs=0.01)
    assert report.vacuum_rabi_frequency == pytest.approx(2 * TWO_PI * 170e6)
    assert report.mode_volume == pytest.approx(report.mode_area * tm_mode.circumference)


def test_q_budget_report_satisfies_identity(tm_mode, baseline_geometry, cesium):
    report = cqed_report(tm_mode, baseline_geometry, cesium, ATOM, combine_q(q_absorption=1e6))
    assert report.quality_factor == pytest.approx(1e6)
    expected = cooperativity_from_q(tm_mode.wavelength, 1e6, report.mode_volume)
    assert report.cooperativity == pytest.approx(expected, rel=1e-12)
    assert report.g == pytest.approx(coupling_g(report.mode_volume, cesium, tm_mode.omega))


def test_identity_check_catches_mismatch(tm_mode, baseline_geometry, cesium):
    report = cqed_report(tm_mode, baseline_geometry, cesium, ATOM, combine_q(q_absorption=1e6))
    with pytest.raises(RingtrapError):
        check_cooperativity_identity(replace(report, cooperativity=report.cooperativity * 1.01))


def test_report_needs_a_loss_rate(tm_mode, baseline_geometry, cesium):
    with pytest.raises(ValueError):
        cqed_report(tm_mode, baseline_geometry, cesium, ATOM)


def test_atom_inside_the_core(tm_mode):
    with pytest.raises(DielectricPositionError):
        mode_area(tm_mode, tm_mode.eps, (16e-6, -0.15e-6))
    assert mode_area(tm_mode, tm_mode.eps, (16e-6, -0.15e-6), allow_dielectric=True) > 0


def test_atom_outside_the_grid(tm_mode):
    with pytest.raises(PhysicsDomainError):
        mode_area(tm_mode, tm_mode.eps, (16e-6, 5e-6))


def test_mode_area_grows_with_height(tm_mode):
    near = mode_area(tm_mode, tm_mode.eps, (16e-6, 60e-9))
    far = mode_area(tm_mode, tm_mode.eps, (16e-6, 300e-9))
    assert far > near


def test_surface_emitter(tm_mode, baseline_geometry):
    summary = surface_emitter_report(tm_mode, baseline_geometry, 1e6)
    assert 0 <= summary["z_surface_nm"] < 40
    assert summary["Vm_lambda_over_n3"] == pytest.approx(summary["Vm_lambda3"] * 8.0)
    assert summary["C"] > 0


def test_small_sweep(baseline_geometry, cesium):
    rows, best = geometry_sweep(
        baseline_geometry, [1.1e-6], [0.29e-6], [12e-6, 16e-6],
        ROUGHNESS, cesium, 894e-9, COARSE_SETTINGS, jobs=1)
    assert [row["R_um"] for row in rows] == pytest.approx([12.0, 16.0])
    assert best["C"] == max(row["C"] for row in rows)
    tables = pivot_by_radius(rows)
    assert sorted(tables) == pytest.approx([12.0, 16.0])
    assert all(table.shape == (1, 1) for table in tables.values())


@pytest.mark.published
def test_baseline_mode_area(baseline_geometry, cesium):
    modes = solve_geometry_modes(baseline_geometry, 894e-9, 10e-9, 4e-6, 3e-6, z_center=-0.15e-6)
    mode = select_mode(modes, "TM")
    report = cqed_report(mode, baseline_geometry, cesium, ATOM, kappa=TWO_PI * 1e9)
    assert report.mode_area * 1e12 == pytest.approx(5.2, rel=0.15)
    assert report.mode_volume * 1e18 == pytest.approx(523, rel=0.15)
    assert report.g / TWO_PI / 1e6 == pytest.approx(200, rel=0.15)
