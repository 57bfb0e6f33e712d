import numpy as np
import pytest
from ringtrap.constants import K_B
from ringtrap.models.errors import OpenTrapError
from ringtrap.models.potential import PotentialGrid, TrapReport
from ringtrap.physics.trap_analysis import SURFACE_SITE, analyze_trap, escape_barrier, local_minima
from ringtrap.physics.trap_composer import compose, trap_axes, trap_row
from ringtrap.physics.transport import trajectory_summary, transport_schedule
from scipy import ndimage

DEPTH = 100e-6 * K_B
WIDTH = 200e-9


def _axes(n=41, half=0.6e-6):
    rho = 16e-6 + np.linspace(-half, half, n)
    l = np.linspace(-half, half, n)
    z = 0.3e-6 + np.linspace(-half, half, n)
    return rho, l, z


def _gaussian_well(center=(16e-6, 0.0, 0.3e-6), depth=DEPTH):
    rho, l, z = _axes()
    R, L, Z = np.meshgrid(rho, l, z, indexing="ij")
    r2 = (R - center[0]) ** 2 + (L - center[1]) ** 2 + (Z - center[2]) ** 2
    return PotentialGrid(rho, l, z, -depth * np.exp(-r2 / (2 * WIDTH ** 2)), ("well",))


def test_gaussian_well_frequencies(cesium):
    report = analyze_trap(_gaussian_well(), cesium)
    omega = np.sqrt(DEPTH / (cesium.mass * WIDTH ** 2))
    for frequency in report.frequencies:
        assert frequency == pytest.approx(omega, rel=0.02)
    assert report.center[0] == pytest.approx(16e-6, abs=5e-9)
    assert report.center[2] == pytest.approx(0.3e-6, abs=5e-9)


def test_depth_is_the_lowest_exit(cesium):
    U = _gaussian_well()
    report = analyze_trap(U, cesium)
    edge = DEPTH * np.exp(-(0.6e-6) ** 2 / (2 * WIDTH ** 2))
    assert report.depth == pytest.approx(DEPTH - edge, rel=0.01)
    assert report.depth_uK == pytest.approx(report.depth / K_B * 1e6)


def test_off_grid_minimum_is_refined(cesium):
    center = (16e-6 + 7e-9, 11e-9, 0.3e-6 - 9e-9)
    report = analyze_trap(_gaussian_well(center), cesium)
    np.testing.assert_allclose(report.center, center, atol=3e-9)


def test_flat_potential_is_open(cesium):
    rho, l, z = _axes(11)
    U = PotentialGrid(rho, l, z, np.zeros((11, 11, 11)))
    with pytest.raises(OpenTrapError):
        analyze_trap(U, cesium)


def test_shallow_trap_is_open(cesium):
    with pytest.raises(OpenTrapError) as info:
        analyze_trap(_gaussian_well(depth=0.5e-6 * K_B), cesium)
    assert "threshold" in str(info.value)


def test_surface_site_prefers_the_lowest_height(cesium):
    rho, l, z = _axes()
    R, L, Z = np.meshgrid(rho, l, z, indexing="ij")
    values = np.zeros(R.shape)
    for height, depth in ((0.0, 0.5 * DEPTH), (0.45e-6, DEPTH)):
        r2 = (R - 16e-6) ** 2 + L ** 2 + (Z - height) ** 2
        values -= depth * np.exp(-r2 / (2 * (WIDTH / 2) ** 2))
    U = PotentialGrid(rho, l, z, values)
    lowest = analyze_trap(U, cesium)
    surface = analyze_trap(U, cesium, site=SURFACE_SITE)
    assert lowest.center[2] > surface.center[2]


def test_local_minima_skip_faces():
    values = np.zeros((5, 1, 5))
    values[0, 0, 2] = -1.0
    values[2, 0, 2] = -0.5
    U = PotentialGrid(np.arange(5.0), np.array([0.0]), np.arange(5.0), values)
    assert local_minima(U) == [(2, 0, 2)]


def test_escape_barrier_through_the_mask():
    values = np.full((5, 1, 5), 10.0)
    values[2, 0, 2] = 0.0
    values[2, 0, 1] = 3.0
    mask = np.zeros(values.shape, dtype=bool)
    mask[2, 0, 0] = True
    level, saddle = escape_barrier(values, mask, (2, 0, 2))
    assert level == 3.0
    assert saddle == (2, 0, 1)


def test_compose_is_order_independent():
    rho, l, z = _axes(5)
    rng = np.random.default_rng(3)
    parts = [
        PotentialGrid(rho, l, z, rng.normal(size=(5, 5, 5)), (name,))
        for name in ("c", "a", "b")
    ]
    forward = compose(parts)
    backward = compose(parts[::-1])
    np.testing.assert_array_equal(forward.values, backward.values)
    assert forward.terms == ("a", "b", "c")


def test_compose_rejects_mismatched_sampling():
    rho, l, z = _axes(5)
    a = PotentialGrid(rho, l, z, np.zeros((5, 5, 5)))
    b = PotentialGrid(rho + 1e-9, l, z, np.zeros((5, 5, 5)))
    with pytest.raises(ValueError):
        compose([a, b])


def test_periodic_axes_sample_one_period(baseline_geometry):
    axes = trap_axes(baseline_geometry, 1.2e-6, 0.5e-6, 10e-9, l_period=230e-9, l_samples=23)
    assert axes.periodic_l
    assert axes.l_samples.size == 24
    assert 0.0 in axes.l_samples
    assert axes.l_samples[-1] - axes.l_samples[0] == pytest.approx(230e-9 * 23 / 24)
    assert axes.z_samples[0] == pytest.approx(10e-9)


def test_open_rows_are_flagged():
    row = trap_row({"ratio": 1.0}, None, 16e-6)
    assert row["open"] is True
    assert row["ratio"] == 1.0


def test_transport_schedule_ramps_then_moves():
    schedule = transport_schedule(2e-3, 3e-3, 0.5e-3, -200e-9, 0.0, 50e-9)
    powers = [p for p, _ in schedule]
    centers = [c for _, c in schedule]
    assert powers[:3] == pytest.approx([2e-3, 2.5e-3, 3e-3])
    assert all(c == -200e-9 for c in centers[:3])
    assert centers[3:] == pytest.approx([-150e-9, -100e-9, -50e-9, 0.0], abs=1e-15)
    assert all(p == pytest.approx(3e-3) for p in powers[3:])


def test_transport_schedule_needs_positive_steps():
    with pytest.raises(ValueError):
        transport_schedule(2e-3, 3e-3, 0.0, 0.0, 1e-6, 1e-7)


def test_quadratic_minimum_is_exact(cesium):
    rho, l, z = _axes()
    center = (16e-6 + 7e-9, 11e-9, 0.3e-6 - 9e-9)
    R, L, Z = np.meshgrid(rho, l, z, indexing="ij")
    curvature = DEPTH / (0.3e-6) ** 2
    values = curvature * ((R - center[0]) ** 2 + (L - center[1]) ** 2 + (Z - center[2]) ** 2)
    report = analyze_trap(PotentialGrid(rho, l, z, values), cesium)
    spacing = rho[1] - rho[0]
    np.testing.assert_allclose(report.center, center, atol=1e-3 * spacing)
    assert report.value == pytest.approx(0.0, abs=1e-6 * DEPTH)


def _flood_level(values, start, exit_axes=(0, 1, 2)):
    """Smallest level whose sub-level set joins `start` to an exit face.
    """
    levels = np.unique(values[values >= values[start]])
    structure = ndimage.generate_binary_structure(3, 1)

    def reaches_exit(level):
        labels, _ = ndimage.label(values <= level, structure)
        component = labels == labels[start]
        return any(
            component.take(0, axis=a).any() or component.take(-1, axis=a).any()
            for a in exit_axes)

    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if reaches_exit(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return levels[lo]


def test_escape_barrier_matches_a_level_set_flood():
    rng = np.random.default_rng(11)
    n = 21
    x = np.linspace(-1.0, 1.0, n)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    values = ndimage.gaussian_filter(rng.normal(size=(n, n, n)), sigma=2) * 10 \
        - np.exp(-(X ** 2 + Y ** 2 + Z ** 2))
    mask = np.zeros(values.shape, dtype=bool)
    for start in [(10, 10, 10), (5, 12, 8), (15, 3, 14), (9, 17, 6)]:
        for exit_axes in ((0, 1, 2), (0, 2)):
            level, _ = escape_barrier(values, mask, start, exit_axes=exit_axes)
            assert level == _flood_level(values, start, exit_axes)


def test_depth_follows_saddles_off_the_minimum_plane(cesium):
    rho, l, z = _axes()
    R, L, Z = np.meshgrid(rho, l, z, indexing="ij")
    transverse = (R - 16e-6) ** 2 + (Z - 0.3e-6) ** 2
    width = WIDTH + 0.8e-6 * np.exp(-(L - 0.4e-6) ** 2 / (2 * 60e-9 ** 2))
    values = -DEPTH * np.exp(-transverse / (2 * width ** 2)) \
        - 0.1 * DEPTH * np.exp(-L ** 2 / (2 * 150e-9 ** 2))
    U = PotentialGrid(rho, l, z, values)
    report = analyze_trap(U, cesium)

    assert report.center[1] == pytest.approx(0.0, abs=3e-9)
    level = _flood_level(values, (20, 20, 20), exit_axes=(0, 2))
    assert report.depth == pytest.approx(level - report.value, rel=1e-9)
    in_plane = DEPTH * (1 - np.exp(-(0.6e-6) ** 2 / (2 * WIDTH ** 2)))
    assert report.depth < 0.5 * in_plane


def test_site_barrier_between_wells_along_l(cesium):
    rho = 16e-6 + np.linspace(-0.6e-6, 0.6e-6, 41)
    l = np.linspace(-0.45e-6, 0.45e-6, 61)
    z = 0.3e-6 + np.linspace(-0.6e-6, 0.6e-6, 41)
    R, L, Z = np.meshgrid(rho, l, z, indexing="ij")
    transverse = (R - 16e-6) ** 2 + (Z - 0.3e-6) ** 2
    lattice = 4e-6 * K_B
    values = -2 * DEPTH * np.exp(-transverse / (2 * WIDTH ** 2)) \
        - lattice / 2 * np.cos(2 * np.pi * L / 300e-9)
    report = analyze_trap(PotentialGrid(rho, l, z, values), cesium, near=(16e-6, 0.0, 0.3e-6))

    assert report.center[1] == pytest.approx(0.0, abs=1e-9)
    assert report.site_barrier_uK == pytest.approx(4.0, rel=1e-3)
    edge = np.exp(-(0.6e-6) ** 2 / (2 * WIDTH ** 2))
    assert report.depth_uK == pytest.approx(200.0 * (1 - edge), rel=1e-3)


def test_lone_well_has_no_site_barrier(cesium):
    report = analyze_trap(_gaussian_well(), cesium)
    assert report.site_barrier is None
    assert np.isnan(report.site_barrier_uK)


def test_periodic_lattice_reaches_its_own_copy(cesium):
    rho = 16e-6 + np.linspace(-0.6e-6, 0.6e-6, 41)
    l = np.arange(20) * 15e-9
    z = 0.3e-6 + np.linspace(-0.6e-6, 0.6e-6, 41)
    R, L, Z = np.meshgrid(rho, l, z, indexing="ij")
    transverse = (R - 16e-6) ** 2 + (Z - 0.3e-6) ** 2
    values = -2 * DEPTH * np.exp(-transverse / (2 * WIDTH ** 2)) \
        - 2e-6 * K_B * np.cos(2 * np.pi * L / 300e-9)
    U = PotentialGrid(rho, l, z, values, periodic_l=True)
    report = analyze_trap(U, cesium)
    assert report.site_barrier_uK == pytest.approx(4.0, rel=1e-3)


def _report(l):
    return TrapReport(
        center=(16e-6, l, 0.3e-6),
        value=-DEPTH,
        depth=DEPTH,
        saddle=(16.6e-6, 0.3e-6),
        frequencies=(1.0, 1.0, 1.0),
        principal_axes=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
        tilt_angle=0.0,
        site_barrier=2e-6 * K_B if l > 0 else None)


def test_trajectory_summary_flags_jumps():
    smooth = trajectory_summary([_report(0.0), _report(10e-9), _report(20e-9)], 300e-9)
    assert smooth["connected"] is True
    assert smooth["max_step_nm"] == pytest.approx(10.0)
    assert smooth["min_site_barrier_uK"] == pytest.approx(2.0)

    jump = trajectory_summary([_report(0.0), _report(100e-9)], 300e-9)
    assert jump["connected"] is False
