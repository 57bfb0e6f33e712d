"""Shared fixtures. Mode solves use a coarse grid so the suite stays
quick; full-resolution checks against reference values carry the
`published` marker and are deselected by default.
"""

import pytest
import textwrap
from pathlib import Path
from ringtrap.models.geometry import MembraneStack, RingGeometry
from ringtrap.models.species import load_species
from ringtrap.physics.mode_solver import SolveSettings, cached_geometry_modes, select_mode
from ringtrap.services.logger import LoggerFactory

COARSE_SETTINGS = SolveSettings(
    spacing=40e-9,
    window_rho=3.2e-6,
    window_z=3e-6,
    z_center=-0.15e-6,
    n_modes=4)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "published: full-resolution checks against reference values")


@pytest.fixture(scope="session")
def logger():
    return LoggerFactory.get("ringtrap-tests")


@pytest.fixture(scope="session")
def cesium():
    return load_species("cesium")


@pytest.fixture(scope="session")
def baseline_geometry():
    return RingGeometry(
        radius=16e-6,
        width=1.1e-6,
        height=0.29e-6,
        core_index=2.0,
        stack=MembraneStack(((550e-9, 2.0), (2e-6, 1.45))))


@pytest.fixture(scope="session")
def coarse_modes(baseline_geometry):
    return cached_geometry_modes(baseline_geometry, 894e-9, COARSE_SETTINGS)


@pytest.fixture(scope="session")
def tm_mode(coarse_modes):
    return select_mode(coarse_modes, "TM")


@pytest.fixture
def write_config(tmp_path):
    """Writes a YAML document into the test directory and returns its path.
    """
    def _write(text: str, fname: str = "run.yaml") -> Path:
        fpath = tmp_path / fname
        fpath.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return fpath
    return _write
