"""Writes and reads run artifacts: CSV tables, JSON reports and
mode-field grids, each carrying a provenance header.
"""

import io
import json
import math
import numpy as np
import os
import pandas as pd
from pathlib import Path
from ringtrap.constants import CSV_FLOAT_FORMAT, FIELD_FLOAT_FORMAT, K_B, PROVENANCE_PREFIX
from ringtrap.models.fields import ModeField
from ringtrap.models.geometry import Grid2D
from ringtrap.models.potential import PotentialGrid
from typing import Any, Dict, Optional

FIELD_COMPONENTS = ("e_rho", "e_phi_im", "e_z", "eps")


def atomic_write_text(fpath: Path, text: str) -> None:
    """Writes a file through a temporary sibling and `os.replace`.
    """
    fpath = Path(fpath)
    fpath.parent.mkdir(parents=True, exist_ok=True)
    tmp = fpath.with_name(f".{fpath.name}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, fpath)


def jsonable(value: Any) -> Any:
    """Converts numpy scalars, arrays and non-finite floats into plain
    JSON values. Non-finite floats become None.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return {"re": jsonable(value.real), "im": jsonable(value.imag)}
    return value


def provenance_line(provenance: Dict) -> str:
    return PROVENANCE_PREFIX + json.dumps(jsonable(provenance), sort_keys=True, separators=(",", ":"))


def write_csv(df: pd.DataFrame, fpath: Path, provenance: Dict) -> Path:
    """Writes a table with a leading provenance comment line.

    Args:
        df (`pd.DataFrame`): Table whose column names carry units.

        fpath (`Path`): Destination.

        provenance (dict): Provenance block.

    Returns:
        (`Path`): The written path.
    """
    buffer = io.StringIO()
    df.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    atomic_write_text(fpath, provenance_line(provenance) + "\n" + buffer.getvalue())
    return Path(fpath)


def read_csv(fpath: Path) -> pd.DataFrame:
    """Reads a table written by `write_csv`, skipping the provenance line.
    """
    with open(fpath, "r", encoding="utf-8") as f:
        first = f.readline()
    skip = 1 if first.startswith(PROVENANCE_PREFIX) else 0
    return pd.read_csv(fpath, skiprows=skip)


def read_provenance(fpath: Path) -> Optional[Dict]:
    with open(fpath, "r", encoding="utf-8") as f:
        first = f.readline()
    if not first.startswith(PROVENANCE_PREFIX):
        return None
    return json.loads(first[len(PROVENANCE_PREFIX):])


def write_json(report: Dict, fpath: Path, provenance: Dict) -> Path:
    """Writes a structured report with sorted keys and a provenance block.
    """
    body = {**jsonable(report), "provenance": jsonable(provenance)}
    atomic_write_text(fpath, json.dumps(body, sort_keys=True, indent=2) + "\n")
    return Path(fpath)


def write_grid_csv(grid: Grid2D, fpath: Path, provenance: Dict, value_column: str) -> Path:
    """Writes a 2-D map in long format (rho_um, z_nm, value).
    """
    rho, z = np.meshgrid(grid.rho_samples, grid.z_samples, indexing="ij")
    df = pd.DataFrame({
        "rho_um": rho.ravel() * 1e6,
        "z_nm": z.ravel() * 1e9,
        value_column: grid.values.ravel(),
    })
    return write_csv(df, fpath, provenance)


def write_potential_slice(
    potential: PotentialGrid,
    fpath: Path,
    provenance: Dict,
    l_index: Optional[int] = None,
    z_index: Optional[int] = None) -> Path:
    """Writes a transverse (rho, z) slice at one l index, or a
    longitudinal (rho, l) slice at one z index, in microkelvin.
    """
    values_uK = potential.values / K_B * 1e6
    if z_index is None:
        j = 0 if l_index is None else l_index
        rho, z = np.meshgrid(potential.rho_samples, potential.z_samples, indexing="ij")
        df = pd.DataFrame({
            "rho_um": rho.ravel() * 1e6,
            "z_nm": z.ravel() * 1e9,
            "U_uK": values_uK[:, j, :].ravel(),
        })
    else:
        rho, l = np.meshgrid(potential.rho_samples, potential.l_samples, indexing="ij")
        df = pd.DataFrame({
            "rho_um": rho.ravel() * 1e6,
            "l_nm": l.ravel() * 1e9,
            "U_uK": values_uK[:, :, z_index].ravel(),
        })
    return write_csv(df, fpath, provenance)


def write_mode_field(mode: ModeField, directory: Path) -> Path:
    """Stores a mode as one text grid per component.

    Each file starts with a JSON header line holding the mode
    metadata and the sampling axes; values use 17 significant digits
    so a reload is bit-identical.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header = json.dumps({
        "n_eff": mode.n_eff,
        "k": mode.k,
        "m_azimuthal": mode.m_azimuthal,
        "omega": mode.omega,
        "polarization": mode.polarization,
        "circumference": mode.circumference,
        "bend_radius": mode.bend_radius,
        "normalized": mode.normalized,
        "rho_samples": mode.rho_samples.tolist(),
        "z_samples": mode.z_samples.tolist(),
    }, sort_keys=True)
    for name in FIELD_COMPONENTS:
        grid: Grid2D = getattr(mode, name)
        buffer = io.StringIO()
        np.savetxt(buffer, grid.values, fmt=FIELD_FLOAT_FORMAT, header=header, comments="# ")
        atomic_write_text(directory / f"{name}.txt", buffer.getvalue())
    return directory


def read_mode_field(directory: Path) -> ModeField:
    """Reloads a mode written by `write_mode_field`.
    """
    directory = Path(directory)
    grids = {}
    header = None
    for name in FIELD_COMPONENTS:
        fpath = directory / f"{name}.txt"
        with open(fpath, "r", encoding="utf-8") as f:
            first = f.readline()
        if not first.startswith("# "):
            raise ValueError(f"Mode field file '{fpath}' is missing its header.")
        header = json.loads(first[2:])
        rho = np.array(header["rho_samples"], dtype=float)
        z = np.array(header["z_samples"], dtype=float)
        values = np.loadtxt(fpath, comments="#", ndmin=2).reshape(rho.size, z.size)
        grids[name] = Grid2D(rho, z, values)
    return ModeField(
        e_rho=grids["e_rho"],
        e_phi_im=grids["e_phi_im"],
        e_z=grids["e_z"],
        eps=grids["eps"],
        n_eff=header["n_eff"],
        k=header["k"],
        m_azimuthal=header["m_azimuthal"],
        omega=header["omega"],
        polarization=header["polarization"],
        circumference=header["circumference"],
        bend_radius=header["bend_radius"],
        normalized=header["normalized"])
