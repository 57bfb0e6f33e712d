"""The run configuration schema and the validated configuration model.

Physical quantities are written in configuration files with an explicit
unit suffix (e.g., `width_um`, `kappa_GHz`, `power_uW`). The schema below
names each key by its stem, the unit family its suffix must come from and
its default, expressed in SI after normalization. Frequencies are given as
ordinary frequencies and stored as angular frequencies.
"""

import math
from dataclasses import dataclass, field
from ringtrap.constants import (
    DEFAULT_ATOM_HEIGHT,
    DEFAULT_GRID_SPACING,
    DEFAULT_Q_ABSORPTION,
    DEFAULT_WINDOW_RHO,
    DEFAULT_WINDOW_Z,
    LOSS_COMMAND,
    MODES_COMMAND,
    REPORT_COMMAND,
    SPECTRUM_FIT_COMMAND,
    SWEEP_COMMAND,
    TRANSPORT_COMMAND,
    TRAP_COMMAND,
    TRAP_SCAN_COMMAND,
    TRANSPORT_L_STEP_FRACTION,
    TRANSPORT_POWER_STEP
)
from ringtrap.models.errors import ConfigError
from ringtrap.models.geometry import (
    MembraneStack,
    RACETRACK_SHAPE,
    RING_SHAPE,
    RingGeometry
)
from ringtrap.models.loss import RoughnessSpec
from typing import Any, Dict, List, Optional, Tuple

LENGTH = 'length'
FREQUENCY = 'frequency'
POWER = 'power'
TEMPERATURE = 'temperature'
ANGLE = 'angle'

_MODE_COMMANDS = (
    MODES_COMMAND,
    TRAP_COMMAND,
    TRAP_SCAN_COMMAND,
    TRANSPORT_COMMAND,
    LOSS_COMMAND,
    REPORT_COMMAND,
)


@dataclass(frozen=True)
class FieldSpec:
    """Describes one configuration key.

    Attributes:
        family (str): Unit family of a physical quantity, or None for
            a plain value.

        kind (type): Python type of a plain value.

        default (any): SI default, or None when the key is optional
            without a default.

        required_for (tuple of str): Commands that need the key.

        allow_zero (bool): Whether zero passes validation.

        allow_negative (bool): Whether negative values pass validation.

        allow_range (bool): Whether a list of values or a
            {start, stop, step} mapping is accepted.

        choices (tuple): Allowed plain values, if restricted.

        item_schema (dict): Schema of each mapping in a list of mappings.
    """
    family: Optional[str] = None
    kind: type = float
    default: Any = None
    required_for: Tuple[str, ...] = ()
    allow_zero: bool = False
    allow_negative: bool = False
    allow_range: bool = False
    choices: Tuple[Any, ...] = ()
    item_schema: Optional[Dict[str, "FieldSpec"]] = None


def _length(default=None, required_for=(), **kwargs) -> FieldSpec:
    return FieldSpec(LENGTH, float, default, required_for, **kwargs)


def _frequency(default=None, required_for=(), **kwargs) -> FieldSpec:
    return FieldSpec(FREQUENCY, float, default, required_for, **kwargs)


def _power(default=None, required_for=(), **kwargs) -> FieldSpec:
    return FieldSpec(POWER, float, default, required_for, **kwargs)


_LAYER_SCHEMA = {
    "thickness": _length(required_for=("*",)),
    "index": FieldSpec(kind=float, required_for=("*",)),
}

SCHEMA: Dict[str, Dict[str, FieldSpec]] = {
    "geometry": {
        "shape": FieldSpec(kind=str, default=RING_SHAPE, choices=(RING_SHAPE, RACETRACK_SHAPE)),
        "radius": _length(required_for=_MODE_COMMANDS),
        "width": _length(required_for=_MODE_COMMANDS),
        "height": _length(required_for=_MODE_COMMANDS),
        "core_index": FieldSpec(kind=float, default=2.0),
        "straight_length": _length(0.0, allow_zero=True),
    },
    "stack": {
        "layers": FieldSpec(
            kind=list,
            default=[{"thickness": 550e-9, "index": 2.0}, {"thickness": 2e-6, "index": 1.45}],
            item_schema=_LAYER_SCHEMA),
        "superstrate_index": FieldSpec(kind=float, default=1.0),
    },
    "grid": {
        "spacing": _length(DEFAULT_GRID_SPACING),
        "z_spacing": _length(),
        "window_rho": _length(DEFAULT_WINDOW_RHO),
        "window_z": _length(DEFAULT_WINDOW_Z),
        "z_center": _length(0.0, allow_zero=True, allow_negative=True),
    },
    "mode": {
        "wavelength": _length(required_for=(MODES_COMMAND, LOSS_COMMAND, REPORT_COMMAND, SWEEP_COMMAND)),
        "n_modes": FieldSpec(kind=int, default=4),
        "polarization": FieldSpec(kind=str, default="TM", choices=("TE", "TM")),
        "bend": FieldSpec(kind=bool, default=True),
        "convergence": FieldSpec(kind=bool, default=False),
        "write_fields": FieldSpec(kind=bool, default=True),
    },
    "atom": {
        "species": FieldSpec(kind=str, default="cesium"),
        "height": _length(DEFAULT_ATOM_HEIGHT),
        "rho_offset": _length(0.0, allow_zero=True, allow_negative=True),
    },
    "resonator": {
        "kappa": _frequency(2 * math.pi * 1e9),
        "kappa_c": _frequency(2 * math.pi * 0.5e9, allow_zero=True),
        "beta": _frequency(2 * math.pi * 0.6e9, allow_zero=True),
        "xi": FieldSpec(ANGLE, float, 0.0, allow_zero=True, allow_negative=True),
        "red_detuning_sign": FieldSpec(kind=int, default=1, choices=(1, -1)),
        "measured": FieldSpec(kind=bool, default=False),
        "coupling_g": _frequency(),
    },
    "spectrum": {
        "input": FieldSpec(kind=str, required_for=(SPECTRUM_FIT_COMMAND,)),
        "slope": FieldSpec(kind=bool, default=False),
        "kappa_c": _frequency(0.0, allow_zero=True),
        "max_evaluations": FieldSpec(kind=int, default=5000),
    },
    "trap": {
        "kind": FieldSpec(kind=str, default="two-color", choices=("two-color", "top-illumination")),
        "red_wavelength": _length(935.3e-9),
        "blue_wavelength": _length(793.5e-9),
        "red_buildup": FieldSpec(kind=float, allow_zero=True),
        "blue_buildup": FieldSpec(kind=float, allow_zero=True),
        "red_power": _power(allow_zero=True),
        "blue_power": _power(allow_zero=True),
        "window_rho": _length(1.2e-6),
        "z_top": _length(500e-9),
        "spacing": _length(10e-9),
        "l_samples": FieldSpec(kind=int, default=24),
        "casimir_polder": FieldSpec(kind=bool, default=True),
    },
    "tweezer": {
        "wavelength": _length(935.3e-9),
        "waist": _length(1.2e-6),
        "power": _power(3.5e-3, allow_zero=True),
        "center_l": _length(0.0, allow_zero=True, allow_negative=True),
    },
    "scan": {
        "kind": FieldSpec(kind=str, default="power-ratio", choices=("power-ratio", "thickness")),
        "ratios": FieldSpec(kind=float, allow_range=True),
        "thickness": _length(allow_range=True),
        "layer": FieldSpec(kind=int, default=-1, allow_negative=True),
    },
    "transport": {
        "power_start": _power(2e-3),
        "power_stop": _power(6e-3),
        "power_step": _power(TRANSPORT_POWER_STEP),
        "l_step_fraction": FieldSpec(kind=float, default=TRANSPORT_L_STEP_FRACTION),
        "lattice_power": _power(allow_zero=True),
    },
    "roughness": {
        "sigma_pm": _length(required_for=(LOSS_COMMAND, SWEEP_COMMAND), allow_zero=True),
        "L_pm": _length(required_for=(LOSS_COMMAND, SWEEP_COMMAND), allow_zero=True),
        "sigma_t": _length(required_for=(LOSS_COMMAND, SWEEP_COMMAND), allow_zero=True),
        "L_t": _length(required_for=(LOSS_COMMAND, SWEEP_COMMAND), allow_zero=True),
        "sigma_b": _length(required_for=(LOSS_COMMAND, SWEEP_COMMAND), allow_zero=True),
        "L_b": _length(required_for=(LOSS_COMMAND, SWEEP_COMMAND), allow_zero=True),
    },
    "loss": {
        "q_absorption": FieldSpec(kind=float, default=DEFAULT_Q_ABSORPTION),
        "include_bend": FieldSpec(kind=bool, default=True),
        "include_absorption": FieldSpec(kind=bool, default=False),
        "fundamental_limit": FieldSpec(kind=bool, default=False),
    },
    "sweep": {
        "width": _length(required_for=(SWEEP_COMMAND,), allow_range=True),
        "height": _length(required_for=(SWEEP_COMMAND,), allow_range=True),
        "radius": _length(required_for=(SWEEP_COMMAND,), allow_range=True),
        "polarization": FieldSpec(kind=str, default="TM", choices=("TE", "TM")),
    },
    "run": {
        "jobs": FieldSpec(kind=int),
        "cache": FieldSpec(kind=bool, default=True),
    },
}

TOP_LEVEL_KEYS = ("schema_version", "command") + tuple(SCHEMA)


@dataclass(frozen=True)
class RunConfig:
    """A validated, unit-normalized run configuration.

    Attributes:
        command (str): The subcommand to run.

        schema_version (int): Configuration schema version.

        sections (dict): Section name to {stem: SI value}, defaults
            filled in.

        config_hash (str): SHA-256 hex digest of the original text.

        source_path (str): Where the configuration was read from.
    """
    command: str
    schema_version: int
    sections: Dict[str, Dict[str, Any]]
    config_hash: str = ""
    source_path: str = ""

    def get(self, section: str, stem: str, default: Any = None) -> Any:
        value = self.sections.get(section, {}).get(stem)
        return default if value is None else value


    def require(self, section: str, stem: str) -> Any:
        """Returns a value the current command cannot run without.

        Raises:
            `ConfigError`: The key was not supplied.
        """
        value = self.get(section, stem)
        if value is None:
            raise ConfigError("Missing required key.", key_path=f"{section}.{stem}")
        return value


    def as_dict(self) -> Dict[str, Any]:
        """The complete normalized configuration for provenance blocks.
        """
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            **{name: dict(values) for name, values in sorted(self.sections.items())},
        }


    def stack(self) -> MembraneStack:
        layers = tuple(
            (layer["thickness"], layer["index"])
            for layer in self.get("stack", "layers", []))
        return MembraneStack(layers, self.get("stack", "superstrate_index"))


    def geometry(
        self,
        width: Optional[float] = None,
        height: Optional[float] = None,
        radius: Optional[float] = None,
        stack: Optional[MembraneStack] = None) -> RingGeometry:
        """Builds the resonator, optionally overriding the cross-section.
        """
        try:
            return RingGeometry(
                radius=radius if radius is not None else self.require("geometry", "radius"),
                width=width if width is not None else self.require("geometry", "width"),
                height=height if height is not None else self.require("geometry", "height"),
                core_index=self.get("geometry", "core_index"),
                stack=stack or self.stack(),
                shape=self.get("geometry", "shape"),
                straight_length=self.get("geometry", "straight_length", 0.0))
        except ValueError as e:
            raise ConfigError(str(e), key_path="geometry")


    def roughness(self) -> RoughnessSpec:
        stems = ("sigma_pm", "L_pm", "sigma_t", "L_t", "sigma_b", "L_b")
        return RoughnessSpec(*(self.require("roughness", s) for s in stems))


    def ranges(self, section: str, stems: List[str]) -> Dict[str, List[float]]:
        return {s: list(self.require(section, s)) for s in stems}
