"""Experiment configuration: dataclasses plus INI and JSON encodings.

The on-disk format is a flat-sectioned key-value file (INI); JSON carrying
the same section/field structure is accepted interchangeably.  Every field
has a default, and a fully defaulted config runs the selftest experiment.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .dynamics import StepperConfig
from .errors import ConfigError
from .grid import DEFAULT_N, DEFAULT_R_MAX

EXPERIMENTS = (
    "thresholds", "classify", "evolve", "dichotomy-sweep",
    "morawetz", "free-decay", "selftest",
)


@dataclass
class GridSpec:
    r_max: float = DEFAULT_R_MAX
    n: int = DEFAULT_N


@dataclass
class InitialData:
    """Initial-data descriptor.

    Families:
      gaussian      amplitude * exp(-(r/width)^2)
      gaussian-mix  sum of amplitudes[i] * exp(-(r/widths[i])^2)
      bubble        amplitude * sqrt(scale) * W(scale*r) * chi_{cutoff}(r)
      file          snapshot read from path (resampled if grids differ)
    """

    family: str = "gaussian"
    amplitude: float = 0.1
    width: float = 1.0
    amplitudes: tuple[float, ...] = ()
    widths: tuple[float, ...] = ()
    scale: float = 16.0
    cutoff: float = 10.0
    path: str = ""

    def __post_init__(self):
        if self.family not in ("gaussian", "gaussian-mix", "bubble", "file"):
            raise ConfigError(f"unknown initial-data family {self.family!r}")
        self.amplitudes = tuple(self.amplitudes)
        self.widths = tuple(self.widths)


@dataclass
class SweepSpec:
    amplitude_start: float = 0.1
    amplitude_stop: float = 2.0
    amplitude_step: float = 0.1
    include_bubble: bool = True  # append the cutoff-bubble blowup preset


@dataclass
class ExperimentConfig:
    experiment: str = "selftest"
    grid: GridSpec = field(default_factory=GridSpec)
    initial: InitialData = field(default_factory=InitialData)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    out_dir: str = "outputs"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["initial"]["amplitudes"] = list(d["initial"]["amplitudes"])
        d["initial"]["widths"] = list(d["initial"]["widths"])
        return d


_SECTIONS = {"grid": GridSpec, "initial": InitialData, "stepper": StepperConfig,
             "sweep": SweepSpec}
_TOP_LEVEL = ("experiment", "out_dir", "seed", "workers")


def _coerce(raw, default):
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int) and not isinstance(default, bool):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        if isinstance(raw, (list, tuple)):
            return tuple(float(x) for x in raw)
        return tuple(float(x) for x in str(raw).split(",") if x.strip())
    if default is None or isinstance(default, (str, type(None))):
        if raw in ("", "none", "None", None):
            return None if default is None else ""
        if isinstance(default, str):
            return str(raw)
        return float(raw)
    return raw


def _build_section(cls, mapping: dict, where: str):
    kwargs = {}
    defaults = cls()
    known = {f.name for f in fields(cls)}
    for key, raw in mapping.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in section [{where}]")
        try:
            kwargs[key] = _coerce(raw, getattr(defaults, key))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r} in section [{where}]: {exc}") from exc
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [{where}] section: {exc}") from exc


def from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    kwargs = {}
    for name in _TOP_LEVEL:
        if name in d:
            default = getattr(ExperimentConfig(), name)
            kwargs[name] = _coerce(d.pop(name), default)
    for sec, cls in _SECTIONS.items():
        if sec in d:
            kwargs[sec] = _build_section(cls, d.pop(sec) or {}, sec)
    if d:
        raise ConfigError(f"unknown config sections: {sorted(d)}")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            return from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    d: dict = {}
    for sec in parser.sections():
        if sec == "run":
            for key, val in parser.items(sec):
                if key not in _TOP_LEVEL:
                    raise ConfigError(f"unknown key {key!r} in section [run]")
                d[key] = val
        elif sec in _SECTIONS:
            d[sec] = dict(parser.items(sec))
        else:
            raise ConfigError(f"unknown section [{sec}]")
    return from_dict(d)


def dump_ini(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    parser["run"] = {
        "experiment": cfg.experiment,
        "out_dir": cfg.out_dir,
        "seed": str(cfg.seed),
        "workers": str(cfg.workers),
    }
    for sec, obj in (("grid", cfg.grid), ("initial", cfg.initial),
                     ("stepper", cfg.stepper), ("sweep", cfg.sweep)):
        parser[sec] = {}
        for f in fields(obj):
            val = getattr(obj, f.name)
            if isinstance(val, tuple):
                val = ",".join(repr(x) for x in val)
            elif val is None:
                val = "none"
            parser[sec][f.name] = str(val)
    import io

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
