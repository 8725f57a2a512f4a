"""Experiment configuration: INI sections parsed with configparser into typed specs.

Every section and key is declared in ``ConfigSchema``; anything else in the
file is a validation error. Relative table paths resolve against the
directory of the config file.
"""
from __future__ import annotations
from abc import ABC, abstractmethod
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type
import math

from src.utils.extended_enum import ExtendedEnumMixin

from ..constants import (
    DiagnosticsDefaults, GridDefaults, ParticleDefaults, SolverDefaults, SteadyStateDefaults,
    StefanDefaults, SuperSolutionDefaults
)
from ..enums import HistoryFamily, InitialFamily, Scenario
from ..exceptions import ConfigValidationError, InvalidParameterError
from ..maps import HistoryFamilyKeysMap, InitialFamilyKeysMap
from ..model.params import ModelParams


class IValueParser(ABC):
    """Converts one raw config string"""

    @abstractmethod
    def parse(self, raw: str) -> Any:
        pass


class FloatParser(IValueParser):
    def parse(self, raw: str) -> float:
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(f"{raw!r} is not a finite number")
        return value


class IntParser(IValueParser):
    def parse(self, raw: str) -> int:
        return int(raw)


class BoolParser(IValueParser):
    _TRUE = {"1", "true", "yes", "on"}
    _FALSE = {"0", "false", "no", "off"}

    def parse(self, raw: str) -> bool:
        lowered = raw.lower()
        if lowered in self._TRUE:
            return True
        if lowered in self._FALSE:
            return False
        raise ValueError(f"{raw!r} is not a boolean")


class StringParser(IValueParser):
    def parse(self, raw: str) -> str:
        return raw


class ChoiceParser(IValueParser):
    def __init__(self, enum_class: Type[ExtendedEnumMixin]):
        self._enum_class = enum_class

    def parse(self, raw: str) -> Any:
        return self._enum_class.parse(raw)


class FloatListParser(IValueParser):
    def parse(self, raw: str) -> List[float]:
        values = [FloatParser().parse(x.strip()) for x in raw.split(",") if x.strip()]
        if not values:
            raise ValueError("empty list")
        return values


class ConfigSchema:
    """Recognised sections and keys with their parsers"""
    SECTIONS: Dict[str, Dict[str, IValueParser]] = {
        "scenario": {"name": ChoiceParser(Scenario), "seed": IntParser()},
        "model": {
            "a": FloatParser(), "b": FloatParser(), "b0": FloatParser(), "D": FloatParser(),
            "V_R": FloatParser(), "V_F": FloatParser(),
        },
        "grid": {"n_cells": IntParser(), "v_min": FloatParser()},
        "time": {
            "dt": FloatParser(), "T": FloatParser(), "snapshot_every": FloatParser(),
            "blow_up_threshold": FloatParser(), "refine_on_blow_up": BoolParser(),
        },
        "initial": {
            "family": ChoiceParser(InitialFamily), "mean": FloatParser(), "sd": FloatParser(),
            "b1": FloatParser(), "path": StringParser(),
        },
        "history": {"family": ChoiceParser(HistoryFamily), "value": FloatParser(), "path": StringParser()},
        "tolerances": {
            "consistency_rtol": FloatParser(), "mass_tolerance": FloatParser(), "cfl_safety": FloatParser(),
            "identity_rtol": FloatParser(), "supersolution": FloatParser(),
        },
        "steady": {"N_lo": FloatParser(), "N_hi": FloatParser(), "n_scan": IntParser(), "evolve": BoolParser()},
        "stefan": {
            "horizon": FloatParser(), "compare_t": FloatParser(), "tau_step": FloatParser(),
            "tol": FloatParser(), "max_iter": IntParser(), "sigma": FloatParser(), "extend_to": FloatParser(),
        },
        "diagnostics": {
            "tail_fraction": FloatParser(), "V_M": FloatParser(), "b1": FloatParser(),
            "period_min": FloatParser(), "period_max": FloatParser(), "period_count": IntParser(),
            "budget_window": FloatParser(), "N0_max": FloatParser(), "margin": FloatParser(),
        },
        "particle": {
            "n_neurons": IntParser(), "dt": FloatParser(), "T": FloatParser(), "bandwidth": FloatParser(),
            "bins": IntParser(),
        },
        "output": {"directory": StringParser()},
        "sweep": {"parameter": StringParser(), "values": FloatListParser()},
    }


@dataclass(frozen=True)
class GridSpec:
    n_cells: int = GridDefaults.N_CELLS
    v_min: Optional[float] = None


@dataclass(frozen=True)
class TimeSpec:
    dt: float = SolverDefaults.DT
    T: float = SolverDefaults.T_FINAL
    snapshot_every: float = SolverDefaults.SNAPSHOT_EVERY
    blow_up_threshold: float = SolverDefaults.BLOW_UP_THRESHOLD
    refine_on_blow_up: bool = True


@dataclass(frozen=True)
class InitialSpec:
    family: InitialFamily = InitialFamily.GAUSSIAN
    mean: Optional[float] = None
    sd: Optional[float] = None
    b1: Optional[float] = None
    path: Optional[str] = None


@dataclass(frozen=True)
class HistorySpec:
    family: HistoryFamily = HistoryFamily.CONSTANT
    value: Optional[float] = None
    path: Optional[str] = None


@dataclass(frozen=True)
class ToleranceSpec:
    consistency_rtol: float = SolverDefaults.CONSISTENCY_RTOL
    mass_tolerance: float = SolverDefaults.MASS_TOLERANCE
    cfl_safety: float = SolverDefaults.CFL_SAFETY
    identity_rtol: float = DiagnosticsDefaults.IDENTITY_RTOL
    supersolution: float = SuperSolutionDefaults.TOLERANCE


@dataclass(frozen=True)
class SteadySpec:
    N_lo: float = SteadyStateDefaults.N_LO
    N_hi: float = SteadyStateDefaults.N_HI
    n_scan: int = SteadyStateDefaults.N_SCAN
    evolve: bool = False


@dataclass(frozen=True)
class StefanSpec:
    horizon: float = 0.2
    compare_t: Optional[float] = None
    tau_step: float = StefanDefaults.TAU_STEP
    tol: float = StefanDefaults.TOLERANCE
    max_iter: int = StefanDefaults.MAX_ITER
    sigma: Optional[float] = None
    extend_to: Optional[float] = None


@dataclass(frozen=True)
class DiagnosticsSpec:
    tail_fraction: float = DiagnosticsDefaults.TAIL_FRACTION
    V_M: Optional[float] = None
    b1: Optional[float] = None
    period_min: float = DiagnosticsDefaults.PERIOD_MIN
    period_max: float = DiagnosticsDefaults.PERIOD_MAX
    period_count: int = DiagnosticsDefaults.PERIOD_COUNT
    budget_window: Optional[float] = None
    N0_max: Optional[float] = None
    margin: float = SuperSolutionDefaults.XI_MARGIN


@dataclass(frozen=True)
class ParticleSpec:
    n_neurons: int = ParticleDefaults.N_NEURONS
    dt: Optional[float] = None
    T: Optional[float] = None
    bandwidth: Optional[float] = None
    bins: int = 50


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    params: ModelParams
    grid: GridSpec = field(default_factory=GridSpec)
    time: TimeSpec = field(default_factory=TimeSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    history: HistorySpec = field(default_factory=HistorySpec)
    tolerances: ToleranceSpec = field(default_factory=ToleranceSpec)
    steady: SteadySpec = field(default_factory=SteadySpec)
    stefan: StefanSpec = field(default_factory=StefanSpec)
    diagnostics: DiagnosticsSpec = field(default_factory=DiagnosticsSpec)
    particle: ParticleSpec = field(default_factory=ParticleSpec)
    output_dir: Path = Path("out")
    seed: int = 0
    sweep: Optional[SweepSpec] = None
    base_dir: Path = Path(".")

    def resolve(self, path: str) -> Path:
        candidate = Path(path)
        return candidate if candidate.is_absolute() else self.base_dir / candidate

    def with_parameter(self, dotted: str, value: float) -> "ExperimentConfig":
        """Copy with one ``section.key`` replaced, used by sweeps"""
        section, _, key = dotted.partition(".")
        if section == "model":
            try:
                return replace(self, params=self.params.with_values(**{key: value}), sweep=None)
            except InvalidParameterError as exc:
                raise ConfigValidationError(exc.message, "sweep", "values") from exc
        attribute = {"grid": "grid", "time": "time", "initial": "initial", "history": "history",
                     "particle": "particle", "diagnostics": "diagnostics", "stefan": "stefan"}.get(section)
        if attribute is None or key not in ConfigSchema.SECTIONS[section]:
            raise ConfigValidationError(f"cannot sweep over {dotted!r}", "sweep", "parameter")
        spec = getattr(self, attribute)
        cast = int(value) if isinstance(ConfigSchema.SECTIONS[section][key], IntParser) else value
        return replace(self, **{attribute: replace(spec, **{key: cast})}, sweep=None)

    def to_dict(self) -> Dict[str, Any]:
        content = asdict(self)
        content["scenario"] = self.scenario.value
        content["params"] = self.params.to_dict()
        content["initial"]["family"] = self.initial.family.value
        content["history"]["family"] = self.history.family.value
        content["output_dir"] = str(self.output_dir)
        content["base_dir"] = str(self.base_dir)
        if self.sweep is not None:
            content["sweep"]["values"] = list(self.sweep.values)
        return content


class ExperimentConfigLoader:
    """Reads an INI file into an ExperimentConfig, failing on anything unknown or malformed"""

    def __init__(self, schema: Type[ConfigSchema] = ConfigSchema):
        self._schema = schema

    def _read(self, path: Path) -> ConfigParser:
        if not path.is_file():
            raise ConfigValidationError(f"config file {path} not found")
        parser = ConfigParser(interpolation=None)
        parser.optionxform = str  # type: ignore[assignment,method-assign]
        try:
            with open(path, encoding="utf-8") as handle:
                parser.read_file(handle)
        except (ConfigParserError, UnicodeDecodeError) as exc:
            raise ConfigValidationError(f"cannot parse {path}: {exc}") from exc
        return parser

    def _values(self, parser: ConfigParser) -> Dict[str, Dict[str, Any]]:
        values: Dict[str, Dict[str, Any]] = {}
        for section in parser.sections():
            keys = self._schema.SECTIONS.get(section)
            if keys is None:
                raise ConfigValidationError(f"unknown section [{section}]", section)
            values[section] = {}
            for key, raw in parser.items(section):
                if key not in keys:
                    raise ConfigValidationError(f"unknown key {key!r}", section, key)
                try:
                    values[section][key] = keys[key].parse(raw.strip())
                except ValueError as exc:
                    raise ConfigValidationError(f"malformed value {raw!r}: {exc}", section, key) from exc
        return values

    def load(
        self,
        path: Path,
        scenario: Optional[Scenario] = None,
        output_dir: Optional[Path] = None,
        seed: Optional[int] = None
    ) -> ExperimentConfig:
        values = self._values(self._read(path))
        base_dir = path.parent

        scenario_section = values.get("scenario", {})
        chosen = scenario if scenario is not None else scenario_section.get("name")
        if chosen is None:
            raise ConfigValidationError("no scenario given on the command line or in [scenario]", "scenario", "name")

        if "model" not in values:
            raise ConfigValidationError("missing [model] section", "model")
        try:
            params = ModelParams.from_dict(values["model"])
        except InvalidParameterError as exc:
            raise ConfigValidationError(exc.get_log_message(), "model") from exc
        except KeyError as exc:
            raise ConfigValidationError(f"missing key {exc}", "model") from exc

        initial = InitialSpec(**values.get("initial", {}))
        self._require_family_keys("initial", initial.family, values.get("initial", {}), InitialFamilyKeysMap)
        history = HistorySpec(**values.get("history", {}))
        self._require_family_keys("history", history.family, values.get("history", {}), HistoryFamilyKeysMap)
        sweep = None
        if "sweep" in values:
            if set(values["sweep"]) != {"parameter", "values"}:
                raise ConfigValidationError("[sweep] needs parameter and values", "sweep")
            sweep = SweepSpec(values["sweep"]["parameter"], tuple(values["sweep"]["values"]))

        output = values.get("output", {}).get("directory", "out")
        config = ExperimentConfig(
            scenario=chosen,
            params=params,
            grid=GridSpec(**values.get("grid", {})),
            time=TimeSpec(**values.get("time", {})),
            initial=initial,
            history=history,
            tolerances=ToleranceSpec(**values.get("tolerances", {})),
            steady=SteadySpec(**values.get("steady", {})),
            stefan=StefanSpec(**values.get("stefan", {})),
            diagnostics=DiagnosticsSpec(**values.get("diagnostics", {})),
            particle=ParticleSpec(**values.get("particle", {})),
            output_dir=output_dir if output_dir is not None else Path(output),
            seed=seed if seed is not None else scenario_section.get("seed", 0),
            sweep=sweep,
            base_dir=base_dir,
        )
        self._check_ranges(config)
        for section, spec in (("initial", initial), ("history", history)):
            if spec.path is not None and not config.resolve(spec.path).is_file():
                raise ConfigValidationError(f"table {spec.path} not found", section, "path")
        if sweep is not None:
            config.with_parameter(sweep.parameter, sweep.values[0])
        return config

    @staticmethod
    def _require_family_keys(section: str, family: Any, given: Dict[str, Any], keys_map: Any) -> None:
        missing = [key for key in keys_map.get(family) if key not in given]
        if missing:
            raise ConfigValidationError(f"family {family.value!r} needs {missing}", section)

    @staticmethod
    def _check_ranges(config: ExperimentConfig) -> None:
        checks = [
            ("grid", "n_cells", config.grid.n_cells >= GridDefaults.MIN_CELLS),
            ("time", "dt", config.time.dt > 0),
            ("time", "T", config.time.T > 0),
            ("time", "snapshot_every", config.time.snapshot_every > 0),
            ("initial", "sd", config.initial.sd is None or config.initial.sd > 0),
            ("steady", "n_scan", config.steady.n_scan >= 2),
            ("stefan", "horizon", config.stefan.horizon > 0),
            ("particle", "n_neurons", config.particle.n_neurons >= ParticleDefaults.MIN_NEURONS),
            ("diagnostics", "tail_fraction", 0 < config.diagnostics.tail_fraction <= 1),
        ]
        for section, key, ok in checks:
            if not ok:
                raise ConfigValidationError("value out of range", section, key)


def load_experiment_config(
    path: Path,
    scenario: Optional[Scenario] = None,
    output_dir: Optional[Path] = None,
    seed: Optional[int] = None
) -> ExperimentConfig:
    return ExperimentConfigLoader().load(path, scenario, output_dir, seed)
