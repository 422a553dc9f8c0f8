"""Run configuration: strict TOML parsing, defaults, canonical serialization.

The boundary units follow lab conventions: frequencies in GHz, couplings in
MHz, times in ns.  Defaults reproduce the reference four-mode ensemble
(frequencies near 5.5 GHz, couplings 6-15 MHz) with the qubit starting
200 MHz below the lowest mode and sweeping 400 MHz upward.

A RunConfig serializes to canonical JSON (sorted keys, compact separators);
that string is embedded in CSV headers and hashed to tag outputs, and it
parses back to an identical RunConfig.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .hilbert import CouplingModel, SystemSpec
from .lzmodel import Ground, InitialState, ModeCoherent, ModeFock, QubitExcited


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


DEFAULT_MODE_FREQUENCIES_GHZ = (5.507, 5.513, 5.518, 5.531)
DEFAULT_MODE_COUPLINGS_MHZ = (14.6, 12.1, 14.4, 6.3)
DEFAULT_QUBIT_START_GHZ = 5.307
DEFAULT_QUBIT_STOP_GHZ = 5.707
DEFAULT_RISE_TIMES_NS = (20.0, 50.0, 100.0, 150.0)
DEFAULT_BIASTEE_TAU_NS = 718.0


def _require_keys(section: str, data: dict, allowed: set[str]) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _num_tuple(section: str, key: str, value) -> tuple:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"[{section}] {key} must be a non-empty list of numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"[{section}] {key} must contain numbers only")
        out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class InitialStateConfig:
    kind: str = "qubit_excited"
    mode: int = 0
    n: int = 1
    amplitude: float = 1.0

    KINDS = ("ground", "qubit_excited", "mode_fock", "mode_coherent")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"initial_state.kind must be one of {self.KINDS}, got {self.kind!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "InitialStateConfig":
        _require_keys("scenario.initial_state", data, {"kind", "mode", "n", "amplitude"})
        return cls(**data)


@dataclass(frozen=True)
class SystemConfig:
    qubit_start_ghz: float = DEFAULT_QUBIT_START_GHZ
    qubit_stop_ghz: float = DEFAULT_QUBIT_STOP_GHZ
    mode_frequencies_ghz: tuple = DEFAULT_MODE_FREQUENCIES_GHZ
    mode_couplings_mhz: tuple = DEFAULT_MODE_COUPLINGS_MHZ
    mode_fock_cutoffs: tuple = (2, 2, 2, 2)
    coupling_model: str = "rwa"

    def __post_init__(self):
        object.__setattr__(self, "mode_frequencies_ghz", tuple(self.mode_frequencies_ghz))
        object.__setattr__(self, "mode_couplings_mhz", tuple(self.mode_couplings_mhz))
        object.__setattr__(self, "mode_fock_cutoffs", tuple(self.mode_fock_cutoffs))
        n = len(self.mode_frequencies_ghz)
        if len(self.mode_couplings_mhz) != n or len(self.mode_fock_cutoffs) != n:
            raise ConfigError("mode frequency, coupling and cutoff lists must have equal length")
        if self.coupling_model not in ("rwa", "full"):
            raise ConfigError(f"coupling_model must be 'rwa' or 'full', got {self.coupling_model!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        allowed = {
            "qubit_start_ghz", "qubit_stop_ghz", "mode_frequencies_ghz",
            "mode_couplings_mhz", "mode_fock_cutoffs", "coupling_model",
        }
        _require_keys("system", data, allowed)
        data = dict(data)
        for key in ("mode_frequencies_ghz", "mode_couplings_mhz", "mode_fock_cutoffs"):
            if key in data:
                data[key] = _num_tuple("system", key, data[key])
        return cls(**data)


@dataclass(frozen=True)
class ScenarioConfig:
    rise_times_ns: tuple = DEFAULT_RISE_TIMES_NS
    sample_spacing_ns: float = 1.0
    initial_state: InitialStateConfig = field(default_factory=InitialStateConfig)

    def __post_init__(self):
        object.__setattr__(self, "rise_times_ns", tuple(self.rise_times_ns))
        if not self.rise_times_ns:
            raise ConfigError("rise_times_ns must not be empty")
        if not self.sample_spacing_ns > 0:
            raise ConfigError("sample_spacing_ns must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        _require_keys("scenario", data, {"rise_times_ns", "sample_spacing_ns", "initial_state"})
        data = dict(data)
        if "rise_times_ns" in data:
            data["rise_times_ns"] = _num_tuple("scenario", "rise_times_ns", data["rise_times_ns"])
        if "initial_state" in data:
            data["initial_state"] = InitialStateConfig.from_dict(data["initial_state"])
        return cls(**data)


@dataclass(frozen=True)
class NumericsConfig:
    integrator: str = "midpoint"
    norm_tolerance: float = 1e-8
    step_limit_ns: float | None = None

    def __post_init__(self):
        if self.integrator not in ("midpoint", "magnus4"):
            raise ConfigError(f"integrator must be 'midpoint' or 'magnus4', got {self.integrator!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "NumericsConfig":
        _require_keys("numerics", data, {"integrator", "norm_tolerance", "step_limit_ns"})
        return cls(**data)


@dataclass(frozen=True)
class FockConfig:
    photon_numbers: tuple = (0, 1, 2, 3)
    t_rise_ns: float = 60.0
    excited_mode: int = 0

    def __post_init__(self):
        object.__setattr__(self, "photon_numbers", tuple(self.photon_numbers))

    @classmethod
    def from_dict(cls, data: dict) -> "FockConfig":
        _require_keys("fock", data, {"photon_numbers", "t_rise_ns", "excited_mode"})
        data = dict(data)
        if "photon_numbers" in data:
            data["photon_numbers"] = _num_tuple("fock", "photon_numbers", data["photon_numbers"])
        return cls(**data)


@dataclass(frozen=True)
class PulseConfig:
    amplitude_ma: float = 1.0
    duration_ns: float = 300.0
    total_ns: float = 400.0
    sample_period_ns: float = 1.0

    @classmethod
    def from_dict(cls, data: dict) -> "PulseConfig":
        _require_keys(
            "predistort.pulse", data,
            {"amplitude_ma", "duration_ns", "total_ns", "sample_period_ns"},
        )
        return cls(**data)


@dataclass(frozen=True)
class PredistortConfig:
    tau_ns: float = DEFAULT_BIASTEE_TAU_NS
    resistance_ohm: float = 50.0
    input_csv: str | None = None
    pulse: PulseConfig = field(default_factory=PulseConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "PredistortConfig":
        _require_keys("predistort", data, {"tau_ns", "resistance_ohm", "input_csv", "pulse"})
        data = dict(data)
        if "pulse" in data:
            data["pulse"] = PulseConfig.from_dict(data["pulse"])
        return cls(**data)


@dataclass(frozen=True)
class IQProjectConfig:
    input_csv: str | None = None
    ref_g: tuple = (0.0, 0.0)
    ref_e: tuple = (1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "ref_g", tuple(self.ref_g))
        object.__setattr__(self, "ref_e", tuple(self.ref_e))
        for name, ref in (("ref_g", self.ref_g), ("ref_e", self.ref_e)):
            if len(ref) != 2:
                raise ConfigError(f"iqproject.{name} must be a [re, im] pair")

    @classmethod
    def from_dict(cls, data: dict) -> "IQProjectConfig":
        _require_keys("iqproject", data, {"input_csv", "ref_g", "ref_e"})
        data = dict(data)
        for key in ("ref_g", "ref_e"):
            if key in data:
                data[key] = _num_tuple("iqproject", key, data[key])
        return cls(**data)


@dataclass(frozen=True)
class OffsetConfig:
    map_a_csv: str | None = None
    map_b_csv: str | None = None
    dt_window_ns: tuple = (-5.0, 5.0)
    df_window_mhz: tuple = (-3.0, 3.0)
    dt_step_ns: float = 0.1
    df_step_mhz: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "dt_window_ns", tuple(self.dt_window_ns))
        object.__setattr__(self, "df_window_mhz", tuple(self.df_window_mhz))

    @classmethod
    def from_dict(cls, data: dict) -> "OffsetConfig":
        allowed = {
            "map_a_csv", "map_b_csv", "dt_window_ns", "df_window_mhz",
            "dt_step_ns", "df_step_mhz",
        }
        _require_keys("calibrate_offset", data, allowed)
        data = dict(data)
        for key in ("dt_window_ns", "df_window_mhz"):
            if key in data:
                data[key] = _num_tuple("calibrate_offset", key, data[key])
        return cls(**data)


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    fock: FockConfig = field(default_factory=FockConfig)
    predistort: PredistortConfig = field(default_factory=PredistortConfig)
    iqproject: IQProjectConfig = field(default_factory=IQProjectConfig)
    calibrate_offset: OffsetConfig = field(default_factory=OffsetConfig)

    SECTIONS = {
        "system": SystemConfig,
        "scenario": ScenarioConfig,
        "numerics": NumericsConfig,
        "fock": FockConfig,
        "predistort": PredistortConfig,
        "iqproject": IQProjectConfig,
        "calibrate_offset": OffsetConfig,
    }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        _require_keys("<root>", data, set(cls.SECTIONS))
        kwargs = {}
        for name, section_cls in cls.SECTIONS.items():
            if name in data:
                if not isinstance(data[name], dict):
                    raise ConfigError(f"[{name}] must be a table")
                kwargs[name] = section_cls.from_dict(data[name])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        def plain(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {k: plain(getattr(obj, k)) for k in obj.__dataclass_fields__}
            if isinstance(obj, tuple):
                return [plain(v) for v in obj]
            return obj

        return {name: plain(getattr(self, name)) for name in self.SECTIONS}


def default_config() -> RunConfig:
    return RunConfig()


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return RunConfig.from_dict(data)


def canonical_json(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))


def spec_hash(config: RunConfig) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:12]


def build_system_spec(
    config: RunConfig,
    coupling_model_override: str | None = None,
    n_modes: int | None = None,
) -> SystemSpec:
    """Convert boundary-unit configuration into an internal SystemSpec."""
    sys_cfg = config.system
    model_name = coupling_model_override or sys_cfg.coupling_model
    try:
        model = CouplingModel(model_name)
    except ValueError as exc:
        raise ConfigError(f"unknown coupling model {model_name!r}") from exc
    freqs = sys_cfg.mode_frequencies_ghz
    coups = sys_cfg.mode_couplings_mhz
    cuts = sys_cfg.mode_fock_cutoffs
    if n_modes is not None:
        if n_modes < 1 or n_modes > len(freqs):
            raise ConfigError(f"--modes must be between 1 and {len(freqs)}, got {n_modes}")
        freqs, coups, cuts = freqs[:n_modes], coups[:n_modes], cuts[:n_modes]
    try:
        return SystemSpec.from_ghz(
            sys_cfg.qubit_start_ghz, sys_cfg.qubit_stop_ghz, freqs, coups, cuts, model
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_initial_state(state_cfg: InitialStateConfig) -> InitialState:
    if state_cfg.kind == "ground":
        return Ground()
    if state_cfg.kind == "qubit_excited":
        return QubitExcited()
    if state_cfg.kind == "mode_fock":
        return ModeFock(int(state_cfg.mode), int(state_cfg.n))
    if state_cfg.kind == "mode_coherent":
        return ModeCoherent(int(state_cfg.mode), complex(state_cfg.amplitude))
    raise ConfigError(f"unknown initial state kind {state_cfg.kind!r}")
