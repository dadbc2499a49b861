"""Configuration parsing, validation, and the run manifest.

Config files are flat `section.key = value` text with `#` comments.
Parsing is fail-closed: unknown keys are errors, so a run can never
silently drift from the intended parameter set.  Every numeric key
carries its unit in its name.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, replace

from . import __version__
from .energy import Battery, EnergyPolicy, PowerModel, ResFarm, WindModel
from .energy import default_mbs_sector_power, default_scbs_power
from .mobility import MobilityConfig
from .radio import LinkBudgetParams, RateModelParams
from .scenario import ScenarioConfig

ALGORITHM_PROPOSED = "proposed"
ALGORITHM_REFERENCE = "reference"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    duration_s: int = 259200  # 72 h
    tick_s: int = 1
    algorithm: str = ALGORITHM_PROPOSED
    rng_seed: int = 1
    handover_hysteresis_db: float = 3.0
    # periodic global re-association; without it users that were pushed to
    # the macro cell while their small cells were busy never return
    periodic_reassoc_s: int = 500
    realloc_depth: int = 1
    retry_unserved_every_s: int = 1  # 0 = never retry

    def validate(self):
        if self.tick_s <= 0 or self.duration_s < 0:
            raise ConfigError("duration_s must be >= 0 and tick_s > 0")
        if self.duration_s % self.tick_s != 0:
            raise ConfigError("duration_s must be divisible by tick_s")
        if self.algorithm not in (ALGORITHM_PROPOSED, ALGORITHM_REFERENCE):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.realloc_depth < 0:
            raise ConfigError("realloc_depth must be >= 0")


@dataclass(frozen=True)
class FullConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    radio: LinkBudgetParams = field(default_factory=LinkBudgetParams)
    rate: RateModelParams = field(default_factory=RateModelParams)
    battery: Battery = field(default_factory=Battery)
    farm: ResFarm = field(default_factory=ResFarm)
    wind: WindModel = field(default_factory=WindModel)
    power_scbs: PowerModel = field(default_factory=default_scbs_power)
    power_mbs: PowerModel = field(default_factory=default_mbs_sector_power)
    policy: EnergyPolicy = field(default_factory=EnergyPolicy)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def validate(self):
        self.scenario.validate()
        self.radio.validate()
        self.rate.validate()
        self.battery.validate()
        self.farm.validate()
        self.power_scbs.validate()
        self.power_mbs.validate()
        self.policy.validate()
        self.mobility.validate()
        self.run.validate()

    def with_seed(self, seed) -> "FullConfig":
        """Propagate one run seed into every seeded subsystem."""
        return replace(
            self,
            run=replace(self.run, rng_seed=seed),
            scenario=replace(self.scenario, rng_seed=seed),
            mobility=replace(self.mobility, rng_seed=seed),
        )


# Dotted config key -> (section attr, field, type, unit/comment).
# Tuple-valued dataclass fields are exposed as one key per element.
_TUPLE_KEYS = {
    ("power_scbs", "sleep_fraction"): ("sm1", "sm2", "sm3", "sm4"),
    ("power_scbs", "descend_after_s"): ("sm1", "sm2", "sm3", "sm4"),
    ("power_scbs", "wake_latency_s"): ("sm1", "sm2", "sm3", "sm4"),
}

_SKIPPED_FIELDS = {
    # a single run.rng_seed drives deployment and mobility too
    ("scenario", "rng_seed"),
    ("mobility", "rng_seed"),
    # the MBS never sleeps; only its draw terms are configurable
    ("power_mbs", "sleep_fraction"),
    ("power_mbs", "descend_after_s"),
    ("power_mbs", "wake_latency_s"),
    # position is exposed as two scalar keys below
    ("scenario", "mbs_position"),
    # batteries always start full; charge_wh is run state, not config
    ("battery", "charge_wh"),
}

_EXTRA_KEYS = {
    "scenario.mbs_x_m": ("scenario", "mbs_position", 0),
    "scenario.mbs_y_m": ("scenario", "mbs_position", 1),
}


def _key_table(cfg: FullConfig):
    """Yield (dotted_key, section_name, field_name, element_index_or_None)."""
    for section_name in (f.name for f in dataclasses.fields(cfg)):
        section = getattr(cfg, section_name)
        for f in dataclasses.fields(section):
            if (section_name, f.name) in _SKIPPED_FIELDS:
                continue
            value = getattr(section, f.name)
            if isinstance(value, tuple):
                suffixes = _TUPLE_KEYS.get((section_name, f.name))
                if suffixes is None:
                    continue
                for i, suffix in enumerate(suffixes):
                    yield f"{section_name}.{f.name}_{suffix}", section_name, f.name, i
            else:
                yield f"{section_name}.{f.name}", section_name, f.name, None
    for key, (section_name, field_name, idx) in _EXTRA_KEYS.items():
        yield key, section_name, field_name, idx


def _get(cfg, section_name, field_name, idx):
    value = getattr(getattr(cfg, section_name), field_name)
    return value[idx] if idx is not None else value


def _coerce(raw, like):
    if isinstance(like, bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    return raw


def resolved_keys(cfg: FullConfig) -> dict:
    """Every config key with its materialized value, in canonical order."""
    return {key: _get(cfg, s, f, i) for key, s, f, i in sorted(_key_table(cfg))}


def print_default_config() -> str:
    """Canonical default config text; parsing it back yields the defaults."""
    cfg = FullConfig()
    lines = [
        "# greenran configuration (key = value; '#' starts a comment)",
        "# Units are part of the key names (m, s, w, wh, dbm, db, mps, ghz, khz, mhz).",
    ]
    section_seen = None
    for key, value in resolved_keys(cfg).items():
        section = key.split(".", 1)[0]
        if section != section_seen:
            lines.append("")
            lines.append(f"# [{section}]")
            section_seen = section
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_config_text(text, base: FullConfig | None = None) -> FullConfig:
    cfg = base or FullConfig()
    table = {key: (s, f, i) for key, s, f, i in _key_table(cfg)}
    updates: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in table:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        section_name, field_name, idx = table[key]
        current = _get(cfg, section_name, field_name, idx)
        try:
            value = _coerce(raw_value, current)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from None
        updates.setdefault(section_name, {}).setdefault(field_name, {})[idx] = value

    for section_name, fields in updates.items():
        section = getattr(cfg, section_name)
        kwargs = {}
        for field_name, by_idx in fields.items():
            current = getattr(section, field_name)
            if isinstance(current, tuple):
                items = list(current)
                for idx, value in by_idx.items():
                    items[idx] = value
                kwargs[field_name] = tuple(items)
            else:
                kwargs[field_name] = by_idx[None]
        cfg = replace(cfg, **{section_name: replace(section, **kwargs)})

    # one seed drives everything
    cfg = cfg.with_seed(cfg.run.rng_seed)
    try:
        cfg.validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def parse_config(path) -> FullConfig:
    """Parse and validate a config file; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def config_digest(cfg: FullConfig) -> str:
    canon = "\n".join(f"{k} = {v}" for k, v in resolved_keys(cfg).items())
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run's outputs bit-identically."""

    config: dict
    config_digest: str
    tool_version: str
    seed: int

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "RunManifest":
        return cls(
            config=resolved_keys(cfg),
            config_digest=config_digest(cfg),
            tool_version=__version__,
            seed=cfg.run.rng_seed,
        )

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"
