"""Runtime configuration: defaults, environment overrides, CLI overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import DEFAULT_PROFANITY_PATH, DEFAULT_WORDS_PATH, Dictionary
from .generation import GenerationParams
from .schedule import DEFAULT_SCHEDULE, load_schedule

DEFAULT_SEED = 1729
DEFAULT_PORT = 8000

ENV_PREFIX = "WHITTLE_"


@dataclass(frozen=True)
class AppConfig:
    dictionary_path: Path
    profanity_path: Path
    schedule_path: Path | None
    levels_dir: Path
    traces_path: Path
    port: int
    seed: int

    def load_dictionary(self) -> Dictionary:
        return Dictionary.load(self.dictionary_path, self.profanity_path)

    def load_schedule(self) -> list[GenerationParams]:
        if self.schedule_path is None:
            return list(DEFAULT_SCHEDULE)
        return load_schedule(self.schedule_path)


def default_config() -> AppConfig:
    """Built-in defaults, then WHITTLE_* environment overrides."""
    env = os.environ

    def path_of(name: str, fallback: Path) -> Path:
        value = env.get(ENV_PREFIX + name)
        return Path(value) if value else fallback

    schedule_value = env.get(ENV_PREFIX + "SCHEDULE")
    return AppConfig(
        dictionary_path=path_of("DICT", DEFAULT_WORDS_PATH),
        profanity_path=path_of("PROFANITY", DEFAULT_PROFANITY_PATH),
        schedule_path=Path(schedule_value) if schedule_value else None,
        levels_dir=path_of("LEVELS_DIR", Path("levels")),
        traces_path=path_of("TRACES", Path("traces.jsonl")),
        port=int(env.get(ENV_PREFIX + "PORT", DEFAULT_PORT)),
        seed=int(env.get(ENV_PREFIX + "SEED", DEFAULT_SEED)),
    )


def apply_overrides(config: AppConfig, **overrides) -> AppConfig:
    """Replace any fields whose override value is not None."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **changes) if changes else config
