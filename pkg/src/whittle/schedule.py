"""The 30-level difficulty schedule and its saw-tooth shape.

Levels come in blocks of five. Within a block the difficulty proxy climbs
strictly; each new block starts easier than the level before it (a longer
timer budget and a friendlier parameter mix) while block baselines never
decrease, so the curve rises in a saw-tooth.
"""

from __future__ import annotations

import json
from pathlib import Path

from .generation import GenerationParams

BLOCK_LENGTH = 5


def difficulty_proxy(params: GenerationParams) -> float:
    """Scalar difficulty estimate used to shape and verify the schedule.

    Longer targets and rarer source words raise it; longer allowed visible
    runs and more bonus letters lower it. The rank term is scaled down so it
    orders levels within a block without swamping the structural terms.
    """
    return (
        params.target_length
        - params.max_seq
        + params.corpus_freq[0] / 1000
        - params.num_2x
    )


def _block(
    window: tuple[int, int],
    max_seq: int,
    num_2x: int,
    source_lists: list[tuple[int, ...]],
    slack: int,
) -> list[GenerationParams]:
    return [
        GenerationParams(
            corpus_freq=window,
            source_words=sources,
            target_length=sum(sources) - slack,
            max_seq=max_seq,
            num_2x=num_2x,
        )
        for sources in source_lists
    ]


DEFAULT_SCHEDULE: list[GenerationParams] = (
    _block((1, 2000), 3, 3, [(3, 3), (3, 4), (4, 4), (4, 5), (5, 5)], 0)
    + _block((500, 3500), 3, 3, [(3, 4), (4, 4), (4, 5), (5, 5), (5, 6)], 0)
    + _block((1000, 5000), 3, 2, [(4, 4), (4, 5), (5, 5), (5, 6), (4, 4, 4)], 0)
    + _block((1500, 6500), 3, 2, [(4, 5), (5, 5), (5, 6), (4, 4, 4), (4, 4, 5)], 1)
    + _block((2000, 7500), 2, 2, [(5, 5), (5, 6), (4, 4, 4), (4, 4, 5), (4, 5, 5)], 1)
    + _block((2500, 8000), 2, 1, [(5, 6), (4, 4, 4), (4, 4, 5), (4, 5, 5), (5, 5, 6)], 1)
)


def validate_schedule(schedule: list[GenerationParams]) -> None:
    """Check the saw-tooth: strict rise within blocks, drops at block starts,
    block baselines never decreasing."""
    if not schedule:
        raise ValueError("schedule is empty")
    if len(schedule) % BLOCK_LENGTH != 0:
        raise ValueError(f"schedule length must be a multiple of {BLOCK_LENGTH}")
    values = [difficulty_proxy(p) for p in schedule]
    for i in range(1, len(values)):
        if i % BLOCK_LENGTH == 0:
            if values[i] >= values[i - 1]:
                raise ValueError(f"no difficulty drop entering level {i + 1}")
        elif values[i] <= values[i - 1]:
            raise ValueError(f"difficulty not rising at level {i + 1}")
    baselines = [values[i] for i in range(0, len(values), BLOCK_LENGTH)]
    for j in range(1, len(baselines)):
        if baselines[j] < baselines[j - 1]:
            raise ValueError(f"block {j + 1} starts below block {j}")


def load_schedule(path: str | Path) -> list[GenerationParams]:
    """Read a schedule from a JSON list of parameter objects and validate it."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("schedule file must hold a JSON list")
    schedule = [GenerationParams.from_dict(d) for d in data]
    for params in schedule:
        params.validate()
    validate_schedule(schedule)
    return schedule


def dump_schedule(schedule: list[GenerationParams]) -> str:
    return json.dumps([p.to_dict() for p in schedule], indent=2) + "\n"


validate_schedule(DEFAULT_SCHEDULE)
