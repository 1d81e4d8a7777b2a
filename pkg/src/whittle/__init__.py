"""Letter-elimination puzzle toolkit.

Generates scrambled-word challenges with a constrained evolutionary search,
plays them under exact countdown rules, simulates bot players, and analyzes
the resulting playtraces with linear models.
"""

__version__ = "0.1.0"

from .corpus import CorpusError, CorpusSlice, Dictionary, is_subsequence
from .engine import (
    ChallengeState,
    ChallengeStatus,
    EngineError,
    LevelSession,
    challenge_time,
    reachable_words,
    word_score,
)
from .generation import (
    Chromosome,
    EvolutionConfig,
    GeneratedChallenge,
    GeneratedLevel,
    GenerationError,
    GenerationParams,
    evolve_challenge,
    generate_level,
)
from .schedule import DEFAULT_SCHEDULE, difficulty_proxy, load_schedule

__all__ = [
    "__version__",
    "CorpusError",
    "CorpusSlice",
    "Dictionary",
    "is_subsequence",
    "ChallengeState",
    "ChallengeStatus",
    "EngineError",
    "LevelSession",
    "challenge_time",
    "reachable_words",
    "word_score",
    "Chromosome",
    "EvolutionConfig",
    "GeneratedChallenge",
    "GeneratedLevel",
    "GenerationError",
    "GenerationParams",
    "evolve_challenge",
    "generate_level",
    "DEFAULT_SCHEDULE",
    "difficulty_proxy",
    "load_schedule",
]
