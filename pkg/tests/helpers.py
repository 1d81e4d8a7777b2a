"""Builders for synthetic challenges, levels, dictionaries, and traces."""

from __future__ import annotations

import math

from whittle.analytics import PlaytraceEvent
from whittle.corpus import Dictionary
from whittle.engine import LevelSession
from whittle.generation import (
    GeneratedChallenge,
    GeneratedLevel,
    GenerationParams,
    SourceWord,
    source_positions,
)


def make_dictionary(words, profanity=()) -> Dictionary:
    return Dictionary([w.upper() for w in words], profanity)


def make_challenge(
    word: str,
    sources: tuple[str, ...] = (),
    bonus: int | None = None,
    seed: int = 0,
) -> GeneratedChallenge:
    word = word.upper()
    return GeneratedChallenge(
        challenge_word=word,
        source_words=tuple(
            SourceWord(s.upper(), source_positions(word, s.upper())) for s in sources
        ),
        bonus_position=bonus,
        fitness=1.0,
        constraint=1.0,
        seed=seed,
    )


def make_level(
    challenges: list[GeneratedChallenge],
    index: int = 1,
    params: GenerationParams | None = None,
    seed: int = 0,
) -> GeneratedLevel:
    if params is None:
        longest = max((len(c.challenge_word) for c in challenges), default=6)
        bonuses = sum(1 for c in challenges if c.bonus_position is not None)
        params = GenerationParams(
            corpus_freq=(1, 100),
            source_words=(3, 3),
            target_length=longest,
            max_seq=3,
            num_2x=bonuses,
        )
    return GeneratedLevel(
        index=index, params=params, seed=seed, challenges=tuple(challenges)
    )


def synth_events(
    level: GeneratedLevel,
    dictionary: Dictionary,
    session_id: str,
    plays,
    player_id: str = "tester",
    step_ms: int = 1000,
) -> list[PlaytraceEvent]:
    """Drive a real session and transcribe it as trace events.

    Each entry of ``plays`` handles one challenge: a list of original indices
    to eliminate (must end in a solve), the string "timeout", or the string
    "quit" to stop recording mid-level.
    """
    session = LevelSession(level, dictionary)
    events: list[PlaytraceEvent] = []
    ts = 0

    def emit(kind: str, challenge_index: int, **extra) -> None:
        events.append(
            PlaytraceEvent(
                session_id=session_id,
                player_id=player_id,
                level_index=level.index,
                challenge_index=challenge_index,
                kind=kind,
                timestamp_ms=ts,
                **extra,
            )
        )

    for play in plays:
        number = session.challenge_number
        emit("start", number)
        if play == "quit":
            break
        if play == "timeout":
            ts += math.ceil(session.current.budget_ms)
            session.tick(session.current.budget_ms)
            emit("timeout", number)
            break
        outcome = None
        for index in play:
            ts += step_ms
            session.tick(step_ms)
            outcome = session.eliminate(index)
            emit("eliminate", number, original_index=index)
        assert outcome is not None and outcome.solved, "play must end in a solve"
        emit("solve", number, word=outcome.word, score=outcome.score)
    return events
