"""Scripted players that produce trace corpora through the real engine.

Each bot plans a target word from the reachability report, then clicks
through the plan with a fixed per-letter delay. The engine keeps the clock,
so slow bots time out exactly the way a slow human would.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .analytics import PlaytraceEvent, challenge_reachability
from .corpus import Dictionary
from .engine import LevelSession, word_score
from .generation import GeneratedChallenge, GeneratedLevel
from .seeds import derive_seed

BOT_KINDS = ("random", "greedy-longest", "greedy-shortest", "noisy-skill", "naive")


@dataclass(frozen=True)
class BotPolicy:
    kind: str
    seed: int = 0
    skill: float = 1.0
    per_letter_delay_ms: int = 500

    def __post_init__(self):
        if self.kind not in BOT_KINDS:
            raise ValueError(f"unknown bot kind {self.kind!r}; choose from {BOT_KINDS}")
        if not (0.0 <= self.skill <= 1.0):
            raise ValueError("skill must be in [0, 1]")
        if self.per_letter_delay_ms < 0:
            raise ValueError("delay must be >= 0")


def _achievable_score(word: str, report) -> int:
    return word_score(word, word in report.bonus_coverable)


def _greedy_longest_target(report) -> str:
    return max(report.reachable, key=lambda w: (_achievable_score(w, report), w))


def _greedy_shortest_target(report) -> str:
    return min(report.reachable, key=lambda w: (len(w), w))


def plan_solution(
    policy: BotPolicy,
    challenge: GeneratedChallenge,
    dictionary: Dictionary,
    rng: random.Random | None = None,
) -> list[int] | None:
    """Ordered original indices to eliminate, or None to give up.

    Plans for reachable targets land exactly on the target. The naive bot
    instead chases an embedded word no elimination order can reach, so its
    plan walks into whatever word the board solves on first.
    """
    if rng is None:
        rng = random.Random(policy.seed)
    report = challenge_reachability(challenge, dictionary)
    if not report.reachable:
        return None
    if policy.kind == "naive" and report.unreachable_embedded:
        target = report.unreachable_embedded[rng.randrange(len(report.unreachable_embedded))]
        positions: list[int] = []
        pos = 0
        for ch in target:
            pos = challenge.challenge_word.find(ch, pos)
            if pos < 0:
                break
            positions.append(pos)
            pos += 1
        else:
            keep = set(positions)
            return [i for i in range(len(challenge.challenge_word)) if i not in keep]
        return None
    if policy.kind == "greedy-longest":
        word = _greedy_longest_target(report)
    elif policy.kind == "greedy-shortest":
        word = _greedy_shortest_target(report)
    elif policy.kind == "noisy-skill" and rng.random() < policy.skill:
        word = _greedy_longest_target(report)
    else:
        word = report.reachable[rng.randrange(len(report.reachable))]
    keep = None
    if policy.kind in ("greedy-longest", "noisy-skill") and word in report.bonus_coverable:
        keep = report.bonus_position
    return report.plan_for(word, keep_position=keep)


def _play_level(
    policy: BotPolicy,
    level: GeneratedLevel,
    dictionary: Dictionary,
    session_seed: int,
    session_id: str,
    player_id: str,
) -> list[PlaytraceEvent]:
    session = LevelSession(level, dictionary)
    events: list[PlaytraceEvent] = []
    ts = 0

    def emit(kind: str, number: int, **extra):
        events.append(
            PlaytraceEvent(
                session_id=session_id,
                player_id=player_id,
                level_index=level.index,
                challenge_index=number,
                kind=kind,
                timestamp_ms=ts,
                **extra,
            )
        )

    delay = policy.per_letter_delay_ms
    while not session.finished:
        number = session.challenge_number
        challenge = level.challenges[number - 1]
        emit("start", number)
        rng = random.Random(derive_seed(session_seed, "challenge", number))
        plan = plan_solution(policy, challenge, dictionary, rng)
        solved = False
        for position in plan or []:
            ts += delay
            session.tick(delay)
            if session.finished:
                emit("timeout", number)
                break
            outcome = session.eliminate(position)
            emit("eliminate", number, original_index=position)
            if outcome.solved:
                emit("solve", number, word=outcome.word, score=outcome.score)
                solved = True
                break
        if not session.finished and not solved:
            # plan gave up or ran dry: let the rest of the budget drain
            left = math.ceil(session.current.time_left_ms)
            ts += left
            session.tick(left)
            emit("timeout", number)
    return events


def simulate_corpus(
    policies: list[BotPolicy],
    levels: list[GeneratedLevel],
    runs_per_policy: int,
    seed: int,
    dictionary: Dictionary,
) -> list[PlaytraceEvent]:
    """Play every level runs_per_policy times per policy; deterministic."""
    if runs_per_policy < 0:
        raise ValueError("runs_per_policy must be >= 0")
    events: list[PlaytraceEvent] = []
    ordered = sorted(levels, key=lambda lv: lv.index)
    for p_idx, policy in enumerate(policies):
        for run in range(runs_per_policy):
            # the seed is part of the identity so corpora appended from
            # separate invocations cannot collide on session ids
            player_id = f"{policy.kind}-s{seed}-{p_idx}-{run}"
            for level in ordered:
                session_seed = derive_seed(seed, policy.kind, p_idx, run, level.index)
                session_id = f"{player_id}-L{level.index:02d}"
                events.extend(
                    _play_level(
                        policy, level, dictionary, session_seed, session_id, player_id
                    )
                )
    return events
