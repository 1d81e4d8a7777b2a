"""Exact rules of play: countdown budgets, elimination, auto-solve, scoring.

A challenge presents a scrambled word; the player eliminates letters one at
a time and the instant the remaining letters spell a dictionary word the
challenge solves itself. Letters are addressed by their original index so
eliminations stay unambiguous as the word shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .corpus import Dictionary
from .generation import GeneratedChallenge, GeneratedLevel

BASE_TIME_SECONDS = 30.0
TIME_DECAY_STEP = 5.0
CHALLENGES_PER_LEVEL = 10


class EngineError(Exception):
    pass


def challenge_time(challenge_number: int) -> float:
    """Seconds allotted to the nth challenge of a level; shrinks harmonically."""
    if challenge_number < 1:
        raise ValueError("challenge numbers start at 1")
    return BASE_TIME_SECONDS / (1.0 + (challenge_number - 1) / TIME_DECAY_STEP)


def word_score(word: str, doubled: bool) -> int:
    """Length of the solved word, doubled when the bonus letter survived."""
    return len(word) * (2 if doubled else 1)


# ---------------------------------------------------------------------------
# reachability: which dictionary words can elimination actually land on


class ReachabilityReport:
    """Every dictionary word reachable by some elimination sequence.

    Reaching a word means eliminating letters one at a time, never passing
    through an intermediate string that is itself a dictionary word (the
    challenge would auto-solve there). Tracks, per word, which surviving
    letter sets can spell it, so bonus feasibility and safe elimination
    plans both fall out of the same search.
    """

    def __init__(
        self,
        challenge_word: str,
        reachable_masks: dict[str, tuple[int, ...]],
        parents: dict[int, tuple[int, int]],
        unreachable_embedded: tuple[str, ...],
        bonus_position: int | None,
    ):
        self.challenge_word = challenge_word
        self.reachable = tuple(sorted(reachable_masks))
        self.unreachable_embedded = unreachable_embedded
        self.bonus_position = bonus_position
        self._masks = reachable_masks
        self._parents = parents
        coverable = []
        if bonus_position is not None:
            bit = 1 << bonus_position
            coverable = [w for w, masks in reachable_masks.items() if any(m & bit for m in masks)]
        self.bonus_coverable = frozenset(coverable)

    def is_reachable(self, word: str) -> bool:
        return word in self._masks

    def plan_for(self, word: str, keep_position: int | None = None) -> list[int] | None:
        """Original indices to eliminate, in order, to land on the word.

        With keep_position set, only plans that leave that letter standing
        qualify. Returns None when no qualifying plan exists.
        """
        masks = self._masks.get(word)
        if not masks:
            return None
        if keep_position is not None:
            bit = 1 << keep_position
            masks = tuple(m for m in masks if m & bit)
            if not masks:
                return None
        target = masks[0]
        steps: list[int] = []
        mask = target
        while mask in self._parents:
            mask, removed = self._parents[mask]
            steps.append(removed)
        steps.reverse()
        return steps

    def max_score(self) -> int:
        """Best achievable score for one solve of this challenge."""
        best = 0
        for word in self.reachable:
            doubled = word in self.bonus_coverable
            best = max(best, word_score(word, doubled))
        return best


def reachable_words(
    challenge_word: str,
    dictionary: Dictionary,
    bonus_position: int | None = None,
) -> ReachabilityReport:
    """Breadth-first search over surviving-letter sets.

    States are bitmasks of original indices still standing. Dictionary-word
    states absorb (the challenge solves there), so their children are never
    explored; anything too short to ever contain a word is pruned.
    """
    length = len(challenge_word)
    if length == 0 or length > 16:
        raise ValueError(f"challenge word length {length} out of supported range")
    if bonus_position is not None and not (0 <= bonus_position < length):
        raise ValueError(f"bonus position {bonus_position} out of range")
    min_len = dictionary.min_word_length
    full = (1 << length) - 1

    def spell(mask: int) -> str:
        return "".join(challenge_word[i] for i in range(length) if mask & (1 << i))

    reachable_masks: dict[str, list[int]] = {}
    parents: dict[int, tuple[int, int]] = {}
    seen = {full}
    frontier = [full]
    counts = {full: length}
    while frontier:
        next_frontier: list[int] = []
        for mask in frontier:
            remaining = counts[mask]
            if remaining - 1 < min_len:
                continue
            for i in range(length):
                bit = 1 << i
                if not mask & bit:
                    continue
                child = mask ^ bit
                if child in seen:
                    continue
                seen.add(child)
                counts[child] = remaining - 1
                parents[child] = (mask, i)
                word = spell(child)
                if word in dictionary:
                    reachable_masks.setdefault(word, []).append(child)
                else:
                    next_frontier.append(child)
        frontier = next_frontier
    embedded = dictionary.embedded_words(challenge_word)
    unreachable = tuple(w for w in embedded if w not in reachable_masks)
    return ReachabilityReport(
        challenge_word,
        {w: tuple(sorted(m)) for w, m in sorted(reachable_masks.items())},
        parents,
        unreachable,
        bonus_position,
    )


# ---------------------------------------------------------------------------
# live play state


class ChallengeStatus(Enum):
    ACTIVE = "active"
    SOLVED = "solved"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class EliminationOutcome:
    solved: bool
    word: str | None
    score: int
    doubled: bool


class ChallengeState:
    """One challenge in play: a shrinking letter set against a countdown."""

    def __init__(
        self,
        challenge: GeneratedChallenge,
        challenge_number: int,
        dictionary: Dictionary,
    ):
        self.challenge = challenge
        self.challenge_number = challenge_number
        self.dictionary = dictionary
        self.budget_ms = challenge_time(challenge_number) * 1000.0
        self.elapsed_ms = 0.0
        self.status = ChallengeStatus.ACTIVE
        self.remaining: list[int] = list(range(len(challenge.challenge_word)))
        self.solved_word: str | None = None
        self.score = 0
        self.doubled = False

    @property
    def word(self) -> str:
        return "".join(self.challenge.challenge_word[i] for i in self.remaining)

    @property
    def time_left_ms(self) -> float:
        return max(0.0, self.budget_ms - self.elapsed_ms)

    def tick(self, ms: float) -> None:
        """Advance the clock; the budget boundary itself counts as expired."""
        if ms < 0:
            raise EngineError("time cannot move backwards")
        if self.status is not ChallengeStatus.ACTIVE:
            raise EngineError(f"challenge is {self.status.value}")
        self.elapsed_ms += ms
        if self.elapsed_ms >= self.budget_ms:
            self.status = ChallengeStatus.TIMED_OUT

    def eliminate(self, original_index: int) -> EliminationOutcome:
        """Remove one letter by original index, then check for an auto-solve."""
        if self.status is not ChallengeStatus.ACTIVE:
            raise EngineError(f"challenge is {self.status.value}")
        if original_index not in self.remaining:
            raise EngineError(f"position {original_index} is not on the board")
        self.remaining.remove(original_index)
        word = self.word
        if word in self.dictionary:
            bonus = self.challenge.bonus_position
            self.doubled = bonus is not None and bonus in self.remaining
            self.solved_word = word
            self.score = word_score(word, self.doubled)
            self.status = ChallengeStatus.SOLVED
            return EliminationOutcome(True, word, self.score, self.doubled)
        return EliminationOutcome(False, None, 0, False)


@dataclass(frozen=True)
class ChallengeResult:
    challenge_number: int
    status: ChallengeStatus
    solved_word: str | None
    score: int
    doubled: bool
    elapsed_ms: float


class LevelSession:
    """Plays a level's challenges in order until a timeout or the last solve.

    Each challenge gets a fresh, shorter budget. The first timeout ends the
    whole level; total score is the sum of solved-challenge scores.
    """

    def __init__(self, level: GeneratedLevel, dictionary: Dictionary):
        if not level.challenges:
            raise EngineError("level has no challenges")
        self.level = level
        self.dictionary = dictionary
        self.results: list[ChallengeResult] = []
        self.total_score = 0
        self.finished = False
        self.end_reason: str | None = None
        self._index = 0
        self.current: ChallengeState | None = ChallengeState(
            level.challenges[0], 1, dictionary
        )

    @property
    def challenge_number(self) -> int:
        return self._index + 1

    def _require_active(self) -> ChallengeState:
        if self.finished or self.current is None:
            raise EngineError("level is finished")
        return self.current

    def _record(self, state: ChallengeState) -> None:
        self.results.append(
            ChallengeResult(
                challenge_number=state.challenge_number,
                status=state.status,
                solved_word=state.solved_word,
                score=state.score,
                doubled=state.doubled,
                elapsed_ms=state.elapsed_ms,
            )
        )

    def _advance(self) -> None:
        self._index += 1
        if self._index >= len(self.level.challenges):
            self.current = None
            self.finished = True
            self.end_reason = "completed"
        else:
            self.current = ChallengeState(
                self.level.challenges[self._index], self._index + 1, self.dictionary
            )

    def tick(self, ms: float) -> None:
        state = self._require_active()
        state.tick(ms)
        if state.status is ChallengeStatus.TIMED_OUT:
            self._record(state)
            self.current = None
            self.finished = True
            self.end_reason = "timed_out"

    def eliminate(self, original_index: int) -> EliminationOutcome:
        state = self._require_active()
        outcome = state.eliminate(original_index)
        if outcome.solved:
            self.total_score += outcome.score
            self._record(state)
            self._advance()
        return outcome
