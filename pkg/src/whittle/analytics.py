"""Playtrace ingestion, replay verification, and the two linear models.

Traces arrive as JSON-lines event logs. Every session is re-driven through
the game engine, so scores in reports are always recomputed, never trusted.
On top of the replays: normalized level scores, the difficulty curve, word
selection rates with their six features, and ordinary least squares fits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Dictionary
from .engine import (
    ChallengeStatus,
    EngineError,
    LevelSession,
    ReachabilityReport,
    reachable_words,
)
from .generation import GeneratedChallenge, GeneratedLevel

EVENT_KINDS = ("start", "eliminate", "solve", "timeout")


class TraceError(Exception):
    pass


class ReplayError(Exception):
    def __init__(self, session_id: str, event_number: int, message: str):
        super().__init__(f"session {session_id}, event {event_number}: {message}")
        self.session_id = session_id
        self.event_number = event_number


@dataclass(frozen=True)
class PlaytraceEvent:
    session_id: str
    player_id: str
    level_index: int
    challenge_index: int
    kind: str
    timestamp_ms: int
    original_index: int | None = None
    word: str | None = None
    score: int | None = None

    def to_dict(self) -> dict:
        d = {
            "sessionId": self.session_id,
            "playerId": self.player_id,
            "levelIndex": self.level_index,
            "challengeIndex": self.challenge_index,
            "kind": self.kind,
            "timestampMs": self.timestamp_ms,
        }
        if self.original_index is not None:
            d["originalIndex"] = self.original_index
        if self.word is not None:
            d["word"] = self.word
        if self.score is not None:
            d["score"] = self.score
        return d


def _event_from_dict(d: dict) -> PlaytraceEvent:
    kind = d["kind"]
    if kind not in EVENT_KINDS:
        raise ValueError(f"unknown event kind {kind!r}")
    event = PlaytraceEvent(
        session_id=str(d["sessionId"]),
        player_id=str(d["playerId"]),
        level_index=int(d["levelIndex"]),
        challenge_index=int(d["challengeIndex"]),
        kind=kind,
        timestamp_ms=int(d["timestampMs"]),
        original_index=int(d["originalIndex"]) if "originalIndex" in d else None,
        word=str(d["word"]) if "word" in d else None,
        score=int(d["score"]) if "score" in d else None,
    )
    if event.level_index < 1 or event.challenge_index < 1 or event.timestamp_ms < 0:
        raise ValueError("indexes must be >= 1 and timestamps >= 0")
    if kind == "eliminate" and (event.original_index is None or event.original_index < 0):
        raise ValueError("eliminate event needs a non-negative originalIndex")
    if kind == "solve" and (not event.word or event.score is None or event.score < 1):
        raise ValueError("solve event needs a word and a positive score")
    return event


def serialize_traces(events: Iterable[PlaytraceEvent]) -> str:
    return "".join(json.dumps(e.to_dict()) + "\n" for e in events)


@dataclass(frozen=True)
class ParsedTraces:
    events: tuple[PlaytraceEvent, ...]
    skipped_lines: tuple[tuple[int, str], ...]
    excluded_sessions: tuple[tuple[str, str], ...]

    def by_session(self) -> dict[str, list[PlaytraceEvent]]:
        sessions: dict[str, list[PlaytraceEvent]] = {}
        for event in self.events:
            sessions.setdefault(event.session_id, []).append(event)
        return sessions


def parse_traces(stream: str | Iterable[str]) -> ParsedTraces:
    """Parse a JSON-lines trace log, reporting what had to be dropped.

    Malformed lines are skipped with their line numbers; any session whose
    timestamps go backwards is excluded whole, since replays need time to
    move forward.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream
    events: list[PlaytraceEvent] = []
    skipped: list[tuple[int, str]] = []
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            events.append(_event_from_dict(json.loads(text)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            skipped.append((number, f"{type(exc).__name__}: {exc}"))
    last_seen: dict[str, int] = {}
    bad_sessions: dict[str, str] = {}
    for event in events:
        prev = last_seen.get(event.session_id)
        if prev is not None and event.timestamp_ms < prev:
            bad_sessions.setdefault(
                event.session_id,
                f"timestamp {event.timestamp_ms} after {prev}",
            )
        last_seen[event.session_id] = event.timestamp_ms
    kept = tuple(e for e in events if e.session_id not in bad_sessions)
    return ParsedTraces(kept, tuple(skipped), tuple(sorted(bad_sessions.items())))


def load_traces(path: str | Path) -> ParsedTraces:
    return parse_traces(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# replay


@dataclass(frozen=True)
class ReplayResult:
    session_id: str
    player_id: str
    level_index: int
    total_score: int
    end_reason: str
    challenges_solved: int


def replay_session(
    events: Sequence[PlaytraceEvent],
    level: GeneratedLevel,
    dictionary: Dictionary,
) -> ReplayResult:
    """Re-drive one session's events through the engine and recompute scores.

    Raises ReplayError on anything the engine would not have produced:
    eliminations after expiry, solves with the wrong word or score, missing
    or premature events. Sessions cut short by a quit replay fine and end
    with reason "abandoned".
    """
    if not events:
        raise TraceError("session has no events")
    session_id = events[0].session_id
    for n, event in enumerate(events, start=1):
        if event.session_id != session_id:
            raise ReplayError(session_id, n, f"mixed session ids ({event.session_id})")
        if event.level_index != level.index:
            raise ReplayError(
                session_id, n, f"level {event.level_index} is not level {level.index}"
            )
    session = LevelSession(level, dictionary)
    anchor: int | None = None
    pending_solve = None
    started: set[int] = set()
    for n, event in enumerate(events, start=1):
        if event.kind == "solve":
            # the solving elimination may have just finished the session, so
            # its confirmation is matched before the finished check
            if pending_solve is None:
                raise ReplayError(session_id, n, "solve without a solving elimination")
            number, outcome = pending_solve
            if event.challenge_index != number:
                raise ReplayError(session_id, n, "solve for the wrong challenge")
            if event.word != outcome.word or event.score != outcome.score:
                raise ReplayError(
                    session_id,
                    n,
                    f"solve claims {event.word}/{event.score}, "
                    f"engine produced {outcome.word}/{outcome.score}",
                )
            pending_solve = None
            anchor = None
            continue
        if session.finished:
            raise ReplayError(session_id, n, "event after the session ended")
        if event.kind == "start":
            if pending_solve is not None:
                raise ReplayError(session_id, n, "start before the solve was recorded")
            if event.challenge_index != session.challenge_number:
                raise ReplayError(
                    session_id,
                    n,
                    f"start of challenge {event.challenge_index}, "
                    f"expected {session.challenge_number}",
                )
            if event.challenge_index in started:
                raise ReplayError(
                    session_id, n, f"duplicate start of challenge {event.challenge_index}"
                )
            started.add(event.challenge_index)
            anchor = event.timestamp_ms
            continue
        if pending_solve is not None:
            raise ReplayError(session_id, n, "expected a solve event next")
        if anchor is None:
            raise ReplayError(session_id, n, f"{event.kind} before the challenge started")
        if event.challenge_index != session.challenge_number:
            raise ReplayError(
                session_id,
                n,
                f"challenge {event.challenge_index}, "
                f"engine is on {session.challenge_number}",
            )
        delta = event.timestamp_ms - anchor
        anchor = event.timestamp_ms
        try:
            session.tick(delta)
        except EngineError as exc:
            raise ReplayError(session_id, n, str(exc)) from exc
        if event.kind == "eliminate":
            if session.finished:
                raise ReplayError(session_id, n, "elimination after the timer expired")
            try:
                outcome = session.eliminate(event.original_index)
            except EngineError as exc:
                raise ReplayError(session_id, n, str(exc)) from exc
            if outcome.solved:
                pending_solve = (event.challenge_index, outcome)
            continue
        if event.kind == "timeout":
            if not session.finished or session.end_reason != "timed_out":
                raise ReplayError(session_id, n, "timeout while time remained")
            continue
        raise ReplayError(session_id, n, f"unknown kind {event.kind}")
    if pending_solve is not None:
        raise ReplayError(session_id, len(events), "session ends mid-solve")
    solved = sum(1 for r in session.results if r.status is ChallengeStatus.SOLVED)
    return ReplayResult(
        session_id=session_id,
        player_id=events[0].player_id,
        level_index=level.index,
        total_score=session.total_score,
        end_reason=session.end_reason or "abandoned",
        challenges_solved=solved,
    )


# ---------------------------------------------------------------------------
# scores, curve, features


@dataclass(frozen=True)
class LevelOutcome:
    level_index: int
    player_id: str
    normalized_score: float


@lru_cache(maxsize=4096)
def _reach(challenge_word: str, bonus_position: int | None, dictionary: Dictionary):
    return reachable_words(challenge_word, dictionary, bonus_position)


def challenge_reachability(
    challenge: GeneratedChallenge, dictionary: Dictionary
) -> ReachabilityReport:
    return _reach(challenge.challenge_word, challenge.bonus_position, dictionary)


def max_level_score(level: GeneratedLevel, dictionary: Dictionary) -> int:
    """Best possible level total: each challenge solved at its maximum."""
    return sum(
        challenge_reachability(c, dictionary).max_score() for c in level.challenges
    )


def session_outcomes(
    parsed: ParsedTraces,
    levels: dict[int, GeneratedLevel],
    dictionary: Dictionary,
) -> list[LevelOutcome]:
    """Replay every session and normalize its score by the level maximum."""
    outcomes: list[LevelOutcome] = []
    for session_id, events in parsed.by_session().items():
        level = levels.get(events[0].level_index)
        if level is None:
            raise TraceError(
                f"session {session_id} references unknown level {events[0].level_index}"
            )
        result = replay_session(events, level, dictionary)
        best = max_level_score(level, dictionary)
        if best <= 0:
            raise TraceError(f"level {level.index} has no reachable words")
        outcomes.append(
            LevelOutcome(level.index, result.player_id, result.total_score / best)
        )
    return outcomes


def difficulty_curve(
    outcomes: Iterable[LevelOutcome],
    level_indices: Iterable[int] | None = None,
) -> tuple[list[tuple[int, float]], list[int]]:
    """Mean normalized score per level, plus which requested levels had none."""
    by_level: dict[int, list[float]] = {}
    for outcome in outcomes:
        by_level.setdefault(outcome.level_index, []).append(outcome.normalized_score)
    wanted = sorted(level_indices) if level_indices is not None else sorted(by_level)
    curve = [
        (i, sum(by_level[i]) / len(by_level[i])) for i in wanted if i in by_level
    ]
    omitted = [i for i in wanted if i not in by_level]
    return curve, omitted


@dataclass(frozen=True)
class WordFeatures:
    word_length: int
    max_sequence: int
    has_2x: int
    split_distance: int
    first_occurrence: int
    dirty_word: int


def _greedy_embedding(word: str, challenge_word: str, start: int) -> list[int] | None:
    positions: list[int] = []
    pos = start
    for i, ch in enumerate(word):
        pos = challenge_word.find(ch, pos if i == 0 else pos + 1)
        if pos < 0:
            return None
        positions.append(pos)
    return positions


def extract_word_features(
    challenge: GeneratedChallenge, word: str, dictionary: Dictionary
) -> WordFeatures:
    """Feature fields for one embedded word, on its canonical embedding.

    The canonical embedding minimizes the interspersed-letter count, ties
    broken by the earliest starting position; taking the leftmost greedy
    completion from each possible start covers exactly those minima.
    """
    challenge_word = challenge.challenge_word
    if word not in dictionary:
        raise ValueError(f"{word!r} is not a dictionary word")
    best: list[int] | None = None
    best_key: tuple[int, int] | None = None
    for start in range(len(challenge_word)):
        if challenge_word[start] != word[0]:
            continue
        embedding = _greedy_embedding(word, challenge_word, start)
        if embedding is None:
            break
        split = (embedding[-1] - embedding[0] + 1) - len(word)
        key = (split, embedding[0])
        if best_key is None or key < best_key:
            best, best_key = embedding, key
    if best is None:
        raise ValueError(f"{word!r} is not embedded in {challenge_word!r}")
    longest_run = 1
    run = 1
    for i in range(1, len(best)):
        run = run + 1 if best[i] == best[i - 1] + 1 else 1
        longest_run = max(longest_run, run)
    return WordFeatures(
        word_length=len(word),
        max_sequence=longest_run,
        has_2x=int(challenge.bonus_position in best),
        split_distance=best_key[0],
        first_occurrence=best[0],
        dirty_word=int(dictionary.is_profane(word)),
    )


@dataclass(frozen=True)
class WordSelectionRecord:
    level_index: int
    challenge_index: int
    challenge_word: str
    word: str
    selection_rate: float
    features: WordFeatures

    def to_dict(self) -> dict:
        f = self.features
        return {
            "levelIndex": self.level_index,
            "challengeIndex": self.challenge_index,
            "challengeWord": self.challenge_word,
            "word": self.word,
            "selectionRate": self.selection_rate,
            "wordLength": f.word_length,
            "maxSequence": f.max_sequence,
            "has2X": f.has_2x,
            "splitDistance": f.split_distance,
            "firstOccurrence": f.first_occurrence,
            "dirtyWord": f.dirty_word,
        }


def selection_rates(
    events: Iterable[PlaytraceEvent],
    level: GeneratedLevel,
    dictionary: Dictionary,
) -> list[WordSelectionRecord]:
    """How often each reachable word was the solve, per challenge.

    The denominator counts only attempts that ended in a solve; a timeout
    says nothing about word preference. Challenges nobody solved contribute
    no records. A solve naming an unreachable word marks the trace corrupt.
    """
    solves: dict[int, dict[str, int]] = {}
    for event in events:
        if event.kind != "solve" or event.level_index != level.index:
            continue
        per_word = solves.setdefault(event.challenge_index, {})
        per_word[event.word] = per_word.get(event.word, 0) + 1
    records: list[WordSelectionRecord] = []
    for challenge_index in sorted(solves):
        if not (1 <= challenge_index <= len(level.challenges)):
            raise TraceError(
                f"level {level.index} has no challenge {challenge_index}"
            )
        challenge = level.challenges[challenge_index - 1]
        report = challenge_reachability(challenge, dictionary)
        counts = solves[challenge_index]
        total = sum(counts.values())
        for word in counts:
            if not report.is_reachable(word):
                raise TraceError(
                    f"level {level.index} challenge {challenge_index}: "
                    f"solve word {word!r} is not reachable"
                )
        for word in report.reachable:
            records.append(
                WordSelectionRecord(
                    level_index=level.index,
                    challenge_index=challenge_index,
                    challenge_word=challenge.challenge_word,
                    word=word,
                    selection_rate=counts.get(word, 0) / total,
                    features=extract_word_features(challenge, word, dictionary),
                )
            )
    return records


# ---------------------------------------------------------------------------
# regression


@dataclass(frozen=True)
class RegressionModel:
    feature_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    r_squared: float
    standard_errors: tuple[float, ...]
    n_rows: int

    def to_dict(self) -> dict:
        return {
            "featureNames": list(self.feature_names),
            "coefficients": list(self.coefficients),
            "standardErrors": list(self.standard_errors),
            "rSquared": self.r_squared,
            "rSquaredPercent": self.r_squared * 100.0,
            "rows": self.n_rows,
        }


class RegressionError(Exception):
    pass


def fit_ols(
    feature_names: Sequence[str],
    rows: Sequence[Sequence[float]],
    response: Sequence[float],
) -> RegressionModel:
    """Least squares with an intercept; the intercept coefficient comes first.

    Refuses zero-variance feature columns and names any columns that make
    the design matrix rank deficient.
    """
    names = tuple(feature_names)
    x = np.asarray(rows, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(names):
        raise RegressionError(f"rows must have {len(names)} columns")
    n, p = x.shape
    if y.shape != (n,):
        raise RegressionError("response length does not match rows")
    if n <= p + 1:
        raise RegressionError(f"need more than {p + 1} rows, got {n}")
    spans = x.max(axis=0) - x.min(axis=0)
    flat = [names[j] for j in range(p) if spans[j] == 0.0]
    if flat:
        raise RegressionError(f"zero-variance feature columns: {', '.join(flat)}")
    design = np.column_stack([np.ones(n), x])
    _, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    tolerance = diag.max() * 1e-10
    dependent = [names[j - 1] for j in range(1, p + 1) if diag[j] <= tolerance]
    if dependent:
        raise RegressionError(f"collinear feature columns: {', '.join(dependent)}")
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ beta
    ss_res = float(residuals @ residuals)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    dof = n - p - 1
    sigma2 = ss_res / dof if dof > 0 else float("nan")
    covariance = sigma2 * np.linalg.inv(design.T @ design)
    errors = tuple(float(v) for v in np.sqrt(np.diag(covariance)))
    return RegressionModel(
        feature_names=names,
        coefficients=tuple(float(b) for b in beta),
        r_squared=r_squared,
        standard_errors=errors,
        n_rows=n,
    )


LEVEL_FEATURES = ("minCorpusRank", "maxSeq", "targetLength", "num2X", "minSourceLength")
WORD_FEATURES = (
    "wordLength",
    "maxSequence",
    "has2X",
    "splitDistance",
    "firstOccurrence",
    "dirtyWord",
)


def level_feature_row(params) -> list[float]:
    return [
        float(params.corpus_freq[0]),
        float(params.max_seq),
        float(params.target_length),
        float(params.num_2x),
        float(min(params.source_words)),
    ]


def level_score_model(
    outcomes: Iterable[LevelOutcome], schedule: Sequence
) -> RegressionModel:
    """Mean normalized level score against the five generation controls."""
    curve, _ = difficulty_curve(outcomes)
    if len(curve) < 7:
        raise RegressionError(f"need outcomes for at least 7 levels, got {len(curve)}")
    rows = []
    response = []
    for level_index, mean_score in curve:
        if not (1 <= level_index <= len(schedule)):
            raise RegressionError(f"level {level_index} is outside the schedule")
        rows.append(level_feature_row(schedule[level_index - 1]))
        response.append(mean_score)
    return fit_ols(LEVEL_FEATURES, rows, response)


def word_feature_row(features: WordFeatures) -> list[float]:
    return [
        float(features.word_length),
        float(features.max_sequence),
        float(features.has_2x),
        float(features.split_distance),
        float(features.first_occurrence),
        float(features.dirty_word),
    ]


def word_choice_model(records: Sequence[WordSelectionRecord]) -> RegressionModel:
    """Selection rate against the six word features, pooled over challenges."""
    if len(records) < 50:
        raise RegressionError(f"need at least 50 records, got {len(records)}")
    rows = [word_feature_row(r.features) for r in records]
    response = [r.selection_rate for r in records]
    return fit_ols(WORD_FEATURES, rows, response)


# ---------------------------------------------------------------------------
# report


def _fit_dropping_flat(
    names: Sequence[str],
    rows: list[list[float]],
    response: list[float],
    minimum_rows: int,
) -> tuple[dict, list[str]]:
    """Fit, dropping zero-variance columns instead of failing the report."""
    names = list(names)
    dropped: list[str] = []
    if len(rows) < minimum_rows:
        return (
            {"error": f"not enough data: {len(rows)} rows, need {minimum_rows}"},
            dropped,
        )
    while True:
        try:
            model = fit_ols(names, rows, response)
            return model.to_dict(), dropped
        except RegressionError as exc:
            message = str(exc)
            if "zero-variance" not in message:
                return {"error": message}, dropped
            flat = message.split(": ", 1)[1].split(", ")
            keep = [j for j, name in enumerate(names) if name not in flat]
            dropped.extend(name for name in names if name in flat)
            names = [names[j] for j in keep]
            rows = [[row[j] for j in keep] for row in rows]
            if not names:
                return {"error": "every feature column was constant"}, dropped


def build_report(
    parsed: ParsedTraces,
    levels: dict[int, GeneratedLevel],
    dictionary: Dictionary,
    schedule: Sequence,
) -> dict:
    """Replay everything and assemble the full analysis as one JSON document.

    Both models are fitted on the replayed data; feature columns that never
    vary in this corpus are dropped and listed rather than failing the run.
    """
    outcomes = session_outcomes(parsed, levels, dictionary)
    curve, omitted = difficulty_curve(outcomes, sorted(levels))
    records: list[WordSelectionRecord] = []
    for index in sorted(levels):
        records.extend(selection_rates(parsed.events, levels[index], dictionary))
    level_rows = []
    level_response = []
    for level_index, mean_score in curve:
        if not (1 <= level_index <= len(schedule)):
            raise TraceError(f"level {level_index} is outside the schedule")
        level_rows.append(level_feature_row(schedule[level_index - 1]))
        level_response.append(mean_score)
    level_model, level_dropped = _fit_dropping_flat(
        LEVEL_FEATURES, level_rows, level_response, minimum_rows=7
    )
    word_rows = [word_feature_row(r.features) for r in records]
    word_response = [r.selection_rate for r in records]
    word_model, word_dropped = _fit_dropping_flat(
        WORD_FEATURES, word_rows, word_response, minimum_rows=50
    )
    return {
        "sessions": len(parsed.by_session()),
        "skippedLines": [list(s) for s in parsed.skipped_lines],
        "excludedSessions": [list(s) for s in parsed.excluded_sessions],
        "difficultyCurve": [
            {"levelIndex": i, "meanNormalizedScore": m} for i, m in curve
        ],
        "levelsWithoutData": omitted,
        "levelScoreModel": level_model,
        "levelScoreModelDroppedFeatures": level_dropped,
        "wordChoiceModel": word_model,
        "wordChoiceModelDroppedFeatures": word_dropped,
        "wordSelection": [r.to_dict() for r in records],
    }


def _format_model(title: str, model: dict, dropped: list) -> list[str]:
    lines = [title]
    if "error" in model:
        lines.append(f"  not fitted: {model['error']}")
    else:
        lines.append(
            f"  R^2 = {model['rSquared']:.4f} ({model['rSquaredPercent']:.2f}%)"
            f" over {model['rows']} rows"
        )
        names = ["intercept"] + model["featureNames"]
        for name, coef, se in zip(names, model["coefficients"], model["standardErrors"]):
            lines.append(f"  {name:>16s} = {coef:+.6f} (se {se:.6f})")
    if dropped:
        lines.append(f"  dropped constant features: {', '.join(dropped)}")
    return lines


def report_text(report: dict) -> str:
    """Plain-text summary of a report document."""
    lines = [
        f"sessions analyzed: {report['sessions']}",
        f"lines skipped: {len(report['skippedLines'])}",
        f"sessions excluded: {len(report['excludedSessions'])}",
        "",
        "difficulty curve (mean normalized score per level):",
    ]
    for point in report["difficultyCurve"]:
        lines.append(
            f"  level {point['levelIndex']:>2d}: {point['meanNormalizedScore']:.4f}"
        )
    if report["levelsWithoutData"]:
        levels = ", ".join(str(i) for i in report["levelsWithoutData"])
        lines.append(f"  (no data for levels: {levels})")
    lines.append("")
    lines.extend(
        _format_model(
            "level score model:",
            report["levelScoreModel"],
            report["levelScoreModelDroppedFeatures"],
        )
    )
    lines.append("")
    lines.extend(
        _format_model(
            "word choice model:",
            report["wordChoiceModel"],
            report["wordChoiceModelDroppedFeatures"],
        )
    )
    lines.append("")
    lines.append(f"word selection records: {len(report['wordSelection'])}")
    return "\n".join(lines) + "\n"
