"""HTTP service: level data for clients, authoritative checks, trace intake.

Level payloads never include source words or any embedded-word lists; the
client only ever learns what a player could see. Scores reported back for
uploaded traces come from full engine replays, not from the client.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .analytics import (
    ReplayError,
    TraceError,
    build_report,
    parse_traces,
    replay_session,
    serialize_traces,
)
from .cli import load_levels
from .config import AppConfig
from .corpus import is_subsequence
from .engine import challenge_time, word_score

FRONTEND_DIST = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class CheckRequest(BaseModel):
    level_index: int = Field(alias="levelIndex")
    challenge_index: int = Field(alias="challengeIndex")
    remaining: str
    eliminated_positions: list[int] | None = Field(
        default=None, alias="eliminatedPositions"
    )


class TraceUpload(BaseModel):
    events: list[dict]


def create_app(config: AppConfig, frontend_dist: Path | None = None) -> FastAPI:
    dictionary = config.load_dictionary()
    schedule = config.load_schedule()
    levels = load_levels(config.levels_dir)
    traces_path = config.traces_path
    traces_lock = threading.Lock()
    app = FastAPI(title="whittle", version=__version__)

    def require_level(index: int):
        level = levels.get(index)
        if level is None:
            raise HTTPException(status_code=404, detail=f"no level {index}")
        return level

    @app.get("/api/levels")
    def list_levels():
        return {
            "seed": config.seed,
            "generatorVersion": __version__,
            "levels": [
                {"index": level.index, "challenges": len(level.challenges)}
                for level in sorted(levels.values(), key=lambda lv: lv.index)
            ],
        }

    @app.get("/api/levels/{index}")
    def get_level(index: int):
        level = require_level(index)
        return {
            "index": level.index,
            "challenges": [
                {
                    "challengeIndex": n,
                    "challengeWord": c.challenge_word,
                    "bonusPosition": c.bonus_position,
                    "timeBudgetSeconds": challenge_time(n),
                }
                for n, c in enumerate(level.challenges, start=1)
            ],
        }

    @app.post("/api/check")
    def check(request: CheckRequest):
        level = require_level(request.level_index)
        if not (1 <= request.challenge_index <= len(level.challenges)):
            raise HTTPException(
                status_code=404, detail=f"no challenge {request.challenge_index}"
            )
        challenge = level.challenges[request.challenge_index - 1]
        word = challenge.challenge_word
        remaining = request.remaining.upper()
        positions = request.eliminated_positions
        if positions is not None:
            if sorted(set(positions)) != sorted(positions) or not all(
                0 <= p < len(word) for p in positions
            ):
                raise HTTPException(status_code=400, detail="bad eliminated positions")
            rebuilt = "".join(
                ch for i, ch in enumerate(word) if i not in set(positions)
            )
            if rebuilt != remaining:
                raise HTTPException(
                    status_code=400,
                    detail="remaining letters do not match eliminated positions",
                )
        elif not is_subsequence(remaining, word):
            raise HTTPException(
                status_code=400, detail="remaining is not part of the challenge word"
            )
        is_word = remaining in dictionary
        doubled = False
        if is_word and challenge.bonus_position is not None:
            doubled = positions is None or challenge.bonus_position not in positions
        return {
            "isWord": is_word,
            "wouldScore": word_score(remaining, doubled) if is_word else 0,
        }

    @app.post("/api/traces")
    def upload_traces(upload: TraceUpload):
        if not upload.events:
            raise HTTPException(status_code=400, detail="no events supplied")
        parsed = parse_traces("\n".join(json.dumps(e) for e in upload.events))
        if parsed.skipped_lines:
            number, reason = parsed.skipped_lines[0]
            raise HTTPException(
                status_code=400, detail=f"bad event {number}: {reason}"
            )
        if parsed.excluded_sessions:
            session_id, reason = parsed.excluded_sessions[0]
            raise HTTPException(
                status_code=400,
                detail=f"session {session_id}: out of order ({reason})",
            )
        results = []
        for session_id, events in parsed.by_session().items():
            level = levels.get(events[0].level_index)
            if level is None:
                raise HTTPException(
                    status_code=400,
                    detail=f"session {session_id}: unknown level {events[0].level_index}",
                )
            try:
                result = replay_session(events, level, dictionary)
            except (ReplayError, TraceError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            results.append(
                {
                    "sessionId": result.session_id,
                    "totalScore": result.total_score,
                    "endReason": result.end_reason,
                    "challengesSolved": result.challenges_solved,
                }
            )
        with traces_lock:
            traces_path.parent.mkdir(parents=True, exist_ok=True)
            with open(traces_path, "a", encoding="utf-8") as fh:
                fh.write(serialize_traces(parsed.events))
        return {"sessions": results}

    @app.get("/api/report")
    def report():
        with traces_lock:
            if not traces_path.exists():
                raise HTTPException(status_code=404, detail="no traces recorded yet")
            text = traces_path.read_text(encoding="utf-8")
        parsed = parse_traces(text)
        if not parsed.events:
            raise HTTPException(status_code=404, detail="no usable trace events yet")
        try:
            return build_report(parsed, levels, dictionary, schedule)
        except TraceError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc

    @app.get("/api/health", response_class=PlainTextResponse)
    def health():
        return "ok"

    dist = frontend_dist if frontend_dist is not None else FRONTEND_DIST
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="frontend")
    return app
