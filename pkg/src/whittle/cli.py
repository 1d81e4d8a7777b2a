"""Command line entry points: generate, play, simulate, analyze, serve."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .analytics import (
    PlaytraceEvent,
    build_report,
    load_traces,
    report_text,
    serialize_traces,
)
from .bots import BOT_KINDS, BotPolicy, simulate_corpus
from .config import AppConfig, apply_overrides, default_config
from .corpus import CorpusError
from .engine import LevelSession, challenge_time
from .generation import (
    GeneratedLevel,
    GenerationError,
    generate_level,
    level_to_json,
    load_level,
)

LEVEL_FILE_FORMAT = "level-{:02d}.json"
MANIFEST_NAME = "manifest.json"


class CliError(Exception):
    pass


def _level_path(levels_dir: Path, index: int) -> Path:
    return levels_dir / LEVEL_FILE_FORMAT.format(index)


def load_levels(levels_dir: Path) -> dict[int, GeneratedLevel]:
    paths = sorted(levels_dir.glob("level-*.json"))
    if not paths:
        raise CliError(f"no level files in {levels_dir}")
    levels = {}
    for path in paths:
        level = load_level(path)
        levels[level.index] = level
    return levels


def _append_traces(path: Path, events: list[PlaytraceEvent]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(serialize_traces(events))


# ---------------------------------------------------------------------------
# generate


def cmd_generate(config: AppConfig) -> int:
    dictionary = config.load_dictionary()
    schedule = config.load_schedule()
    levels_dir = config.levels_dir
    levels_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        names = []
        for index in range(1, len(schedule) + 1):
            level = generate_level(index, schedule, dictionary, config.seed)
            path = _level_path(levels_dir, index)
            path.write_text(level_to_json(level), encoding="utf-8")
            written.append(path)
            names.append(path.name)
            print(f"wrote {path}", file=sys.stderr)
        manifest = {
            "seed": config.seed,
            "generatorVersion": __version__,
            "schedule": [p.to_dict() for p in schedule],
            "levels": names,
        }
        manifest_path = levels_dir / MANIFEST_NAME
        manifest_path.write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote {manifest_path}", file=sys.stderr)
        return 0
    except GenerationError as exc:
        for path in written:
            path.unlink(missing_ok=True)
        raise CliError(f"generation failed, partial output removed: {exc}") from exc


# ---------------------------------------------------------------------------
# play


def _render(state) -> str:
    challenge = state.challenge
    cells = []
    for i in state.remaining:
        letter = challenge.challenge_word[i]
        mark = "*" if i == challenge.bonus_position else ""
        cells.append(f"{letter}{mark}({i})")
    return " ".join(cells)


def cmd_play(config: AppConfig, level_index: int, player_id: str) -> int:
    dictionary = config.load_dictionary()
    path = _level_path(config.levels_dir, level_index)
    if not path.exists():
        raise CliError(f"level file {path} not found; run generate first")
    level = load_level(path)
    session = LevelSession(level, dictionary)
    session_id = f"terminal-{player_id}-L{level.index:02d}-{int(time.time())}"
    events: list[PlaytraceEvent] = []
    ts = 0
    use_wall_clock = sys.stdin.isatty()

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

    print(f"level {level.index}: {len(level.challenges)} challenges")
    print("commands: <index> eliminates a letter, wait <seconds>, quit")
    quit_requested = False
    while not session.finished and not quit_requested:
        number = session.challenge_number
        state = session.current
        emit("start", number)
        budget = challenge_time(number)
        print(f"\nchallenge {number}/{len(level.challenges)}  time {budget:.1f}s")
        last_prompt = time.monotonic()
        while session.current is state and not session.finished:
            print(f"  {_render(state)}   [{state.time_left_ms / 1000:.1f}s left]")
            try:
                line = input("> ").strip().lower()
            except EOFError:
                quit_requested = True
                break
            now = time.monotonic()
            wall_ms = int((now - last_prompt) * 1000) if use_wall_clock else 0
            last_prompt = now
            delta = wall_ms
            command = line.split()
            if not command:
                pass
            elif command[0] in ("quit", "q"):
                quit_requested = True
            elif command[0] == "wait" and len(command) == 2:
                try:
                    delta += int(math.ceil(float(command[1]) * 1000))
                except ValueError:
                    print("  usage: wait <seconds>")
            elif command[0].isdigit():
                pass
            else:
                print("  commands: <index>, wait <seconds>, quit")
            if quit_requested:
                break
            if delta > 0:
                ts += delta
                session.tick(delta)
                if session.finished:
                    emit("timeout", number)
                    print("  time ran out")
                    break
            if command and command[0].isdigit():
                index = int(command[0])
                if index not in state.remaining:
                    print(f"  no letter at position {index}")
                    continue
                outcome = session.eliminate(index)
                emit("eliminate", number, original_index=index)
                if outcome.solved:
                    emit("solve", number, word=outcome.word, score=outcome.score)
                    doubled = " (doubled)" if outcome.doubled else ""
                    print(f"  solved {outcome.word} for {outcome.score}{doubled}")
    if session.finished:
        print(f"\nlevel over ({session.end_reason}); total score {session.total_score}")
    else:
        print(f"\nabandoned; score so far {session.total_score}")
    if events:
        _append_traces(config.traces_path, events)
        print(f"trace appended to {config.traces_path}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# simulate and analyze


def cmd_simulate(
    config: AppConfig,
    bot: str,
    runs: int,
    skill: float,
    delay_ms: int,
) -> int:
    dictionary = config.load_dictionary()
    levels = load_levels(config.levels_dir)
    policy = BotPolicy(
        kind=bot, seed=config.seed, skill=skill, per_letter_delay_ms=delay_ms
    )
    events = simulate_corpus(
        [policy], list(levels.values()), runs, config.seed, dictionary
    )
    _append_traces(config.traces_path, events)
    sessions = len({e.session_id for e in events})
    print(
        f"appended {len(events)} events from {sessions} sessions to {config.traces_path}",
        file=sys.stderr,
    )
    return 0


def cmd_analyze(config: AppConfig, out_path: Path | None) -> int:
    dictionary = config.load_dictionary()
    levels = load_levels(config.levels_dir)
    schedule = config.load_schedule()
    if not config.traces_path.exists():
        raise CliError(f"trace file {config.traces_path} not found")
    parsed = load_traces(config.traces_path)
    if not parsed.events:
        raise CliError(f"trace file {config.traces_path} holds no usable events")
    report = build_report(parsed, levels, dictionary, schedule)
    if out_path is not None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {out_path}", file=sys.stderr)
    print(report_text(report), end="")
    return 0


def cmd_serve(config: AppConfig) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whittle",
        description="Generate, play, simulate, and analyze letter-elimination puzzles.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, traces: bool = False):
        p.add_argument("--seed", type=int, default=None, help="master random seed")
        p.add_argument("--dict", type=Path, default=None, help="word list path")
        p.add_argument("--profanity", type=Path, default=None, help="profanity list path")
        p.add_argument("--out", type=Path, default=None, help="levels directory")
        if traces:
            p.add_argument("--traces", type=Path, default=None, help="trace log path")

    p = sub.add_parser("generate", help="write level files and a manifest")
    common(p)
    p.add_argument("--schedule", type=Path, default=None, help="schedule JSON override")

    p = sub.add_parser("play", help="play one level in the terminal")
    common(p, traces=True)
    p.add_argument("--level", type=int, required=True, help="level index to play")
    p.add_argument("--player", default="terminal", help="player id for the trace")

    p = sub.add_parser("simulate", help="run bot players and append traces")
    common(p, traces=True)
    p.add_argument("--bot", choices=BOT_KINDS, default="greedy-longest")
    p.add_argument("--runs", type=int, default=1, help="runs per level")
    p.add_argument("--skill", type=float, default=0.85, help="noisy-skill greediness")
    p.add_argument("--delay", type=int, default=500, help="ms per elimination")

    p = sub.add_parser("analyze", help="replay traces and fit both models")
    common(p, traces=True)
    p.add_argument("--schedule", type=Path, default=None, help="schedule JSON override")
    p.add_argument("--report", type=Path, default=None, help="write JSON report here")

    p = sub.add_parser("serve", help="serve the HTTP API")
    common(p, traces=True)
    p.add_argument("--port", type=int, default=None)
    return parser


def _config_from_args(args: argparse.Namespace) -> AppConfig:
    config = default_config()
    return apply_overrides(
        config,
        seed=getattr(args, "seed", None),
        dictionary_path=getattr(args, "dict", None),
        profanity_path=getattr(args, "profanity", None),
        schedule_path=getattr(args, "schedule", None),
        levels_dir=getattr(args, "out", None),
        traces_path=getattr(args, "traces", None),
        port=getattr(args, "port", None),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "play":
            return cmd_play(config, args.level, args.player)
        if args.command == "simulate":
            return cmd_simulate(config, args.bot, args.runs, args.skill, args.delay)
        if args.command == "analyze":
            return cmd_analyze(config, args.report)
        if args.command == "serve":
            return cmd_serve(config)
        raise CliError(f"unknown command {args.command}")
    except (CliError, CorpusError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
