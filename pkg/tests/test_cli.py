import io
import json
import sys

import pytest

from whittle.analytics import load_traces, replay_session
from whittle.cli import build_parser, load_levels, main
from whittle.config import apply_overrides, default_config
from whittle.generation import GenerationParams, load_level
from whittle.schedule import DEFAULT_SCHEDULE, dump_schedule


@pytest.fixture(scope="module")
def tiny_schedule_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("sched") / "schedule.json"
    path.write_text(dump_schedule(list(DEFAULT_SCHEDULE[:5])))
    return path


@pytest.fixture(scope="module")
def generated(tmp_path_factory, tiny_schedule_path):
    out = tmp_path_factory.mktemp("levels")
    code = main(
        ["generate", "--out", str(out), "--seed", "7", "--schedule", str(tiny_schedule_path)]
    )
    assert code == 0
    return out


class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["--version"])
        assert info.value.code == 0

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_unknown_bot_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate", "--bot", "psychic"])


class TestGenerate:
    def test_writes_levels_and_manifest(self, generated):
        names = sorted(p.name for p in generated.iterdir())
        assert names == [
            "level-01.json",
            "level-02.json",
            "level-03.json",
            "level-04.json",
            "level-05.json",
            "manifest.json",
        ]
        manifest = json.loads((generated / "manifest.json").read_text())
        assert manifest["seed"] == 7
        assert manifest["levels"] == names[:-1]
        assert len(manifest["schedule"]) == 5
        assert manifest["schedule"][0]["corpusFreq"] == [1, 2000]

    def test_levels_load_and_validate(self, generated):
        levels = load_levels(generated)
        assert sorted(levels) == [1, 2, 3, 4, 5]
        for index, level in levels.items():
            assert level.index == index
            assert len(level.challenges) == 10
            bonuses = sum(
                1 for c in level.challenges if c.bonus_position is not None
            )
            assert bonuses == level.params.num_2x

    def test_rerun_is_byte_identical(self, generated, tmp_path, tiny_schedule_path):
        out = tmp_path / "again"
        code = main(
            ["generate", "--out", str(out), "--seed", "7", "--schedule", str(tiny_schedule_path)]
        )
        assert code == 0
        for path in sorted(generated.iterdir()):
            assert (out / path.name).read_bytes() == path.read_bytes()

    def test_different_seed_differs(self, generated, tmp_path, tiny_schedule_path):
        out = tmp_path / "other-seed"
        code = main(
            ["generate", "--out", str(out), "--seed", "8", "--schedule", str(tiny_schedule_path)]
        )
        assert code == 0
        assert (out / "level-01.json").read_bytes() != (
            generated / "level-01.json"
        ).read_bytes()

    def test_failure_removes_partial_output(self, tmp_path, capsys):
        # level 5 draws 5-letter sources from the top three ranks, where none exist
        schedule = list(DEFAULT_SCHEDULE[:4]) + [
            GenerationParams((1, 3), (5, 5), 10, 3, 3)
        ]
        sched_path = tmp_path / "bad-schedule.json"
        sched_path.write_text(dump_schedule(schedule))
        out = tmp_path / "levels"
        code = main(["generate", "--out", str(out), "--schedule", str(sched_path)])
        assert code == 1
        assert "generation failed" in capsys.readouterr().err
        assert list(out.glob("level-*.json")) == []
        assert not (out / "manifest.json").exists()

    def test_invalid_schedule_file_rejected(self, tmp_path, capsys):
        sched_path = tmp_path / "schedule.json"
        sched_path.write_text(json.dumps([p.to_dict() for p in DEFAULT_SCHEDULE[:3]]))
        code = main(["generate", "--out", str(tmp_path / "x"), "--schedule", str(sched_path)])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestPlay:
    def run_play(self, generated, tmp_path, monkeypatch, lines, level=1):
        traces = tmp_path / "traces.jsonl"
        monkeypatch.setattr(sys, "stdin", io.StringIO("\n".join(lines) + "\n"))
        code = main(
            [
                "play",
                "--level",
                str(level),
                "--out",
                str(generated),
                "--traces",
                str(traces),
                "--player",
                "scripted",
            ]
        )
        assert code == 0
        return traces

    def test_solve_then_quit(self, generated, tmp_path, monkeypatch, capsys):
        from whittle.bots import BotPolicy, plan_solution
        from whittle.corpus import Dictionary

        level = load_level(generated / "level-01.json")
        d = Dictionary.bundled()
        plan = plan_solution(BotPolicy("greedy-longest"), level.challenges[0], d)
        traces = self.run_play(
            generated, tmp_path, monkeypatch, [str(i) for i in plan] + ["quit"]
        )
        out = capsys.readouterr().out
        assert "solved" in out
        parsed = load_traces(traces)
        assert parsed.skipped_lines == ()
        events = list(parsed.events)
        assert events[0].kind == "start"
        solves = [e for e in events if e.kind == "solve"]
        assert len(solves) == 1
        result = replay_session(events, level, d)
        assert result.end_reason == "abandoned"
        assert result.total_score == solves[0].score

    def test_wait_past_budget_times_out(self, generated, tmp_path, monkeypatch, capsys):
        from whittle.corpus import Dictionary

        level = load_level(generated / "level-01.json")
        traces = self.run_play(generated, tmp_path, monkeypatch, ["wait 31"])
        assert "time ran out" in capsys.readouterr().out
        events = list(load_traces(traces).events)
        assert [e.kind for e in events] == ["start", "timeout"]
        result = replay_session(events, level, Dictionary.bundled())
        assert result.end_reason == "timed_out"

    def test_immediate_quit_leaves_start_event(self, generated, tmp_path, monkeypatch):
        traces = self.run_play(generated, tmp_path, monkeypatch, ["q"])
        events = list(load_traces(traces).events)
        assert [e.kind for e in events] == ["start"]

    def test_eof_abandons(self, generated, tmp_path, monkeypatch, capsys):
        traces = self.run_play(generated, tmp_path, monkeypatch, [])
        assert "abandoned" in capsys.readouterr().out
        assert [e.kind for e in load_traces(traces).events] == ["start"]

    def test_bad_commands_are_tolerated(self, generated, tmp_path, monkeypatch, capsys):
        traces = self.run_play(
            generated, tmp_path, monkeypatch, ["frobnicate", "wait x", "99", "quit"]
        )
        out = capsys.readouterr().out
        assert "commands:" in out
        assert "usage: wait" in out
        assert "no letter at position 99" in out

    def test_missing_level_errors(self, generated, tmp_path, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO(""))
        code = main(
            [
                "play",
                "--level",
                "9",
                "--out",
                str(generated),
                "--traces",
                str(tmp_path / "t.jsonl"),
            ]
        )
        assert code == 1
        assert "not found" in capsys.readouterr().err


class TestSimulateAnalyze:
    def test_simulate_then_analyze(self, generated, tmp_path, capsys):
        traces = tmp_path / "traces.jsonl"
        code = main(
            [
                "simulate",
                "--out",
                str(generated),
                "--traces",
                str(traces),
                "--bot",
                "noisy-skill",
                "--skill",
                "0.8",
                "--runs",
                "2",
                "--seed",
                "11",
            ]
        )
        assert code == 0
        assert "appended" in capsys.readouterr().err
        parsed = load_traces(traces)
        assert parsed.skipped_lines == ()
        assert len(parsed.by_session()) == 10  # 2 runs x 5 levels

        report_path = tmp_path / "report.json"
        code = main(
            [
                "analyze",
                "--out",
                str(generated),
                "--traces",
                str(traces),
                "--report",
                str(report_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "sessions analyzed: 10" in out
        assert "difficulty curve" in out
        report = json.loads(report_path.read_text())
        assert [p["levelIndex"] for p in report["difficultyCurve"]] == [1, 2, 3, 4, 5]
        # five levels cannot support the seven-level minimum
        assert "error" in report["levelScoreModel"]

    def test_simulate_appends_across_runs(self, generated, tmp_path):
        traces = tmp_path / "traces.jsonl"
        for seed in ("1", "2"):
            code = main(
                [
                    "simulate",
                    "--out",
                    str(generated),
                    "--traces",
                    str(traces),
                    "--runs",
                    "1",
                    "--seed",
                    seed,
                ]
            )
            assert code == 0
        assert len(load_traces(traces).by_session()) == 10

    def test_analyze_without_traces_errors(self, generated, tmp_path, capsys):
        code = main(
            [
                "analyze",
                "--out",
                str(generated),
                "--traces",
                str(tmp_path / "absent.jsonl"),
            ]
        )
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_analyze_empty_traces_errors(self, generated, tmp_path, capsys):
        traces = tmp_path / "traces.jsonl"
        traces.write_text("\n")
        code = main(
            ["analyze", "--out", str(generated), "--traces", str(traces)]
        )
        assert code == 1
        assert "no usable events" in capsys.readouterr().err

    def test_simulate_without_levels_errors(self, tmp_path, capsys):
        code = main(
            [
                "simulate",
                "--out",
                str(tmp_path / "void"),
                "--traces",
                str(tmp_path / "t.jsonl"),
            ]
        )
        assert code == 1
        assert "no level files" in capsys.readouterr().err


class TestConfig:
    def test_env_overrides(self, monkeypatch, tmp_path):
        monkeypatch.setenv("WHITTLE_SEED", "99")
        monkeypatch.setenv("WHITTLE_LEVELS_DIR", str(tmp_path / "lv"))
        monkeypatch.setenv("WHITTLE_TRACES", str(tmp_path / "t.jsonl"))
        monkeypatch.setenv("WHITTLE_PORT", "9100")
        config = default_config()
        assert config.seed == 99
        assert config.levels_dir == tmp_path / "lv"
        assert config.traces_path == tmp_path / "t.jsonl"
        assert config.port == 9100

    def test_flags_beat_environment(self, monkeypatch, tmp_path, tiny_schedule_path):
        monkeypatch.setenv("WHITTLE_LEVELS_DIR", str(tmp_path / "from-env"))
        out = tmp_path / "from-flag"
        code = main(
            ["generate", "--out", str(out), "--seed", "7", "--schedule", str(tiny_schedule_path)]
        )
        assert code == 0
        assert out.exists()
        assert not (tmp_path / "from-env").exists()

    def test_apply_overrides_skips_none(self):
        config = default_config()
        same = apply_overrides(config, seed=None, port=None)
        assert same == config
        changed = apply_overrides(config, seed=5)
        assert changed.seed == 5 and changed.port == config.port
