"""Command-line behaviour: verdict lines and the exit-code contract.

0 clean, 1 witness found, 2 inconclusive, 3 unusable invocation.
"""

from __future__ import annotations

import json

import pytest

from fairalloc.cli import main


def run(*argv) -> int:
    return main(list(argv))


def unfair_table(tmp_path) -> str:
    doc = {
        "name": "wasteful",
        "officers": [{"id": "i1", "type": "t"}],
        "states": [{"id": "s1", "capacity": 1}, {"id": "s2", "capacity": 1}],
        "message_spaces": {"t": {"kind": "complete"}},
        "outcome_table": [
            {"messages": {"i1": [["s1", "s2"]]}, "allocation": {"i1": "s2"}},
            {"messages": {"i1": [["s2", "s1"]]}, "allocation": {"i1": "s2"}},
        ],
    }
    path = tmp_path / "wasteful.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestRun:
    def test_static_run_fails_cpe(self, capsys):
        code = run(
            "run", "--instance", "example_6_1", "--mechanism", "modular",
            "--audit", "fairness,bounds,cpe",
        )
        out = capsys.readouterr().out
        assert code == 1
        assert "allocation: i1->s1, i2->s2" in out
        assert "cpe" in out and "fail" in out
        assert "binding: s1-quota" in out

    def test_dynamic_run_passes_all(self, capsys):
        code = run(
            "run", "--instance", "example_6_1", "--mechanism", "dynamic-modular",
            "--audit", "all",
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "allocation: i1->s2, i2->s1" in out

    def test_out_file_carries_the_canonical_payload(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code = run(
            "run", "--instance", "example_6_1", "--mechanism", "dynamic-modular",
            "--audit", "all", "--out", str(target),
        )
        assert code == 0
        payload = json.loads(target.read_text())
        assert payload["allocation"] == {"i1": "s2", "i2": "s1"}
        assert len(payload["verdicts"]) == 5

    def test_sd_on_zonal_instance_is_a_precondition_error(self, capsys):
        code = run("run", "--instance", "example_pp", "--mechanism", "sd")
        assert code == 3
        assert "complete message spaces" in capsys.readouterr().err

    def test_file_provider(self, tmp_path, capsys):
        ranks = tmp_path / "ranks.json"
        ranks.write_text(json.dumps({"i1": ["s1", "s2"], "i2": ["s2"]}))
        code = run(
            "run", "--instance", "example_6_1", "--mechanism", "dynamic-modular",
            "--provider", "file", "--rankings", str(ranks), "--audit", "cpe",
        )
        out = capsys.readouterr().out
        assert code == 1  # picking s1 first is the dominated path
        assert "allocation: i1->s1, i2->s2" in out

    def test_file_provider_needs_a_file(self):
        assert run(
            "run", "--instance", "example_6_1", "--mechanism", "dynamic-modular",
            "--provider", "file",
        ) == 3

    def test_prompt_provider_reuses_the_session_loop(self, capsys, monkeypatch):
        answers = iter(["s2 s1", "s1"])
        monkeypatch.setattr("builtins.input", lambda _: next(answers))
        code = run(
            "run", "--instance", "example_6_1", "--mechanism", "dynamic-modular",
            "--provider", "prompt", "--audit", "all",
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "round 0: officer i1 (t)" in out
        assert "committed: s2" in out

    def test_prompt_retries_a_rejected_ranking(self, capsys, monkeypatch):
        answers = iter(["s9", "s2 s1", "s1"])
        monkeypatch.setattr("builtins.input", lambda _: next(answers))
        assert run(
            "run", "--instance", "example_6_1", "--mechanism", "dynamic-modular",
            "--provider", "prompt",
        ) == 0
        assert "rejected" in capsys.readouterr().out

    def test_prompt_only_fits_dynamic_runs(self):
        assert run(
            "run", "--instance", "example_6_1", "--mechanism", "modular",
            "--provider", "prompt",
        ) == 3

    def test_unknown_audit(self):
        assert run(
            "run", "--instance", "example_6_1", "--mechanism", "modular",
            "--audit", "vibes",
        ) == 3

    def test_unknown_instance(self):
        assert run("run", "--instance", "ghost", "--mechanism", "modular") == 3

    def test_unknown_mechanism_choice(self):
        assert run("run", "--instance", "example_6_1", "--mechanism", "x") == 3


class TestCheck:
    def test_sp_finds_the_peeking_manipulation(self, capsys):
        code = run("check", "sp", "--instance", "example_pp")
        out = capsys.readouterr().out
        assert code == 1
        assert '"i3"' in out

    def test_sp_passes_the_respecting_table(self):
        assert run("check", "sp", "--instance", "example_4_1") == 0

    def test_sp_budget_exhaustion_is_inconclusive(self, capsys):
        code = run("check", "sp", "--instance", "example_pp", "--budget", "3")
        assert code == 2
        assert "inconclusive" in capsys.readouterr().err

    def test_coherence_fails_the_inverting_table(self, capsys):
        code = run("check", "coherence", "--instance", "example_4_2")
        assert code == 1
        assert "CoherenceWitness" in capsys.readouterr().out

    def test_solvency_verdicts(self, capsys):
        assert run("check", "solvency", "--instance", "example_5_1") == 0
        assert run("check", "solvency", "--instance", "example_overcommitted") == 1
        out = capsys.readouterr().out
        assert "strands" in out
        assert run(
            "check", "solvency", "--instance", "example_5_2", "--budget", "1"
        ) == 2

    def test_richness_verdicts(self, capsys):
        assert run("check", "richness", "--instance", "example_pp") == 0
        assert run("check", "richness", "--instance", "example_rpp") == 1
        assert "covering pair" in capsys.readouterr().out

    def test_fairness_sweep_passes_queue_mechanisms(self, capsys):
        assert run("check", "fairness-sweep", "--instance", "example_4_1") == 0
        assert "2 message profiles" in capsys.readouterr().out

    def test_fairness_sweep_catches_waste(self, tmp_path, capsys):
        path = unfair_table(tmp_path)
        code = run("check", "fairness-sweep", "--instance", path)
        assert code == 1
        assert "WasteWitness" in capsys.readouterr().out

    def test_check_writes_out_file(self, tmp_path):
        target = tmp_path / "check.json"
        run(
            "check", "sp", "--instance", "example_pp", "--out", str(target)
        )
        payload = json.loads(target.read_text())
        assert payload["check"] == "sp"
        assert payload["witness"]["officer"] == "i3"


class TestImpossibility:
    def test_refuted_instance(self, capsys):
        code = run("impossibility", "--instance", "example_impossibility")
        out = capsys.readouterr().out
        assert code == 1
        assert "verdict: impossible" in out
        assert out.count("forced-violation") == 4
        assert out.count("tables-defeated") == 4

    def test_slack_instance_admits_a_table(self, tmp_path, capsys):
        doc = json.loads(
            __import__("fairalloc.fixtures", fromlist=["fixture_text"]).fixture_text(
                "example_impossibility"
            )
        )
        doc["bounds"][0]["ceiling"] = 3
        path = tmp_path / "slack.json"
        path.write_text(json.dumps(doc))
        code = run("impossibility", "--instance", str(path))
        assert code == 0
        assert "admits" in capsys.readouterr().out

    def test_wrong_shape_is_unusable(self, capsys):
        assert run("impossibility", "--instance", "example_pp") == 3


class TestFixtures:
    def test_list_and_show(self, capsys):
        assert run("fixtures", "list") == 0
        assert "example_6_1" in capsys.readouterr().out
        assert run("fixtures", "show", "example_6_1") == 0
        shown = json.loads(capsys.readouterr().out)
        assert shown["name"] == "example_6_1"

    def test_show_unknown(self):
        assert run("fixtures", "show", "ghost") == 3

    def test_missing_subcommand(self):
        assert run() == 3
