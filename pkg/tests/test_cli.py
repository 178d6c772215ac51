"""End-to-end tests of the experiment harness and its file contracts."""

import json
from pathlib import Path

import pytest

from shsade_pids import cli


def write_config(path: Path, **overrides) -> Path:
    config = {
        "task": "benchmark",
        "algorithm": "shsade",
        "objective": {"name": "sphere", "dimension": 4},
        "algorithm_config": {"pop_size": 8, "max_evaluations": 400},
        "seeds": [1, 2, 3],
        "output": "out",
    }
    config.update(overrides)
    path.write_text(json.dumps(config))
    return path


def space_doc(num_axes=4, values=(0, 1, 2, 3)):
    return {"axes": [{"name": f"a{i}", "values": list(values)} for i in range(num_axes)]}


def nas_config(output="out_nas", algorithm="shsade"):
    return {
        "task": "nas",
        "algorithm": algorithm,
        "space": space_doc(),
        "surrogate_seed": 12,
        "budget": 60,
        "biobjective": {"omega": 1.0},
        "algorithm_config": {"pop_size": 10, "max_generations": 40}
        if algorithm == "shsade"
        else {"population_size": 10, "tournament_size": 3},
        "seeds": [5, 6],
        "output": output,
    }


def read_all_bytes(directory: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestRunBenchmark:
    def test_writes_one_trace_per_seed_plus_summary(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        cfg = write_config(tmp_path / "config.json")
        assert cli.main(["run", str(cfg)]) == 0
        outdir = tmp_path / "out"
        names = sorted(p.name for p in outdir.iterdir())
        assert names == ["summary.json", "trace_seed1.csv", "trace_seed2.csv", "trace_seed3.csv"]
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["algorithm"] == "shsade"
        assert len(summary["per_seed"]) == 3
        assert "median_final_best" in summary and len(summary["iqr_final_best"]) == 2

    def test_rerun_is_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        cfg = write_config(tmp_path / "config.json")
        assert cli.main(["run", str(cfg)]) == 0
        first = read_all_bytes(tmp_path / "out")
        assert cli.main(["run", str(cfg)]) == 0
        assert read_all_bytes(tmp_path / "out") == first

    def test_threads_do_not_change_outputs(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        cfg = write_config(tmp_path / "config.json")
        assert cli.main(["run", str(cfg)]) == 0
        serial = read_all_bytes(tmp_path / "out")
        cfg2 = write_config(tmp_path / "config.json")
        assert cli.main(["run", str(cfg2), "--threads", "3"]) == 0
        assert read_all_bytes(tmp_path / "out") == serial

    def test_vanilla_de_runs(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        cfg = write_config(
            tmp_path / "config.json",
            algorithm="vanilla_de",
            algorithm_config={"pop_size": 8, "max_evaluations": 240, "f": 0.6, "cr": 0.8},
            output="out_de",
        )
        assert cli.main(["run", str(cfg)]) == 0
        trace = (tmp_path / "out_de" / "trace_seed1.csv").read_text()
        assert "# algorithm: vanilla_de" in trace


class TestRunValidation:
    def test_malformed_json_exits_1_without_files(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["run", str(bad)]) == 1
        assert not (tmp_path / "out").exists()
        assert "config error" in capsys.readouterr().err

    def test_missing_file_exits_1(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "absent.json")]) == 1

    @pytest.mark.parametrize(
        "overrides",
        [
            {"seeds": []},
            {"seeds": [1, 1]},
            {"seeds": [1.5]},
            {"task": "training"},
            {"algorithm": "regularized_ea"},  # not a benchmark algorithm
            {"objective": {"name": "mystery", "dimension": 3}},
            {"objective": {"name": "sphere"}},
            {"output": ""},
        ],
    )
    def test_invalid_configs_exit_1(self, tmp_path, overrides):
        cfg = write_config(tmp_path / "config.json", **overrides)
        assert cli.main(["run", str(cfg)]) == 1

    def test_nas_budget_below_population_exits_1(self, tmp_path):
        doc = nas_config()
        doc["budget"] = 5
        path = tmp_path / "nas.json"
        path.write_text(json.dumps(doc))
        assert cli.main(["run", str(path)]) == 1

    def test_missing_space_file_exits_1(self, tmp_path):
        doc = nas_config()
        doc["space"] = "nowhere/space.json"
        path = tmp_path / "nas.json"
        path.write_text(json.dumps(doc))
        assert cli.main(["run", str(path)]) == 1

    def test_runtime_failure_exits_2_and_removes_partial_outputs(
        self, tmp_path, monkeypatch, capsys
    ):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        cfg = write_config(tmp_path / "config.json")

        calls = {"n": 0}
        real_run = cli.shsade.run

        def failing_run(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] >= 2:
                raise RuntimeError("simulated evaluator failure")
            return real_run(*args, **kwargs)

        monkeypatch.setattr(cli.shsade, "run", failing_run)
        assert cli.main(["run", str(cfg)]) == 2
        outdir = tmp_path / "out"
        leftovers = list(outdir.iterdir()) if outdir.exists() else []
        assert leftovers == []
        assert "runtime error" in capsys.readouterr().err


class TestRunNas:
    def test_trace_files_and_embedded_result_documents(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        path = tmp_path / "nas.json"
        path.write_text(json.dumps(nas_config()))
        assert cli.main(["run", str(path)]) == 0
        outdir = tmp_path / "out_nas"
        names = sorted(p.name for p in outdir.iterdir())
        assert names == ["summary.json", "trace_seed5.csv", "trace_seed6.csv"]
        summary = json.loads((outdir / "summary.json").read_text())
        for entry in summary["per_seed"]:
            result = entry["result"]
            assert set(result) == {"best_genotype", "best_score", "evaluations", "trace"}
            assert set(result["best_genotype"]) == {"a0", "a1", "a2", "a3"}
            assert result["evaluations"] <= 60

    def test_regularized_ea_runs(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        path = tmp_path / "nas.json"
        path.write_text(json.dumps(nas_config(output="out_ea", algorithm="regularized_ea")))
        assert cli.main(["run", str(path)]) == 0
        trace = (tmp_path / "out_ea" / "trace_seed5.csv").read_text()
        assert "# algorithm: regularized_ea" in trace

    def test_space_loaded_from_file_relative_to_config(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        (tmp_path / "space.json").write_text(json.dumps(space_doc()))
        doc = nas_config(output="out_file_space")
        doc["space"] = "space.json"
        path = tmp_path / "nas.json"
        path.write_text(json.dumps(doc))
        assert cli.main(["run", str(path)]) == 0


class TestCompare:
    @staticmethod
    def write_trace(path: Path, best_values, start_best=None):
        lines = ["# algorithm: demo", "generation,evaluations,best_fitness,mean_fitness"]
        evals = 50
        best = start_best if start_best is not None else best_values[0]
        for g, value in enumerate(best_values):
            best = min(best, value)
            lines.append(f"{g},{evals},{best!r},{best!r}")
            evals += 50
        path.write_text("\n".join(lines) + "\n")

    def test_self_comparison_is_a_tie(self, tmp_path, capsys):
        d = tmp_path / "runs"
        d.mkdir()
        self.write_trace(d / "trace_seed1.csv", [5.0, 4.0, 3.0])
        self.write_trace(d / "trace_seed2.csv", [6.0, 5.0, 4.0])
        assert cli.main(["compare", str(d), str(d)]) == 0
        out = capsys.readouterr().out
        assert out.strip().endswith("verdict: tie")

    def test_dominating_directory_wins(self, tmp_path, capsys):
        a = tmp_path / "alpha"
        b = tmp_path / "beta"
        a.mkdir()
        b.mkdir()
        self.write_trace(a / "trace_seed1.csv", [1.0, 1.0, 1.0])
        self.write_trace(b / "trace_seed1.csv", [2.0, 2.0, 2.0])
        assert cli.main(["compare", str(a), str(b), "--step", "50"]) == 0
        out = capsys.readouterr().out
        assert "evaluations,median_alpha,median_beta" in out
        assert out.strip().endswith("verdict: alpha")

    def test_output_file_option(self, tmp_path, capsys):
        a = tmp_path / "alpha"
        a.mkdir()
        self.write_trace(a / "trace_seed1.csv", [1.0])
        report = tmp_path / "report.csv"
        assert cli.main(["compare", str(a), str(a), "-o", str(report)]) == 0
        assert report.exists()
        assert report.read_text().startswith("evaluations,")

    def test_schema_mismatch_exits_1(self, tmp_path, capsys):
        a = tmp_path / "alpha"
        b = tmp_path / "beta"
        a.mkdir()
        b.mkdir()
        self.write_trace(a / "trace_seed1.csv", [1.0])
        (b / "trace_seed1.csv").write_text("time,value\n1,2\n")
        assert cli.main(["compare", str(a), str(b)]) == 1
        assert "compare error" in capsys.readouterr().err

    def test_empty_directory_exits_1(self, tmp_path):
        a = tmp_path / "alpha"
        b = tmp_path / "beta"
        a.mkdir()
        b.mkdir()
        self.write_trace(a / "trace_seed1.csv", [1.0])
        assert cli.main(["compare", str(a), str(b)]) == 1


class TestOracle:
    def test_ranking_csv_on_stdout(self, tmp_path, capsys):
        space_path = tmp_path / "space.json"
        space_path.write_text(json.dumps(space_doc(num_axes=2, values=[0, 1, 2])))
        assert cli.main(["oracle", str(space_path), "--seed", "3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "rank,score,accuracy,cost,a0,a1"
        assert len(lines) == 1 + 9
        scores = [float(line.split(",")[1]) for line in lines[1:]]
        assert scores == sorted(scores)

    def test_output_file(self, tmp_path):
        space_path = tmp_path / "space.json"
        space_path.write_text(json.dumps(space_doc(num_axes=2, values=[0, 1])))
        out = tmp_path / "ranking.csv"
        assert cli.main(["oracle", str(space_path), "--seed", "3", "-o", str(out)]) == 0
        assert out.read_text().startswith("rank,")

    def test_oversized_space_exits_1(self, tmp_path, capsys):
        space_path = tmp_path / "space.json"
        space_path.write_text(json.dumps(space_doc(num_axes=12, values=list(range(8)))))
        assert cli.main(["oracle", str(space_path), "--seed", "3"]) == 1

    def test_bad_space_document_exits_1(self, tmp_path):
        space_path = tmp_path / "space.json"
        space_path.write_text(json.dumps({"axes": "nope"}))
        assert cli.main(["oracle", str(space_path), "--seed", "3"]) == 1


class TestConfigHash:
    def test_key_order_does_not_matter(self):
        a = {"x": 1, "y": {"b": 2, "a": 3}}
        b = {"y": {"a": 3, "b": 2}, "x": 1}
        assert cli.config_hash(a) == cli.config_hash(b)

    def test_any_field_change_changes_hash(self):
        base = {"task": "benchmark", "seeds": [1, 2], "output": "out"}
        assert cli.config_hash(base) != cli.config_hash({**base, "seeds": [1, 3]})
        assert cli.config_hash(base) != cli.config_hash({**base, "output": "elsewhere"})

    def test_hash_recorded_in_trace_metadata(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        cfg_path = write_config(tmp_path / "config.json")
        raw = json.loads(cfg_path.read_text())
        assert cli.main(["run", str(cfg_path)]) == 0
        text = (tmp_path / "out" / "trace_seed1.csv").read_text()
        assert f"# config_hash: {cli.config_hash(raw)}" in text
