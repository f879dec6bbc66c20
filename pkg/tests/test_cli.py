import json
import subprocess
import sys

import pytest

from qclf import cli


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "c.jsonl"
    assert cli.main(["synth", "--table2", "--noise", "0.1", "--seed", "1", "--out",
                     str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def small(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "s.jsonl"
    assert cli.main(["synth", "--n", "240", "--noise", "0.1", "--out", str(path)]) == 0
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestValidateAndSynth:
    def test_validate_ok(self, corpus, capsys):
        code, out, _ = run(["validate", corpus], capsys)
        assert code == 0 and out.strip() == "ok: 1100 records"

    def test_validate_sample(self, capsys):
        code, out, _ = run(["validate", "@sample"], capsys)
        assert code == 0 and out.startswith("ok:")

    def test_validate_bad(self, tmp_path, capsys):
        p = tmp_path / "bad.jsonl"
        p.write_text("{oops\n")
        code, out, _ = run(["validate", p], capsys)
        assert code == 2 and "1 invalid record" in out

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(["validate", tmp_path / "nope.jsonl"], capsys)
        assert code == 1 and "error" in err

    def test_synth_manifest_and_stdout(self, corpus, capsys):
        manifest = corpus.with_name(corpus.name + ".manifest.tsv").read_text().splitlines()
        assert manifest[1].startswith("PER\t")
        assert sum(int(line.split("\t")[1]) for line in manifest[1:]) == 1100
        code, out, _ = run(["synth", "--n", "5"], capsys)
        assert code == 0 and len(out.splitlines()) == 5

    def test_synth_bad_noise(self, capsys):
        assert run(["synth", "--noise", "0.7"], capsys)[0] == 1


class TestTrainPredictEvaluate:
    def test_train_is_reproducible(self, corpus, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            code, out, _ = run(["train", "--corpus", corpus, "--approach", "bagging",
                                "--learner", "NB", "--size", "3", "--out", p], capsys)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()
        assert "bagging NB: 3 member(s)" in out

    def test_stacking_summary(self, corpus, tmp_path, capsys):
        code, out, _ = run(["train", "--corpus", corpus, "--approach", "stacking",
                            "--meta-learner", "NB", "--features", "fl",
                            "--out", tmp_path / "m.json"], capsys)
        assert code == 0 and "meta input dimension 27" in out

    def test_evaluate_and_predict(self, corpus, tmp_path, capsys):
        model = tmp_path / "m.json"
        run(["train", "--corpus", corpus, "--learner", "NB", "--out", model], capsys)
        code, out, _ = run(["evaluate", "--corpus", corpus, "--model", model,
                            "--out", tmp_path / "r.json"], capsys)
        assert code == 0 and out.startswith("accuracy: ")
        report = json.loads((tmp_path / "r.json").read_text())
        assert sum(map(sum, report["confusion"])) == 331
        code, out, _ = run(["predict", "--model", model, "--corpus", "@sample"], capsys)
        lines = [json.loads(x) for x in out.splitlines()]
        assert code == 0 and len(lines) == 28
        assert abs(sum(lines[0]["scores"].values()) - 1) < 1e-9
        assert lines[0]["score"] == max(lines[0]["scores"].values())

    def test_fine_level(self, corpus, tmp_path, capsys):
        model = tmp_path / "f.json"
        code, _, _ = run(["train", "--corpus", corpus, "--level", "fine", "--coarse", "METH",
                          "--learner", "NB", "--out", model], capsys)
        assert code == 0
        code, out, _ = run(["predict", "--model", model, "--corpus", "@sample"], capsys)
        assert json.loads(out.splitlines()[0])["label"].startswith("METH:")
        code, out, _ = run(["evaluate", "--corpus", corpus, "--level", "fine", "--learner", "NB",
                            "--mode", "pipelined"], capsys)
        assert code == 0 and "F_PER" in out and "PIPELINED" in out

    def test_fine_needs_coarse(self, corpus, capsys):
        assert run(["train", "--corpus", corpus, "--level", "fine"], capsys)[0] == 1

    def test_evaluate_needs_model(self, corpus, capsys):
        assert run(["evaluate", "--corpus", corpus], capsys)[0] == 1

    def test_explicit_split_needs_tags(self, small, capsys):
        assert run(["train", "--corpus", small, "--learner", "NB"], capsys)[0] == 2

    def test_bad_model_file(self, tmp_path, capsys):
        p = tmp_path / "junk.json"
        p.write_text("{}")
        assert run(["predict", "--model", p, "--corpus", "@sample"], capsys)[0] == 3


class TestConfig:
    def test_flags_override_config(self, corpus, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"version": 1, "approach": "bagging", "learner": "NB",
                                   "size": 4}))
        code, out, _ = run(["--config", cfg, "train", "--corpus", corpus, "--size", "2",
                            "--out", tmp_path / "m.json"], capsys)
        assert code == 0 and "bagging NB: 2 member(s)" in out

    @pytest.mark.parametrize("body", ['{"version": 2}', '{"colour": 1}', "[1]", "{"])
    def test_bad_config(self, body, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(body)
        assert run(["--config", cfg, "synth", "--n", "1"], capsys)[0] == 1

    def test_unknown_flag(self, capsys):
        assert run(["train", "--frobnicate"], capsys)[0] == 1


class TestGridSweepKappa:
    def test_grid_writes_csv(self, small, tmp_path, capsys):
        code, out, _ = run(["grid", "--corpus", small, "--split", "ratio", "--size", "2",
                            "--max-iters", "2", "--out", tmp_path / "g"], capsys)
        assert code == 0
        rows = (tmp_path / "g" / "grid.csv").read_text().splitlines()
        assert len(rows) == 1 + 39
        assert (tmp_path / "g" / "grid.txt").read_text().startswith("Approach")

    def test_grid_bad_feature_set(self, small, capsys):
        assert run(["grid", "--corpus", small, "--split", "ratio", "--features", "fq"],
                   capsys)[0] == 1

    def test_sweep_points(self, small, tmp_path, capsys):
        code, out, _ = run(["sweep", "--corpus", small, "--split", "ratio", "--approach",
                            "bagging", "--learner", "NB", "--sizes", "2..15",
                            "--out", tmp_path / "s.csv"], capsys)
        assert code == 0
        assert len((tmp_path / "s.csv").read_text().splitlines()) == 1 + 14
        assert "stable size" in out

    def test_sweep_bad_sizes(self, small, capsys):
        assert run(["sweep", "--corpus", small, "--split", "ratio", "--approach", "bagging",
                    "--sizes", "5..2"], capsys)[0] == 1

    def test_kappa_identical(self, tmp_path, capsys):
        a = tmp_path / "a.tsv"
        a.write_text("q1\tPER\nq2\tLOC\nq3\tNUM\n")
        code, out, _ = run(["kappa", a, a], capsys)
        assert code == 0 and out.strip() == "1.0"

    def test_kappa_malformed_line(self, tmp_path, capsys):
        a = tmp_path / "a.tsv"
        a.write_text("q1\tPER\n")
        assert run(["kappa", a], capsys)[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qclf.cli", "validate", "@sample"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("ok:")
