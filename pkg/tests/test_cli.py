"""CLI commands end to end in a temporary workspace."""

import pytest

from hypervd.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Generated dataset + config + one short training run, shared by tests."""
    root = tmp_path_factory.mktemp("cli")
    dataset = root / "ds"
    assert run(
        [
            "gen-synth", "--out", dataset, "--seed", 7, "--n-train", 12,
            "--n-test", 8, "--t-min", 10, "--t-max", 16, "--visual-dim", 8,
            "--audio-dim", 4, "--separation", 4.0,
        ]
    ) == 0
    config = root / "run.cfg"
    config.write_text(
        "[model]\n"
        "visual_dim = 8\naudio_dim = 4\nhidden_dim = 4\ndropout = 0.3\n\n"
        "[train]\nepochs = 4\nbatch_size = 4\nlr = 0.01\nseed = 7\n\n"
        "[data]\ntrain_manifest = ds/train.manifest\ntest_manifest = ds/test.manifest\n",
        encoding="utf-8",
    )
    checkpoint = root / "model.hvdm"
    history = root / "history.tsv"
    assert run(
        ["train", "--config", config, "--checkpoint", checkpoint, "--history", history]
    ) == 0
    return root


class TestPipeline:
    def test_artifacts_exist(self, workspace):
        assert (workspace / "model.hvdm").exists()
        assert (workspace / "history.tsv").exists()
        lines = (workspace / "history.tsv").read_text().strip().split("\n")
        assert len(lines) == 5  # header + 4 epochs

    def test_score_then_eval(self, workspace, capsys):
        scores = workspace / "scores"
        assert run(
            [
                "score", "--checkpoint", workspace / "model.hvdm",
                "--manifest", workspace / "ds" / "test.manifest",
                "--out-dir", scores,
            ]
        ) == 0
        assert len(list(scores.glob("*.txt"))) == 8
        assert run(
            [
                "eval", "--scores", scores,
                "--manifest", workspace / "ds" / "test.manifest",
                "--report", workspace / "report.txt",
                "--curves-dir", workspace / "curves",
            ]
        ) == 0
        out = capsys.readouterr().out
        assert "ap: " in out
        assert (workspace / "report.txt").exists()
        assert len(list((workspace / "curves").glob("*.csv"))) == 8

    def test_eval_perfect_scores_give_ap_one(self, workspace, capsys):
        from hypervd import data as data_io

        perfect = workspace / "perfect"
        perfect.mkdir(exist_ok=True)
        for bag in data_io.load_bags(workspace / "ds" / "test.manifest"):
            with open(perfect / f"{bag.video_id}.txt", "w") as fh:
                for v in bag.frame_labels:
                    fh.write(f"{float(v)!r}\n")
        assert run(
            ["eval", "--scores", perfect, "--manifest", workspace / "ds" / "test.manifest"]
        ) == 0
        first = capsys.readouterr().out.splitlines()[0]
        assert first == "ap: 1.0"

    def test_train_determinism_byte_identical(self, workspace, tmp_path):
        outputs = []
        for name in ("x", "y"):
            ck = tmp_path / f"{name}.hvdm"
            hist = tmp_path / f"{name}.tsv"
            assert run(
                ["train", "--config", workspace / "run.cfg", "--checkpoint", ck, "--history", hist]
            ) == 0
            outputs.append((ck.read_bytes(), hist.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_score_rerun_byte_identical(self, workspace, tmp_path):
        dirs = []
        for name in ("s1", "s2"):
            out = tmp_path / name
            assert run(
                [
                    "score", "--checkpoint", workspace / "model.hvdm",
                    "--manifest", workspace / "ds" / "test.manifest",
                    "--out-dir", out,
                ]
            ) == 0
            dirs.append(out)
        for path in sorted(dirs[0].glob("*.txt")):
            assert path.read_bytes() == (dirs[1] / path.name).read_bytes()

    def test_env_seed_changes_outcome(self, workspace, tmp_path, monkeypatch):
        ck1, ck2 = tmp_path / "a.hvdm", tmp_path / "b.hvdm"
        monkeypatch.setenv("HYPERVD_SEED", "21")
        run(["train", "--config", workspace / "run.cfg", "--checkpoint", ck1, "--history", tmp_path / "a.tsv"])
        monkeypatch.setenv("HYPERVD_SEED", "22")
        run(["train", "--config", workspace / "run.cfg", "--checkpoint", ck2, "--history", tmp_path / "b.tsv"])
        assert ck1.read_bytes() != ck2.read_bytes()


class TestGradcheck:
    def test_default_toy_passes(self, capsys):
        assert run(["gradcheck"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("PASS")


class TestAblate:
    def test_branch_axis_emits_three_rows(self, workspace, capsys):
        assert run(
            ["ablate", "--config", workspace / "run.cfg", "--axis", "branch", "--seeds", "0,1"]
        ) == 0
        lines = [
            line for line in capsys.readouterr().out.splitlines()
            if line and not line.startswith(("#", "variant"))
        ]
        assert len(lines) == 3
        names = [line.split("\t")[0] for line in lines]
        assert names == ["hfsg_only", "htrg_only", "both"]

    def test_fusion_axis_emits_five_rows(self, workspace, capsys):
        assert run(
            ["ablate", "--config", workspace / "run.cfg", "--axis", "fusion", "--seeds", "3"]
        ) == 0
        lines = [
            line for line in capsys.readouterr().out.splitlines()
            if line and not line.startswith(("#", "variant"))
        ]
        assert len(lines) == 5

    def test_geometry_axis_emits_two_rows(self, workspace, capsys):
        assert run(
            ["ablate", "--config", workspace / "run.cfg", "--axis", "geometry", "--seeds", "4"]
        ) == 0
        lines = [
            line for line in capsys.readouterr().out.splitlines()
            if line and not line.startswith(("#", "variant"))
        ]
        assert len(lines) == 2


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[model]\ntau = 2.0\n")
        assert run(["train", "--config", bad, "--checkpoint", tmp_path / "c", "--history", tmp_path / "h"]) == 2
        assert "hypervd:" in capsys.readouterr().err

    def test_data_error_is_3(self, tmp_path, workspace):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[model]\nvisual_dim = 8\naudio_dim = 4\n\n"
            "[data]\ntrain_manifest = missing.manifest\ntest_manifest = missing.manifest\n"
        )
        assert run(["train", "--config", cfg, "--checkpoint", tmp_path / "c", "--history", tmp_path / "h"]) == 3

    def test_missing_score_file_is_3(self, workspace, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run(
            ["eval", "--scores", empty, "--manifest", workspace / "ds" / "test.manifest"]
        ) == 3

    def test_help_lists_commands(self, capsys):
        with pytest.raises(SystemExit) as exit_info:
            run(["--help"])
        assert exit_info.value.code == 0
        out = capsys.readouterr().out
        for command in ("gen-synth", "train", "score", "eval", "ablate", "gradcheck"):
            assert command in out
