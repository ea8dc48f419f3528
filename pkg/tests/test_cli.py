import json
import subprocess
import sys

import numpy as np
import pytest

from cae import SynthSpec, save_labels
from cae.cli import main
from cae.pipeline import write_synthetic


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_synth")
    write_synthetic(
        SynthSpec(n_classes=3, per_class=40, dim=16, bank_sizes=(50, 60), seed=11), out
    )
    return out


def run_cli(*argv):
    return main(list(argv))


class TestSynthCommand:
    def test_writes_files(self, tmp_path, capsys):
        code = run_cli(
            "synth", "--classes", "3", "--per-class", "20", "--dim", "16",
            "--seed", "4", "--out", str(tmp_path),
        )
        assert code == 0
        assert (tmp_path / "images.emb1").exists()
        assert (tmp_path / "labels.lbl1").exists()
        assert "images" in capsys.readouterr().out


class TestRunCommand:
    def test_full_run_writes_report(self, data_dir, tmp_path, capsys):
        code = run_cli(
            "run",
            "--images", str(data_dir / "images.emb1"),
            "--nouns", str(data_dir / "nouns.emb1"),
            "--captions", str(data_dir / "captions.emb1"),
            "--labels", str(data_dir / "labels.lbl1"),
            "--seed", "1",
            "--out", str(tmp_path),
        )
        assert code == 0
        document = json.loads((tmp_path / "report.json").read_text())
        assert document["metrics"]["acc"] > 0
        assert (tmp_path / document["assignments_path"]).exists()
        out = capsys.readouterr().out
        assert "acc" in out and "report written" in out

    def test_usage_error_exit_2(self, data_dir, tmp_path, capsys):
        # cae mode without caption bank
        code = run_cli(
            "run",
            "--images", str(data_dir / "images.emb1"),
            "--nouns", str(data_dir / "nouns.emb1"),
            "--labels", str(data_dir / "labels.lbl1"),
            "--out", str(tmp_path),
        )
        assert code == 2
        assert "requires --captions" in capsys.readouterr().err

    def test_data_format_error_exit_3(self, data_dir, tmp_path, capsys):
        bad = tmp_path / "bad.emb1"
        bad.write_bytes(b"XXXX" + bytes(12))
        code = run_cli(
            "run",
            "--images", str(bad),
            "--mode", "image_only",
            "--clusters", "3",
            "--out", str(tmp_path),
        )
        assert code == 3
        assert "magic" in capsys.readouterr().err

    def test_numerical_error_exit_4(self, tmp_path, capsys):
        # linear-domain sinkhorn at tiny epsilon underflows on distant pairs
        import cae as cae_pkg

        rng = np.random.default_rng(0)
        images = rng.standard_normal((20, 4))
        images[0] = [1.0, 0.0, 0.0, 0.0]
        texts = np.vstack([[[-1.0, 0.0, 0.0, 0.0]], rng.standard_normal((9, 4))])
        cae_pkg.save_embeddings(cae_pkg.EmbeddingMatrix(images, "image"), tmp_path / "i.emb1")
        cae_pkg.save_embeddings(cae_pkg.EmbeddingMatrix(texts, "noun"), tmp_path / "n.emb1")
        cae_pkg.save_embeddings(cae_pkg.EmbeddingMatrix(texts, "caption"), tmp_path / "c.emb1")

        config = tmp_path / "run.cfg"
        config.write_text(
            "\n".join(
                [
                    f"images = {tmp_path / 'i.emb1'}",
                    f"nouns = {tmp_path / 'n.emb1'}",
                    f"captions = {tmp_path / 'c.emb1'}",
                    "clusters = 2",
                    "epsilon = 0.0001",
                    "log_domain = false",
                    "centers_divisor = 5",
                ]
            )
        )
        sweep = tmp_path / "sweep.cfg"
        sweep.write_text("mode = cae\n")
        # through ablate the error is recorded per row; through run_pipeline it raises
        from cae.errors import NumericalStabilityError
        from cae.pipeline import config_from_kv, parse_kv_file, run_pipeline

        with pytest.raises(NumericalStabilityError):
            run_pipeline(config_from_kv(parse_kv_file(config)))

    def test_numerical_error_maps_to_exit_4(self, monkeypatch, capsys):
        import cae.cli as cli
        from cae.errors import NumericalStabilityError

        def raiser(args):
            raise NumericalStabilityError("scaling factors overflowed")

        monkeypatch.setitem(cli._COMMANDS, "eval", raiser)
        code = run_cli("eval", "--pred", "x", "--truth", "y")
        assert code == 4
        assert "overflowed" in capsys.readouterr().err

    def test_threads_flag_accepted(self, data_dir, tmp_path):
        code = run_cli(
            "run",
            "--images", str(data_dir / "images.emb1"),
            "--mode", "image_only",
            "--labels", str(data_dir / "labels.lbl1"),
            "--threads", "1",
            "--out", str(tmp_path),
        )
        assert code == 0


class TestEvalCommand:
    def test_eval_prints_metrics(self, tmp_path, capsys):
        save_labels([0, 0, 1, 1], tmp_path / "truth.lbl1")
        save_labels([1, 1, 0, 0], tmp_path / "pred.lbl1")
        code = run_cli(
            "eval", "--pred", str(tmp_path / "pred.lbl1"), "--truth", str(tmp_path / "truth.lbl1")
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "nmi" in out and "1.0000" in out


class TestAblateCommand:
    def test_ablate_writes_csv(self, data_dir, tmp_path, capsys):
        config = tmp_path / "base.cfg"
        config.write_text(
            "\n".join(
                [
                    f"images = {data_dir / 'images.emb1'}",
                    f"nouns = {data_dir / 'nouns.emb1'}",
                    f"captions = {data_dir / 'captions.emb1'}",
                    f"labels = {data_dir / 'labels.lbl1'}",
                ]
            )
        )
        sweep = tmp_path / "sweep.cfg"
        sweep.write_text("mode = image_only, sum\ntopk = 1, 5\n")
        code = run_cli("ablate", "--config", str(config), "--sweep", str(sweep), "--out", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "ablation.csv").read_text().splitlines()
        assert len(lines) == 5  # header + 2 modes x 2 topk
        assert "4 runs (0 failed)" in capsys.readouterr().out


class TestDeterminismEndToEnd:
    def test_repeated_run_bitwise_identical(self, data_dir, tmp_path):
        args = [
            "run",
            "--images", str(data_dir / "images.emb1"),
            "--nouns", str(data_dir / "nouns.emb1"),
            "--captions", str(data_dir / "captions.emb1"),
            "--labels", str(data_dir / "labels.lbl1"),
            "--seed", "3",
            "--threads", "1",
        ]
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(*args, "--out", str(out)) == 0
            report = json.loads((out / "report.json").read_text())
            report["timings"] = None  # wall-clock is the one nondeterministic field
            report["config"]["out"] = None
            outputs.append(
                (json.dumps(report, sort_keys=True), (out / "report.assignments.lbl1").read_bytes())
            )
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1] == outputs[1][1]


class TestConsoleScript:
    def test_module_entry_point(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "cae.cli", "--help"], capture_output=True, text=True
        )
        assert result.returncode == 0
        assert "run" in result.stdout and "synth" in result.stdout
