import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from kpcacam.cli import main
from kpcacam.npyio import load_npy


@pytest.fixture
def runner():
    return CliRunner()


def read_report(out_dir, name="report.json"):
    with open(os.path.join(out_dir, name)) as fh:
        return json.load(fh)


class TestCam:
    def test_writes_npy_and_png_per_image(self, runner, toy_corpus, tmp_path):
        out = str(tmp_path / "cam")
        result = runner.invoke(main, [
            "cam", "--fixtures", toy_corpus, "--method", "eigen", "--out", out,
        ])
        assert result.exit_code == 0, result.output
        npys = [f for f in os.listdir(out) if f.endswith(".cam.npy")]
        pngs = [f for f in os.listdir(out) if f.endswith(".cam.png")]
        assert len(npys) == len(pngs) == 12
        heat = load_npy(os.path.join(out, npys[0]))
        assert heat.shape == (32, 32)
        assert heat.min() >= 0.0 and heat.max() <= 1.0

    def test_kpca_without_kernel_is_config_error(self, runner, toy_corpus, tmp_path):
        result = runner.invoke(main, [
            "cam", "--fixtures", toy_corpus, "--method", "kpca",
            "--out", str(tmp_path / "x"),
        ])
        assert result.exit_code == 2

    def test_kernel_params_echoed_in_header(self, runner, toy_corpus, tmp_path):
        out = str(tmp_path / "cam")
        result = runner.invoke(main, [
            "cam", "--fixtures", toy_corpus, "--method", "kpca",
            "--kernel", "sigmoid", "--gamma", "0.1", "--out", out,
        ])
        assert result.exit_code == 0, result.output
        header = read_report(out)["header"]
        assert header["config"]["kernel"] == {
            "family": "sigmoid", "gamma": 0.1, "r": 0.0, "center": True,
        }
        assert header["manifest_sha256"]
        assert header["version"]


class TestLocalize:
    def test_report_contents(self, runner, toy_corpus, tmp_path):
        out = str(tmp_path / "loc")
        result = runner.invoke(main, [
            "localize", "--fixtures", toy_corpus, "--method", "eigen", "--out", out,
        ])
        assert result.exit_code == 0, result.output
        report = read_report(out)
        assert report["header"]["config"]["threshold_frac"] == 0.15
        assert report["header"]["config"]["iou_threshold"] == 0.5
        assert len(report["records"]) == 12
        row = report["records"]["img000"]
        assert set(row) == {"gt_class", "gt_box", "pred_box", "iou",
                            "top1_correct", "top5_correct"}
        assert report["aggregate"]["loc5"] is not None

    def test_deterministic_bytes(self, runner, toy_corpus, tmp_path):
        outs = []
        for sub in ("a", "b"):
            out = str(tmp_path / sub)
            result = runner.invoke(main, [
                "localize", "--fixtures", toy_corpus, "--method", "kpca",
                "--kernel", "rbf", "--out", out, "--jobs", "2",
            ])
            assert result.exit_code == 0, result.output
            with open(os.path.join(out, "report.json"), "rb") as fh:
                outs.append(fh.read())
        assert outs[0] == outs[1]


class TestRoad:
    def test_requires_live_backend(self, runner, toy_corpus, tmp_path):
        result = runner.invoke(main, [
            "road", "--fixtures", toy_corpus, "--out", str(tmp_path / "r"),
        ])
        assert result.exit_code == 2

    def test_report_and_determinism(self, runner, toy_corpus, toy_model_path, tmp_path):
        payloads = []
        for sub in ("a", "b"):
            out = str(tmp_path / sub)
            result = runner.invoke(main, [
                "road", "--fixtures", toy_corpus,
                "--backend", f"onnx:{toy_model_path}",
                "--method", "eigen", "--seed", "7", "--out", out,
            ])
            assert result.exit_code == 0, result.output
            with open(os.path.join(out, "report.json"), "rb") as fh:
                payloads.append(fh.read())
        assert payloads[0] == payloads[1]
        report = json.loads(payloads[0])
        assert report["header"]["config"]["morf_fraction"] == 0.25
        assert report["header"]["config"]["noise_std_frac"] == 0.01
        assert report["header"]["seed"] == 7
        assert report["aggregate"]["num_correct"] == 12
        row = report["records"]["img003"]
        assert -100.0 <= row["delta_pct"] <= 100.0


class TestReport:
    def _make_reports(self, runner, toy_corpus, toy_model_path, tmp_path):
        loc = str(tmp_path / "loc")
        road = str(tmp_path / "road")
        assert runner.invoke(main, [
            "localize", "--fixtures", toy_corpus, "--method", "eigen", "--out", loc,
        ]).exit_code == 0
        assert runner.invoke(main, [
            "road", "--fixtures", toy_corpus,
            "--backend", f"onnx:{toy_model_path}", "--method", "kpca",
            "--kernel", "sigmoid", "--out", road,
        ]).exit_code == 0
        return os.path.join(loc, "report.json"), os.path.join(road, "report.json")

    def test_merge(self, runner, toy_corpus, toy_model_path, tmp_path):
        loc, road = self._make_reports(runner, toy_corpus, toy_model_path, tmp_path)
        out = str(tmp_path / "cmp")
        result = runner.invoke(main, ["report", loc, road, "--out", out])
        assert result.exit_code == 0, result.output
        merged = read_report(out, "comparison.json")
        metrics = {(r["method"], r["metric"]) for r in merged["rows"]}
        assert ("eigen_cam", "loc1") in metrics
        assert any(m == "road_mean_delta_pct" for _, m in metrics)
        assert os.path.exists(os.path.join(out, "comparison.txt"))

    def test_schema_mismatch_rejected(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"header": {"schema_version": 99}}))
        result = runner.invoke(main, ["report", str(bad), "--out", str(tmp_path)])
        assert result.exit_code == 2

    def test_conflicting_manifests_rejected(self, runner, toy_corpus,
                                            toy_model_path, tmp_path):
        loc, _ = self._make_reports(runner, toy_corpus, toy_model_path, tmp_path)
        with open(loc) as fh:
            other = json.load(fh)
        other["header"]["manifest_sha256"] = "deadbeef"
        forged = tmp_path / "forged.json"
        forged.write_text(json.dumps(other))
        result = runner.invoke(main, [
            "report", loc, str(forged), "--out", str(tmp_path / "c"),
        ])
        assert result.exit_code == 2


class TestPredict:
    def test_logits_match_fixtures_bitwise(self, runner, toy_corpus,
                                           toy_model_path, tmp_path):
        out = str(tmp_path / "pred")
        result = runner.invoke(main, [
            "predict", "--fixtures", toy_corpus,
            "--backend", f"onnx:{toy_model_path}", "--out", out,
        ])
        assert result.exit_code == 0, result.output
        stored = load_npy(os.path.join(toy_corpus, "img005", "logits.npy"))
        dumped = load_npy(os.path.join(out, "img005.logits.npy"))
        assert np.array_equal(stored, dumped)
