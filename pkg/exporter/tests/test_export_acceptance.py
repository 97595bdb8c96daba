"""Round-trip release criterion: an exported corpus must be consumable by
the installed ``kpcacam`` CLI without modification, and both runtimes
must agree on the logits.

The exporter talks to the toolkit only through files and the CLI, so
these tests shell out instead of importing it.
"""

import json
import os
import subprocess

import numpy as np


def run_kpcacam(*args):
    return subprocess.run(["kpcacam", *args], capture_output=True, text=True)


def test_exporter_roundtrip(toy_export, tmp_path):
    corpus = toy_export["corpus"]
    model = toy_export["model"]

    # manifest validation: a cam run over the fixture corpus must succeed
    cam_out = str(tmp_path / "cam")
    result = run_kpcacam("cam", "--fixtures", corpus, "--method", "eigen",
                         "--out", cam_out)
    assert result.returncode == 0, result.stderr
    image_ids = json.load(open(os.path.join(corpus, "manifest.json")))["image_ids"]
    assert len(os.listdir(cam_out)) >= len(image_ids)

    # cross-runtime check: toolkit ONNX executor vs exporter forward pass
    pred_out = str(tmp_path / "pred")
    result = run_kpcacam("predict", "--fixtures", corpus,
                         "--backend", f"onnx:{model}", "--out", pred_out)
    assert result.returncode == 0, result.stderr
    worst = 0.0
    for image_id in image_ids:
        ours = np.load(os.path.join(corpus, image_id, "logits.npy"))
        theirs = np.load(os.path.join(pred_out, f"{image_id}.logits.npy"))
        worst = max(worst, float(np.max(np.abs(ours - theirs))))
    assert worst <= 1e-4
    print(f"PASS exporter round-trip: corpus accepted by the toolkit CLI, "
          f"max logit deviation {worst:.2e} <= 1e-4")
