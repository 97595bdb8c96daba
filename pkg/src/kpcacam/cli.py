"""Command-line front end.

Subcommands: cam (write heatmaps), localize (loc1/loc5 report), road
(MoRF confidence-drop report), report (merge reports into a comparison
table), predict (dump logits; used for cross-checking exporters).

Reports are deterministic JSON: sorted keys, sorted image ids, a header
with the fully resolved configuration, seed and fixture-manifest hash.
Exit codes: 0 success, 1 partial per-image failures, 2 bad configuration.
"""

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import __version__
from .backend import (
    FixtureBackend,
    OnnxBackend,
    load_manifest,
    manifest_hash,
    softmax,
    topk,
)
from .cam import CamConfig, compute_cam
from .errors import ConfigError, KpcaCamError
from .kernels import KernelConfig
from .localize import (
    LocalizationRecord,
    best_iou,
    binarize,
    largest_component_box,
    localization_accuracy,
)
from .npyio import save_npy
from .road import MorfConfig, morf_confidence_drop
from .tensor import minmax_normalize

SCHEMA_VERSION = 1


class Run:
    """Resolved configuration shared by the per-image subcommands."""

    def __init__(self, fixtures, backend_spec, method, kernel, gamma, coef_r,
                 no_center, seed, jobs):
        self.fixtures = fixtures
        self.corpus = FixtureBackend(fixtures)
        self.backend_spec = backend_spec or f"fixtures:{fixtures}"
        kind, _, arg = self.backend_spec.partition(":")
        if kind == "fixtures":
            self.backend = FixtureBackend(arg or fixtures)
            self.live = False
        elif kind == "onnx":
            if not arg:
                raise ConfigError("--backend onnx:<path> requires a model path")
            self.backend = OnnxBackend.from_fixture_manifest(arg, fixtures)
            self.live = True
        else:
            raise ConfigError(f"unknown backend spec {self.backend_spec!r}")

        if method == "eigen":
            if kernel is not None:
                raise ConfigError("--kernel applies only to --method kpca")
            self.cam_method = "eigen_cam"
            self.kernel = None
        elif method == "kpca":
            if kernel is None:
                raise ConfigError("--method kpca requires --kernel")
            self.cam_method = "kpca_cam"
            self.kernel = KernelConfig(
                family=kernel, gamma=gamma, r=coef_r, center=not no_center
            )
        else:
            raise ConfigError(f"unknown method {method!r}")
        if method == "eigen" and gamma is not None:
            raise ConfigError("--gamma applies only to --method kpca")
        self.seed = seed
        self.jobs = max(1, jobs)
        self.method_label = self._label()

    def _label(self):
        if self.cam_method == "eigen_cam":
            return "eigen_cam"
        k = self.kernel
        label = f"kpca_cam[{k.family}"
        if k.family != "linear":
            label += f",gamma={k.gamma}"
        if k.family == "sigmoid":
            label += f",r={k.r}"
        if not k.center:
            label += ",uncentered"
        return label + "]"

    def header(self, command, extra):
        config = {
            "backend": self.backend_spec,
            "fixtures": self.fixtures,
            "method": self.cam_method,
            "method_label": self.method_label,
        }
        if self.kernel is not None:
            config["kernel"] = {
                "family": self.kernel.family,
                "gamma": self.kernel.gamma,
                "r": self.kernel.r,
                "center": self.kernel.center,
            }
        config.update(extra)
        return {
            "tool": "kpcacam",
            "version": __version__,
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": config,
            "seed": self.seed,
            "manifest_sha256": manifest_hash(self.fixtures),
        }

    def heatmap(self, image_id):
        """CAM at image resolution for one fixture image."""
        if self.live:
            act = self.backend.extract_activations(self.corpus.image(image_id))
        else:
            act = self.corpus.activations(image_id)
        _, h, w = self.corpus.input_shape
        cfg = CamConfig(self.cam_method, kernel=self.kernel, output_size=(h, w))
        return compute_cam(act, cfg)

    def logits(self, image_id):
        if self.live:
            return self.backend.predict(self.corpus.image(image_id))
        return self.corpus.logits(image_id)

    def map_images(self, func):
        """Apply func(image_id) over the corpus; returns sorted
        (image_id, result_or_exception) pairs."""
        ids = sorted(self.corpus.image_ids)

        def guarded(image_id):
            try:
                return image_id, func(image_id)
            except KpcaCamError as exc:
                return image_id, exc

        if self.jobs == 1:
            return [guarded(i) for i in ids]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(guarded, ids))


def _write_report(out_dir, name, payload):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _finish(results, out_dir, payload, name="report.json"):
    failures = sum(1 for _, r in results if isinstance(r, Exception))
    path = _write_report(out_dir, name, payload)
    click.echo(f"wrote {path}")
    if failures:
        click.echo(f"{failures}/{len(results)} images failed", err=True)
        sys.exit(1)


def _overlay_png(image, heatmap, path):
    from PIL import Image

    lo, hi = image.value_range
    span = (hi - lo) or 1.0
    img8 = np.clip((image.data - lo) / span * 255.0, 0, 255).astype(np.uint8)
    if img8.shape[0] == 1:
        rgb = np.repeat(img8, 3, axis=0)
    else:
        rgb = img8
    heat8 = (np.clip(heatmap, 0, 1) * 255.0).astype(np.uint8)
    blend = (0.5 * rgb + 0.5 * heat8[None, :, :]).astype(np.uint8)
    Image.fromarray(np.transpose(blend, (1, 2, 0)), "RGB").save(path)


run_options = [
    click.option("--fixtures", required=True, type=click.Path(exists=True, file_okay=False),
                 help="Fixture corpus directory (manifest.json plus per-image dumps)."),
    click.option("--backend", "backend_spec", default=None,
                 help="onnx:<model.onnx> or fixtures:<dir>; defaults to the fixture corpus."),
    click.option("--method", type=click.Choice(["eigen", "kpca"]), default="eigen",
                 show_default=True),
    click.option("--kernel", type=click.Choice(["rbf", "sigmoid", "linear"]), default=None),
    click.option("--gamma", type=float, default=None,
                 help="Kernel bandwidth/slope; defaults: rbf 0.001, sigmoid 0.1."),
    click.option("--coef-r", type=float, default=0.0, show_default=True,
                 help="Sigmoid kernel offset."),
    click.option("--no-center", is_flag=True, help="Skip kernel double-centering."),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--out", "out_dir", default="out", show_default=True,
                 type=click.Path(file_okay=False)),
    click.option("--jobs", type=int, default=1, show_default=True),
]


def with_run_options(func):
    for option in reversed(run_options):
        func = option(func)
    return func


def make_run(kwargs):
    try:
        return Run(
            kwargs.pop("fixtures"), kwargs.pop("backend_spec"),
            kwargs.pop("method"), kwargs.pop("kernel"), kwargs.pop("gamma"),
            kwargs.pop("coef_r"), kwargs.pop("no_center"), kwargs.pop("seed"),
            kwargs.pop("jobs"),
        )
    except KpcaCamError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@click.group()
@click.version_option(__version__)
def main():
    """Class activation maps from kernel PCA, plus their evaluation."""


@main.command()
@with_run_options
def cam(out_dir, **kwargs):
    """Write one heatmap NPY and PNG overlay per fixture image."""
    run = make_run(kwargs)
    os.makedirs(out_dir, exist_ok=True)

    def one(image_id):
        heat = run.heatmap(image_id)
        npy_path = os.path.join(out_dir, f"{image_id}.cam.npy")
        save_npy(heat, npy_path)
        png_path = os.path.join(out_dir, f"{image_id}.cam.png")
        _overlay_png(run.corpus.image(image_id), heat, png_path)
        click.echo(f"{image_id}: ok")
        return {"npy": os.path.basename(npy_path), "png": os.path.basename(png_path)}

    results = run.map_images(one)
    payload = {
        "header": run.header("cam", {}),
        "images": {
            i: (r if not isinstance(r, Exception) else {"error": str(r)})
            for i, r in results
        },
    }
    _finish(results, out_dir, payload)


@main.command()
@with_run_options
@click.option("--threshold-frac", type=float, default=0.15, show_default=True,
              help="Binarization threshold as a fraction of the heatmap maximum.")
@click.option("--iou-threshold", type=float, default=0.5, show_default=True)
def localize(out_dir, threshold_frac, iou_threshold, **kwargs):
    """Weakly-supervised localization: loc1/loc5 over the corpus."""
    run = make_run(kwargs)

    def one(image_id):
        gt_class, gt_boxes = run.corpus.ground_truth(image_id)
        heat = run.heatmap(image_id)
        mask = binarize(minmax_normalize(heat), threshold_frac)
        pred_box = largest_component_box(mask)
        iou_val = best_iou(pred_box, gt_boxes) if pred_box is not None else None
        logits = run.logits(image_id)
        top5 = topk(logits, min(5, run.corpus.num_classes))
        record = LocalizationRecord(
            image_id=image_id,
            gt_box=gt_boxes[0],
            gt_class=gt_class,
            pred_box=pred_box,
            iou=iou_val,
            top1_correct=top5[0] == gt_class,
            top5_correct=gt_class in top5,
        )
        click.echo(f"{image_id}: iou={iou_val if iou_val is not None else 'n/a'}")
        return record

    results = run.map_images(one)
    records = [r for _, r in results if isinstance(r, LocalizationRecord)]
    loc1, loc5 = (None, None)
    if records:
        loc1, loc5 = localization_accuracy(records, iou_threshold)
    payload = {
        "header": run.header("localize", {
            "threshold_frac": threshold_frac,
            "iou_threshold": iou_threshold,
        }),
        "records": {
            i: (_loc_row(r) if isinstance(r, LocalizationRecord) else {"error": str(r)})
            for i, r in results
        },
        "aggregate": {"loc1": loc1, "loc5": loc5},
    }
    _finish(results, out_dir, payload)


def _loc_row(r):
    return {
        "gt_class": r.gt_class,
        "gt_box": list(r.gt_box),
        "pred_box": list(r.pred_box) if r.pred_box else None,
        "iou": r.iou,
        "top1_correct": r.top1_correct,
        "top5_correct": r.top5_correct,
    }


@main.command()
@with_run_options
@click.option("--morf-fraction", type=float, default=0.25, show_default=True,
              help="Fraction of image pixels removed, most relevant first.")
@click.option("--noise-std-frac", type=float, default=0.01, show_default=True,
              help="Imputation noise std as a fraction of each channel's range.")
def road(out_dir, morf_fraction, noise_std_frac, **kwargs):
    """MoRF occlusion metric; requires a live (onnx) backend."""
    run = make_run(kwargs)
    if not run.live:
        click.echo("error: road needs --backend onnx:<model> (inference on "
                   "imputed images)", err=True)
        sys.exit(2)
    morf_cfg = MorfConfig(
        fraction=morf_fraction, noise_std_frac=noise_std_frac, seed=run.seed
    )

    def one(image_id):
        gt_class, _ = run.corpus.ground_truth(image_id)
        image = run.corpus.image(image_id)
        logits = run.logits(image_id)
        heat = run.heatmap(image_id)
        result = morf_confidence_drop(
            run.backend, image, heat, gt_class, morf_cfg, image_id=image_id
        )
        correct = topk(logits, 1)[0] == gt_class
        click.echo(f"{image_id}: delta={result.delta_pct:+.2f}pp")
        return result, correct

    results = run.map_images(one)
    ok = [(i, v) for i, v in results if not isinstance(v, Exception)]
    deltas = [r.delta_pct for _, (r, correct) in ok if correct]
    payload = {
        "header": run.header("road", {
            "morf_fraction": morf_fraction,
            "noise_std_frac": noise_std_frac,
            "solver_tol": morf_cfg.solver_tol,
        }),
        "records": {
            i: ({"error": str(v)} if isinstance(v, Exception) else {
                "class_index": v[0].class_index,
                "p_original": v[0].p_original,
                "p_masked": v[0].p_masked,
                "delta_pct": v[0].delta_pct,
                "top1_correct": v[1],
            })
            for i, v in results
        },
        "aggregate": {
            "mean_delta_pct": (sum(deltas) / len(deltas)) if deltas else None,
            "num_correct": len(deltas),
        },
    }
    _finish(results, out_dir, payload)


@main.command()
@click.argument("inputs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default="out", show_default=True,
              type=click.Path(file_okay=False))
def report(inputs, out_dir):
    """Merge localize/road reports into one comparison table."""
    rows = []
    manifests = set()
    for path in inputs:
        with open(path) as fh:
            data = json.load(fh)
        header = data.get("header", {})
        if header.get("schema_version") != SCHEMA_VERSION:
            click.echo(f"error: {path}: schema version mismatch", err=True)
            sys.exit(2)
        manifests.add(header.get("manifest_sha256"))
        if len(manifests) > 1:
            click.echo("error: input reports were built from different "
                       "fixture manifests", err=True)
            sys.exit(2)
        label = header["config"]["method_label"]
        agg = data.get("aggregate", {})
        if header.get("command") == "localize":
            rows.append((label, "loc1", agg.get("loc1")))
            rows.append((label, "loc5", agg.get("loc5")))
        elif header.get("command") == "road":
            rows.append((label, "road_mean_delta_pct", agg.get("mean_delta_pct")))
        else:
            click.echo(f"error: {path}: not a localize/road report", err=True)
            sys.exit(2)
    rows.sort(key=lambda r: (r[0], r[1]))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "manifest_sha256": next(iter(manifests)),
        "rows": [{"method": m, "metric": k, "value": v} for m, k, v in rows],
    }
    path = _write_report(out_dir, "comparison.json", payload)
    width = max(len(m) for m, _, _ in rows)
    lines = [
        f"{m:<{width}}  {k:<22}  {'n/a' if v is None else f'{v:.4f}'}"
        for m, k, v in rows
    ]
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "comparison.txt"), "w") as fh:
        fh.write(text)
    click.echo(text, nl=False)
    click.echo(f"wrote {path}")


@main.command()
@with_run_options
def predict(out_dir, **kwargs):
    """Dump backend logits per image (exporter cross-check utility)."""
    run = make_run(kwargs)
    os.makedirs(out_dir, exist_ok=True)

    def one(image_id):
        logits = run.logits(image_id)
        save_npy(logits, os.path.join(out_dir, f"{image_id}.logits.npy"))
        return {"npy": f"{image_id}.logits.npy"}

    results = run.map_images(one)
    payload = {
        "header": run.header("predict", {}),
        "images": {
            i: (r if not isinstance(r, Exception) else {"error": str(r)})
            for i, r in results
        },
    }
    _finish(results, out_dir, payload)


if __name__ == "__main__":
    main()
