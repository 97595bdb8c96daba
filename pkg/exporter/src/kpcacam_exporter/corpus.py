"""Fixture corpus export: synthetic blob images (or a user image folder)
forwarded through a model, dumped in the layout the kpcacam CLI consumes:

    <out>/manifest.json
    <out>/<image_id>/{image.npy, activations.npy, logits.npy, gt.json}
"""

import json
import os

import numpy as np
import torch

from .models import TOY_CLASS_COLORS, ExportError, build_model


def blob_image(rng, class_index, input_shape):
    """Colored rectangle on a faint-noise background; returns (image, box)."""
    _, h, w = input_shape
    img = 0.02 * rng.random(input_shape)
    bh = int(rng.integers(8, min(17, h + 1)))
    bw = int(rng.integers(8, min(17, w + 1)))
    y0 = int(rng.integers(0, h - bh + 1))
    x0 = int(rng.integers(0, w - bw + 1))
    color = TOY_CLASS_COLORS[class_index % len(TOY_CLASS_COLORS)]
    img[:, y0:y0 + bh, x0:x0 + bw] = color[:, None, None]
    return img, (x0, y0, x0 + bw, y0 + bh)


def _forward(model, plan, layer_name, image):
    """One deterministic forward pass; returns (logits, activations)."""
    x = torch.from_numpy(image[None]).float()
    act = None
    with torch.no_grad():
        for name, module in plan:
            x = module(x)
            if name == layer_name:
                act = x.detach().numpy()[0].astype(np.float64)
    return x.detach().numpy()[0].astype(np.float64), act


def _load_image_dir(image_dir, gt_file, input_shape):
    from PIL import Image

    with open(gt_file) as fh:
        gt = json.load(fh)
    records = []
    for image_id in sorted(gt):
        path = os.path.join(image_dir, gt[image_id]["file"])
        try:
            with Image.open(path) as im:
                im = im.convert("RGB").resize(input_shape[1:][::-1])
                img = np.asarray(im, dtype=np.float64).transpose(2, 0, 1) / 255.0
        except OSError as exc:
            raise ExportError(f"cannot decode image {path}: {exc}") from exc
        records.append((image_id, img, int(gt[image_id]["class_index"]),
                        [tuple(b) for b in gt[image_id]["boxes"]]))
    return records, f"RGB, resized to {input_shape[1:]}, scaled to [0, 1]"


def _synthesize(input_shape, n_images, seed, num_classes):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_images):
        image_id = f"img{i:03d}"
        class_index = i % num_classes
        img, box = blob_image(rng, class_index, input_shape)
        records.append((image_id, img, class_index, [box]))
    return records, "synthetic blob images, already in [0, 1]"


def export_fixtures(model_name, layer_name, out_dir, *, image_dir=None,
                    gt_file=None, n_images=12, seed=123):
    """Export a complete corpus; aborts before writing on any shape error."""
    model, input_shape, num_classes, plan = build_model(model_name)
    names = [n for n, _ in plan]
    if layer_name not in names:
        raise ExportError(
            f"unknown layer {layer_name!r} in model {model_name!r}; "
            f"candidates: {names}"
        )
    if image_dir is not None:
        if gt_file is None:
            raise ExportError("an image directory requires a ground-truth file")
        records, preprocessing = _load_image_dir(image_dir, gt_file, input_shape)
    else:
        records, preprocessing = _synthesize(input_shape, n_images, seed,
                                             num_classes)
    if not records:
        raise ExportError("corpus would be empty")

    # compute and validate everything before the first write: a failed
    # export must not leave a partial corpus behind
    dumps = []
    for image_id, img, class_index, boxes in records:
        if img.shape != tuple(input_shape):
            raise ExportError(
                f"{image_id}: image shape {img.shape} != input {input_shape}"
            )
        if not 0 <= class_index < num_classes:
            raise ExportError(f"{image_id}: class index {class_index} out of range")
        for x0, y0, x1, y1 in boxes:
            if not (0 <= x0 < x1 <= input_shape[2]
                    and 0 <= y0 < y1 <= input_shape[1]):
                raise ExportError(f"{image_id}: box {(x0, y0, x1, y1)} out of bounds")
        logits, act = _forward(model, plan, layer_name, img)
        logits2, act2 = _forward(model, plan, layer_name, img)
        if not (np.array_equal(logits, logits2) and np.array_equal(act, act2)):
            raise ExportError(f"{image_id}: forward pass is not deterministic")
        if logits.shape != (num_classes,):
            raise ExportError(
                f"{image_id}: logits shape {logits.shape} != ({num_classes},)"
            )
        dumps.append((image_id, img, class_index, boxes, logits, act))

    manifest = {
        "model": model_name,
        "image_ids": [d[0] for d in dumps],
        "num_classes": num_classes,
        "input_shape": list(input_shape),
        "activation_layer_name": layer_name,
        "value_range": [0.0, 1.0],
        "preprocessing": preprocessing,
    }
    os.makedirs(out_dir, exist_ok=True)
    for image_id, img, class_index, boxes, logits, act in dumps:
        record_dir = os.path.join(out_dir, image_id)
        os.makedirs(record_dir, exist_ok=True)
        np.save(os.path.join(record_dir, "image.npy"), img)
        np.save(os.path.join(record_dir, "activations.npy"), act)
        np.save(os.path.join(record_dir, "logits.npy"), logits)
        with open(os.path.join(record_dir, "gt.json"), "w") as fh:
            json.dump({
                "image_id": image_id,
                "class_index": class_index,
                "boxes": [list(b) for b in boxes],
            }, fh, indent=2)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest
