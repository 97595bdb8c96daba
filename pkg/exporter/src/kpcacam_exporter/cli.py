"""Command-line entry points: export-model and export-fixtures."""

import json
import sys

import click

from .models import ExportError
from .corpus import export_fixtures
from .trace import export_model


@click.command(name="export-model")
@click.option("--model", "model_name", default="toy", show_default=True,
              help="Model to export (toy, vgg16).")
@click.option("--layer", "layer_name", default="last_conv", show_default=True,
              help="Activation layer declared as the second graph output.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Path of the ONNX file to write.")
def export_model_cmd(model_name, layer_name, out_path):
    """Export a model to ONNX with (logits, activations) outputs."""
    try:
        summary = export_model(model_name, layer_name, out_path)
    except ExportError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


@click.command(name="export-fixtures")
@click.option("--model", "model_name", default="toy", show_default=True)
@click.option("--layer", "layer_name", default="last_conv", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--image-dir", type=click.Path(exists=True),
              help="Folder of real images; omit to synthesize blob images.")
@click.option("--gt-file", type=click.Path(exists=True),
              help="Ground-truth JSON for --image-dir.")
@click.option("--n-images", default=12, show_default=True)
@click.option("--seed", default=123, show_default=True)
def export_fixtures_cmd(model_name, layer_name, out_dir, image_dir, gt_file,
                        n_images, seed):
    """Export a fixture corpus in the layout the kpcacam CLI consumes."""
    try:
        manifest = export_fixtures(
            model_name, layer_name, out_dir, image_dir=image_dir,
            gt_file=gt_file, n_images=n_images, seed=seed,
        )
    except ExportError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"exported {len(manifest['image_ids'])} fixtures to {out_dir}")
