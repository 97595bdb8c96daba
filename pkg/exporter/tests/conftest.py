import pytest

from kpcacam_exporter import export_fixtures, export_model


@pytest.fixture(scope="session")
def toy_export(tmp_path_factory):
    """Toy model ONNX file plus a 12-image synthetic corpus."""
    root = tmp_path_factory.mktemp("toy_export")
    model_path = str(root / "toy.onnx")
    corpus_dir = str(root / "corpus")
    summary = export_model("toy", "last_conv", model_path)
    export_fixtures("toy", "last_conv", corpus_dir, n_images=12, seed=123)
    return {"model": model_path, "corpus": corpus_dir, "summary": summary}
