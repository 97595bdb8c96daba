import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import toyfixtures  # noqa: E402


@pytest.fixture(scope="session")
def toy_model_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "toy.onnx"
    return str(toyfixtures.build_toy_model(path))


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory, toy_model_path):
    out = tmp_path_factory.mktemp("fixtures")
    return str(toyfixtures.build_corpus(str(out), toy_model_path))
