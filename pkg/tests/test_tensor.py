import numpy as np
import pytest

from kpcacam.errors import InputError
from kpcacam.tensor import (
    BoundingBox,
    ImageTensor,
    as_activations,
    bilinear_resize,
    minmax_normalize,
)


class TestBilinearResize:
    def test_identity(self):
        arr = np.random.default_rng(0).normal(size=(5, 7))
        assert np.array_equal(bilinear_resize(arr, (5, 7)), arr)

    def test_constant_extension_from_1x1(self):
        out = bilinear_resize(np.array([[3.5]]), (4, 6))
        assert out.shape == (4, 6)
        assert np.all(out == 3.5)

    def test_hand_computed_2x2_to_3x3(self):
        out = bilinear_resize(np.array([[0.0, 1.0], [1.0, 2.0]]), (3, 3))
        expected = np.array([[0.0, 0.5, 1.0], [0.5, 1.0, 1.5], [1.0, 1.5, 2.0]])
        assert np.allclose(out, expected, atol=1e-15)

    def test_corner_exactness(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            h, w = rng.integers(2, 9, size=2)
            th, tw = rng.integers(2, 33, size=2)
            src = rng.normal(size=(h, w))
            out = bilinear_resize(src, (th, tw))
            assert out[0, 0] == src[0, 0]
            assert out[0, -1] == src[0, -1]
            assert out[-1, 0] == src[-1, 0]
            assert out[-1, -1] == src[-1, -1]

    def test_output_bounded_by_input_range(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            src = rng.normal(size=tuple(rng.integers(1, 10, size=2)))
            out = bilinear_resize(src, tuple(rng.integers(1, 40, size=2)))
            assert out.min() >= src.min() - 1e-12
            assert out.max() <= src.max() + 1e-12

    def test_bad_target(self):
        with pytest.raises(InputError):
            bilinear_resize(np.zeros((2, 2)), (0, 3))


class TestMinmaxNormalize:
    def test_basic(self):
        assert minmax_normalize(np.array([0.0, 5.0, 10.0])).tolist() == [0.0, 0.5, 1.0]

    def test_negative_span(self):
        assert minmax_normalize(np.array([-2.0, 0.0, 2.0])).tolist() == [0.0, 0.5, 1.0]

    def test_constant_map_collapses_to_zero(self):
        assert minmax_normalize(np.array([3.0, 3.0, 3.0])).tolist() == [0.0, 0.0, 0.0]

    def test_idempotent_on_normalized(self):
        rng = np.random.default_rng(3)
        x = minmax_normalize(rng.normal(size=(6, 6)))
        assert np.allclose(minmax_normalize(x), x, atol=1e-15)

    def test_affine_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            x = rng.normal(size=(5, 5))
            a = float(rng.uniform(0.1, 10.0))
            b = float(rng.uniform(-5.0, 5.0))
            assert np.allclose(
                minmax_normalize(a * x + b), minmax_normalize(x), atol=1e-12
            )


def test_bounding_box_validation():
    BoundingBox(0, 0, 2, 2).validate()
    with pytest.raises(InputError):
        BoundingBox(2, 0, 2, 2).validate()
    with pytest.raises(InputError):
        BoundingBox(-1, 0, 2, 2).validate()


def test_activation_validation():
    with pytest.raises(InputError):
        as_activations(np.zeros((2, 2)))
    with pytest.raises(InputError):
        as_activations(np.full((1, 2, 2), np.nan))
    assert as_activations(np.zeros((1, 2, 3))).shape == (1, 2, 3)


def test_image_tensor_validation():
    with pytest.raises(InputError):
        ImageTensor(np.zeros((2, 4, 4)))  # 2 channels is neither gray nor rgb
    with pytest.raises(InputError):
        ImageTensor(np.full((3, 2, 2), np.inf))
    t = ImageTensor(np.zeros((3, 4, 4)), value_range=(0.0, 255.0))
    assert t.shape == (3, 4, 4)
