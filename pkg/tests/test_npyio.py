import numpy as np
import pytest

from kpcacam.errors import NpyDtypeError, NpyFormatError, NpyLayoutError
from kpcacam.npyio import load_npy, save_npy


def test_roundtrip_small(tmp_path):
    path = tmp_path / "a.npy"
    save_npy(np.array([[1.0, 2.0], [3.0, 4.0]]), path)
    out = load_npy(path)
    assert out.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_roundtrip_bitwise_random(tmp_path):
    rng = np.random.default_rng(0)
    for i, shape in enumerate([(1,), (7,), (3, 4, 5), (196, 196), (2, 1, 9)]):
        arr = rng.normal(size=shape)
        path = tmp_path / f"r{i}.npy"
        save_npy(arr, path)
        out = load_npy(path)
        assert out.shape == arr.shape
        assert out.tobytes() == arr.tobytes()


def test_single_element(tmp_path):
    path = tmp_path / "one.npy"
    save_npy(np.array([7.5]), path)
    assert load_npy(path).tolist() == [7.5]


def test_numpy_interop(tmp_path):
    # files we write are ordinary NPY files numpy can read, and vice versa
    arr = np.random.default_rng(1).normal(size=(4, 6))
    ours = tmp_path / "ours.npy"
    theirs = tmp_path / "theirs.npy"
    save_npy(arr, ours)
    assert np.array_equal(np.load(ours), arr)
    np.save(theirs, arr)
    assert np.array_equal(load_npy(theirs), arr)


def test_integers_widened(tmp_path):
    path = tmp_path / "ints.npy"
    np.save(path, np.array([[1, 2], [3, 4]], dtype=np.int32))
    out = load_npy(path)
    assert out.dtype == np.float64
    assert out.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_fortran_order_rejected(tmp_path):
    path = tmp_path / "f.npy"
    np.save(path, np.asfortranarray(np.arange(6.0).reshape(2, 3)))
    with pytest.raises(NpyLayoutError):
        load_npy(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.npy"
    path.write_bytes(b"NOTNPY" + b"\x00" * 64)
    with pytest.raises(NpyFormatError):
        load_npy(path)


def test_unsupported_dtype_rejected(tmp_path):
    path = tmp_path / "c.npy"
    np.save(path, np.array([1 + 2j, 3 + 4j]))
    with pytest.raises(NpyDtypeError):
        load_npy(path)


def test_rank_above_three_rejected(tmp_path):
    path = tmp_path / "r4.npy"
    np.save(path, np.zeros((2, 2, 2, 2)))
    with pytest.raises(NpyFormatError):
        load_npy(path)


def test_empty_path_write_error():
    with pytest.raises(NpyFormatError):
        save_npy(np.zeros(3), "")


def test_missing_file_read_error(tmp_path):
    with pytest.raises(NpyFormatError):
        load_npy(tmp_path / "nope.npy")
