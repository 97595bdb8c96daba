import numpy as np
import pytest

from kpcacam import _core_py, _native
from kpcacam.eigen import dominant_of_basis, full_symmetric_eig, sign_correct, top_eigenpair
from kpcacam.errors import InputError


def random_symmetric(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) * scale
    return 0.5 * (A + A.T)


def spectral_gap_ok(K, ratio=0.95):
    """Power iteration contracts by |l2/l1| per step; demand a real gap."""
    w = np.sort(np.abs(np.linalg.eigvalsh(K)))[::-1]
    return len(w) < 2 or w[0] == 0 or (w[1] / w[0]) <= ratio


class TestTopEigenpair:
    def test_diagonal(self):
        pair = top_eigenpair(np.diag([5.0, 2.0, 1.0]))
        assert pair.value == pytest.approx(5.0, abs=1e-10)
        assert np.allclose(pair.vector, [1.0, 0.0, 0.0], atol=1e-8)

    def test_2x2(self):
        pair = top_eigenpair(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert pair.value == pytest.approx(3.0, abs=1e-10)
        assert np.allclose(pair.vector, np.full(2, 1 / np.sqrt(2)), atol=1e-9)

    def test_identity_residual_contract(self):
        pair = top_eigenpair(np.eye(3))
        resid = np.linalg.norm(np.eye(3) @ pair.vector - pair.value * pair.vector)
        assert resid <= 1e-8 * np.linalg.norm(np.eye(3))
        assert np.linalg.norm(pair.vector) == pytest.approx(1.0, abs=1e-9)

    def test_matches_jacobi_oracle(self):
        rng = np.random.default_rng(10)
        checked = 0
        while checked < 60:
            K = random_symmetric(rng, int(rng.integers(2, 25)))
            if not spectral_gap_ok(K):
                continue
            checked += 1
            pair = top_eigenpair(K)
            oracle = dominant_of_basis(full_symmetric_eig(K))
            fro = np.linalg.norm(K)
            assert abs(pair.value - oracle.value) <= 1e-8 * fro
            assert abs(pair.vector @ oracle.vector) >= 1 - 1e-8

    def test_dominant_by_magnitude(self):
        # most-negative eigenvalue dominates the largest positive one
        K = np.diag([-7.0, 3.0, 1.0])
        pair = top_eigenpair(K)
        assert pair.value == pytest.approx(-7.0, abs=1e-9)

    def test_shift_invariance_of_vector(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            F = rng.normal(size=(8, 8))
            K = F @ F.T  # PSD
            if not (spectral_gap_ok(K) and spectral_gap_ok(K + 2.5 * np.eye(8))):
                continue
            v = top_eigenpair(K).vector
            v_shift = top_eigenpair(K + 2.5 * np.eye(8)).vector
            assert abs(v @ v_shift) >= 1 - 1e-8

    def test_orthogonal_start_recovered(self):
        # all-ones start is an exact eigenvector of the non-dominant value
        K = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigvals 3 (1,1)/sqrt2, -1 (1,-1)/sqrt2
        pair = top_eigenpair(K)
        assert pair.value == pytest.approx(3.0, abs=1e-9)
        # and the adversarial flip: dominant is orthogonal to all-ones
        K2 = np.array([[-1.0, 2.0], [2.0, -1.0]])  # eigvals 1 (ones), -3 (1,-1)
        pair2 = top_eigenpair(K2)
        assert pair2.value == pytest.approx(-3.0, abs=1e-9)

    def test_asymmetric_rejected(self):
        with pytest.raises(InputError):
            top_eigenpair(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_size_one(self):
        pair = top_eigenpair(np.array([[4.5]]))
        assert pair.value == 4.5 and pair.vector.tolist() == [1.0]


class TestFullSymmetricEig:
    def test_diagonal_sorted_descending(self):
        basis = full_symmetric_eig(np.diag([1.0, 4.0, 9.0]))
        assert basis.values.tolist() == [9.0, 4.0, 1.0]
        assert np.allclose(np.abs(basis.vectors), np.eye(3)[:, [2, 1, 0]], atol=1e-12)

    def test_rank_one(self):
        v = np.array([0.6, 0.0, 0.8])
        basis = full_symmetric_eig(np.outer(v, v))
        assert basis.values[0] == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(basis.values[1:], 0.0, atol=1e-12)
        assert abs(basis.vectors[:, 0] @ v) == pytest.approx(1.0, abs=1e-12)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            K = random_symmetric(rng, 6, scale=3.0)
            basis = full_symmetric_eig(K)
            recon = basis.vectors @ np.diag(basis.values) @ basis.vectors.T
            fro = np.linalg.norm(K)
            assert np.linalg.norm(K - recon) <= 1e-10 * max(fro, 1e-30)
            assert np.linalg.norm(basis.vectors.T @ basis.vectors - np.eye(6)) <= 1e-8

    def test_oracle_size_cap(self):
        with pytest.raises(InputError):
            full_symmetric_eig(np.eye(1025))


def test_sign_correct_rules():
    assert sign_correct(np.array([-3.0, 1.0])).tolist() == [3.0, -1.0]
    assert sign_correct(np.array([3.0, -1.0])).tolist() == [3.0, -1.0]
    # tie -> lowest index decides
    assert sign_correct(np.array([-2.0, 2.0])).tolist() == [2.0, -2.0]
    assert sign_correct(np.zeros(3)).tolist() == [0.0, 0.0, 0.0]


@pytest.mark.skipif(not _native.HAVE_NATIVE, reason="extension not built")
def test_compiled_and_pure_jacobi_agree():
    rng = np.random.default_rng(13)
    K = random_symmetric(rng, 12)
    A1, V1 = K.copy(), np.eye(12)
    A2, V2 = K.copy(), np.eye(12)
    tol = 1e-13 * np.linalg.norm(K)
    s1 = _native.core.jacobi_rotate_inplace(A1, V1, tol, 60)
    s2 = _core_py.jacobi_rotate_inplace(A2, V2, tol, 60)
    assert s1 == s2
    assert np.allclose(A1, A2, atol=1e-12)
    assert np.allclose(V1, V2, atol=1e-12)
