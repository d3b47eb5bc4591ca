import math

import numpy as np
import pytest

from helssvr.kernels import GramMatrix, KernelSpec, gram_matrix, kernel_eval, kernel_row


class TestKernelEval:
    def test_rbf_zero_distance(self):
        spec = KernelSpec("rbf", sigma=1.0)
        assert kernel_eval(spec, [1.0, 2.0], [1.0, 2.0]) == 1.0

    def test_rbf_known_value(self):
        spec = KernelSpec("rbf", sigma=2.0)
        # squared distance 4, sigma^2 = 4 -> e^{-1}
        assert kernel_eval(spec, [0.0, 0.0], [2.0, 0.0]) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_linear_dot_product(self):
        spec = KernelSpec("linear")
        assert kernel_eval(spec, [1.0, 2.0], [3.0, 4.0]) == 11.0

    def test_dimension_mismatch(self):
        spec = KernelSpec("rbf", sigma=1.0)
        with pytest.raises(ValueError):
            kernel_eval(spec, [1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            kernel_row(spec, [1.0, 2.0, 3.0], np.zeros((4, 2)))

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            KernelSpec("rbf")
        with pytest.raises(ValueError):
            KernelSpec("rbf", sigma=0.0)
        with pytest.raises(ValueError):
            KernelSpec("rbf", sigma=-1.0)
        with pytest.raises(ValueError):
            KernelSpec("linear", sigma=1.0)
        with pytest.raises(ValueError):
            KernelSpec("poly")


class TestGram:
    def test_diagonal_is_one_for_rbf(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(17, 3))
        g = gram_matrix(KernelSpec("rbf", sigma=0.7), X)
        assert np.array_equal(np.diag(g.values), np.ones(17))

    def test_duplicate_rows_give_unit_entry(self):
        X = np.array([[0.5, -1.0], [2.0, 2.0], [0.5, -1.0]])
        g = gram_matrix(KernelSpec("rbf", sigma=1.0), X)
        assert g.values[0, 2] == 1.0
        assert g.values[2, 0] == 1.0

    def test_single_row(self):
        g = gram_matrix(KernelSpec("rbf", sigma=1.0), np.array([[1.0, 2.0, 3.0]]))
        assert g.values.shape == (1, 1)
        assert g.values[0, 0] == 1.0
        assert g.n == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gram_matrix(KernelSpec("rbf", sigma=1.0), np.zeros((0, 3)))

    def test_symmetry_and_range_randomized(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = int(rng.integers(2, 25))
            m = int(rng.integers(1, 6))
            sigma = float(rng.uniform(0.2, 5.0))
            X = rng.normal(size=(n, m))
            g = gram_matrix(KernelSpec("rbf", sigma=sigma), X).values
            assert np.array_equal(g, g.T)
            assert np.all(g > 0.0)
            assert np.all(g <= 1.0)

    def test_rows_match_kernel_row_bitwise(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(12, 4))
        for spec in (KernelSpec("rbf", sigma=0.9), KernelSpec("linear")):
            g = gram_matrix(spec, X).values
            for i in range(12):
                assert np.array_equal(g[i], kernel_row(spec, X[i], X))

    def test_rbf_gram_positive_semidefinite(self):
        rng = np.random.default_rng(7)
        for trial in range(5):
            X = rng.normal(size=(20, 3))
            sigma = float(rng.uniform(0.3, 3.0))
            g = gram_matrix(KernelSpec("rbf", sigma=sigma), X).values
            eigs = np.linalg.eigvalsh(g)
            assert eigs.min() >= -1e-8 * 20

    def test_large_sigma_flattens_kernel(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(-1, 1, size=(10, 2))
        row = kernel_row(KernelSpec("rbf", sigma=1e6), X[0], X)
        assert np.all(np.abs(row - 1.0) < 1e-6)

    def test_gram_matrix_type(self):
        g = gram_matrix(KernelSpec("linear"), np.eye(3))
        assert isinstance(g, GramMatrix)
        assert np.array_equal(g.values, np.eye(3))
