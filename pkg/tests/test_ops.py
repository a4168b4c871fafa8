"""Layer primitives against their brute-force references."""

import math

import numpy as np
import pytest

from mazelens.errors import ShapeMismatchError
from mazelens.nn import ops

from oracles import (
    conv2d_oracle,
    dense_oracle,
    flatten_oracle,
    maxpool_oracle,
    softmax_oracle,
)


class TestConv2d:
    def test_identity_kernel_reproduces_input(self, rng):
        x = rng.uniform(-1, 1, (1, 4, 4)).astype(np.float32)
        kernel = np.zeros((1, 1, 3, 3), dtype=np.float32)
        kernel[0, 0, 1, 1] = 1.0
        out = ops.conv2d_forward(x, kernel, np.zeros(1, dtype=np.float32))
        np.testing.assert_array_equal(out, x)

    def test_random_case_matches_direct_convolution(self, rng):
        x = rng.normal(size=(2, 4, 4)).astype(np.float32)
        k = rng.normal(size=(1, 2, 3, 3)).astype(np.float32)
        b = rng.normal(size=1).astype(np.float32)
        out = ops.conv2d_forward(x, k, b)
        np.testing.assert_allclose(out, conv2d_oracle(x, k, b), atol=1e-6)

    @pytest.mark.parametrize("case", range(10))
    def test_random_shapes_match_oracle(self, case):
        rng = np.random.default_rng(100 + case)
        c, o = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        h, w = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        x = rng.normal(size=(c, h, w)).astype(np.float32)
        k = rng.normal(size=(o, c, 3, 3)).astype(np.float32)
        b = rng.normal(size=o).astype(np.float32)
        out = ops.conv2d_forward(x, k, b)
        assert out.shape == (o, h, w)
        assert out.dtype == np.float32
        np.testing.assert_allclose(out, conv2d_oracle(x, k, b), atol=1e-5)

    def test_channel_mismatch_names_both_shapes(self):
        x = np.zeros((2, 4, 4), dtype=np.float32)
        k = np.zeros((1, 3, 3, 3), dtype=np.float32)
        with pytest.raises(ShapeMismatchError) as err:
            ops.conv2d_forward(x, k, np.zeros(1, dtype=np.float32))
        assert "(2, 4, 4)" in str(err.value) and "(1, 3, 3, 3)" in str(err.value)

    def test_non_3x3_kernel_rejected(self):
        x = np.zeros((1, 4, 4), dtype=np.float32)
        k = np.zeros((1, 1, 5, 5), dtype=np.float32)
        with pytest.raises(ShapeMismatchError):
            ops.conv2d_forward(x, k, np.zeros(1, dtype=np.float32))


class TestMaxpool:
    def test_constant_input_stays_constant(self):
        x = np.full((2, 6, 6), 3.5, dtype=np.float32)
        out, _ = ops.maxpool_forward(x)
        assert out.shape == (2, 3, 3)
        assert (out == 3.5).all()

    def test_distinct_values_match_window_scan(self, rng):
        x = rng.permutation(16).reshape(1, 4, 4).astype(np.float32)
        out, _ = ops.maxpool_forward(x)
        np.testing.assert_array_equal(out, maxpool_oracle(x))

    @pytest.mark.parametrize("case", range(10))
    def test_random_shapes_match_oracle(self, case):
        rng = np.random.default_rng(200 + case)
        c = int(rng.integers(1, 4))
        h, w = int(rng.integers(2, 10)), int(rng.integers(2, 10))
        x = rng.normal(size=(c, h, w)).astype(np.float32)
        out, _ = ops.maxpool_forward(x)
        assert out.shape == (c, (h + 1) // 2, (w + 1) // 2)
        np.testing.assert_allclose(out, maxpool_oracle(x), atol=1e-5)

    def test_halving_ladder(self, rng):
        x = rng.normal(size=(64, 64, 64)).astype(np.float32)
        out, _ = ops.maxpool_forward(x)
        assert out.shape == (64, 32, 32)
        out2, _ = ops.maxpool_forward(np.repeat(out, 2, axis=0)[:128])
        assert out2.shape == (128, 16, 16)

    def test_argmax_routes_to_real_cells(self, rng):
        x = rng.normal(size=(3, 5, 7)).astype(np.float32)
        out, argmax = ops.maxpool_forward(x)
        flat = x.reshape(3, -1)
        for c in range(3):
            np.testing.assert_array_equal(
                flat[c, argmax[c].ravel()], out[c].ravel()
            )


class TestSmallOps:
    def test_relu_all_negative_is_zero(self):
        x = -np.abs(np.random.default_rng(0).normal(size=(2, 3, 3))).astype(np.float32)
        assert (ops.relu_forward(x) == 0).all()

    def test_resadd_zero_identity(self, rng):
        x = rng.normal(size=(2, 3, 3)).astype(np.float32)
        np.testing.assert_array_equal(ops.resadd_forward(x, np.zeros_like(x)), x)

    def test_resadd_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ops.resadd_forward(np.zeros((1, 2, 2)), np.zeros((1, 3, 3)))

    def test_flatten_row_major(self):
        x = np.arange(12, dtype=np.float32).reshape(2, 2, 3)
        np.testing.assert_array_equal(ops.flatten_forward(x), flatten_oracle(x))

    def test_dense_8192_matches_dot_product_oracle(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-1, 1, 8192).astype(np.float32)
        k = rng.uniform(-1, 1, (256, 8192)).astype(np.float32) / math.sqrt(8192)
        b = rng.uniform(-1, 1, 256).astype(np.float32)
        out = ops.dense_forward(x, k, b)
        assert out.shape == (256,)
        np.testing.assert_allclose(out, dense_oracle(x, k, b), atol=1e-5)

    @pytest.mark.parametrize("case", range(10))
    def test_dense_random_matches_oracle(self, case):
        rng = np.random.default_rng(300 + case)
        i, o = int(rng.integers(1, 40)), int(rng.integers(1, 20))
        x = rng.normal(size=i).astype(np.float32)
        k = rng.normal(size=(o, i)).astype(np.float32)
        b = rng.normal(size=o).astype(np.float32)
        np.testing.assert_allclose(
            ops.dense_forward(x, k, b), dense_oracle(x, k, b), atol=1e-5
        )


class TestLayoutConversion:
    def test_hwc_transposes_to_chw(self, rng):
        hwc = rng.uniform(0, 1, (64, 64, 3)).astype(np.float32)
        chw = ops.to_chw(hwc, layout="hwc")
        assert chw.shape == (3, 64, 64)
        np.testing.assert_array_equal(chw[2], hwc[:, :, 2])

    def test_chw_passthrough(self, rng):
        chw = rng.uniform(0, 1, (3, 4, 4)).astype(np.float32)
        np.testing.assert_array_equal(ops.to_chw(chw), chw)

    def test_unknown_layout_rejected(self):
        from mazelens.errors import ParameterError

        with pytest.raises(ParameterError):
            ops.to_chw(np.zeros((3, 4, 4), dtype=np.float32), layout="whc")


class TestSoftmax:
    def test_uniform_logits(self):
        p = ops.softmax(np.zeros(15, dtype=np.float32))
        np.testing.assert_allclose(p, np.full(15, 1 / 15), atol=1e-7)

    def test_shift_invariance(self, rng):
        z = rng.normal(size=15).astype(np.float32)
        np.testing.assert_allclose(
            ops.softmax(z), ops.softmax(z + np.float32(7.25)), atol=1e-7
        )

    def test_closed_form_two(self):
        z = np.zeros(15, dtype=np.float32)
        z[0] = 2.0
        p = ops.softmax(z)
        e2 = math.exp(2.0)
        assert abs(p[0] - e2 / (e2 + 14)) < 1e-7
        np.testing.assert_allclose(p[1:], p[1], atol=1e-9)

    def test_sums_to_one_and_positive(self, rng):
        for _ in range(50):
            z = rng.normal(scale=10, size=15).astype(np.float32)
            p = ops.softmax(z)
            assert (p > 0).all()
            assert abs(float(p.sum()) - 1.0) < 1e-6
            np.testing.assert_allclose(p, softmax_oracle(z), atol=1e-6)

    def test_large_logits_stay_finite(self):
        z = np.array([1e4] + [0.0] * 14, dtype=np.float32)
        p = ops.softmax(z)
        assert np.isfinite(p).all()
        assert abs(float(p.sum()) - 1.0) < 1e-6
