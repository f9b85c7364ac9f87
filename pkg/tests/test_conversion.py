"""Network plumbing (shapes, forward pass) and ANN-to-SNN normalization."""

import numpy as np
import pytest
from scipy.signal import correlate2d

from tdsnn.conversion import ActivationStats, collect_stats, normalize
from tdsnn.errors import (
    CalibrationError,
    ConfigurationError,
    ShapeError,
    UnsupportedNetworkError,
)
from tdsnn.network import (
    Activation,
    Layer,
    LayerKind,
    NetworkSpec,
    ann_forward,
    layer_shapes,
)

from conftest import make_dense_spec


def identity_spec(n=4):
    layer = Layer(kind=LayerKind.DENSE, weights=np.eye(n), activation=Activation.LINEAR)
    return NetworkSpec(layers=[layer], input_shape=(n,), class_count=n)


# ---------------------------------------------------------------------------
# Shapes and the forward pass
# ---------------------------------------------------------------------------


class TestNetwork:
    def test_layer_shapes_compose(self):
        spec = make_dense_spec([10, 7, 3])
        assert layer_shapes(spec) == [(7,), (3,)]
        assert spec.neuron_count == 10

    def test_dense_shape_mismatch_raises(self):
        spec = make_dense_spec([10, 7, 3])
        spec.layers[1].weights = np.zeros((8, 3))  # fan-in should be 7
        with pytest.raises(ShapeError):
            spec.validate()

    def test_class_count_mismatch_raises(self):
        spec = make_dense_spec([10, 7, 3])
        spec.class_count = 5
        with pytest.raises(ShapeError):
            spec.validate()

    def test_avgpool_with_weights_raises(self):
        layer = Layer(kind=LayerKind.AVGPOOL, weights=np.zeros((2, 2)), pool=(2, 2))
        spec = NetworkSpec(layers=[layer], input_shape=(4, 4, 1))
        with pytest.raises(ConfigurationError):
            spec.validate()

    def test_forward_matches_manual_matmul(self):
        spec = make_dense_spec([6, 5, 4], seed=1)
        rng = np.random.default_rng(2)
        x = rng.random((9, 6))
        h = np.maximum(x @ spec.layers[0].weights + spec.layers[0].bias, 0.0)
        want = h @ spec.layers[1].weights + spec.layers[1].bias
        got = ann_forward(spec, x)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_zero_input_zero_bias_gives_zero_scores(self):
        spec = make_dense_spec([6, 5, 4], seed=1, bias=False)
        assert np.all(ann_forward(spec, np.zeros((3, 6))) == 0.0)

    def test_identity_layer_returns_input(self):
        x = np.random.default_rng(0).random((5, 4))
        assert np.allclose(ann_forward(identity_spec(4), x), x)

    def test_forward_shape_mismatch(self):
        spec = make_dense_spec([6, 5, 4])
        with pytest.raises(ShapeError):
            ann_forward(spec, np.zeros((3, 7)))

    def test_conv_against_scipy(self):
        rng = np.random.default_rng(8)
        h, w, cin, cout, k = 9, 9, 2, 3, 3
        weights = rng.normal(size=(k, k, cin, cout))
        conv = Layer(kind=LayerKind.CONV2D, weights=weights,
                     bias=rng.normal(size=cout), activation=Activation.LINEAR)
        spec = NetworkSpec(layers=[conv], input_shape=(h, w, cin),
                           class_count=(h - k + 1) * (w - k + 1) * cout)
        x = rng.random((h, w, cin))
        got = ann_forward(spec, x).reshape(h - k + 1, w - k + 1, cout)
        for co in range(cout):
            want = sum(
                correlate2d(x[:, :, ci], weights[:, :, ci, co], mode="valid")
                for ci in range(cin)
            ) + conv.bias[co]
            assert np.allclose(got[:, :, co], want, rtol=1e-10, atol=1e-10)

    def test_avgpool_pools_means(self):
        pool = Layer(kind=LayerKind.AVGPOOL, pool=(2, 2))
        out = Layer(kind=LayerKind.DENSE, weights=np.eye(4),
                    activation=Activation.LINEAR)
        spec = NetworkSpec(layers=[pool, out], input_shape=(4, 4, 1), class_count=4)
        x = np.arange(16, dtype=float).reshape(4, 4, 1) / 16.0
        got = ann_forward(spec, x)
        img = x[:, :, 0]
        want = np.array([
            img[:2, :2].mean(), img[:2, 2:].mean(),
            img[2:, :2].mean(), img[2:, 2:].mean(),
        ])
        assert np.allclose(got.ravel(), want)


# ---------------------------------------------------------------------------
# Activation statistics
# ---------------------------------------------------------------------------


class TestCollectStats:
    def test_single_input_single_layer_is_max_activation(self):
        spec = identity_spec(3)
        x = np.array([0.2, 0.7, 0.4])
        stats = collect_stats(spec, x, percentile=1.0)
        assert stats.values == (0.7,)

    def test_empty_calibration_set_raises(self):
        with pytest.raises(CalibrationError):
            collect_stats(identity_spec(3), np.zeros((0, 3)))

    def test_all_zero_inputs_raise(self):
        with pytest.raises(CalibrationError):
            collect_stats(identity_spec(3), np.zeros((10, 3)), percentile=1.0)

    def test_percentile_ordering(self):
        spec = make_dense_spec([8, 6, 4], seed=5)
        x = np.random.default_rng(6).random((100, 8))
        lo = collect_stats(spec, x, percentile=0.999)
        hi = collect_stats(spec, x, percentile=1.0)
        assert all(a <= b for a, b in zip(lo.values, hi.values))

    def test_stats_validate_positive(self):
        with pytest.raises(CalibrationError):
            ActivationStats(values=(1.0, 0.0))
        with pytest.raises(CalibrationError):
            ActivationStats(values=(1.0,), percentile=0.0)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


class TestNormalize:
    def test_single_layer_divides_by_scale(self):
        # input already in [0,1] so lam_0 = 1; lam_1 = 4 divides W and b by 4
        w = np.full((2, 2), 4.0)
        b = np.array([2.0, -1.0])
        layer = Layer(kind=LayerKind.DENSE, weights=w, bias=b,
                      activation=Activation.RELU)
        spec = NetworkSpec(layers=[layer], input_shape=(2,), class_count=2)
        norm = normalize(spec, ActivationStats(values=(4.0,), percentile=1.0))
        assert np.allclose(norm.layers[0].weights, w / 4.0)
        assert np.allclose(norm.layers[0].bias, b / 4.0)
        assert norm.layers[0].threshold == 1.0

    def test_identity_network_unchanged(self):
        spec = identity_spec(3)
        x = np.random.default_rng(1).random((50, 3))
        stats = collect_stats(spec, x, percentile=1.0)
        norm = normalize(spec, stats)
        assert np.allclose(norm.layers[0].weights * stats.values[0], np.eye(3))
        # with stats forced to the theoretical bound 1.0 nothing changes
        norm = normalize(spec, ActivationStats(values=(1.0,), percentile=1.0))
        assert np.array_equal(norm.layers[0].weights, np.eye(3))

    def test_argmax_preserved_on_random_networks(self):
        rng = np.random.default_rng(21)
        for seed in range(5):
            spec = make_dense_spec([10, 16, 6], seed=seed)
            calib = rng.random((80, 10))
            stats = collect_stats(spec, calib, percentile=0.999)
            norm = normalize(spec, stats)
            probe = rng.random((200, 10))
            before = np.argmax(ann_forward(spec, probe), axis=1)
            after = np.argmax(ann_forward(norm, probe), axis=1)
            assert np.array_equal(before, after)

    def test_activations_bounded_after_normalization(self):
        spec = make_dense_spec([12, 20, 5], seed=9, scale=2.0)
        x = np.random.default_rng(10).random((60, 12))
        norm = normalize(spec, collect_stats(spec, x, percentile=1.0))
        recheck = collect_stats(norm, x, percentile=1.0)
        assert all(v <= 1.0 + 1e-9 for v in recheck.values)

    def test_idempotent_within_tolerance(self):
        spec = make_dense_spec([12, 20, 5], seed=9)
        x = np.random.default_rng(10).random((60, 12))
        for pct in (0.999, 1.0):
            once = normalize(spec, collect_stats(spec, x, percentile=pct))
            again = collect_stats(once, x, percentile=pct)
            assert all(abs(v - 1.0) <= 1e-6 for v in again.values)

    def test_all_thresholds_one(self):
        spec = make_dense_spec([8, 6, 4], seed=2)
        for layer in spec.layers:
            layer.threshold = 2.5
        x = np.random.default_rng(3).random((30, 8))
        norm = normalize(spec, collect_stats(spec, x))
        assert all(l.threshold == 1.0 for l in norm.layers)

    def test_normalize_does_not_mutate_input(self):
        spec = make_dense_spec([8, 6, 4], seed=2)
        w0 = spec.layers[0].weights.copy()
        x = np.random.default_rng(3).random((30, 8))
        normalize(spec, collect_stats(spec, x))
        assert np.array_equal(spec.layers[0].weights, w0)

    def test_hidden_linear_activation_unsupported(self):
        spec = make_dense_spec([8, 6, 4], seed=2)
        spec.layers[0].activation = Activation.LINEAR
        x = np.random.default_rng(3).random((30, 8))
        with pytest.raises(UnsupportedNetworkError):
            collect_stats(spec, x)
        with pytest.raises(UnsupportedNetworkError):
            normalize(spec, ActivationStats(values=(1.0, 1.0)))

    def test_stats_length_mismatch(self):
        spec = make_dense_spec([8, 6, 4])
        with pytest.raises(CalibrationError):
            normalize(spec, ActivationStats(values=(1.0,)))

    def test_fixture_mlp_argmax_preserved(self, raw_bundle, normalized_spec, mnist_1k):
        spec, _ = raw_bundle
        images, _ = mnist_1k
        x = images[:200]
        before = np.argmax(ann_forward(spec, x), axis=1)
        after = np.argmax(ann_forward(normalized_spec, x), axis=1)
        assert np.array_equal(before, after)
