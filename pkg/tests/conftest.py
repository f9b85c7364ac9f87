"""Shared fixtures: the committed fixture bundle, MNIST slices, tiny nets."""

from pathlib import Path

import numpy as np
import pytest

from tdsnn import conversion, idx, weights_io
from tdsnn.network import Activation, Layer, LayerKind, NetworkSpec

FIXTURES = Path(__file__).parent / "fixtures"
BUNDLE_MANIFEST = FIXTURES / "bundle" / "manifest.json"
BUNDLE_BLOB = FIXTURES / "bundle" / "weights.bin"
MNIST = FIXTURES / "mnist"


@pytest.fixture(scope="session")
def raw_bundle():
    """(spec, stats) of the committed pre-trained 784-128-10 MLP."""
    return weights_io.load(BUNDLE_MANIFEST, BUNDLE_BLOB)


@pytest.fixture(scope="session")
def normalized_spec(raw_bundle, calib_images):
    # recompute stats on the loaded (float32-quantized) weights rather than
    # trusting the stored ones, mirroring what the convert subcommand does
    spec, stats = raw_bundle
    fresh = conversion.collect_stats(spec, calib_images,
                                     percentile=stats.percentile)
    return conversion.normalize(spec, fresh)


@pytest.fixture(scope="session")
def mnist_1k():
    """First 1000 MNIST test images, flattened to (1000, 784)."""
    images, labels = idx.load_dataset(
        MNIST / "t1k-images-idx3-ubyte", MNIST / "t1k-labels-idx1-ubyte"
    )
    return images.reshape(len(images), -1), labels


@pytest.fixture(scope="session")
def calib_images():
    """512 training images used for activation calibration, flattened."""
    images, _ = idx.load_dataset(
        MNIST / "calib-images-idx3-ubyte", MNIST / "calib-labels-idx1-ubyte"
    )
    return images.reshape(len(images), -1)


def make_dense_spec(sizes, seed=0, bias=True, scale=0.8):
    """Random ReLU MLP with the given layer sizes, linear output layer."""
    rng = np.random.default_rng(seed)
    layers = []
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        w = rng.normal(0.0, scale / np.sqrt(fan_in), size=(fan_in, fan_out))
        b = rng.normal(0.0, 0.05, size=fan_out) if bias else None
        act = Activation.LINEAR if i == len(sizes) - 2 else Activation.RELU
        layers.append(Layer(kind=LayerKind.DENSE, weights=w, bias=b, activation=act))
    spec = NetworkSpec(layers=layers, input_shape=(sizes[0],), class_count=sizes[-1])
    spec.validate()
    return spec


@pytest.fixture
def dense_spec_factory():
    return make_dense_spec


@pytest.fixture
def tiny_labeled_data():
    """Small normalized net plus inputs labeled by its own ANN argmax.

    The spiking engine should converge toward zero error on this data,
    which makes latency targets reachable in short runs.
    """
    from tdsnn.network import ann_forward

    spec = make_dense_spec([6, 12, 3], seed=3)
    rng = np.random.default_rng(4)
    x = rng.random((64, 6))
    stats = conversion.collect_stats(spec, x, percentile=1.0)
    norm = conversion.normalize(spec, stats)
    labels = np.argmax(ann_forward(norm, x), axis=1)
    return norm, x, labels
