"""Scikit-learn style front ends over the functional core.

These wrap a pre-trained network bundle: ``fit`` runs threshold calibration
(activation percentiles + weight normalization) on the given inputs, and
``predict`` runs spiking inference. They exist so the simulator composes
with sklearn tooling (pipelines, cross-val scoring); all behavior lives in
the functional modules.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import conversion, engine, network
from .errors import ModelStateError
from .network import NetworkSpec
from .neurons import IdealIFParams, NeuronModelParams

__all__ = ["AnnClassifier", "SnnClassifier"]


def _as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    return X.reshape(X.shape[0], -1)


class AnnClassifier(ClassifierMixin, BaseEstimator):
    """Frozen-weight ANN forward pass as a classifier.

    ``fit`` only records the class set (the weights are given, not trained);
    it exists to satisfy the estimator contract.
    """

    def __init__(self, spec: Optional[NetworkSpec] = None):
        self.spec = spec

    def fit(self, X, y):
        if self.spec is None:
            raise ModelStateError("AnnClassifier needs a NetworkSpec")
        self.spec.validate()
        self.classes_ = np.arange(self.spec.class_count)
        self.n_features_in_ = int(np.prod(self.spec.input_shape))
        return self

    def decision_function(self, X):
        check_is_fitted(self, "classes_")
        return network.ann_forward(self.spec, _as_2d(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


class SnnClassifier(ClassifierMixin, BaseEstimator):
    """Converted spiking network as a classifier.

    ``fit(X)`` calibrates activation percentiles on X and normalizes the
    network's weights; ``predict`` runs the time-stepped simulation. The
    labels passed to ``fit`` are unused beyond recording the class set.
    """

    def __init__(
        self,
        spec: Optional[NetworkSpec] = None,
        neuron_model: Optional[NeuronModelParams] = None,
        percentile: float = 0.999,
        dt: float = 1.0,
        max_steps: int = 400,
        input_encoding: engine.InputEncoding = engine.InputEncoding.CONSTANT_CURRENT,
        decision_rule: engine.DecisionRule = engine.DecisionRule.SPIKE_COUNT_ARGMAX,
        seed: int = 0,
    ):
        self.spec = spec
        self.neuron_model = neuron_model
        self.percentile = percentile
        self.dt = dt
        self.max_steps = max_steps
        self.input_encoding = input_encoding
        self.decision_rule = decision_rule
        self.seed = seed

    def fit(self, X, y=None):
        if self.spec is None:
            raise ModelStateError("SnnClassifier needs a NetworkSpec")
        X = _as_2d(X)
        stats = conversion.collect_stats(self.spec, X, percentile=self.percentile)
        self.normalized_spec_ = conversion.normalize(self.spec, stats)
        self.stats_ = stats
        self.classes_ = np.arange(self.spec.class_count)
        self.n_features_in_ = X.shape[1]
        return self

    def _config(self) -> engine.SimConfig:
        return engine.SimConfig(
            dt=self.dt,
            max_steps=self.max_steps,
            neuron_model=self.neuron_model or IdealIFParams(),
            input_encoding=self.input_encoding,
            decision_rule=self.decision_rule,
            seed=self.seed,
        )

    def predict(self, X):
        check_is_fitted(self, "normalized_spec_")
        X = _as_2d(X)
        labels = np.zeros(X.shape[0], dtype=np.int64)  # placeholder, unused
        result = engine.evaluate(self.normalized_spec_, (X, labels), self._config())
        return self.classes_[result.predictions]

    def score(self, X, y, sample_weight=None):
        y = np.asarray(y)
        return float(np.average(self.predict(X) == y, weights=sample_weight))
