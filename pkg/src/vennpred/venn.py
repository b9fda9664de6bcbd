"""Venn prediction: multiprobability outputs with calibrated bounds.

For each candidate label k of a new example, the training set extended
with (x, k) is rebalanced, standardized and used to train the network;
the *original* examples plus x are then scored and grouped into equal
output bins.  The empirical label frequency inside x's bin gives one
probability distribution per assumed label, and the per-class min/max
over those distributions are the lower/upper probability bounds.  The
bounds are well calibrated under i.i.d. sampling alone, whatever the
network does.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Standardizer
from .network import TrainConfig, forward, train
from .rebalance import MODES, rebalance
from .seeding import canonical_order

__all__ = [
    "AnnBinTaxonomy",
    "Taxonomy",
    "VennOutput",
    "VennPredictor",
    "bin_output",
    "empirical_distribution",
    "venn_predict",
]


class Taxonomy(ABC):
    """Order-invariant assignment of category ids to an extended training set."""

    @abstractmethod
    def assign(self, X: np.ndarray, y: np.ndarray, x_new: np.ndarray,
               assumed_label: int) -> tuple[np.ndarray, int]:
        """Categories for the original examples and for the new example."""


def bin_output(o, n_bins: int):
    """Map outputs in [0, 1] to bins [i/n, (i+1)/n); the last bin closes at 1."""
    idx = np.floor(np.asarray(o, dtype=np.float64) * n_bins).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)
    return int(idx) if np.isscalar(o) or getattr(o, "ndim", 1) == 0 else idx


class AnnBinTaxonomy(Taxonomy):
    """Categories from equal bins of the trained network's output range.

    Rebalancing is part of the taxonomy: the original training set is
    resampled first, the new example is then appended once with its
    assumed label, and the network trains on that set.  Only the original
    examples (plus the new one) are scored and counted.  Resampling
    before extension keeps the new example from being duplicated, which
    would let the network memorize the assumed label.
    """

    def __init__(self, n_bins: int = 6, rebalance_mode: str = "mo",
                 train_cfg: TrainConfig = TrainConfig()):
        if n_bins < 1:
            raise ValueError("n_bins must be at least 1")
        if rebalance_mode not in MODES:
            raise ValueError(f"rebalance_mode must be one of {MODES}")
        self.n_bins = n_bins
        self.rebalance_mode = rebalance_mode
        self.train_cfg = train_cfg

    def assign(self, X, y, x_new, assumed_label):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        x_new = np.asarray(x_new, dtype=np.float64)
        if assumed_label not in (0, 1):
            raise ValueError("assumed_label must be 0 or 1")

        # Canonical order up front: all downstream statistics and draws
        # become independent of how the caller ordered the training set.
        order = canonical_order(X, y)
        Xb, yb = rebalance(X[order], y[order], self.rebalance_mode,
                           self.train_cfg.seed_material)
        X_ext = np.vstack([Xb, x_new[None, :]])
        y_ext = np.append(yb, assumed_label)
        scaler = Standardizer().fit(X_ext)
        model = train(scaler.transform(X_ext), y_ext, self.train_cfg)

        inverse = np.empty_like(order)
        inverse[order] = np.arange(order.shape[0])
        o_train = forward(model, scaler.transform(X[order]))[inverse]
        o_new = forward(model, scaler.transform(x_new))
        return bin_output(o_train, self.n_bins), bin_output(float(o_new), self.n_bins)


def empirical_distribution(labels, categories, new_category: int,
                           assumed_label: int) -> tuple[float, float]:
    """Label frequencies inside the new example's category.

    The new example itself is counted with its assumed label, so the
    denominator is never zero.  Returns (p(0), p(1)) with p(0) = 1 - p(1).
    """
    labels = np.asarray(labels, dtype=np.int64)
    categories = np.asarray(categories, dtype=np.int64)
    members = categories == new_category
    denom = int(members.sum()) + 1
    ones = int(labels[members].sum()) + (1 if assumed_label == 1 else 0)
    p1 = ones / denom
    return 1.0 - p1, p1


@dataclass(frozen=True)
class VennOutput:
    """One multiprobability prediction.

    `dist[k]` is the (p(0), p(1)) distribution obtained under assumed
    label k.  `pred_interval` brackets the probability that `prediction`
    is correct; `error_interval` is its complement.
    """

    dist: tuple[tuple[float, float], tuple[float, float]]
    mean_p1: float
    prediction: int
    pred_interval: tuple[float, float]
    error_interval: tuple[float, float]


def venn_predict(taxonomy: Taxonomy, X, y, x, rule: str = "threshold",
                 theta: float = 0.5) -> VennOutput:
    """Run the full two-pass Venn prediction for a single example."""
    if rule not in ("threshold", "argmax"):
        raise ValueError(f"rule must be 'threshold' or 'argmax', got {rule!r}")
    dist = []
    for k in (0, 1):
        cats, cat_new = taxonomy.assign(X, y, x, k)
        dist.append(empirical_distribution(y, cats, cat_new, k))
    mean_p1 = (dist[0][1] + dist[1][1]) / 2.0
    if rule == "threshold":
        prediction = int(mean_p1 > theta)
    else:
        mean_p0 = (dist[0][0] + dist[1][0]) / 2.0
        prediction = int(mean_p1 > mean_p0)  # tie predicts 0
    lo = min(dist[0][prediction], dist[1][prediction])
    hi = max(dist[0][prediction], dist[1][prediction])
    return VennOutput(dist=(dist[0], dist[1]), mean_p1=mean_p1, prediction=prediction,
                      pred_interval=(lo, hi), error_interval=(1.0 - hi, 1.0 - lo))


class VennPredictor(BaseEstimator, ClassifierMixin):
    """Venn predictor over the rebalanced-network bin taxonomy.

    Every prediction trains the underlying network twice (once per
    assumed label), always from scratch.  `predict_proba` reduces the
    multiprobability output to the mean positive probability so the
    estimator composes with standard tooling; `predict_venn` exposes the
    full bounds.

    `theta="auto"` resolves to the Laplace-smoothed positive frequency of
    the fit data, (n_pos + 1) / (n + 2), which stays usable while a class
    is still unseen in online runs.
    """

    def __init__(self, n_bins=6, rebalance="mo", hidden_units=5, theta="auto",
                 rule="threshold", lr_init=0.01, lr_increase=1.05, lr_decrease=0.7,
                 error_increase_tolerance=1.04, max_epochs=500, patience=30,
                 seed_material=0):
        self.n_bins = n_bins
        self.rebalance = rebalance
        self.hidden_units = hidden_units
        self.theta = theta
        self.rule = rule
        self.lr_init = lr_init
        self.lr_increase = lr_increase
        self.lr_decrease = lr_decrease
        self.error_increase_tolerance = error_increase_tolerance
        self.max_epochs = max_epochs
        self.patience = patience
        self.seed_material = seed_material

    def _taxonomy(self) -> AnnBinTaxonomy:
        cfg = TrainConfig(hidden_units=self.hidden_units, lr_init=self.lr_init,
                          lr_increase=self.lr_increase, lr_decrease=self.lr_decrease,
                          error_increase_tolerance=self.error_increase_tolerance,
                          max_epochs=self.max_epochs, patience=self.patience,
                          seed_material=self.seed_material)
        return AnnBinTaxonomy(self.n_bins, self.rebalance, cfg)

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = np.asarray(y, dtype=np.int64)
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if self.theta == "auto":
            self.theta_ = (int((y == 1).sum()) + 1) / (y.shape[0] + 2)
        else:
            self.theta_ = float(self.theta)
        self.X_ = X.copy()
        self.y_ = y.copy()
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_venn(self, X) -> list[VennOutput]:
        check_is_fitted(self, "X_")
        X = check_array(X)
        taxonomy = self._taxonomy()
        return [venn_predict(taxonomy, self.X_, self.y_, x, self.rule, self.theta_)
                for x in X]

    def predict_proba(self, X):
        p = np.array([out.mean_p1 for out in self.predict_venn(X)])
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return np.array([out.prediction for out in self.predict_venn(X)], dtype=np.int64)
