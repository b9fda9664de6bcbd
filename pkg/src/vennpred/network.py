"""A small feed-forward network trained by variable-learning-rate backprop.

One hidden layer of tanh units feeds a single logistic output, trained
full-batch on mean cross-entropy.  Full-batch matters: it makes "the
training error decreased this epoch" well defined, which is what the
adaptive learning-rate rule keys on.  Early stopping monitors a held-out
fifth of the training data.

Training is a pure function of the example *multiset* and the config:
examples are canonically sorted before any arithmetic or random draw, so
permuting the input yields bit-identical weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Standardizer
from .rebalance import rebalance
from .seeding import canonical_order, content_seed

__all__ = [
    "CLAMP",
    "MLPBinaryClassifier",
    "MLPParams",
    "NumericalError",
    "TrainConfig",
    "cross_entropy_loss",
    "forward",
    "gradient",
    "train",
]

# Output/loss clamp; keeps log() finite without touching the gradient path.
CLAMP = 1e-12


class NumericalError(RuntimeError):
    """Training produced non-finite parameters."""


@dataclass(frozen=True)
class TrainConfig:
    hidden_units: int = 5
    lr_init: float = 0.01
    lr_increase: float = 1.05
    lr_decrease: float = 0.7
    error_increase_tolerance: float = 1.04
    max_epochs: int = 500
    patience: int = 30
    val_fraction: float = 0.2  # protocol constant, not tunable
    seed_material: int | str = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be positive")
        if self.lr_init <= 0:
            raise ValueError("lr_init must be positive")
        if self.lr_increase <= 1:
            raise ValueError("lr_increase must exceed 1")
        if not 0 < self.lr_decrease < 1:
            raise ValueError("lr_decrease must lie in (0, 1)")
        if self.error_increase_tolerance <= 1:
            raise ValueError("error_increase_tolerance must exceed 1")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be positive")
        if self.val_fraction != 0.2:
            raise ValueError("val_fraction is fixed at 0.2 by the evaluation protocol")


@dataclass
class MLPParams:
    """Weights of the 2-layer network: hidden (h, d) + biases, output (h,) + bias."""

    w_hidden: np.ndarray
    b_hidden: np.ndarray
    w_out: np.ndarray
    b_out: float

    def copy(self) -> "MLPParams":
        return MLPParams(self.w_hidden.copy(), self.b_hidden.copy(),
                         self.w_out.copy(), self.b_out)

    @property
    def dim(self) -> int:
        return self.w_hidden.shape[1]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.w_hidden).all() and np.isfinite(self.b_hidden).all()
                    and np.isfinite(self.w_out).all() and np.isfinite(self.b_out))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_parts(params: MLPParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a1 = np.tanh(X @ params.w_hidden.T + params.b_hidden)
    p = _sigmoid(a1 @ params.w_out + params.b_out)
    return a1, p


def forward(params: MLPParams, x: np.ndarray):
    """Network output: logistic(b2 + w2 . tanh(b1 + W1 x)), clipped into (0, 1).

    Accepts a single vector (returns a float) or a matrix of rows.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != params.dim:
        raise ValueError(f"expected {params.dim} features, got {X.shape[1]}")
    _, p = _forward_parts(params, X)
    p = np.clip(p, CLAMP, 1.0 - CLAMP)
    return float(p[0]) if single else p


def _ce_mean(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, CLAMP, 1.0 - CLAMP)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def cross_entropy_loss(params: MLPParams, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of the network on a labeled batch."""
    _, p = _forward_parts(params, np.asarray(X, dtype=np.float64))
    return _ce_mean(p, np.asarray(y, dtype=np.float64))


def _gradient_cached(a1: np.ndarray, p: np.ndarray, X: np.ndarray, y: np.ndarray,
                     w_out: np.ndarray) -> MLPParams:
    n = X.shape[0]
    d2 = (p - y) / n
    gw2 = a1.T @ d2
    gb2 = float(d2.sum())
    d1 = (d2[:, None] * w_out[None, :]) * (1.0 - a1 * a1)
    gw1 = d1.T @ X
    gb1 = d1.sum(axis=0)
    return MLPParams(gw1, gb1, gw2, gb2)


def gradient(params: MLPParams, X: np.ndarray, y: np.ndarray) -> MLPParams:
    """Analytic gradient of the mean cross-entropy over the batch."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("batch must be a nonempty (n, d) array")
    if X.shape[1] != params.dim:
        raise ValueError(f"expected {params.dim} features, got {X.shape[1]}")
    a1, p = _forward_parts(params, X)
    return _gradient_cached(a1, p, X, y, params.w_out)


def _step(params: MLPParams, g: MLPParams, lr: float) -> MLPParams:
    return MLPParams(params.w_hidden - lr * g.w_hidden,
                     params.b_hidden - lr * g.b_hidden,
                     params.w_out - lr * g.w_out,
                     params.b_out - lr * g.b_out)


def _validation_split(y: np.ndarray, val_fraction: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Indices (train, val); stratified whenever both classes are present."""
    n = y.shape[0]
    classes = np.unique(y)
    val_parts = []
    if classes.shape[0] == 2:
        for c in (0, 1):
            idx = np.nonzero(y == c)[0]
            n_val = int(round(val_fraction * idx.shape[0]))
            val_parts.append(rng.permutation(idx)[:n_val])
        val = np.concatenate(val_parts)
        if val.shape[0] == 0:
            majority = 0 if (y == 0).sum() >= (y == 1).sum() else 1
            val = rng.permutation(np.nonzero(y == majority)[0])[:1]
    else:
        n_val = max(1, int(round(val_fraction * n)))
        val = rng.permutation(n)[:n_val]
    val = np.sort(val)
    mask = np.ones(n, dtype=bool)
    mask[val] = False
    return np.nonzero(mask)[0], val


def _init_params(dim: int, hidden: int, rng: np.random.Generator) -> MLPParams:
    r1 = 1.0 / np.sqrt(dim)
    r2 = 1.0 / np.sqrt(hidden)
    return MLPParams(rng.uniform(-r1, r1, size=(hidden, dim)),
                     rng.uniform(-r1, r1, size=hidden),
                     rng.uniform(-r2, r2, size=hidden),
                     float(rng.uniform(-r2, r2)))


def train(X: np.ndarray, y: np.ndarray, cfg: TrainConfig = TrainConfig(),
          history: dict | None = None) -> MLPParams:
    """Train the network, returning the weights of the best validation epoch.

    The learning rate grows by `lr_increase` after epochs that reduce the
    training error; a step that would raise it beyond
    `error_increase_tolerance` times the previous value is rejected and
    the rate shrinks by `lr_decrease`.

    Pass a dict as `history` to capture per-epoch training/validation
    errors and the final (pre-rollback) parameters for diagnostics.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, d) with matching labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if X.shape[0] < 5:
        raise ValueError("insufficient data for validation split (need at least 5 examples)")

    order = canonical_order(X, y)
    Xs, ys = X[order], y[order]
    rng = np.random.default_rng(content_seed(Xs, ys, cfg.seed_material, salt=b"mlp-train"))
    # Draw order is fixed: the validation split consumes the stream first,
    # then weight initialization.
    train_idx, val_idx = _validation_split(ys, cfg.val_fraction, rng)
    params = _init_params(X.shape[1], cfg.hidden_units, rng)

    Xtr, ytr = Xs[train_idx], ys[train_idx].astype(np.float64)
    Xval, yval = Xs[val_idx], ys[val_idx].astype(np.float64)

    a1, p = _forward_parts(params, Xtr)
    train_err = _ce_mean(p, ytr)
    best = params.copy()
    best_val = cross_entropy_loss(params, Xval, yval)
    since_best = 0
    lr = cfg.lr_init
    train_errs, val_errs = [train_err], [best_val]

    for _ in range(cfg.max_epochs):
        g = _gradient_cached(a1, p, Xtr, ytr, params.w_out)
        cand = _step(params, g, lr)
        a1_cand, p_cand = _forward_parts(cand, Xtr)
        cand_err = _ce_mean(p_cand, ytr)
        if cand_err > cfg.error_increase_tolerance * train_err:
            lr *= cfg.lr_decrease
            since_best += 1
            val = val_errs[-1]
        else:
            if cand_err < train_err:
                lr *= cfg.lr_increase
            params, train_err = cand, cand_err
            a1, p = a1_cand, p_cand
            val = cross_entropy_loss(params, Xval, yval)
            if val < best_val:
                best_val, best, since_best = val, params.copy(), 0
            else:
                since_best += 1
        train_errs.append(train_err)
        val_errs.append(val)
        if since_best >= cfg.patience:
            break
        if lr < 1e-12:
            break

    if not best.is_finite():
        raise NumericalError("training diverged to non-finite parameters")
    if history is not None:
        history.update(train_errors=train_errs, val_errors=val_errs,
                       final_params=params, best_val_error=best_val)
    return best


class MLPBinaryClassifier(BaseEstimator, ClassifierMixin):
    """Conventional classifier wrapper: optional rebalancing, z-scoring, training.

    `theta` is the probability threshold for `predict`; the default 0.5
    suits a network trained on class-balanced data.  `theta="auto"` uses
    the Laplace-smoothed positive frequency of the fit data instead.
    """

    def __init__(self, hidden_units=5, rebalance="none", theta=0.5,
                 lr_init=0.01, lr_increase=1.05, lr_decrease=0.7,
                 error_increase_tolerance=1.04, max_epochs=500, patience=30,
                 seed_material=0):
        self.hidden_units = hidden_units
        self.rebalance = rebalance
        self.theta = theta
        self.lr_init = lr_init
        self.lr_increase = lr_increase
        self.lr_decrease = lr_decrease
        self.error_increase_tolerance = error_increase_tolerance
        self.max_epochs = max_epochs
        self.patience = patience
        self.seed_material = seed_material

    def _train_config(self) -> TrainConfig:
        return TrainConfig(hidden_units=self.hidden_units, lr_init=self.lr_init,
                           lr_increase=self.lr_increase, lr_decrease=self.lr_decrease,
                           error_increase_tolerance=self.error_increase_tolerance,
                           max_epochs=self.max_epochs, patience=self.patience,
                           seed_material=self.seed_material)

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = np.asarray(y, dtype=np.int64)
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if self.theta == "auto":
            self.theta_ = (int((y == 1).sum()) + 1) / (y.shape[0] + 2)
        else:
            self.theta_ = float(self.theta)
        Xb, yb = rebalance(X, y, self.rebalance, self.seed_material)
        self.scaler_ = Standardizer().fit(Xb)
        self.model_ = train(self.scaler_.transform(Xb), yb, self._train_config())
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        p = forward(self.model_, self.scaler_.transform(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > self.theta_).astype(np.int64)
