"""Class rebalancing: minority oversampling and majority undersampling.

Both strategies return a training set with equal class counts.  Sampling
is seeded from the sorted example multiset, so the result is a pure
function of the data multiset, the mode and the seed material; input
order never matters.
"""

from __future__ import annotations

import warnings

import numpy as np

from .seeding import canonical_order, content_seed

__all__ = ["MODES", "RebalanceDegeneracyWarning", "rebalance"]

MODES = ("none", "mo", "mu")


class RebalanceDegeneracyWarning(UserWarning):
    """One class is empty, so resampling is undefined and the data is passed through."""


def rebalance(X: np.ndarray, y: np.ndarray, mode: str = "none",
              seed_material=0) -> tuple[np.ndarray, np.ndarray]:
    """Return a class-balanced copy of (X, y) according to `mode`.

    ``"mo"`` duplicates randomly chosen minority examples (with
    replacement) until the counts match; ``"mu"`` keeps a random majority
    subset of minority size; ``"none"`` passes the data through.
    Already-balanced input is returned unchanged.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    X = np.asarray(X, dtype=np.float64)
    if y is None:
        raise ValueError("rebalance requires labels")
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, d) with matching labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if mode == "none":
        return X, y

    n_pos = int(np.sum(y == 1))
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        warnings.warn("one class is empty; returning the data unrebalanced",
                      RebalanceDegeneracyWarning, stacklevel=2)
        return X, y
    if n_pos == n_neg:
        return X, y

    # Canonical order makes both the draw and the output deterministic
    # under any permutation of the input.
    order = canonical_order(X, y)
    Xs, ys = X[order], y[order]
    rng = np.random.default_rng(content_seed(X, y, seed_material, salt=b"rebalance"))
    minority = 1 if n_pos < n_neg else 0
    min_idx = np.nonzero(ys == minority)[0]
    maj_idx = np.nonzero(ys != minority)[0]

    if mode == "mo":
        draws = rng.integers(0, min_idx.shape[0], size=maj_idx.shape[0] - min_idx.shape[0])
        keep = np.concatenate([np.arange(ys.shape[0]), min_idx[draws]])
    else:
        chosen = rng.choice(maj_idx, size=min_idx.shape[0], replace=False)
        keep = np.sort(np.concatenate([min_idx, chosen]))
    return Xs[keep], ys[keep]
