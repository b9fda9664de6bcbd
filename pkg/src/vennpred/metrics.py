"""Quality metrics for binary probabilistic classifiers.

Conventions: cross-entropy is reported as a natural-log *sum* over
predictions, the Brier score as a mean, and reliability as the Murphy
calibration term over equal probability bins with the in-bin mean as the
bin's typical probability.  The miscalibration test uses the exact
Poisson-binomial distribution of the error count, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MetricReport",
    "brier",
    "confusion_rates",
    "cross_entropy",
    "miscalibration_pvalue",
    "poisson_binomial_pmf",
    "reliability",
]

_CLAMP = 1e-12


def _pair(probs, labels) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape or p.ndim != 1:
        raise ValueError("probs and labels must be 1-d arrays of equal length")
    return p, y


def confusion_rates(preds, labels) -> tuple[float, float]:
    """(sensitivity, specificity) = (TP/(TP+FN), TN/(TN+FP))."""
    yhat = np.asarray(preds, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if yhat.shape != y.shape:
        raise ValueError("preds and labels must have equal length")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("undefined rate: both classes must be present in the labels")
    tp = int(((yhat == 1) & (y == 1)).sum())
    tn = int(((yhat == 0) & (y == 0)).sum())
    return tp / n_pos, tn / n_neg


def cross_entropy(probs, labels) -> float:
    """Log-loss summed over predictions, with outputs clamped away from {0, 1}."""
    p, y = _pair(probs, labels)
    p = np.clip(p, _CLAMP, 1.0 - _CLAMP)
    return float(-np.sum(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def brier(probs, labels) -> float:
    """Mean squared deviation between probabilities and outcomes."""
    p, y = _pair(probs, labels)
    return float(np.mean((p - y) ** 2))


def reliability(probs, labels, n_bins: int = 20) -> float:
    """Murphy calibration term: (1/N) sum_k n_k (r_k - phi_k)^2.

    Probabilities fall into `n_bins` equal bins of [0, 1] (last bin
    closed); r_k is the mean predicted probability in bin k and phi_k the
    positive fraction there.  Empty bins contribute nothing.
    """
    p, y = _pair(probs, labels)
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    idx = np.clip(np.floor(p * n_bins).astype(np.int64), 0, n_bins - 1)
    total = 0.0
    for k in range(n_bins):
        members = idx == k
        n_k = int(members.sum())
        if n_k == 0:
            continue
        # Exact in-bin sums keep the result invariant under permutation
        # of the (prob, label) pairs.
        r_k = math.fsum(p[members]) / n_k
        phi_k = int(y[members].sum()) / n_k
        total += n_k * (r_k - phi_k) ** 2
    return total / p.shape[0]


def poisson_binomial_pmf(probs) -> np.ndarray:
    """Exact pmf of a sum of independent Bernoulli(q_i) via convolution.

    O(N^2) dynamic programming; entry k is P(S = k), length N + 1.
    """
    q = np.asarray(probs, dtype=np.float64)
    if q.ndim != 1:
        raise ValueError("probs must be a 1-d array")
    if ((q < 0) | (q > 1)).any():
        raise ValueError("probabilities must lie in [0, 1]")
    pmf = np.array([1.0])
    for qi in q:
        nxt = np.zeros(pmf.shape[0] + 1)
        nxt[:-1] = pmf * (1.0 - qi)
        nxt[1:] += pmf * qi
        pmf = nxt
    return pmf


def miscalibration_pvalue(probs, errors) -> float:
    """Two-sided exact p-value for the observed error count.

    `probs` are the per-example error probabilities implied by the
    classifier (the probability of the class it did not predict); with
    S ~ PoissonBinomial(probs) and E the observed error total, the
    p-value is P(|S - E[S]| >= |E - E[S]|).
    """
    q = np.asarray(probs, dtype=np.float64)
    err = np.asarray(errors, dtype=np.int64)
    if q.shape != err.shape or q.ndim != 1:
        raise ValueError("probs and errors must be 1-d arrays of equal length")
    if not np.isin(err, (0, 1)).all():
        raise ValueError("errors must be 0 or 1")
    pmf = poisson_binomial_pmf(q)
    expected = float(q.sum())
    deviation = abs(int(err.sum()) - expected)
    ks = np.arange(pmf.shape[0])
    # Tiny slack absorbs float noise in |k - E[S]| comparisons at ties.
    mask = np.abs(ks - expected) >= deviation - 1e-12
    return float(min(1.0, pmf[mask].sum()))


@dataclass(frozen=True)
class MetricReport:
    """The five quality numbers for one classifier configuration."""

    sensitivity: float
    specificity: float
    cross_entropy: float
    brier: float
    reliability: float
    n_bins: int = 20

    @classmethod
    def from_predictions(cls, probs, preds, labels, n_bins: int = 20) -> "MetricReport":
        sens, spec = confusion_rates(preds, labels)
        return cls(sensitivity=sens, specificity=spec,
                   cross_entropy=cross_entropy(probs, labels),
                   brier=brier(probs, labels),
                   reliability=reliability(probs, labels, n_bins),
                   n_bins=n_bins)

    FIELDS = ("sensitivity", "specificity", "cross_entropy", "brier",
              "reliability", "n_bins")

    def to_record(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    def to_key_values(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.to_record().items())

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls.FIELDS)

    def to_csv_row(self) -> str:
        return (f"{self.sensitivity:.6f},{self.specificity:.6f},"
                f"{self.cross_entropy:.6f},{self.brier:.6f},"
                f"{self.reliability:.6f},{self.n_bins}")
