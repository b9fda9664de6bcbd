"""Chi-squared and information-gain scoring for binary features.

Both scores come from the 2x2 contingency table of a feature against
the label.  A feature is retained when its score under the chosen
criterion exceeds an (optionally zero) threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FeatureScore", "score_features", "scores_to_csv"]

CRITERIA = ("chi2", "ig")


@dataclass(frozen=True)
class FeatureScore:
    index: int
    chi2: float
    info_gain: float
    retained: bool


def _entropy_bits(counts: np.ndarray) -> float:
    counts = counts[counts > 0]
    total = counts.sum()
    p = counts / total
    return float(-(p * np.log2(p)).sum())


def _table_scores(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    n = x.shape[0]
    table = np.array([[int(((x == a) & (y == b)).sum()) for b in (0, 1)] for a in (0, 1)],
                     dtype=np.float64)
    row = table.sum(axis=1)
    col = table.sum(axis=0)

    chi2 = 0.0
    for a in (0, 1):
        for b in (0, 1):
            expected = row[a] * col[b] / n
            if expected > 0:
                chi2 += (table[a, b] - expected) ** 2 / expected

    h_y = _entropy_bits(col)
    h_y_given_x = 0.0
    for a in (0, 1):
        if row[a] > 0:
            h_y_given_x += (row[a] / n) * _entropy_bits(table[a])
    ig = h_y - h_y_given_x
    # Entropy differences can land a hair below zero; clip, information is >= 0.
    return chi2, max(ig, 0.0)


def score_features(X, y, criterion: str = "chi2", epsilon: float = 0.0) -> list[FeatureScore]:
    """Score every feature column against the binary label.

    Features must already be binary (0/1); the retain flag marks scores
    strictly above `epsilon` under `criterion`.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, d) with matching labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if not np.isin(X, (0.0, 1.0)).all():
        bad = int(np.nonzero(~np.isin(X, (0.0, 1.0)).all(axis=0))[0][0])
        raise ValueError(f"feature {bad} is not binary; discretize it before scoring")

    scores = []
    for j in range(X.shape[1]):
        chi2, ig = _table_scores(X[:, j].astype(np.int64), y)
        value = chi2 if criterion == "chi2" else ig
        scores.append(FeatureScore(index=j, chi2=chi2, info_gain=ig,
                                   retained=value > epsilon))
    return scores


def scores_to_csv(scores: list[FeatureScore]) -> str:
    lines = ["index,chi2,info_gain,retained"]
    for s in scores:
        lines.append(f"{s.index},{s.chi2:.10g},{s.info_gain:.10g},{int(s.retained)}")
    return "\n".join(lines) + "\n"
