"""Evaluation protocols: repeated stratified cross-validation and online runs.

Batch runs pool the predictions of `repeats` independent stratified
fold splits and score them with one MetricReport.  Online runs follow
the prequential protocol: predict one example, reveal its label, retrain
on everything revealed, repeat; the cumulative error and bound curves
are what make calibration visible.

Every job derives its randomness from the data it sees, so reports are
bit-identical whatever the worker count.  BLAS threading is pinned to one
thread inside runs for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import clone
from sklearn.model_selection import KFold, StratifiedKFold
from threadpoolctl import threadpool_limits

from .dataset import Dataset
from .metrics import MetricReport

__all__ = ["BatchPlan", "BatchResult", "OnlineTrace", "run_batch", "run_online"]


@dataclass(frozen=True)
class BatchPlan:
    folds: int = 10
    repeats: int = 10
    seed: int = 0
    workers: int = 1
    reliability_bins: int = 20

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class BatchResult:
    pooled: MetricReport
    per_run: list[MetricReport]
    probs: np.ndarray
    preds: np.ndarray
    labels: np.ndarray


def _repeat_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1)[0])


def _fold_splits(y: np.ndarray, plan: BatchPlan, repeat: int):
    n = y.shape[0]
    if plan.folds == n:
        # Leave-one-out: stratification is moot, each example is its own fold.
        return KFold(n_splits=n).split(np.zeros(n))
    smallest = min(int((y == 0).sum()), int((y == 1).sum()))
    if smallest < plan.folds:
        raise ValueError(f"class smaller than fold count ({smallest} < {plan.folds})")
    skf = StratifiedKFold(n_splits=plan.folds, shuffle=True,
                          random_state=_repeat_seed(plan.seed, repeat))
    return skf.split(np.zeros(n), y)


def _fold_job(estimator, X, y, train_idx, test_idx):
    est = clone(estimator).fit(X[train_idx], y[train_idx])
    probs = est.predict_proba(X[test_idx])[:, 1]
    preds = np.asarray(est.predict(X[test_idx]), dtype=np.int64)
    return probs, preds


def run_batch(data: Dataset, estimator, plan: BatchPlan = BatchPlan()) -> BatchResult:
    """Pooled metrics over `repeats` stratified `folds`-fold splits.

    Each test example is predicted exactly once per repeat by an
    estimator fitted on the remaining folds; metrics are computed on the
    pooled predictions and per repeat.
    """
    if data.y is None:
        raise ValueError("run_batch requires labeled data")
    X, y = data.X, data.y
    n = data.n_examples

    jobs = []
    for r in range(plan.repeats):
        for train_idx, test_idx in _fold_splits(y, plan, r):
            jobs.append((r, train_idx, test_idx))

    with threadpool_limits(limits=1):
        if plan.workers == 1:
            outputs = [_fold_job(estimator, X, y, tr, te) for _, tr, te in jobs]
        else:
            outputs = Parallel(n_jobs=plan.workers)(
                delayed(_fold_job)(estimator, X, y, tr, te) for _, tr, te in jobs)

    probs = np.empty((plan.repeats, n))
    preds = np.empty((plan.repeats, n), dtype=np.int64)
    for (r, _, test_idx), (p, yhat) in zip(jobs, outputs):
        probs[r, test_idx] = p
        preds[r, test_idx] = yhat

    labels = np.tile(y, plan.repeats)
    pooled_probs = probs.reshape(-1)
    pooled_preds = preds.reshape(-1)
    per_run = [MetricReport.from_predictions(probs[r], preds[r], y, plan.reliability_bins)
               for r in range(plan.repeats)]
    pooled = MetricReport.from_predictions(pooled_probs, pooled_preds, labels,
                                           plan.reliability_bins)
    return BatchResult(pooled=pooled, per_run=per_run, probs=pooled_probs,
                       preds=pooled_preds, labels=labels)


@dataclass
class OnlineTrace:
    """Per-step errors and error-probability bounds of an online run.

    `lower`/`upper` are the per-step bounds on the probability the
    prediction was wrong; for a raw classifier both collapse to the
    point error probability, which is also recorded as `ep`.
    """

    err: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    ep: np.ndarray | None = None

    def __post_init__(self):
        self.err = np.asarray(self.err, dtype=np.int64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        if self.ep is not None:
            self.ep = np.asarray(self.ep, dtype=np.float64)
        if not (self.err.shape == self.lower.shape == self.upper.shape):
            raise ValueError("err, lower and upper must have equal length")
        if not np.isin(self.err, (0, 1)).all():
            raise ValueError("err entries must be 0 or 1")
        if ((self.lower < 0) | (self.upper > 1) | (self.lower > self.upper)).any():
            raise ValueError("bounds must satisfy 0 <= lower <= upper <= 1")

    @property
    def n_steps(self) -> int:
        return self.err.shape[0]

    @property
    def cumulative_errors(self) -> np.ndarray:
        return np.cumsum(self.err)

    @property
    def cumulative_lower(self) -> np.ndarray:
        return np.cumsum(self.lower)

    @property
    def cumulative_upper(self) -> np.ndarray:
        return np.cumsum(self.upper)

    @property
    def cumulative_ep(self) -> np.ndarray | None:
        return None if self.ep is None else np.cumsum(self.ep)

    def to_csv(self) -> str:
        columns = ["n", "err", "E_n", "LEP_n", "UEP_n"]
        if self.ep is not None:
            columns.append("EP_n")
        lines = [",".join(columns)]
        E, L, U = self.cumulative_errors, self.cumulative_lower, self.cumulative_upper
        EP = self.cumulative_ep
        for i in range(self.n_steps):
            row = f"{i + 1},{self.err[i]},{E[i]},{L[i]:.10g},{U[i]:.10g}"
            if EP is not None:
                row += f",{EP[i]:.10g}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def run_online(data: Dataset, estimator, initial_size: int = 5) -> OnlineTrace:
    """Prequential evaluation in the dataset's given order.

    At step i the estimator is refitted on all revealed examples and
    predicts example i; the label is then revealed.  Venn predictors
    contribute genuine probability bounds; anything else contributes the
    point probability of its non-predicted class.
    """
    if data.y is None:
        raise ValueError("run_online requires labeled data")
    if initial_size < 1:
        raise ValueError("initial_size must be at least 1")
    if initial_size >= data.n_examples:
        raise ValueError("initial_size leaves nothing to predict")
    X, y = data.X, data.y
    is_venn = hasattr(estimator, "predict_venn")

    err, lower, upper, ep = [], [], [], []
    with threadpool_limits(limits=1):
        for i in range(initial_size, data.n_examples):
            est = clone(estimator).fit(X[:i], y[:i])
            if is_venn:
                out = est.predict_venn(X[i:i + 1])[0]
                prediction = out.prediction
                lower.append(out.error_interval[0])
                upper.append(out.error_interval[1])
            else:
                p = float(est.predict_proba(X[i:i + 1])[0, 1])
                prediction = int(est.predict(X[i:i + 1])[0])
                q = abs(prediction - p)
                lower.append(q)
                upper.append(q)
                ep.append(q)
            err.append(int(prediction != y[i]))

    return OnlineTrace(err=np.array(err), lower=np.array(lower), upper=np.array(upper),
                       ep=np.array(ep) if ep else None)
