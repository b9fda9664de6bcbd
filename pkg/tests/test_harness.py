import math

import numpy as np
import pytest
from sklearn.base import BaseEstimator, ClassifierMixin

from vennpred.dataset import Dataset
from vennpred.harness import BatchPlan, OnlineTrace, run_batch, run_online
from vennpred.venn import VennOutput


class PrevalencePredictor(BaseEstimator, ClassifierMixin):
    """Outputs its training prevalence for every example."""

    def fit(self, X, y):
        self.p_ = float(np.mean(y))
        return self

    def predict_proba(self, X):
        p = np.full(len(X), self.p_)
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return np.full(len(X), int(self.p_ > 0.5), dtype=np.int64)


class RecordingPredictor(PrevalencePredictor):
    """Tracks which rows it was asked to predict (row id = first feature)."""

    seen: list = []

    def predict_proba(self, X):
        RecordingPredictor.seen.extend(np.asarray(X)[:, 0].astype(int).tolist())
        return super().predict_proba(X)


class MeanFeaturePredictor(BaseEstimator, ClassifierMixin):
    """p depends on the training rows, so fold splits are visible."""

    def fit(self, X, y):
        self.p_ = float(np.clip(0.5 + np.mean(X), 0.05, 0.95))
        return self

    def predict_proba(self, X):
        p = np.full(len(X), self.p_)
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return np.full(len(X), int(self.p_ > 0.5), dtype=np.int64)


class VacuousVenn(BaseEstimator, ClassifierMixin):
    """Interval [0, 1] always: bounds are trivially valid."""

    def fit(self, X, y):
        self.fitted_ = True
        return self

    def predict_venn(self, X):
        return [VennOutput(dist=((1.0, 0.0), (0.0, 1.0)), mean_p1=0.5, prediction=0,
                           pred_interval=(0.0, 1.0), error_interval=(0.0, 1.0))
                for _ in range(len(X))]

    def predict_proba(self, X):
        return np.full((len(X), 2), 0.5)

    def predict(self, X):
        return np.zeros(len(X), dtype=np.int64)


class OracleVenn(VacuousVenn):
    """Knows the labels (last feature) and predicts them with tight bounds."""

    def predict_venn(self, X):
        outs = []
        for row in np.asarray(X):
            label = int(row[-1])
            outs.append(VennOutput(dist=((1.0, 0.0), (1.0, 0.0)), mean_p1=float(label),
                                   prediction=label, pred_interval=(0.98, 1.0),
                                   error_interval=(0.0, 0.02)))
        return outs


def balanced_dataset(n=20, dim=2, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dim))
    y = np.array([0, 1] * (n // 2))
    return Dataset(X, y)


class TestRunBatch:
    def test_prevalence_predictor_closed_form_ce(self):
        # Balanced 20-example set: every stratified training fold is
        # balanced too, so the predictor always outputs 0.5 and the pooled
        # cross-entropy is exactly N*ln(2).
        data = balanced_dataset(20)
        plan = BatchPlan(folds=10, repeats=1, seed=0)
        result = run_batch(data, PrevalencePredictor(), plan)
        assert result.pooled.cross_entropy == pytest.approx(20 * math.log(2))
        assert result.pooled.brier == pytest.approx(0.25)
        assert result.pooled.reliability == pytest.approx(0.0)

    def test_leave_one_out_predicts_each_example_once(self):
        n = 10
        X = np.column_stack([np.arange(n, dtype=float), np.zeros(n)])
        data = Dataset(X, np.array([0, 1] * 5))
        RecordingPredictor.seen = []
        run_batch(data, RecordingPredictor(), BatchPlan(folds=n, repeats=1))
        assert sorted(RecordingPredictor.seen) == list(range(n))

    def test_pooled_count(self):
        data = balanced_dataset(12)
        plan = BatchPlan(folds=3, repeats=4)
        result = run_batch(data, PrevalencePredictor(), plan)
        assert result.probs.shape == (48,)
        assert len(result.per_run) == 4

    def test_worker_count_does_not_change_result(self):
        data = balanced_dataset(16, seed=2)
        r1 = run_batch(data, PrevalencePredictor(), BatchPlan(folds=4, repeats=2, seed=3, workers=1))
        r2 = run_batch(data, PrevalencePredictor(), BatchPlan(folds=4, repeats=2, seed=3, workers=2))
        np.testing.assert_array_equal(r1.probs, r2.probs)
        assert r1.pooled == r2.pooled

    def test_same_seed_same_result(self):
        data = balanced_dataset(16, seed=4)
        r1 = run_batch(data, PrevalencePredictor(), BatchPlan(folds=4, repeats=3, seed=9))
        r2 = run_batch(data, PrevalencePredictor(), BatchPlan(folds=4, repeats=3, seed=9))
        np.testing.assert_array_equal(r1.probs, r2.probs)

    def test_different_seeds_change_folds(self):
        data = Dataset(np.random.default_rng(5).normal(size=(30, 2)),
                       np.array([0, 1] * 15))
        r1 = run_batch(data, MeanFeaturePredictor(), BatchPlan(folds=3, repeats=1, seed=0))
        r2 = run_batch(data, MeanFeaturePredictor(), BatchPlan(folds=3, repeats=1, seed=1))
        assert not np.array_equal(r1.probs, r2.probs)

    def test_class_smaller_than_folds(self):
        X = np.zeros((12, 2))
        y = np.array([1] * 3 + [0] * 9)
        with pytest.raises(ValueError, match="class smaller than fold count"):
            run_batch(Dataset(X, y), PrevalencePredictor(), BatchPlan(folds=5, repeats=1))

    def test_requires_labels(self):
        with pytest.raises(ValueError, match="label"):
            run_batch(Dataset(np.zeros((8, 2))), PrevalencePredictor(), BatchPlan())

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            BatchPlan(folds=1)
        with pytest.raises(ValueError):
            BatchPlan(repeats=0)


class TestRunOnline:
    def test_vacuous_bounds(self):
        data = balanced_dataset(12, seed=6)
        trace = run_online(data, VacuousVenn(), initial_size=4)
        assert trace.n_steps == 8
        np.testing.assert_array_equal(trace.cumulative_lower, 0.0)
        np.testing.assert_array_equal(trace.cumulative_upper, np.arange(1, 9))
        E = trace.cumulative_errors
        assert ((trace.cumulative_lower <= E) & (E <= trace.cumulative_upper)).all()

    def test_perfect_predictor(self):
        rng = np.random.default_rng(7)
        y = rng.integers(0, 2, size=15)
        X = np.column_stack([rng.normal(size=15), y.astype(float)])
        trace = run_online(Dataset(X, y), OracleVenn(), initial_size=5)
        assert trace.cumulative_errors[-1] == 0
        assert (trace.cumulative_lower <= 0.0 + 1e-12).all()

    def test_raw_classifier_records_ep(self):
        data = balanced_dataset(10, seed=8)
        trace = run_online(data, PrevalencePredictor(), initial_size=4)
        assert trace.ep is not None
        # The prevalence of the revealed prefix never exceeds 0.5 here, so
        # the prediction is always 0 and ep = |yhat - p| = p.
        prefix_prev = [data.y[:i].mean() for i in range(4, 10)]
        np.testing.assert_allclose(trace.ep, prefix_prev)
        np.testing.assert_allclose(trace.cumulative_ep, trace.cumulative_lower)

    def test_cumulative_sums_exact(self):
        data = balanced_dataset(14, seed=9)
        trace = run_online(data, VacuousVenn(), initial_size=3)
        np.testing.assert_array_equal(trace.cumulative_errors,
                                      [int(sum(trace.err[:i + 1])) for i in range(trace.n_steps)])

    def test_initial_size_validation(self):
        data = balanced_dataset(8)
        with pytest.raises(ValueError):
            run_online(data, VacuousVenn(), initial_size=0)
        with pytest.raises(ValueError):
            run_online(data, VacuousVenn(), initial_size=8)


class TestOnlineTrace:
    def test_csv_venn_columns(self):
        trace = OnlineTrace(err=[1, 0], lower=[0.1, 0.2], upper=[0.3, 0.4])
        lines = trace.to_csv().strip().split("\n")
        assert lines[0] == "n,err,E_n,LEP_n,UEP_n"
        assert lines[1].startswith("1,1,1,0.1,0.3")
        assert len(lines) == 3

    def test_csv_raw_columns(self):
        trace = OnlineTrace(err=[1], lower=[0.2], upper=[0.2], ep=[0.2])
        lines = trace.to_csv().strip().split("\n")
        assert lines[0] == "n,err,E_n,LEP_n,UEP_n,EP_n"

    def test_bound_ordering_enforced(self):
        with pytest.raises(ValueError, match="bounds"):
            OnlineTrace(err=[0], lower=[0.5], upper=[0.4])

    def test_error_values_enforced(self):
        with pytest.raises(ValueError, match="err"):
            OnlineTrace(err=[2], lower=[0.1], upper=[0.2])
