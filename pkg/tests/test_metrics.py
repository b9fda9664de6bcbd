import itertools
import math

import numpy as np
import pytest

from vennpred.metrics import (
    MetricReport,
    brier,
    confusion_rates,
    cross_entropy,
    miscalibration_pvalue,
    poisson_binomial_pmf,
    reliability,
)


def enumerate_pmf(q):
    """Poisson-binomial pmf by exhaustive enumeration of all outcomes."""
    n = len(q)
    pmf = np.zeros(n + 1)
    for bits in itertools.product((0, 1), repeat=n):
        prob = 1.0
        for b, qi in zip(bits, q):
            prob *= qi if b else (1.0 - qi)
        pmf[sum(bits)] += prob
    return pmf


class TestConfusionRates:
    def test_perfect(self):
        assert confusion_rates([1, 0, 1, 0], [1, 0, 1, 0]) == (1.0, 1.0)

    def test_all_positive_predictions(self):
        sens, spec = confusion_rates([1, 1, 1, 1], [1, 1, 0, 0])
        assert (sens, spec) == (1.0, 0.0)

    def test_partial(self):
        sens, spec = confusion_rates([1, 0, 0, 0], [1, 1, 0, 0])
        assert (sens, spec) == (0.5, 1.0)

    def test_missing_class(self):
        with pytest.raises(ValueError, match="undefined rate"):
            confusion_rates([1, 1], [1, 1])


class TestCrossEntropy:
    def test_all_half(self):
        assert cross_entropy([0.5] * 10, [1, 0] * 5) == pytest.approx(10 * math.log(2))

    def test_confident_correct(self):
        assert cross_entropy([1.0, 0.0], [1, 0]) == pytest.approx(0.0, abs=1e-10)

    def test_exp_example(self):
        assert cross_entropy([math.exp(-1)], [1]) == pytest.approx(1.0)

    def test_monotone_in_probability(self):
        grid = np.linspace(0.05, 0.95, 20)
        pos = [cross_entropy([p], [1]) for p in grid]
        neg = [cross_entropy([p], [0]) for p in grid]
        assert all(a > b for a, b in zip(pos, pos[1:]))
        assert all(a < b for a, b in zip(neg, neg[1:]))


class TestBrier:
    def test_all_half(self):
        assert brier([0.5] * 4, [1, 0, 1, 0]) == 0.25

    def test_perfect(self):
        assert brier([1.0, 0.0], [1, 0]) == 0.0

    def test_single(self):
        assert brier([0.8], [0]) == pytest.approx(0.64)

    def test_monotone_in_probability(self):
        grid = np.linspace(0.05, 0.95, 20)
        pos = [brier([p], [1]) for p in grid]
        assert all(a > b for a, b in zip(pos, pos[1:]))


class TestReliability:
    def test_matched_bin_is_zero(self):
        assert reliability([0.5] * 8, [1, 0] * 4, 20) == 0.0

    def test_single_bad_bin(self):
        assert reliability([0.9] * 5, [0] * 5, 20) == pytest.approx(0.81)

    def test_calibrated_stream_is_small(self):
        rng = np.random.default_rng(0)
        p = rng.random(100_000)
        y = (rng.random(100_000) < p).astype(int)
        assert reliability(p, y, 20) < 0.005

    def test_permutation_invariant(self):
        rng = np.random.default_rng(1)
        p = rng.random(500)
        y = rng.integers(0, 2, size=500)
        perm = rng.permutation(500)
        assert reliability(p, y, 20) == reliability(p[perm], y[perm], 20)

    def test_top_bin_closed(self):
        assert reliability([1.0], [1], 20) == 0.0


class TestPoissonBinomial:
    def test_sums_to_one(self):
        rng = np.random.default_rng(2)
        for n in (1, 7, 40, 157):
            pmf = poisson_binomial_pmf(rng.random(n))
            assert abs(pmf.sum() - 1.0) < 1e-12

    def test_mean(self):
        rng = np.random.default_rng(3)
        q = rng.random(60)
        pmf = poisson_binomial_pmf(q)
        mean = float(np.arange(len(pmf)) @ pmf)
        assert abs(mean - q.sum()) < 1e-9

    def test_matches_enumeration(self):
        rng = np.random.default_rng(4)
        for n in (1, 3, 6, 10):
            q = rng.random(n)
            np.testing.assert_allclose(poisson_binomial_pmf(q), enumerate_pmf(q),
                                       atol=1e-12)

    def test_matches_binomial(self):
        from scipy.stats import binom
        pmf = poisson_binomial_pmf([0.3] * 25)
        np.testing.assert_allclose(pmf, binom.pmf(np.arange(26), 25, 0.3), atol=1e-12)

    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            poisson_binomial_pmf([0.5, 1.2])


class TestMiscalibrationPvalue:
    def test_three_halves(self):
        # E = 3 vs expectation 1.5: only counts {0, 3} deviate that far,
        # each with probability 1/8.
        assert miscalibration_pvalue([0.5] * 3, [1, 1, 1]) == pytest.approx(0.25)

    def test_zero_deviation(self):
        assert miscalibration_pvalue([0.5, 0.5], [1, 0]) == 1.0

    def test_matches_enumeration(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 9))
            q = rng.random(n)
            errs = rng.integers(0, 2, size=n)
            pmf = enumerate_pmf(q)
            expected = q.sum()
            dev = abs(errs.sum() - expected)
            want = sum(p for k, p in enumerate(pmf) if abs(k - expected) >= dev - 1e-12)
            got = miscalibration_pvalue(q, errs)
            assert got == pytest.approx(min(1.0, want), abs=1e-12)

    def test_extreme_miscalibration_is_tiny(self):
        # Confident low error probabilities but every prediction wrong.
        q = [0.05] * 60
        assert miscalibration_pvalue(q, [1] * 60) < 1e-30

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            miscalibration_pvalue([0.5], [2])
        with pytest.raises(ValueError):
            miscalibration_pvalue([1.5], [1])


class TestMetricReport:
    def test_from_predictions(self):
        probs = np.array([0.9, 0.2, 0.7, 0.1])
        preds = np.array([1, 0, 1, 0])
        labels = np.array([1, 0, 0, 1])
        rep = MetricReport.from_predictions(probs, preds, labels)
        assert rep.sensitivity == 0.5 and rep.specificity == 0.5
        assert rep.brier == pytest.approx(brier(probs, labels))

    def test_serialization(self):
        rep = MetricReport(0.75, 0.84, 558.92, 0.0988, 0.0041)
        record = rep.to_record()
        assert record["cross_entropy"] == 558.92
        assert "sensitivity=0.75" in rep.to_key_values()
        row = rep.to_csv_row()
        assert len(row.split(",")) == len(MetricReport.csv_header().split(","))
