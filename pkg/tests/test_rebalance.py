from collections import Counter

import numpy as np
import pytest

from vennpred.rebalance import RebalanceDegeneracyWarning, rebalance


def imbalanced(n_pos, n_neg, seed=0, dim=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_pos + n_neg, dim))
    y = np.array([1] * n_pos + [0] * n_neg)
    perm = rng.permutation(len(y))
    return X[perm], y[perm]


def as_multiset(X, y):
    return Counter((tuple(row), lab) for row, lab in zip(X.tolist(), y.tolist()))


class TestOversampling:
    def test_counts_small(self):
        X, y = imbalanced(3, 10)
        Xb, yb = rebalance(X, y, "mo")
        assert len(yb) == 20
        assert (yb == 1).sum() == 10 and (yb == 0).sum() == 10

    def test_counts_paper_scale(self):
        X, y = imbalanced(30, 132, seed=1)
        _, yb = rebalance(X, y, "mo")
        assert len(yb) == 264

    def test_originals_all_present_and_copies_minority(self):
        X, y = imbalanced(3, 10, seed=2)
        Xb, yb = rebalance(X, y, "mo")
        original = as_multiset(X, y)
        balanced = as_multiset(Xb, yb)
        extra = balanced - original
        assert not original - balanced  # superset as multisets
        assert all(lab == 1 for _, lab in extra)
        minority_rows = {tuple(r) for r, lab in zip(X.tolist(), y.tolist()) if lab == 1}
        assert all(row in minority_rows for row, _ in extra)


class TestUndersampling:
    def test_counts(self):
        X, y = imbalanced(3, 10, seed=3)
        Xb, yb = rebalance(X, y, "mu")
        assert len(yb) == 6
        assert (yb == 1).sum() == 3

    def test_submultiset(self):
        X, y = imbalanced(4, 9, seed=4)
        Xb, yb = rebalance(X, y, "mu")
        assert not as_multiset(Xb, yb) - as_multiset(X, y)

    def test_minority_fully_retained(self):
        X, y = imbalanced(3, 10, seed=5)
        Xb, yb = rebalance(X, y, "mu")
        wanted = Counter(tuple(r) for r, lab in zip(X.tolist(), y.tolist()) if lab == 1)
        got = Counter(tuple(r) for r, lab in zip(Xb.tolist(), yb.tolist()) if lab == 1)
        assert wanted == got


class TestCommon:
    def test_none_passthrough(self):
        X, y = imbalanced(3, 5)
        Xb, yb = rebalance(X, y, "none")
        assert Xb is X and yb is y

    @pytest.mark.parametrize("mode", ["mo", "mu"])
    def test_balanced_input_unchanged(self, mode):
        X, y = imbalanced(5, 5, seed=6)
        Xb, yb = rebalance(X, y, mode)
        np.testing.assert_array_equal(Xb, X)
        np.testing.assert_array_equal(yb, y)

    @pytest.mark.parametrize("mode", ["mo", "mu"])
    def test_permutation_invariant(self, mode):
        X, y = imbalanced(4, 11, seed=7)
        perm = np.random.default_rng(1).permutation(len(y))
        Xa, ya = rebalance(X, y, mode)
        Xb, yb = rebalance(X[perm], y[perm], mode)
        np.testing.assert_array_equal(Xa, Xb)
        np.testing.assert_array_equal(ya, yb)

    @pytest.mark.parametrize("mode", ["mo", "mu"])
    def test_empty_class_degeneracy(self, mode):
        X = np.zeros((4, 2))
        y = np.zeros(4, dtype=int)
        with pytest.warns(RebalanceDegeneracyWarning):
            Xb, yb = rebalance(X, y, mode)
        np.testing.assert_array_equal(Xb, X)

    def test_seed_material_changes_draw(self):
        X, y = imbalanced(3, 30, seed=8)
        _, _ = rebalance(X, y, "mo")
        Xa, _ = rebalance(X, y, "mo", seed_material=0)
        Xb, _ = rebalance(X, y, "mo", seed_material=1)
        assert not np.array_equal(Xa, Xb)

    def test_requires_labels(self):
        with pytest.raises(ValueError):
            rebalance(np.zeros((3, 2)), None, "mo")

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            rebalance(np.zeros((3, 2)), np.zeros(3, dtype=int), "smote")
