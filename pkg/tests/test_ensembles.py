import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qclf import ensembles as qe
from qclf import serialize
from qclf.errors import DuplicateLearnerKind, NoUsableRound
from qclf.learners import KINDS, Dataset, LearnerSpec, Model, Prediction

from conftest import random_dataset


class Const(Model):
    """Always predicts one label."""

    kind = "CONST"

    def __init__(self, label, K=3):
        super().__init__(K, "", 1)
        self.label = label

    def predict_scores(self, X):
        s = np.zeros((len(np.atleast_2d(X)), self.K))
        s[:, self.label] = 1.0
        return s


X1 = np.zeros((1, 1))
STUMP = LearnerSpec("DT", max_depth=0)


class TestChildSeed:
    def test_deterministic_and_distinct(self):
        assert qe.child_seed(0, 1) == qe.child_seed(0, 1)
        assert len({qe.child_seed(0, i) for i in range(50)}) == 50
        assert qe.child_seed(0, 1) != qe.child_seed(1, 1)
        assert qe.child_seed(0, 1, 0) != qe.child_seed(0, 1, 1)


class TestBagging:
    def test_single_row_single_member(self):
        d = Dataset(np.array([[1.0, 0.0]]), [1], 2)
        model = qe.bagging_train(LearnerSpec("NB"), d, 1)
        assert model.size == 1
        assert model.predict_labels(d.X)[0] == 1

    def test_four_against_three(self):
        members = [Const(2)] * 4 + [Const(0)] * 3
        model = qe.BaggedModel(members, LearnerSpec("NB"), 0)
        assert model.predict_labels(X1)[0] == 2
        np.testing.assert_allclose(model.predict_scores(X1)[0], [3 / 7, 0, 4 / 7])

    def test_tie_goes_to_lowest_label(self):
        model = qe.BaggedModel([Const(2), Const(1)], LearnerSpec("NB"), 0)
        assert model.predict_labels(X1)[0] == 1

    def test_bootstrap_is_n_rows(self):
        rows = qe.bootstrap(50, 3)
        assert len(rows) == 50 and rows.min() >= 0 and rows.max() < 50

    @pytest.mark.parametrize("kind", KINDS)
    def test_prefix_stable(self, kind, bench):
        big = qe.bagging_train(LearnerSpec(kind), bench.train, 6, seed=4)
        small = qe.bagging_train(LearnerSpec(kind), bench.train, 3, seed=4)
        assert serialize.dumps(small) == serialize.dumps(big.truncated(3))

    def test_size_validation(self):
        with pytest.raises(ValueError):
            qe.bagging_train(LearnerSpec("NB"), Dataset(np.ones((2, 1)), [0, 1], 2), 0)


class TestBoosting:
    def test_first_round_beta(self):
        d = Dataset(np.zeros((4, 1)), [0, 0, 0, 1], 2)
        model = qe.adaboost_train(STUMP, d, max_iters=1)
        assert model.epsilons == [0.25]
        assert model.betas[0] == pytest.approx(1 / 3)
        assert model.rounds[0].vote_weight == pytest.approx(math.log(3))
        assert model.halt == qe.MAX_ITERS

    def test_reweighting_after_first_round(self):
        d = Dataset(np.zeros((4, 1)), [0, 0, 0, 1], 2)
        trace = []
        qe.adaboost_train(STUMP, d, max_iters=2, weight_trace=trace)
        np.testing.assert_allclose(trace[0], [0.25] * 4)
        # correct rows scaled by 1/3 then renormalised: the error row carries half the mass
        np.testing.assert_allclose(trace[1], [1 / 6, 1 / 6, 1 / 6, 1 / 2])

    def test_zero_error_halts(self):
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        model = qe.adaboost_train(LearnerSpec("DT", min_leaf=1), Dataset(X, [0, 0, 1, 1], 2), 10)
        assert model.halt == qe.EPSILON_ZERO
        assert model.halt_round == 1 and model.betas == [qe.BETA_MIN]
        assert model.rounds[0].vote_weight == pytest.approx(10 * math.log(10))

    def test_no_usable_round(self):
        d = Dataset(np.zeros((4, 1)), [0, 0, 1, 1], 2)
        with pytest.warns(NoUsableRound):
            model = qe.adaboost_train(STUMP, d, 5)
        assert model.halt == qe.EPSILON_GE_HALF and model.halt_round == 0
        np.testing.assert_array_equal(model.predict_labels(d.X), [0, 0, 0, 0])
        assert "falling back" in model.summary()

    def test_heavier_round_wins(self):
        rounds = [qe.BoostRound(Const(0), 0.25, 1 / 3), qe.BoostRound(Const(1), 0.1, 1 / 9)]
        model = qe.BoostModel(rounds, STUMP, 2, 0, qe.MAX_ITERS)
        assert model.predict_labels(X1)[0] == 1
        np.testing.assert_allclose(model.predict_scores(X1)[0], [1 / 3, 2 / 3, 0])

    @given(st.integers(0, 5000))
    def test_round_invariants(self, seed):
        d = random_dataset(np.random.default_rng(seed), 40, 4, 3)
        trace = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoUsableRound)
            model = qe.adaboost_train(LearnerSpec("NB"), d, 8, seed, weight_trace=trace)
        for D in trace:
            assert D.sum() == pytest.approx(1.0, abs=1e-12)
        for r in model.rounds:
            assert 0 < r.beta < 1 and r.vote_weight > 0
        assert model.halt_round <= 8

    @given(st.integers(0, 5000))
    def test_training_error_bound(self, seed):
        d = random_dataset(np.random.default_rng(seed), 40, 4, 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoUsableRound)
            model = qe.adaboost_train(LearnerSpec("NB"), d, 6, seed)
        if model.halt_round == 0 or model.halt == qe.EPSILON_ZERO:
            return
        err = float(np.mean(model.predict_labels(d.X) != d.y))
        assert err <= model.training_error_bound() + 1e-12

    def test_truncated_matches_shorter_run(self, bench):
        big = qe.adaboost_train(LearnerSpec("NB"), bench.train, 6, seed=2)
        k = min(3, big.halt_round)
        small = qe.adaboost_train(LearnerSpec("NB"), bench.train, k, seed=2)
        np.testing.assert_array_equal(small.predict_labels(bench.X_test),
                                      big.truncated(k).predict_labels(bench.X_test))


class TestStacking:
    def _bases(self, meta):
        return [LearnerSpec(k) for k in KINDS if k != meta]

    def test_meta_dimension(self, bench):
        model = qe.stacking_train(self._bases("NB"), LearnerSpec("NB"), bench.train)
        assert model.meta_dimension == 27
        s = model.predict_scores(bench.X_test)
        np.testing.assert_allclose(s.sum(axis=1), 1.0)

    def test_duplicate_kind(self, bench):
        with pytest.raises(DuplicateLearnerKind):
            qe.stacking_train([LearnerSpec("NB"), LearnerSpec("NB"), LearnerSpec("RI")],
                              LearnerSpec("DT"), bench.train)
        with pytest.raises(DuplicateLearnerKind):
            qe.stacking_train(self._bases("DT"), LearnerSpec("NB"), bench.train)

    def test_tree_meta_and_variants(self, bench):
        for kw in ({}, {"meta_cv_folds": 3}, {"encoding": "proba"}):
            model = qe.stacking_train(self._bases("DT"), LearnerSpec("DT"), bench.train, **kw)
            assert model.meta_dimension == 27
            assert model.predict_labels(bench.X_test).shape == (len(bench.X_test),)

    def test_onehot_meta_features(self):
        Z = qe.meta_features([Const(1), Const(2)], np.zeros((2, 1)))
        np.testing.assert_array_equal(Z, [[0, 1, 0, 0, 0, 1]] * 2)


class TestVoting:
    def test_plurality(self):
        assert qe.majority_vote([3, 3, 1, 2]) == 3

    def test_two_two_tie_uses_priority(self):
        # NB, KNB vote 1; RI, DT vote 2; DT ranks highest
        assert qe.majority_vote([1, 1, 2, 2]) == 2
        assert qe.majority_vote([1, 1, 2, 2], priority=("KNB", "NB", "DT", "RI")) == 1

    def test_all_different(self):
        assert qe.majority_vote([0, 1, 2, 3]) == 3
        assert qe.majority_vote([0, 1, 2, 3], priority=("KNB",)) == 1

    def test_accepts_predictions(self):
        preds = [Prediction(lab, np.zeros(3)) for lab in (0, 0, 2, 1)]
        assert qe.majority_vote(preds) == 0

    @given(st.lists(st.integers(0, 4), min_size=4, max_size=4), st.permutations(range(4)))
    def test_permutation_invariant(self, labels, perm):
        voters = list(KINDS)
        want = qe.majority_vote(labels, voters)
        assert qe.majority_vote([labels[i] for i in perm], [voters[i] for i in perm]) == want

    def test_model_matches_scalar_rule(self, bench):
        model = qe.voting_train(bench.train, [LearnerSpec(k) for k in KINDS])
        votes = model.voter_labels(bench.X_test)
        want = [qe.majority_vote(row.tolist(), list(model.members)) for row in votes]
        np.testing.assert_array_equal(model.predict_labels(bench.X_test), want)

    def test_needs_four_kinds(self, bench):
        with pytest.raises(DuplicateLearnerKind):
            qe.voting_train(bench.train, [LearnerSpec("NB")] * 4)


class TestApproach:
    def test_rows(self):
        rows = qe.table3_rows()
        assert len(rows) == 13
        assert [r.kind for r in rows].count("stacking") == 4
        assert rows[8].label == "Stacking [KNB, RI, DT] -> NB"
        assert rows[-1].base_learners == list(KINDS)

    def test_validation(self):
        with pytest.raises(ValueError):
            qe.Approach("bagging")
        with pytest.raises(ValueError):
            qe.Approach("blending", "NB")

    @pytest.mark.parametrize("row", qe.table3_rows(size=3, max_iters=3) + qe.individual_rows(),
                             ids=lambda r: r.label)
    def test_fit_is_deterministic(self, row, bench):
        a = qe.fit(row, bench.train)
        b = qe.fit(row, bench.train)
        np.testing.assert_array_equal(a.predict_labels(bench.X_test), b.predict_labels(bench.X_test))
