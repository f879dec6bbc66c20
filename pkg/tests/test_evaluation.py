import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qclf import corpus as qc
from qclf import evaluation as ev
from qclf.ensembles import Approach, individual_rows
from qclf.errors import EmptyInput, IndexMismatch, LengthMismatch
from qclf.features import FeatureConfig, build_feature_index
from qclf.learners import LearnerSpec, train
from qclf.synth import benchmark_corpus

from conftest import make_record


class TestAccuracy:
    def test_examples(self):
        assert ev.accuracy(["PER", "LOC", "PER"], ["PER", "PER", "PER"]) == pytest.approx(2 / 3)
        assert ev.accuracy([1], [1]) == 1.0

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            ev.accuracy([1, 2], [1])
        with pytest.raises(EmptyInput):
            ev.accuracy([], [])

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=60))
    def test_counting_oracle(self, pairs):
        p = [a for a, _ in pairs]
        g = [b for _, b in pairs]
        hits = 0
        for a, b in pairs:
            if a == b:
                hits += 1
        assert ev.accuracy(p, g) == hits / len(pairs)
        # one minus normalised Hamming distance
        assert ev.accuracy(p, g) == pytest.approx(1 - np.mean(np.array(p) != np.array(g)))


class TestReport:
    @given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=40))
    def test_invariants(self, pairs):
        p, g = zip(*pairs)
        r = ev.EvaluationReport.from_labels(list(p), list(g), ["A", "B", "C"])
        cm = np.array(r.confusion)
        assert r.total == len(pairs)
        assert r.accuracy == pytest.approx(np.trace(cm) / cm.sum())
        for i, c in enumerate("ABC"):
            want = None if cm[i].sum() == 0 else cm[i, i] / cm[i].sum()
            assert r.per_class[c] == (pytest.approx(want) if want is not None else None)

    def test_json_round_trip(self):
        r = ev.EvaluationReport.from_labels([0, 1, 1], [0, 1, 0], ["A", "B"], {"seed": 3})
        assert ev.EvaluationReport.from_json(r.to_json()) == r
        assert r.to_table().splitlines()[0] == "accuracy: 66.67"

    def test_evaluate(self, bench_records):
        tr, te = qc.split_corpus(bench_records, qc.RatioSplit(0.7, 0))
        cfg = FeatureConfig.from_name("fl")
        prep = ev.prepare(tr, te, cfg)
        model = train(LearnerSpec("NB"), prep.train)
        rep = ev.evaluate(model, te, prep.index, cfg)
        assert rep.accuracy == pytest.approx(np.mean(model.predict_labels(prep.X_test) ==
                                                     prep.y_test))
        other = build_feature_index(te, cfg)
        with pytest.raises(IndexMismatch):
            ev.evaluate(model, te, other, cfg)


class TestSweep:
    def test_plateau_example(self):
        accs = [0.88, 0.905, 0.9127, 0.9127, 0.9127]
        assert ev.detect_stability([2, 4, 6, 8, 10], accs) == 6

    def test_constant_curve(self):
        assert ev.detect_stability([1, 2, 3, 4], [0.5] * 4) == 1

    def test_never_stable(self):
        assert ev.detect_stability([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.4]) is None

    @given(st.lists(st.floats(0, 1), min_size=3, max_size=20), st.floats(0, 0.05))
    def test_predicate(self, accs, tol):
        sizes = list(range(1, len(accs) + 1))
        s = ev.detect_stability(sizes, accs, tol, 3)
        for i in range(len(accs) - 2):
            ok = max(accs[i:i + 3]) - min(accs[i:i + 3]) <= tol + 1e-12
            if s is not None and sizes[i] == s:
                assert ok
                break
            assert not ok

    def test_bagging_curve(self, bench):
        c = ev.size_sweep("bagging", LearnerSpec("NB"), bench.train, bench.X_test, bench.y_test,
                          range(1, 6))
        assert c.sizes == [1, 2, 3, 4, 5]
        assert all(0 <= a <= 1 for a in c.accuracies)
        assert c.to_csv().splitlines()[0] == "size,accuracy"

    def test_boosting_curve_stops_at_halt(self, bench):
        from qclf.ensembles import adaboost_train
        c = ev.size_sweep("boosting", LearnerSpec("DT"), bench.train, bench.X_test, bench.y_test,
                          range(1, 16), seed=0)
        full = adaboost_train(LearnerSpec("DT"), bench.train, 15, 0)
        assert len(c.points) == full.halt_round and c.halt == full.halt

    def test_bad_sizes(self, bench):
        with pytest.raises(ValueError):
            ev.size_sweep("bagging", LearnerSpec("NB"), bench.train, bench.X_test, bench.y_test,
                          [3, 2])
        with pytest.raises(ValueError):
            ev.size_sweep("voting", LearnerSpec("NB"), bench.train, bench.X_test, bench.y_test,
                          [1])


@pytest.fixture(scope="module")
def small_split():
    return qc.split_corpus(benchmark_corpus(seed=1, n=250), qc.RatioSplit(0.7, 1))


class TestGrid:
    def test_individual_cells(self, small_split):
        spec = ev.GridSpec(feature_sets=["fl"], rows=individual_rows())
        res = ev.run_grid(spec, *small_split)
        assert len(res.cells) == 4 and all(c.error is None for c in res.cells)
        for i, row in enumerate(spec.rows):
            prep = ev.prepare(*small_split, FeatureConfig.from_name("fl"))
            from qclf.ensembles import fit
            m = fit(row, prep.train)
            assert res.value(i, "fl") == pytest.approx(np.mean(m.predict_labels(prep.X_test) ==
                                                               prep.y_test))

    def test_row_order_does_not_change_values(self, small_split):
        rows = individual_rows()
        a = ev.run_grid(ev.GridSpec(["fl"], rows), *small_split)
        b = ev.run_grid(ev.GridSpec(["fl"], rows[::-1]), *small_split)
        for i in range(4):
            assert a.value(i, "fl") == b.value(3 - i, "fl")

    def test_deterministic_and_formats(self, small_split):
        spec = ev.GridSpec(["fl", "fl+fs"], [Approach("voting"), Approach("bagging", "NB", 3)],
                           seeds=(0, 1))
        a = ev.run_grid(spec, *small_split)
        b = ev.run_grid(spec, *small_split)
        assert a.to_csv() == b.to_csv()
        lines = a.to_csv().splitlines()
        assert lines[0] == "approach,base_learner,model_learner,feature_set,seed,accuracy,error"
        assert len(lines) == 1 + 2 * 2 * 2
        table = a.to_table()
        assert "fL+fS" in table and table.splitlines()[-1] == "seeds: 0, 1"

    def test_parallel_matches_serial(self, small_split):
        spec = ev.GridSpec(["fl"], individual_rows()[:2])
        assert ev.run_grid(spec, *small_split, jobs=2).to_csv() == \
            ev.run_grid(spec, *small_split).to_csv()

    def test_unknown_feature_set(self):
        with pytest.raises(ValueError):
            ev.GridSpec(["fx"])


def _meth(rid, fine, word, split=None):
    return make_record(rid, f"ke/WQ {word}/NN/B-NP ?/SYM", f"METH:{fine}", split)


class TestFineGrained:
    def test_single_coarse_class(self, sample):
        per = [r for r in sample if r.label.coarse == "PER"]
        rep = ev.fine_grained_eval(per, per, Approach("individual", "NB"))
        assert [r.coarse for r in rep.populated] == ["PER"]
        assert len(rep.rows) == 9
        assert rep.row("LOC").note == "no training questions"

    def test_perfect_learner(self):
        train_ = [_meth(f"t{i}", "NATURAL" if i % 2 else "ARTIFICIAL",
                        "baN" if i % 2 else "yanw") for i in range(12)]
        test_ = [_meth(f"e{i}", "NATURAL" if i % 2 else "ARTIFICIAL",
                       "baN" if i % 2 else "yanw") for i in range(4)]
        rep = ev.fine_grained_eval(train_, test_, Approach("individual", "DT"))
        assert rep.row("METH").accuracy == 1.0
        assert rep.to_table().splitlines()[0].split() == ["Class", "Accuracy", "Train", "Test"]

    def test_pipelined_never_beats_gold(self, sample):
        tr, te = qc.split_corpus(benchmark_corpus(seed=2, n=300), qc.RatioSplit(0.7, 2))
        a = Approach("individual", "NB")
        gold = ev.fine_grained_eval(tr, te, a)
        pipe = ev.fine_grained_eval(tr, te, a, mode="pipelined")
        for g, p in zip(gold.rows, pipe.rows):
            if g.accuracy is not None:
                assert p.accuracy <= g.accuracy + 1e-12

    def test_coarse_feature_adds_nine_columns(self, sample):
        per = [r for r in sample if r.label.coarse == "PER"]
        with_c = ev.train_fine_model("PER", per, Approach("individual", "NB"),
                                     FeatureConfig.from_name("fl", include_coarse_class=True))[1]
        without = ev.train_fine_model("PER", per, Approach("individual", "NB"),
                                      FeatureConfig.from_name("fl"))[1]
        assert with_c.N == without.N + 9

    def test_bad_mode(self, sample):
        with pytest.raises(ValueError):
            ev.fine_grained_eval(sample, sample, Approach("individual", "NB"), mode="oracle")
