import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qclf import corpus as qc
from qclf.errors import (CorpusError, DegenerateMarginals, DuplicateId, InvalidLabel,
                         MissingSplitTag, ParseError)
from qclf.taxonomy import coarse_classes

from conftest import make_record


def _line(rid, coarse="PER", fine="INDIVIDUAL", split=None, text="ke gOdZa ?"):
    toks = [{"form": w, "pos": "WQ" if w == "ke" else ("SYM" if w == "?" else "NN"),
             "chunk": "O", "ne": None} for w in text.split()]
    return json.dumps({"id": rid, "text": text, "tokens": toks, "end_marker": text[-1],
                       "coarse": coarse, "fine": fine, "split": split})


class TestLoad:
    def test_order_preserved(self):
        data = "\n".join(_line(i) for i in ("c", "a", "b")).encode()
        assert [r.id for r in qc.load_corpus(data)] == ["c", "a", "b"]

    def test_stream_and_path(self, tmp_path):
        data = _line("x") + "\n"
        p = tmp_path / "c.jsonl"
        p.write_text(data)
        assert qc.load_corpus(p)[0].id == "x"
        assert qc.load_corpus(io.BytesIO(data.encode()))[0].id == "x"

    def test_mismatched_fine(self):
        with pytest.raises(InvalidLabel):
            qc.load_corpus(_line("x", "METH", "CITY").encode())

    def test_duplicate_id(self):
        with pytest.raises(DuplicateId):
            qc.load_corpus((_line("x") + "\n" + _line("x")).encode())

    def test_parse_error_names_line(self):
        with pytest.raises(ParseError) as err:
            qc.load_corpus((_line("x") + "\n{oops\n").encode())
        assert err.value.line == 2

    def test_end_marker_must_close(self):
        bad = json.loads(_line("x"))
        bad["end_marker"] = "|"
        with pytest.raises(CorpusError):
            qc.load_corpus(json.dumps(bad).encode())

    def test_validate_lists_every_problem(self):
        data = "\n".join([_line("a"), "{", _line("b", "METH", "CITY"), _line("a")]).encode()
        problems = qc.validate_corpus(data)
        assert [ln for ln, _ in problems] == [2, 3, 4]

    def test_sample_has_person_example(self, sample_by_text):
        r = sample_by_text["ke gOdZa prawiRTA karena ?"]
        assert r.label.coarse == "PER"

    def test_dump_round_trip(self, sample):
        text = qc.dump_corpus(sample)
        again = qc.load_corpus(text.encode())
        assert again == sample
        assert qc.dump_corpus(again) == text


class TestSplit:
    def test_explicit_reference_counts(self):
        from qclf.synth import table2_corpus
        train, test = qc.split_corpus(table2_corpus(seed=0), qc.ExplicitSplit())
        assert (len(train), len(test), len(train) + len(test)) == (769, 331, 1100)

    def test_explicit_needs_tags(self):
        with pytest.raises(MissingSplitTag):
            qc.split_corpus([make_record("a", "ke/WQ ?/SYM")], qc.ExplicitSplit())

    def test_ratio_ten_records(self):
        recs = [make_record(f"r{i}", "ke/WQ ?/SYM") for i in range(10)]
        train, test = qc.split_corpus(recs, qc.RatioSplit(0.7, seed=1, stratified=True))
        assert (len(train), len(test)) == (7, 3)

    def test_ratio_deterministic_and_order_free(self, bench_records):
        a = qc.split_corpus(bench_records, qc.RatioSplit(0.7, 3))
        b = qc.split_corpus(list(reversed(bench_records)), qc.RatioSplit(0.7, 3))
        assert {r.id for r in a[0]} == {r.id for r in b[0]}

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            qc.RatioSplit(1.0)

    @given(n=st.integers(1, 60), frac=st.floats(0.05, 0.95), seed=st.integers(0, 2**16),
           stratified=st.booleans())
    def test_partition_property(self, n, frac, seed, stratified):
        classes = coarse_classes()
        recs = [make_record(f"r{i:03d}", "ke/WQ ?/SYM", classes[(i * 7) % 9]) for i in range(n)]
        train, test = qc.split_corpus(recs, qc.RatioSplit(frac, seed, stratified))
        ids_tr, ids_te = {r.id for r in train}, {r.id for r in test}
        assert ids_tr | ids_te == {r.id for r in recs}
        assert not ids_tr & ids_te
        assert len(train) == int(np.floor(frac * n))


class TestStats:
    def test_manifest_person_row(self):
        m = qc.load_manifest()
        assert m["PER"] == (172, 90)
        assert sum(tr for tr, _ in m.values()) == 769
        assert sum(te for _, te in m.values()) == 331

    def test_empty_test(self, sample):
        d = qc.corpus_stats(sample, [])
        assert all(v == 0 for v in d.test.values())
        assert d.totals == (len(sample), 0, len(sample))

    @given(st.lists(st.tuples(st.sampled_from(coarse_classes()), st.booleans()), max_size=50))
    def test_totals_property(self, spec):
        recs = [make_record(f"r{i}", "ke/WQ ?/SYM", c) for i, (c, _) in enumerate(spec)]
        tr = [r for r, (_, t) in zip(recs, spec) if t]
        te = [r for r, (_, t) in zip(recs, spec) if not t]
        d = qc.corpus_stats(tr, te)
        assert d.totals == (len(tr), len(te), len(recs))
        for c in coarse_classes():
            assert d.overall(c) == d.train[c] + d.test[c]

    def test_table_layout(self):
        from qclf.synth import table2_corpus
        d = qc.corpus_stats(*qc.split_corpus(table2_corpus(0), qc.ExplicitSplit()))
        lines = d.to_table().splitlines()
        assert lines[1].split() == ["Person", "172", "90", "262"]
        assert lines[-1].split() == ["Total", "769", "331", "1100"]


def _kappa_oracle(a, b):
    # textbook float formula
    n = len(a)
    labels = set(a) | set(b)
    po = sum(x == y for x, y in zip(a, b)) / n
    pe = sum((a.count(c) / n) * (b.count(c) / n) for c in labels)
    return (po - pe) / (1 - pe)


class TestKappa:
    def test_identical(self):
        assert qc.cohen_kappa([("PER", "PER"), ("LOC", "LOC")]) == 1.0

    def test_single_label_identical(self):
        assert qc.cohen_kappa([("PER", "PER")] * 5) == 1.0

    def test_confusion_counts(self):
        pairs = [("X", "X")] * 45 + [("X", "Y")] * 5 + [("Y", "X")] * 5 + [("Y", "Y")] * 45
        assert qc.cohen_kappa(pairs) == pytest.approx(0.8, abs=1e-12)

    def test_independent_uniform(self):
        rng = np.random.default_rng(12345)
        a = rng.integers(0, 9, 10000)
        b = rng.integers(0, 9, 10000)
        assert abs(qc.cohen_kappa(list(zip(a.tolist(), b.tolist())))) <= 0.05

    def test_full_chance_agreement_only_when_identical(self):
        # p_e = 1 forces both annotators onto one shared label, so p_o = 1 as well
        assert qc.cohen_kappa([("A", "A")] * 7) == 1.0

    def test_mapping_and_triples(self):
        m = {"q1": ("A", "B"), "q2": ("A", "A"), "q3": ("B", "B")}
        t = [("q1", "A", "B"), ("q2", "A", "A"), ("q3", "B", "B")]
        assert qc.cohen_kappa(m) == qc.cohen_kappa(t)

    @given(st.lists(st.tuples(st.sampled_from("ABC"), st.sampled_from("ABC")), min_size=1,
                    max_size=40))
    def test_symmetric_and_matches_oracle(self, pairs):
        a = [p[0] for p in pairs]
        b = [p[1] for p in pairs]
        try:
            k = qc.cohen_kappa(pairs)
        except DegenerateMarginals:
            return
        assert k == pytest.approx(qc.cohen_kappa([(y, x) for x, y in pairs]), abs=1e-12)
        if k != 1.0:
            assert k == pytest.approx(_kappa_oracle(a, b), abs=1e-9)
        assert -1 - 1e-12 <= k <= 1

    def test_files(self, tmp_path):
        pa, pb = tmp_path / "a.tsv", tmp_path / "b.tsv"
        pa.write_text("q1\tPER\nq2\tLOC\n")
        pb.write_text("q2\tLOC\nq1\tPER\n")
        assert qc.cohen_kappa(qc.merge_annotations(pa, pb)) == 1.0
        pp = tmp_path / "p.tsv"
        pp.write_text("q1\tPER\tLOC\nq2\tLOC\tLOC\n")
        assert qc.load_annotation_pairs(pp) == {"q1": ("PER", "LOC"), "q2": ("LOC", "LOC")}
