"""Ensemble-size sweep and per-class fine-grained accuracy."""
from qclf import corpus as qc
from qclf import evaluation as ev
from qclf.ensembles import Approach
from qclf.features import FeatureConfig
from qclf.learners import LearnerSpec
from qclf.synth import benchmark_corpus

train, test = qc.split_corpus(benchmark_corpus(seed=1, n=800), qc.RatioSplit(0.7, seed=1))
prep = ev.prepare(train, test, FeatureConfig.from_name("fl+fs+fm"))

curve = ev.size_sweep("bagging", LearnerSpec("DT"), prep.train, prep.X_test, prep.y_test,
                      range(1, 21))
for size, acc in curve.points:
    print(f"bagging size {size:>2}: {100 * acc:6.2f}")
print("stable from size", curve.stable_size)

for mode in (ev.GOLD_PARTITION, ev.PIPELINED):
    report = ev.fine_grained_eval(train, test, Approach("individual", "DT"), mode=mode)
    print(f"\nfine-grained accuracy, {mode}")
    print(report.to_table())
