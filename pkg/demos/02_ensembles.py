"""Compare single learners with the four combination schemes on a synthetic corpus."""
import numpy as np

from qclf import corpus as qc
from qclf import ensembles as qe
from qclf.evaluation import prepare
from qclf.features import FeatureConfig
from qclf.synth import benchmark_corpus

train, test = qc.split_corpus(benchmark_corpus(seed=0, n=600), qc.RatioSplit(0.7, seed=0))
prep = prepare(train, test, FeatureConfig.from_name("fl+fs+fm"))
print(f"{prep.train.n} training / {len(prep.y_test)} test questions, {prep.index.N} features\n")

for approach in qe.individual_rows() + qe.table3_rows():
    model = qe.fit(approach, prep.train)
    acc = np.mean(model.predict_labels(prep.X_test) == prep.y_test)
    print(f"{approach.label:<32} {100 * acc:6.2f}")

boost = qe.adaboost_train(qe.LearnerSpec("DT"), prep.train, max_iters=10)
print("\n" + boost.summary())
