"""Two-layer Bengali question classification with classifier combination."""
from .corpus import (ExplicitSplit, QuestionRecord, RatioSplit, Token, cohen_kappa, corpus_stats,
                     load_corpus, split_corpus)
from .ensembles import (Approach, adaboost_train, bagging_train, fit, majority_vote,
                        stacking_train, voting_train)
from .evaluation import (EvaluationReport, GridSpec, accuracy, evaluate, fine_grained_eval,
                         run_grid, size_sweep)
from .features import FeatureConfig, FeatureIndex, build_feature_index, extract, vectorize
from .learners import Dataset, LearnerSpec, train
from .synth import SynthSpec, benchmark_corpus, bundled_sample, generate_corpus, table2_corpus
from .taxonomy import Label, Taxonomy, coarse_classes, fine_classes, validate_label

__version__ = "0.1.0"
