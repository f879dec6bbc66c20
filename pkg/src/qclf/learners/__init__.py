"""Base classifiers: naive Bayes (NB), kernel naive Bayes (KNB), rule induction (RI)
and decision tree (DT) behind one ``train`` / ``predict`` contract."""
from ..errors import EmptyDataset
from .base import (KINDS, Dataset, LearnerSpec, Model, Prediction, argmax_lowest,
                   resample_indices)
from .naive_bayes import (KernelNaiveBayesModel, NaiveBayesModel, kde_density, nb_posterior,
                          train_knb, train_nb)
from .rules import Condition, Rule, RuleModel, foil_gain, grow_rule, prune_rule, train_ri
from .tree import DecisionTreeModel, NoValidSplit, choose_split, information_gain, train_dt

_TRAINERS = {"NB": train_nb, "KNB": train_knb, "RI": train_ri, "DT": train_dt}
NATIVE_WEIGHTS = frozenset({"NB"})


def train(spec: LearnerSpec, data: Dataset) -> Model:
    """Fit a base learner.

    Non-uniform instance weights are honoured natively by NB and through a
    seeded weighted bootstrap for the other learners.  Uniform weights are
    equivalent to no weights.
    """
    if data.n == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if data.has_uniform_weights():
        data = data.unweighted()
    elif spec.kind not in NATIVE_WEIGHTS:
        data = data.subset(resample_indices(data.weights, spec.seed))
    return _TRAINERS[spec.kind](spec, data)


def predict(model: Model, vector) -> Prediction:
    return model.predict(vector)


__all__ = [
    "KINDS", "Dataset", "LearnerSpec", "Model", "Prediction", "train", "predict",
    "nb_posterior", "kde_density", "foil_gain", "grow_rule", "prune_rule", "choose_split",
    "information_gain", "NoValidSplit", "Condition", "Rule", "argmax_lowest",
    "NaiveBayesModel", "KernelNaiveBayesModel", "RuleModel", "DecisionTreeModel",
    "resample_indices",
]
