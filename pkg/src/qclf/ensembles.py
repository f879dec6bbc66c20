"""Classifier combination: bagging, AdaBoost.M1, stacking and majority voting."""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DuplicateLearnerKind, NoUsableRound
from .learners import KINDS, Dataset, LearnerSpec, Model, train

#: voting tie-break order, strongest first
DEFAULT_PRIORITY = ("DT", "RI", "KNB", "NB")
#: stored in place of beta when a round has zero weighted error
BETA_MIN = 1e-10

MAX_ITERS, EPSILON_ZERO, EPSILON_GE_HALF = "MAX_ITERS", "EPSILON_ZERO", "EPSILON_GE_HALF"


def child_seed(seed: int, *path: int) -> int:
    """Deterministic sub-seed: ``SeedSequence(seed, spawn_key=path)``.

    Children are prefix-stable: member ``i`` of a size-``k`` ensemble equals
    member ``i`` of any larger ensemble built from the same seed.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def vote_counts(labels: np.ndarray, K: int, weights=None) -> np.ndarray:
    """``labels`` is ``(n, M)``; returns ``(n, K)`` (weighted) vote totals."""
    labels = np.atleast_2d(labels)
    n, M = labels.shape
    w = np.ones(M) if weights is None else np.asarray(weights, dtype=np.float64)
    out = np.zeros((n, K))
    for j in range(M):
        np.add.at(out, (np.arange(n), labels[:, j]), w[j])
    return out


# -- bagging -------------------------------------------------------------------

class BaggedModel(Model):
    kind = "BAGGING"

    def __init__(self, members: Sequence[Model], base: LearnerSpec, seed: int):
        m0 = members[0]
        super().__init__(m0.K, m0.fingerprint, m0.n_features)
        self.members = list(members)
        self.base = base
        self.seed = int(seed)

    @property
    def size(self):
        return len(self.members)

    def truncated(self, size):
        """The model ``bagging_train`` would return with a smaller ``size``."""
        return BaggedModel(self.members[:size], self.base, self.seed)

    def member_labels(self, X):
        return np.column_stack([m.predict_labels(X) for m in self.members])

    def predict_scores(self, X):
        # plurality vote; argmax ties resolve to the lowest class index
        return vote_counts(self.member_labels(X), self.K) / self.size

    def to_dict(self):
        from .serialize import model_to_dict
        return {"base": self.base.to_dict(), "seed": self.seed,
                "members": [model_to_dict(m) for m in self.members]}

    @classmethod
    def from_dict(cls, header, body):
        from .serialize import model_from_dict
        return cls([model_from_dict(m) for m in body["members"]],
                   LearnerSpec.from_dict(body["base"]), body["seed"])


def bootstrap(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.sort(rng.integers(0, n, size=n))


def bagging_train(base: LearnerSpec, data: Dataset, size: int, seed: int = 0) -> BaggedModel:
    """``size`` members, each trained on an n-row bootstrap sample."""
    if size < 1:
        raise ValueError("bagging size must be >= 1")
    members = []
    for i in range(size):
        rows = bootstrap(data.n, child_seed(seed, i, 0))
        spec = base.with_seed(child_seed(seed, i, 1))
        members.append(train(spec, data.subset(rows)))
    return BaggedModel(members, base, seed)


def bagging_predict(model: BaggedModel, vector):
    return model.predict(vector)


# -- boosting ------------------------------------------------------------------

@dataclass
class BoostRound:
    model: Model
    epsilon: float
    beta: float

    @property
    def vote_weight(self):
        return math.log(1.0 / self.beta)


class BoostModel(Model):
    kind = "BOOSTING"

    def __init__(self, rounds: Sequence[BoostRound], base: LearnerSpec, max_iters: int, seed: int,
                 halt: str, fallback: Optional[Model] = None):
        ref = rounds[0].model if rounds else fallback
        super().__init__(ref.K, ref.fingerprint, ref.n_features)
        self.rounds = list(rounds)
        self.base = base
        self.max_iters = int(max_iters)
        self.seed = int(seed)
        self.halt = halt
        self.fallback = fallback

    @property
    def betas(self):
        return [r.beta for r in self.rounds]

    @property
    def epsilons(self):
        return [r.epsilon for r in self.rounds]

    @property
    def halt_round(self):
        """Number of rounds kept."""
        return len(self.rounds)

    def truncated(self, size):
        return BoostModel(self.rounds[:size], self.base, min(self.max_iters, size), self.seed,
                          self.halt if size >= len(self.rounds) else MAX_ITERS, self.fallback)

    def training_error_bound(self):
        return float(np.prod([2 * math.sqrt(r.epsilon * (1 - r.epsilon)) for r in self.rounds]))

    def predict_scores(self, X):
        if not self.rounds:
            return self.fallback.predict_scores(X)
        labels = np.column_stack([r.model.predict_labels(X) for r in self.rounds])
        totals = vote_counts(labels, self.K, [r.vote_weight for r in self.rounds])
        return totals / totals.sum(axis=1, keepdims=True)

    def summary(self):
        lines = [f"boosting {self.base.kind}: {len(self.rounds)} round(s), halt={self.halt}"]
        for t, r in enumerate(self.rounds, 1):
            lines.append(f"  round {t:>3}: epsilon={r.epsilon:.6f} beta={r.beta:.6g} "
                         f"weight={r.vote_weight:.6f}")
        if self.fallback is not None:
            lines.append("  no usable round: falling back to the unweighted base learner")
        return "\n".join(lines)

    def to_dict(self):
        from .serialize import model_to_dict
        return {"base": self.base.to_dict(), "max_iters": self.max_iters, "seed": self.seed,
                "halt": self.halt,
                "rounds": [{"epsilon": r.epsilon, "beta": r.beta, "model": model_to_dict(r.model)}
                           for r in self.rounds],
                "fallback": None if self.fallback is None else model_to_dict(self.fallback)}

    @classmethod
    def from_dict(cls, header, body):
        from .serialize import model_from_dict
        rounds = [BoostRound(model_from_dict(r["model"]), r["epsilon"], r["beta"])
                  for r in body["rounds"]]
        fb = body.get("fallback")
        return cls(rounds, LearnerSpec.from_dict(body["base"]), body["max_iters"], body["seed"],
                   body["halt"], None if fb is None else model_from_dict(fb))


def adaboost_train(base: LearnerSpec, data: Dataset, max_iters: int = 10, seed: int = 0,
                   weight_trace: Optional[list] = None) -> BoostModel:
    """AdaBoost.M1.

    Rounds with weighted error >= 0.5 are discarded and stop training (their
    vote weight ``log(1/beta)`` would not be positive).  A round with zero
    error is kept with ``beta = BETA_MIN`` and stops training.  When the very
    first round already fails, the unweighted base learner is used instead and
    a :class:`NoUsableRound` warning is issued.  ``weight_trace``, if given,
    receives the instance-weight vector in force at every round.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    n = data.n
    D = np.full(n, 1.0 / n)
    rounds = []
    halt = MAX_ITERS
    for t in range(max_iters):
        if weight_trace is not None:
            weight_trace.append(D.copy())
        spec = base.with_seed(child_seed(seed, t))
        model = train(spec, data.with_weights(D))
        wrong = model.predict_labels(data.X) != data.y
        eps = float(D[wrong].sum())
        if eps >= 0.5:
            halt = EPSILON_GE_HALF
            break
        if eps <= 0.0:
            rounds.append(BoostRound(model, 0.0, BETA_MIN))
            halt = EPSILON_ZERO
            break
        beta = eps / (1 - eps)
        rounds.append(BoostRound(model, eps, beta))
        D = np.where(wrong, D, D * beta)
        D = D / D.sum()
    fallback = None
    if not rounds:
        warnings.warn("first boosting round has error >= 0.5; using the plain base learner",
                      NoUsableRound, stacklevel=2)
        fallback = train(base.with_seed(child_seed(seed, 0)), data.unweighted())
    return BoostModel(rounds, base, max_iters, seed, halt, fallback)


def adaboost_predict(model: BoostModel, vector):
    return model.predict(vector)


# -- stacking ------------------------------------------------------------------

def _check_kinds(kinds, expected_count):
    if len(set(kinds)) != len(kinds):
        raise DuplicateLearnerKind(f"learner kinds repeat: {list(kinds)}")
    if len(kinds) != expected_count:
        raise ValueError(f"expected {expected_count} learners, got {len(kinds)}")


def meta_features(models: Sequence[Model], X: np.ndarray, encoding="onehot") -> np.ndarray:
    """Concatenated per-base blocks of width K: one-hot labels or score vectors."""
    blocks = []
    for m in models:
        if encoding == "onehot":
            lab = m.predict_labels(X)
            b = np.zeros((len(X), m.K))
            b[np.arange(len(X)), lab] = 1.0
        elif encoding == "proba":
            b = m.predict_scores(X)
        else:
            raise ValueError(f"unknown meta encoding {encoding!r}")
        blocks.append(b)
    return np.hstack(blocks)


def _meta_fingerprint(kinds, K, encoding):
    return "meta-" + hashlib.sha256(f"{','.join(kinds)}|{K}|{encoding}".encode()).hexdigest()[:12]


class StackModel(Model):
    kind = "STACKING"

    def __init__(self, bases: Sequence[Model], base_specs: Sequence[LearnerSpec], meta: Model,
                 meta_spec: LearnerSpec, encoding="onehot", meta_cv_folds=None):
        b0 = bases[0]
        super().__init__(b0.K, b0.fingerprint, b0.n_features)
        self.bases = list(bases)
        self.base_specs = list(base_specs)
        self.meta = meta
        self.meta_spec = meta_spec
        self.encoding = encoding
        self.meta_cv_folds = meta_cv_folds

    @property
    def meta_dimension(self):
        return self.meta.n_features

    def predict_scores(self, X):
        return self.meta.predict_scores(meta_features(self.bases, np.atleast_2d(X), self.encoding))

    def to_dict(self):
        from .serialize import model_to_dict
        return {"encoding": self.encoding, "meta_cv_folds": self.meta_cv_folds,
                "base_specs": [s.to_dict() for s in self.base_specs],
                "bases": [model_to_dict(m) for m in self.bases],
                "meta_spec": self.meta_spec.to_dict(), "meta": model_to_dict(self.meta)}

    @classmethod
    def from_dict(cls, header, body):
        from .serialize import model_from_dict
        return cls([model_from_dict(m) for m in body["bases"]],
                   [LearnerSpec.from_dict(s) for s in body["base_specs"]],
                   model_from_dict(body["meta"]), LearnerSpec.from_dict(body["meta_spec"]),
                   body["encoding"], body.get("meta_cv_folds"))


def stacking_train(bases: Sequence[LearnerSpec], meta: LearnerSpec, data: Dataset,
                   meta_cv_folds: Optional[int] = None, encoding="onehot") -> StackModel:
    """Three base learners feed their outputs to a fourth (meta) learner.

    By default the bases are trained on the full training set and the meta
    learner on their predictions for that same set.  With ``meta_cv_folds``
    the meta learner instead sees out-of-fold base predictions.
    """
    _check_kinds([s.kind for s in bases] + [meta.kind], 4)
    models = [train(s, data) for s in bases]
    if meta_cv_folds:
        if meta_cv_folds < 2:
            raise ValueError("meta_cv_folds must be >= 2")
        rng = np.random.default_rng(child_seed(meta.seed, 99))
        folds = np.array_split(rng.permutation(data.n), meta_cv_folds)
        Z = np.zeros((data.n, len(bases) * data.K))
        for k, held in enumerate(folds):
            if len(held) == 0:
                continue
            rest = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != k]))
            fold_models = [train(s.with_seed(child_seed(s.seed, k)), data.subset(rest))
                           for s in bases]
            Z[held] = meta_features(fold_models, data.X[held], encoding)
    else:
        Z = meta_features(models, data.X, encoding)
    kinds = [s.kind for s in bases]
    meta_data = Dataset(Z, data.y, data.K, None, (), _meta_fingerprint(kinds, data.K, encoding))
    meta_model = train(meta, meta_data)
    return StackModel(models, list(bases), meta_model, meta, encoding, meta_cv_folds)


def stacking_predict(model: StackModel, vector):
    return model.predict(vector)


# -- voting --------------------------------------------------------------------

def majority_vote(labels, voters=KINDS, priority=DEFAULT_PRIORITY):
    """Plurality label; a tie goes to the tied label backed by the highest-priority voter.

    ``labels[i]`` is the vote of ``voters[i]``: a :class:`Prediction` or any
    hashable label.
    """
    labels = [getattr(lab, "label", lab) for lab in labels]
    if not labels:
        raise ValueError("no votes")
    counts = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    top = max(counts.values())
    tied = {lab for lab, c in counts.items() if c == top}
    if len(tied) == 1:
        return next(iter(tied))
    rank = {v: i for i, v in enumerate(priority)}
    for i in sorted(range(len(labels)), key=lambda i: rank.get(voters[i], len(rank) + i)):
        if labels[i] in tied:
            return labels[i]


class VotedModel(Model):
    kind = "VOTING"

    def __init__(self, members: dict, specs: Sequence[LearnerSpec], priority=DEFAULT_PRIORITY):
        first = next(iter(members.values()))
        super().__init__(first.K, first.fingerprint, first.n_features)
        self.members = dict(members)
        self.specs = list(specs)
        self.priority = tuple(priority)

    def voter_labels(self, X):
        return np.column_stack([self.members[k].predict_labels(X) for k in self.members])

    def predict_scores(self, X):
        labels = self.voter_labels(X)
        votes = vote_counts(labels, self.K)
        return votes / labels.shape[1]

    def predict_labels(self, X):
        labels = self.voter_labels(X)
        votes = vote_counts(labels, self.K)
        top = votes.max(axis=1, keepdims=True)
        tied = votes == top
        voters = list(self.members)
        rank = {v: i for i, v in enumerate(self.priority)}
        order = sorted(range(len(voters)), key=lambda i: rank.get(voters[i], len(rank) + i))
        ordered = labels[:, order]
        hit = tied[np.arange(len(labels))[:, None], ordered]
        first = np.argmax(hit, axis=1)
        return ordered[np.arange(len(labels)), first]

    def predict(self, vector):
        from .learners import Prediction
        self.check_vector(vector)
        X = vector.to_dense()[None, :]
        return Prediction(int(self.predict_labels(X)[0]), self.predict_scores(X)[0])

    def to_dict(self):
        from .serialize import model_to_dict
        return {"priority": list(self.priority), "specs": [s.to_dict() for s in self.specs],
                "members": {k: model_to_dict(m) for k, m in self.members.items()}}

    @classmethod
    def from_dict(cls, header, body):
        from .serialize import model_from_dict
        return cls({k: model_from_dict(m) for k, m in body["members"].items()},
                   [LearnerSpec.from_dict(s) for s in body["specs"]], body["priority"])


def voting_train(data: Dataset, specs: Sequence[LearnerSpec],
                 priority=DEFAULT_PRIORITY) -> VotedModel:
    _check_kinds([s.kind for s in specs], 4)
    return VotedModel({s.kind: train(s, data) for s in specs}, specs, priority)


def voting_predict(model: VotedModel, vector):
    return model.predict(vector)


# -- approach descriptor -------------------------------------------------------

APPROACHES = ("individual", "bagging", "boosting", "stacking", "voting")


@dataclass(frozen=True)
class Approach:
    """One row of an experiment grid.

    ``learner`` is the base learner (individual / bagging / boosting) or the
    meta learner (stacking, whose bases are the remaining three kinds).
    """

    kind: str
    learner: Optional[str] = None
    size: int = 10
    max_iters: int = 10
    seed: int = 0
    meta_cv_folds: Optional[int] = None
    encoding: str = "onehot"
    priority: tuple = DEFAULT_PRIORITY

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in APPROACHES:
            raise ValueError(f"unknown approach {self.kind!r}; expected one of {APPROACHES}")
        if kind != "voting":
            if self.learner is None:
                raise ValueError(f"{kind} needs a learner")
            object.__setattr__(self, "learner", LearnerSpec(self.learner).kind)
        object.__setattr__(self, "priority", tuple(self.priority))

    @property
    def label(self):
        if self.kind == "voting":
            return "Voting"
        if self.kind == "stacking":
            bases = ", ".join(k for k in KINDS if k != self.learner)
            return f"Stacking [{bases}] -> {self.learner}"
        return f"{self.kind.capitalize()} {self.learner}"

    @property
    def base_learners(self):
        if self.kind == "stacking":
            return [k for k in KINDS if k != self.learner]
        if self.kind == "voting":
            return list(KINDS)
        return [self.learner]

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        d = asdict(self)
        d["priority"] = list(self.priority)
        return d


def fit(approach: Approach, data: Dataset) -> Model:
    s = approach.seed
    if approach.kind == "individual":
        return train(LearnerSpec(approach.learner, seed=child_seed(s, 0)), data)
    if approach.kind == "bagging":
        return bagging_train(LearnerSpec(approach.learner), data, approach.size, s)
    if approach.kind == "boosting":
        return adaboost_train(LearnerSpec(approach.learner), data, approach.max_iters, s)
    if approach.kind == "stacking":
        bases = [LearnerSpec(k, seed=child_seed(s, i)) for i, k in enumerate(approach.base_learners)]
        meta = LearnerSpec(approach.learner, seed=child_seed(s, 3))
        return stacking_train(bases, meta, data, approach.meta_cv_folds, approach.encoding)
    specs = [LearnerSpec(k, seed=child_seed(s, i)) for i, k in enumerate(KINDS)]
    return voting_train(data, specs, approach.priority)


def table3_rows(seed=0, size=10, max_iters=10) -> list[Approach]:
    """The 13 combined approaches: bagging x4, boosting x4, stacking x4, voting."""
    rows = [Approach("bagging", k, size=size, seed=seed) for k in KINDS]
    rows += [Approach("boosting", k, max_iters=max_iters, seed=seed) for k in KINDS]
    rows += [Approach("stacking", k, seed=seed) for k in KINDS]
    rows.append(Approach("voting", seed=seed))
    return rows


def individual_rows(seed=0) -> list[Approach]:
    return [Approach("individual", k, seed=seed) for k in KINDS]
