"""Common train/predict contract for the base classifiers."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from ..errors import EmptyDataset, IndexMismatch

KINDS = ("NB", "KNB", "RI", "DT")


@dataclass(frozen=True)
class LearnerSpec:
    """Learner kind plus every hyperparameter, all with textbook defaults."""

    kind: str
    seed: int = 0
    # NB / KNB
    alpha: float = 1.0
    bandwidth_floor: float = 1e-6
    # RI
    grow_fraction: float = 2 / 3
    min_coverage: int = 2
    # DT
    min_leaf: int = 2
    branch_fraction: float = 0.1
    max_depth: Optional[int] = 32
    prune: bool = False
    confidence: float = 0.25

    def __post_init__(self):
        kind = self.kind.upper().replace("-", "")
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}; expected one of {KINDS}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.bandwidth_floor <= 0:
            raise ValueError("bandwidth_floor must be positive")
        if not 0 < self.grow_fraction < 1:
            raise ValueError("grow_fraction must be in (0, 1)")
        if self.min_coverage < 1 or self.min_leaf < 1:
            raise ValueError("min_coverage and min_leaf must be >= 1")
        if self.branch_fraction < 0:
            raise ValueError("branch_fraction must be >= 0")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if not 0 < self.confidence < 0.5:
            raise ValueError("confidence must be in (0, 0.5)")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Dataset:
    """Dense design matrix over one feature space.

    ``X`` is ``(n, N)``; ``y`` holds class indices below ``K``.  ``weights``,
    when given, are non-negative and sum to one.
    """

    X: np.ndarray
    y: np.ndarray
    K: int
    weights: Optional[np.ndarray] = None
    numeric_columns: tuple = ()
    fingerprint: str = ""

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError("X must be (n, N) with one label per row")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= self.K):
            raise ValueError("labels must lie in [0, K)")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != self.y.shape or np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
                raise ValueError("weights must be non-negative, one per row, summing to 1")
            self.weights = w
        self.numeric_columns = tuple(int(c) for c in self.numeric_columns)

    @classmethod
    def from_vectors(cls, vectors, labels, K, weights=None):
        from ..features import to_matrix
        if not vectors:
            raise EmptyDataset("no training vectors")
        index = vectors[0].index
        return cls(to_matrix(vectors, index), labels, K, weights,
                   index.numeric_columns, index.fingerprint)

    @property
    def n(self):
        return len(self.y)

    @property
    def N(self):
        return self.X.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], self.K, None,
                       self.numeric_columns, self.fingerprint)

    def with_weights(self, weights):
        return Dataset(self.X, self.y, self.K, weights, self.numeric_columns, self.fingerprint)

    def unweighted(self):
        return Dataset(self.X, self.y, self.K, None, self.numeric_columns, self.fingerprint)

    def has_uniform_weights(self):
        return self.weights is None or bool(np.all(self.weights == self.weights[0]))


@dataclass
class Prediction:
    label: int
    scores: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)


def argmax_lowest(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest class index (numpy's convention)."""
    return np.argmax(scores, axis=-1)


def normalize_rows(M):
    s = M.sum(axis=1, keepdims=True)
    return M / s


def softmax_log(logp: np.ndarray) -> np.ndarray:
    """Normalize row-wise log scores; ``-inf`` entries map to exactly 0."""
    m = np.max(logp, axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        e = np.exp(logp - m)
    return e / e.sum(axis=1, keepdims=True)


class Model:
    """Trained classifier over a fixed feature space.

    Subclasses implement :meth:`predict_scores` over a dense matrix and the
    ``to_dict``/``from_dict`` pair used by :mod:`qclf.serialize`.
    """

    kind = "?"

    def __init__(self, K: int, fingerprint: str, n_features: int):
        self.K = int(K)
        self.fingerprint = fingerprint
        self.n_features = int(n_features)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_labels(self, X: np.ndarray) -> np.ndarray:
        return argmax_lowest(self.predict_scores(X))

    def check_vector(self, vector):
        if vector.index.fingerprint != self.fingerprint or len(vector.index) != self.n_features:
            raise IndexMismatch(
                f"vector space {vector.index.fingerprint} != model space {self.fingerprint}")

    def predict(self, vector) -> Prediction:
        self.check_vector(vector)
        scores = self.predict_scores(vector.to_dense()[None, :])[0]
        return Prediction(int(argmax_lowest(scores)), scores)

    def header(self):
        return {"kind": self.kind, "fingerprint": self.fingerprint, "K": self.K,
                "n_features": self.n_features}

    def to_dict(self) -> dict:
        raise NotImplementedError


def resample_indices(weights: np.ndarray, seed: int) -> np.ndarray:
    """Seeded weighted bootstrap of ``len(weights)`` rows."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5EED]))
    n = len(weights)
    return np.sort(rng.choice(n, size=n, replace=True, p=weights))
