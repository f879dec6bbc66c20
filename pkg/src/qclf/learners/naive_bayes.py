"""Multinomial naive Bayes and a kernel-density variant for numeric features."""
from __future__ import annotations

import math

import numpy as np

from .base import Model, softmax_log

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
DENSITY_FLOOR = 1e-12


def _class_counts(data, weights):
    """Per-class mass and per-class feature sums, optionally weighted."""
    onehot = np.zeros((data.n, data.K))
    onehot[np.arange(data.n), data.y] = 1.0 if weights is None else weights
    return onehot.sum(axis=0), onehot.T @ data.X


def _log_prior(mass):
    with np.errstate(divide="ignore"):
        return np.log(mass / mass.sum())


def _log_likelihoods(feature_sums, alpha):
    # Laplace smoothing over the count features
    n_feat = feature_sums.shape[1]
    return np.log((feature_sums + alpha) /
                  (feature_sums.sum(axis=1, keepdims=True) + alpha * n_feat))


class NaiveBayesModel(Model):
    kind = "NB"

    def __init__(self, K, fingerprint, n_features, log_prior, log_theta, alpha):
        super().__init__(K, fingerprint, n_features)
        self.log_prior = np.asarray(log_prior, dtype=np.float64)
        self.log_theta = np.asarray(log_theta, dtype=np.float64)
        self.alpha = alpha

    def log_joint(self, X):
        return X @ self.log_theta.T + self.log_prior

    def predict_scores(self, X):
        return softmax_log(self.log_joint(np.atleast_2d(X)))

    def to_dict(self):
        return {"log_prior": self.log_prior.tolist(), "log_theta": self.log_theta.tolist(),
                "alpha": self.alpha}

    @classmethod
    def from_dict(cls, header, body):
        return cls(header["K"], header["fingerprint"], header["n_features"],
                   [-math.inf if v is None else v for v in body["log_prior"]],
                   body["log_theta"], body["alpha"])


def train_nb(spec, data):
    """Weights, when present, act as fractional instance counts (scaled to sum n)."""
    weights = None if data.weights is None else data.weights * data.n
    mass, sums = _class_counts(data, weights)
    return NaiveBayesModel(data.K, data.fingerprint, data.N, _log_prior(mass),
                           _log_likelihoods(sums, spec.alpha), spec.alpha)


def nb_posterior(model: NaiveBayesModel, vector) -> np.ndarray:
    """Posterior class distribution for one sparse vector."""
    model.check_vector(vector)
    logp = model.log_prior + model.log_theta[:, vector.indices] @ vector.values
    return softmax_log(logp[None, :])[0]


class KernelNaiveBayesModel(Model):
    """Multinomial likelihood on count features, Gaussian KDE on numeric ones."""

    kind = "KNB"

    def __init__(self, K, fingerprint, n_features, log_prior, log_theta, count_columns,
                 numeric_columns, samples, bandwidths, alpha):
        super().__init__(K, fingerprint, n_features)
        self.log_prior = np.asarray(log_prior, dtype=np.float64)
        self.log_theta = np.asarray(log_theta, dtype=np.float64).reshape(K, len(count_columns))
        self.count_columns = np.asarray(count_columns, dtype=np.int64)
        self.numeric_columns = np.asarray(numeric_columns, dtype=np.int64)
        # samples[c][j]: training values of numeric column j within class c
        self.samples = [[np.asarray(s, dtype=np.float64) for s in row] for row in samples]
        self.bandwidths = np.asarray(bandwidths, dtype=np.float64).reshape(
            K, len(numeric_columns))
        self.alpha = alpha

    def density(self, c, j, x):
        """Kernel density of numeric column slot ``j`` for class ``c`` at ``x``."""
        vals = self.samples[c][j]
        if len(vals) == 0:
            return np.full(np.shape(x), DENSITY_FLOOR)
        h = self.bandwidths[c, j]
        z = (np.asarray(x, dtype=np.float64)[..., None] - vals) / h
        dens = np.exp(-0.5 * z * z).mean(axis=-1) / (h * math.sqrt(2 * math.pi))
        return np.maximum(dens, DENSITY_FLOOR)

    def predict_scores(self, X):
        X = np.atleast_2d(X)
        logp = X[:, self.count_columns] @ self.log_theta.T + self.log_prior
        for j, col in enumerate(self.numeric_columns):
            for c in range(self.K):
                logp[:, c] += np.log(self.density(c, j, X[:, col]))
        return softmax_log(logp)

    def to_dict(self):
        return {
            "log_prior": self.log_prior.tolist(),
            "log_theta": self.log_theta.tolist(),
            "count_columns": self.count_columns.tolist(),
            "numeric_columns": self.numeric_columns.tolist(),
            "samples": [[s.tolist() for s in row] for row in self.samples],
            "bandwidths": self.bandwidths.tolist(),
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, header, body):
        return cls(header["K"], header["fingerprint"], header["n_features"],
                   [-math.inf if v is None else v for v in body["log_prior"]],
                   body["log_theta"], body["count_columns"], body["numeric_columns"],
                   body["samples"], body["bandwidths"], body["alpha"])


def silverman_bandwidth(values, floor=1e-6):
    n = len(values)
    if n < 2:
        return floor
    sigma = float(np.std(values, ddof=1))
    return max(1.06 * sigma * n ** (-0.2), floor)


def train_knb(spec, data):
    # no native weighting; callers resample weighted data before reaching here
    numeric = np.asarray(data.numeric_columns, dtype=np.int64)
    count_cols = np.setdiff1d(np.arange(data.N), numeric)
    mass, sums = _class_counts(data, None)
    log_theta = _log_likelihoods(sums[:, count_cols], spec.alpha)
    samples, bws = [], []
    for c in range(data.K):
        rows = data.X[data.y == c]
        samples.append([rows[:, col] for col in numeric])
        bws.append([silverman_bandwidth(rows[:, col], spec.bandwidth_floor) for col in numeric])
    return KernelNaiveBayesModel(data.K, data.fingerprint, data.N, _log_prior(mass), log_theta,
                                 count_cols, numeric, samples, bws, spec.alpha)


def kde_density(model: KernelNaiveBayesModel, cls: int, feature: int, value: float) -> float:
    """Class-conditional density of numeric column ``feature`` at ``value``."""
    slots = list(model.numeric_columns)
    if feature not in slots:
        raise ValueError(f"column {feature} is not a numeric feature")
    return float(model.density(cls, slots.index(feature), value))
