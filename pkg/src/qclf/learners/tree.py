"""Binary decision tree grown by gain ratio over ``x <= t`` threshold splits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import QCError
from ._thresholds import scan_thresholds
from .base import Model

TIE_TOL = 1e-12


class NoValidSplit(QCError):
    pass


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float
    gain_ratio: float


def entropy(counts, axis=0):
    """Shannon entropy in bits of count vectors along ``axis``."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=axis, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=axis)


def information_gain(parent, left, right):
    parent, left, right = (np.asarray(a, dtype=np.float64) for a in (parent, left, right))
    n = parent.sum()
    return float(entropy(parent) - left.sum() / n * entropy(left) - right.sum() / n * entropy(right))


def choose_split(X, y, K, min_leaf=2, branch_fraction=0.1, max_branch=25) -> Split:
    """Best threshold split by gain ratio, following C4.5's selection rules.

    Candidate thresholds are midpoints between consecutive distinct values of
    a column.  Each column contributes its highest-gain threshold; columns
    whose gain is below the mean over all columns are then dropped and the
    rest ranked by gain ratio.  Ties go to the lowest feature index, then the
    lowest threshold.

    Both branches must hold at least ``min_leaf`` rows.  Where possible they
    must also hold ``branch_fraction * m / K`` rows (clamped to
    ``[min_leaf, max_branch]``), which stops gain ratio from favouring splits
    that peel off a couple of rows at a time.  Raises :class:`NoValidSplit`
    when no candidate qualifies.
    """
    m = len(y)
    if m < 2 * min_leaf:
        raise NoValidSplit("node too small")
    W = np.zeros((m, K))
    W[np.arange(m), y] = 1.0
    total = W.sum(axis=0)
    if np.count_nonzero(total) < 2:
        raise NoValidSplit("node is pure")
    h_parent = float(entropy(total))
    min_branch = min(max(branch_fraction * m / K, min_leaf), max(max_branch, min_leaf))

    feats, thresholds, gains, ratios, sizes = [], [], [], [], []
    for v, cols, above, nxt in scan_thresholds(X, W):
        right = above                      # K x C
        left = total[:, None] - right
        n_r = right.sum(axis=0)
        n_l = m - n_r
        ok = (n_r >= min_leaf) & (n_l >= min_leaf)
        if not ok.any():
            continue
        cols, right, left, n_r, n_l, nxt = (a[..., ok] for a in (cols, right, left, n_r, n_l, nxt))
        gain = h_parent - (n_l / m) * entropy(left) - (n_r / m) * entropy(right)
        split_info = entropy(np.vstack([n_l, n_r]))
        feats.append(cols)
        thresholds.append((v + nxt) / 2)
        gains.append(gain)
        ratios.append(gain / split_info)
        sizes.append(np.minimum(n_l, n_r))
    if not feats:
        raise NoValidSplit("no candidate threshold satisfies min_leaf")
    feats, thresholds, gains, ratios, sizes = (np.concatenate(a) for a in
                                               (feats, thresholds, gains, ratios, sizes))
    big = sizes >= min_branch - TIE_TOL
    if big.any():
        feats, thresholds, gains, ratios = (a[big] for a in (feats, thresholds, gains, ratios))
    # per column keep the highest-gain threshold (lowest threshold on ties)
    order = np.lexsort((thresholds, -np.round(gains, 12), feats))
    first = np.ones(len(order), dtype=bool)
    first[1:] = feats[order][1:] != feats[order][:-1]
    keep = order[first]
    feats, thresholds, gains, ratios = (a[keep] for a in (feats, thresholds, gains, ratios))
    # C4.5 heuristic: only columns with at least average gain compete on ratio
    eligible = gains >= gains.mean() - TIE_TOL
    ratios = np.where(eligible, ratios, -np.inf)
    top = ratios.max()
    tied = np.flatnonzero(ratios >= top - TIE_TOL)
    k = tied[np.lexsort((thresholds[tied], feats[tied]))[0]]
    return Split(int(feats[k]), float(thresholds[k]), float(gains[k]), float(ratios[k]))


def _pessimistic_errors(n, errors, confidence):
    """C4.5-style upper confidence bound on the error count of a leaf."""
    if n == 0:
        return 0.0
    z = _z(confidence)
    f = errors / n
    upper = (f + z * z / (2 * n) + z * math.sqrt(max(f / n - f * f / n + z * z / (4 * n * n), 0))
             ) / (1 + z * z / n)
    return upper * n


def _z(confidence):
    from statistics import NormalDist
    return NormalDist().inv_cdf(1 - confidence)


class DecisionTreeModel(Model):
    kind = "DT"

    def __init__(self, K, fingerprint, n_features, feature, threshold, left, right, value):
        super().__init__(K, fingerprint, n_features)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64).reshape(len(self.feature), K)

    @property
    def n_nodes(self):
        return len(self.feature)

    def depth(self):
        def d(i):
            return 0 if self.feature[i] < 0 else 1 + max(d(self.left[i]), d(self.right[i]))
        return d(0)

    def apply(self, X):
        X = np.atleast_2d(X)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            idx = np.flatnonzero(internal)
            go_left = X[idx, f[idx]] <= self.threshold[node[idx]]
            node[idx] = np.where(go_left, self.left[node[idx]], self.right[node[idx]])

    def predict_scores(self, X):
        counts = self.value[self.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, header, body):
        return cls(header["K"], header["fingerprint"], header["n_features"], body["feature"],
                   body["threshold"], body["left"], body["right"], body["value"])


def train_dt(spec, data):
    X, y, K = data.X, data.y, data.K
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.bincount(y[rows], minlength=K).astype(np.float64))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if spec.max_depth is not None and depth >= spec.max_depth:
            continue
        try:
            split = choose_split(X[rows], y[rows], K, spec.min_leaf, spec.branch_fraction)
        except NoValidSplit:
            continue
        mask = X[rows, split.feature] <= split.threshold
        lrows, rrows = rows[mask], rows[~mask]
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))

    model = DecisionTreeModel(K, data.fingerprint, data.N, feature, threshold, left, right, value)
    if spec.prune:
        model = prune_pessimistic(model, spec.confidence)
    return model


def prune_pessimistic(model: DecisionTreeModel, confidence=0.25) -> DecisionTreeModel:
    """Collapse subtrees whose estimated error is not below that of a leaf."""
    feature = model.feature.copy()

    def visit(i):
        counts = model.value[i]
        n = counts.sum()
        leaf_err = _pessimistic_errors(n, n - counts.max(), confidence)
        if feature[i] < 0:
            return leaf_err
        sub_err = visit(model.left[i]) + visit(model.right[i])
        if leaf_err <= sub_err + 1e-9:
            feature[i] = -1
            return leaf_err
        return sub_err

    visit(0)
    # rebuild compactly, keeping only reachable nodes
    order, remap = [], {}

    def collect(i):
        remap[i] = len(order)
        order.append(i)
        if feature[i] >= 0:
            collect(model.left[i])
            collect(model.right[i])

    collect(0)
    f = [int(feature[i]) for i in order]
    t = [float(model.threshold[i]) if feature[i] >= 0 else 0.0 for i in order]
    lft = [remap[model.left[i]] if feature[i] >= 0 else -1 for i in order]
    rgt = [remap[model.right[i]] if feature[i] >= 0 else -1 for i in order]
    return DecisionTreeModel(model.K, model.fingerprint, model.n_features, f, t, lft, rgt,
                             model.value[order])
