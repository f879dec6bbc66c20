"""Sequential-covering rule induction (RIPPER-style grow / prune)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._thresholds import scan_thresholds
from .base import Model


@dataclass(frozen=True)
class Condition:
    """``x[feature] > threshold``; ``threshold=0`` reads as "feature present"."""

    feature: int
    threshold: float

    def covers(self, X):
        return X[:, self.feature] > self.threshold


@dataclass(frozen=True)
class Rule:
    conditions: tuple
    label: int

    def covers(self, X):
        mask = np.ones(len(X), dtype=bool)
        for cond in self.conditions:
            mask &= cond.covers(X)
        return mask

    def __len__(self):
        return len(self.conditions)


def foil_gain(p0, n0, p1, n1):
    """FOIL information gain of refining a rule covering (p0, n0) to (p1, n1)."""
    if p1 == 0:
        return 0.0
    return p1 * (math.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))


def _vector_foil(p0, n0, p1, n1):
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p1 * (np.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))
    return np.where(p1 > 0, g, -np.inf)


def grow_rule(X, pos, neg, label) -> Rule:
    """Greedily add the condition with the largest FOIL gain.

    ``pos``/``neg`` are boolean row masks.  Stops once the rule covers no
    negatives or no condition has positive gain.
    """
    covered = np.ones(len(X), dtype=bool)
    conds = []
    used = set()
    while True:
        p0 = int((covered & pos).sum())
        n0 = int((covered & neg).sum())
        if n0 == 0 or p0 == 0:
            break
        rows = np.flatnonzero(covered & (pos | neg))
        W = np.column_stack([pos[rows], neg[rows]]).astype(np.float64)
        best = None  # (gain, feature, threshold)
        for v, cols, above, _ in scan_thresholds(X[rows], W):
            gain = _vector_foil(p0, n0, above[0], above[1])
            k = int(np.argmax(gain))
            if gain[k] <= 0:
                continue
            tied = np.flatnonzero(gain >= gain[k] - 1e-12)
            k = int(tied[np.argmin(cols[tied])])
            cand = (float(gain[k]), int(cols[k]), v)
            if best is None or cand[0] > best[0] + 1e-12 or (
                    abs(cand[0] - best[0]) <= 1e-12 and cand[1:] < best[1:]):
                best = cand
        if best is None or (best[1], best[2]) in used:
            break
        cond = Condition(best[1], best[2])
        used.add((best[1], best[2]))
        conds.append(cond)
        covered &= cond.covers(X)
    return Rule(tuple(conds), label)


def _precision(rule, X, pos, neg):
    covered = rule.covers(X)
    p = int((covered & pos).sum())
    n = int((covered & neg).sum())
    return p / (p + n) if p + n else 0.0


def prune_rule(rule: Rule, X, pos, neg) -> Rule:
    """Drop trailing conditions while pruning-set precision does not decrease.

    At least one condition is always kept.
    """
    current = rule
    prec = _precision(current, X, pos, neg)
    while len(current) > 1:
        shorter = Rule(current.conditions[:-1], current.label)
        p2 = _precision(shorter, X, pos, neg)
        if p2 < prec:
            break
        current, prec = shorter, p2
    return current


def _grow_prune_split(rows, fraction, rng):
    perm = rng.permutation(rows)
    n_grow = int(math.ceil(fraction * len(perm)))
    return perm[:n_grow], perm[n_grow:]


class RuleModel(Model):
    """Ordered rule list; first firing rule wins, else the default class."""

    kind = "RI"

    def __init__(self, K, fingerprint, n_features, rules, default):
        super().__init__(K, fingerprint, n_features)
        self.rules = list(rules)
        self.default = int(default)

    def predict_labels(self, X):
        X = np.atleast_2d(X)
        out = np.full(len(X), self.default, dtype=np.int64)
        undecided = np.ones(len(X), dtype=bool)
        for rule in self.rules:
            hit = undecided & rule.covers(X)
            out[hit] = rule.label
            undecided &= ~hit
        return out

    def predict_scores(self, X):
        labels = self.predict_labels(X)
        scores = np.zeros((len(labels), self.K))
        scores[np.arange(len(labels)), labels] = 1.0
        return scores

    def to_dict(self):
        return {"default": self.default,
                "rules": [{"label": r.label,
                           "conditions": [[c.feature, c.threshold] for c in r.conditions]}
                          for r in self.rules]}

    @classmethod
    def from_dict(cls, header, body):
        rules = [Rule(tuple(Condition(int(f), float(t)) for f, t in r["conditions"]), r["label"])
                 for r in body["rules"]]
        return cls(header["K"], header["fingerprint"], header["n_features"], rules,
                   body["default"])


def train_ri(spec, data):
    X, y, K = data.X, data.y, data.K
    rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), 0x2171]))
    counts = np.bincount(y, minlength=K)
    present = [c for c in range(K) if counts[c] > 0]
    default = max(present, key=lambda c: (counts[c], -c))
    order = sorted((c for c in present if c != default), key=lambda c: (counts[c], c))

    remaining = np.ones(len(y), dtype=bool)
    rules = []
    for c in order:
        while True:
            pos_all = remaining & (y == c)
            neg_all = remaining & (y != c)
            if pos_all.sum() < spec.min_coverage:
                break
            gp, pp = _grow_prune_split(np.flatnonzero(pos_all), spec.grow_fraction, rng)
            gn, pn = _grow_prune_split(np.flatnonzero(neg_all), spec.grow_fraction, rng)
            grow_pos = np.zeros(len(y), dtype=bool)
            grow_neg = np.zeros(len(y), dtype=bool)
            grow_pos[gp] = True
            grow_neg[gn] = True
            rule = grow_rule(X, grow_pos, grow_neg, c)
            if not rule.conditions:
                break
            if len(pp) + len(pn):
                prune_pos = np.zeros(len(y), dtype=bool)
                prune_neg = np.zeros(len(y), dtype=bool)
                prune_pos[pp] = True
                prune_neg[pn] = True
                rule = prune_rule(rule, X, prune_pos, prune_neg)
            covered = remaining & rule.covers(X)
            p = int((covered & pos_all).sum())
            n = int((covered & neg_all).sum())
            if p < spec.min_coverage or p <= n:
                break
            rules.append(rule)
            remaining &= ~covered
    return RuleModel(K, data.fingerprint, data.N, rules, default)
