"""Vectorised enumeration of ``x > v`` candidate conditions over a sub-matrix."""
import numpy as np


def scan_thresholds(X, W):
    """Yield ``(value, columns, above, next_values)`` for every candidate cut.

    For each distinct value ``v`` present in ``X`` (ascending) and each column
    that contains ``v`` and some larger value, ``above[:, k]`` holds
    ``W.T @ (X[:, col_k] > v)``, the per-group mass strictly above the cut,
    and ``next_values[k]`` the smallest value of that column exceeding ``v``.
    ``W`` is an ``(m, G)`` group-membership matrix (one-hot classes, or
    positive/negative indicators).
    """
    if X.shape[0] == 0:
        return
    colmax = X.max(axis=0)
    colmin = X.min(axis=0)
    live = np.flatnonzero(colmax > colmin)
    if len(live) == 0:
        return
    Xl = X[:, live]
    values = np.unique(Xl)
    for v in values[:-1]:
        sel = (colmax[live] > v) & (colmin[live] <= v)
        if not sel.any():
            continue
        cols = live[sel]
        sub = Xl[:, sel]
        present = (sub == v).any(axis=0)
        if not present.all():
            cols, sub = cols[present], sub[:, present]
            if len(cols) == 0:
                continue
        gt = sub > v
        above = W.T @ gt
        nxt = np.where(gt, sub, np.inf).min(axis=0)
        yield float(v), cols, above, nxt
