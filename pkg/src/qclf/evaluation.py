"""Accuracy reports, experiment grids, size sweeps and fine-grained evaluation."""
from __future__ import annotations

import csv
import io
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ensembles import Approach, adaboost_train, bagging_train, fit, individual_rows, table3_rows
from .errors import EmptyCoarsePartition, EmptyInput, LengthMismatch, QCError
from .features import FEATURE_SETS, FeatureConfig, build_feature_index, default_lexicons, \
    to_matrix, vectorize_all
from .learners import Dataset, LearnerSpec
from .taxonomy import default_taxonomy

GOLD_PARTITION, PIPELINED = "GOLD_PARTITION", "PIPELINED"


def accuracy(predicted, gold) -> float:
    predicted, gold = list(predicted), list(gold)
    if len(predicted) != len(gold):
        raise LengthMismatch(f"{len(predicted)} predictions for {len(gold)} gold labels")
    if not gold:
        raise EmptyInput("accuracy of an empty list")
    return sum(p == g for p, g in zip(predicted, gold)) / len(gold)


# -- datasets ------------------------------------------------------------------

def coarse_targets(records, taxonomy=None):
    taxonomy = taxonomy or default_taxonomy()
    return [taxonomy.coarse_index(r.label.coarse) for r in records]


def make_dataset(records, index, config, targets, K, lexicons=None, coarse_hints=None) -> Dataset:
    X = to_matrix(vectorize_all(records, index, config, lexicons, coarse_hints), index)
    return Dataset(X, np.asarray(targets, dtype=np.int64).reshape(-1), K, None,
                   index.numeric_columns, index.fingerprint)


@dataclass
class Prepared:
    """A train/test pair vectorized over one training-derived feature index."""

    index: object
    config: FeatureConfig
    train: Dataset
    X_test: np.ndarray
    y_test: np.ndarray


def prepare(train, test, config: FeatureConfig, lexicons=None, taxonomy=None) -> Prepared:
    taxonomy = taxonomy or default_taxonomy()
    K = len(taxonomy.coarse_classes())
    hints_tr = [r.label.coarse for r in train] if config.include_coarse_class else None
    hints_te = [r.label.coarse for r in test] if config.include_coarse_class else None
    index = build_feature_index(train, config, lexicons, taxonomy)
    data = make_dataset(train, index, config, coarse_targets(train, taxonomy), K, lexicons,
                        hints_tr)
    X_test = to_matrix(vectorize_all(test, index, config, lexicons, hints_te), index)
    return Prepared(index, config, data, X_test,
                    np.asarray(coarse_targets(test, taxonomy), dtype=np.int64))


# -- reports -------------------------------------------------------------------

@dataclass
class EvaluationReport:
    accuracy: float
    per_class: dict
    confusion: list          # confusion[gold][predicted]
    classes: list
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_labels(cls, predicted, gold, classes, metadata=None):
        K = len(classes)
        acc = accuracy(predicted, gold)
        cm = np.zeros((K, K), dtype=np.int64)
        np.add.at(cm, (np.asarray(gold), np.asarray(predicted)), 1)
        per_class = {}
        for i, c in enumerate(classes):
            n = int(cm[i].sum())
            per_class[c] = float(cm[i, i] / n) if n else None
        return cls(acc, per_class, cm.tolist(), list(classes), dict(metadata or {}))

    @property
    def total(self):
        return int(np.sum(self.confusion))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def to_table(self) -> str:
        width = max(len(c) for c in self.classes)
        head = " " * (width + 2) + " ".join(f"{c:>{max(4, len(c))}}" for c in self.classes)
        lines = [f"accuracy: {100 * self.accuracy:.2f}", "", head]
        for c, row in zip(self.classes, self.confusion):
            cells = " ".join(f"{v:>{max(4, len(k))}}" for v, k in zip(row, self.classes))
            lines.append(f"{c:<{width}}  {cells}")
        return "\n".join(lines)


def evaluate(model, test, index, config, lexicons=None, taxonomy=None, metadata=None,
             coarse_hints=None) -> EvaluationReport:
    """Coarse-class report for ``model`` on ``test`` records."""
    taxonomy = taxonomy or default_taxonomy()
    if coarse_hints is None and config.include_coarse_class:
        coarse_hints = [r.label.coarse for r in test]
    X = to_matrix(vectorize_all(test, index, config, lexicons, coarse_hints), index)
    if index.fingerprint != model.fingerprint:
        from .errors import IndexMismatch
        raise IndexMismatch("model and feature index come from different feature spaces")
    predicted = model.predict_labels(X)
    return EvaluationReport.from_labels(predicted.tolist(), coarse_targets(test, taxonomy),
                                        taxonomy.coarse_classes(), metadata)


# -- size sweeps ---------------------------------------------------------------

@dataclass
class SweepCurve:
    combiner: str
    learner: str
    points: list                      # [(size, accuracy)]
    stable_size: Optional[int] = None
    halt: Optional[str] = None

    @property
    def sizes(self):
        return [s for s, _ in self.points]

    @property
    def accuracies(self):
        return [a for _, a in self.points]

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["size", "accuracy"])
        for s, a in self.points:
            w.writerow([s, repr(float(a))])
        return out.getvalue()


def detect_stability(sizes, accuracies, tol=0.001, window=3) -> Optional[int]:
    """First size from which ``window`` consecutive accuracies span at most ``tol``."""
    acc = np.asarray(accuracies, dtype=np.float64)
    for i in range(len(acc) - window + 1):
        seg = acc[i:i + window]
        if seg.max() - seg.min() <= tol + 1e-12:
            return sizes[i]
    return None


def size_sweep(combiner, base: LearnerSpec, data: Dataset, X_test, y_test, sizes, tol=0.001,
               window=3, seed=0) -> SweepCurve:
    """Accuracy against ensemble size.

    Members are prefix-stable in the seed, so one ensemble of the largest size
    is trained and truncated for every smaller size.  A boosting curve ends at
    the round where training halted.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
        raise ValueError("sizes must be a non-empty, strictly increasing list of positive ints")
    combiner = combiner.upper()
    halt = None
    if combiner == "BAGGING":
        full = bagging_train(base, data, sizes[-1], seed)
        usable = sizes
    elif combiner == "BOOSTING":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            full = adaboost_train(base, data, sizes[-1], seed)
        halt = full.halt
        usable = [s for s in sizes if s <= full.halt_round]
    else:
        raise ValueError(f"size sweeps support BAGGING and BOOSTING, not {combiner!r}")
    points = []
    for s in usable:
        acc = float(np.mean(full.truncated(s).predict_labels(X_test) == y_test))
        points.append((s, acc))
    stable = detect_stability([p[0] for p in points], [p[1] for p in points], tol, window)
    return SweepCurve(combiner, base.kind, points, stable, halt)


# -- grids ---------------------------------------------------------------------

@dataclass
class GridSpec:
    feature_sets: Sequence[str] = tuple(FEATURE_SETS)
    rows: Optional[Sequence[Approach]] = None     # default: the 13 combination rows
    seeds: Sequence[int] = (0,)

    def __post_init__(self):
        self.feature_sets = tuple(self.feature_sets)
        unknown = [f for f in self.feature_sets if f not in FEATURE_SETS]
        if unknown:
            raise ValueError(f"unknown feature sets {unknown}")
        if self.rows is None:
            self.rows = table3_rows()
        self.rows = list(self.rows)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.feature_sets or not self.rows or not self.seeds:
            raise ValueError("a grid needs at least one feature set, row and seed")

    @classmethod
    def with_individuals(cls, **kw):
        return cls(rows=individual_rows() + table3_rows(), **kw)


@dataclass
class Cell:
    approach: Approach
    feature_set: str
    seed: int
    accuracy: Optional[float]
    error: Optional[str] = None


@dataclass
class GridResult:
    spec: GridSpec
    cells: list

    def value(self, row: int, feature_set: str) -> Optional[float]:
        """Mean accuracy of a row over seeds (None if any seed failed)."""
        vals = [c.accuracy for c in self.cells
                if c.feature_set == feature_set and c.approach == self._row_key(row)]
        if not vals or any(v is None for v in vals):
            return None
        return float(np.mean(vals))

    def _row_key(self, row):
        return self.spec.rows[row]

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["approach", "base_learner", "model_learner", "feature_set", "seed",
                    "accuracy", "error"])
        for c in self.cells:
            base, meta = _row_learners(c.approach)
            w.writerow([c.approach.kind, base, meta, c.feature_set, c.seed,
                        "" if c.accuracy is None else repr(float(c.accuracy)), c.error or ""])
        return out.getvalue()

    def to_table(self) -> str:
        """Aligned plain-text table: approach, base learner(s), model learner, one column
        per feature set, accuracies in percent with two decimals."""
        header = ["Approach", "Base-Learner", "Model-Learner"] + [f.replace("fl", "fL").replace(
            "fs", "fS").replace("fm", "fM") for f in self.spec.feature_sets]
        body = []
        previous = None
        for i, a in enumerate(self.spec.rows):
            base, meta = _row_learners(a)
            name = a.kind.capitalize() if a.kind != previous else ""
            previous = a.kind
            cells = []
            for fs in self.spec.feature_sets:
                v = self.value(i, fs)
                cells.append("error" if v is None else f"{100 * v:.2f}")
            body.append([name, base, meta] + cells)
        widths = [max(len(r[j]) for r in [header] + body) for j in range(len(header))]
        fmt = lambda r: "  ".join(s.ljust(w) if j < 3 else s.rjust(w)
                                  for j, (s, w) in enumerate(zip(r, widths)))
        rule = "-" * len(fmt(header))
        lines = [fmt(header), rule]
        for k, r in enumerate(body):
            if r[0] and k:
                lines.append(rule)
            lines.append(fmt(r))
        lines.append(rule)
        lines.append(f"seeds: {', '.join(map(str, self.spec.seeds))}")
        return "\n".join(lines)


def _row_learners(a: Approach):
    if a.kind == "stacking":
        return ", ".join(a.base_learners), a.learner
    if a.kind == "voting":
        return ", ".join(a.base_learners), "x"
    return a.learner, "x"


def _run_cell(args):
    approach, fs, seed, prepared = args
    try:
        model = fit(approach.with_seed(seed), prepared.train)
        acc = float(np.mean(model.predict_labels(prepared.X_test) == prepared.y_test))
        return Cell(approach, fs, seed, acc)
    except (QCError, ValueError, FloatingPointError) as exc:
        return Cell(approach, fs, seed, None, f"{type(exc).__name__}: {exc}")


def run_grid(spec: GridSpec, train, test, lexicons=None, taxonomy=None, jobs=1) -> GridResult:
    """Train and score every (row, feature set, seed) cell.

    The feature index is rebuilt from the training records for each feature
    set.  A failing cell records its error and the grid carries on.  With
    ``jobs > 1`` cells run in worker processes; the result does not depend on
    ``jobs``.
    """
    lexicons = lexicons or default_lexicons()
    prepared = {fs: prepare(train, test, FeatureConfig.from_name(fs), lexicons, taxonomy)
                for fs in spec.feature_sets}
    tasks = [(a, fs, seed, prepared[fs]) for a in spec.rows for fs in spec.feature_sets
             for seed in spec.seeds]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]
    return GridResult(spec, cells)


# -- fine-grained evaluation ---------------------------------------------------

@dataclass
class FineRow:
    coarse: str
    accuracy: Optional[float]
    n_test: int
    n_train: int
    n_features: Optional[int] = None
    note: Optional[str] = None

    @property
    def name(self):
        return f"F_{self.coarse}"


@dataclass
class FineGrainedReport:
    mode: str
    rows: list
    approach: dict

    @property
    def populated(self):
        return [r for r in self.rows if r.accuracy is not None]

    def row(self, coarse):
        for r in self.rows:
            if r.coarse == coarse:
                return r
        raise KeyError(coarse)

    def to_table(self) -> str:
        lines = [f"{'Class':<8} {'Accuracy':>9} {'Train':>6} {'Test':>5}"]
        for r in self.rows:
            acc = "absent" if r.accuracy is None else f"{100 * r.accuracy:.2f}"
            lines.append(f"{r.name:<8} {acc:>9} {r.n_train:>6} {r.n_test:>5}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["row", "mode", "accuracy", "n_train", "n_test", "note"])
        for r in self.rows:
            w.writerow([r.name, self.mode, "" if r.accuracy is None else repr(r.accuracy),
                        r.n_train, r.n_test, r.note or ""])
        return out.getvalue()


def _fine_index(record, taxonomy):
    names = [f.name for f in taxonomy.fine_classes(record.label.coarse)]
    if record.label.fine is None:
        raise ValueError(f"record {record.id!r} has no fine label")
    return names.index(record.label.fine)


def train_fine_model(coarse, train, approach, config, lexicons=None, taxonomy=None):
    """Fine classifier for one coarse class; returns ``(model, index)``."""
    taxonomy = taxonomy or default_taxonomy()
    part = [r for r in train if r.label.coarse == coarse]
    if not part:
        raise EmptyCoarsePartition(coarse)
    index = build_feature_index(part, config, lexicons, taxonomy)
    hints = [coarse] * len(part) if config.include_coarse_class else None
    data = make_dataset(part, index, config, [_fine_index(r, taxonomy) for r in part],
                        len(taxonomy.fine_classes(coarse)), lexicons, hints)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fit(approach, data), index


def fine_grained_eval(train, test, approach: Approach, config: FeatureConfig = None,
                      mode=GOLD_PARTITION, lexicons=None, taxonomy=None,
                      coarse_approach: Approach = None) -> FineGrainedReport:
    """Per-coarse-class fine accuracy (rows ``F_PER`` .. ``F_MISC``).

    ``GOLD_PARTITION`` routes test questions by their gold coarse class.
    ``PIPELINED`` routes them by a coarse model's prediction (trained with
    ``coarse_approach``, default: the same approach) and counts a question
    correct only if the routed fine model returns the gold fine label.
    """
    taxonomy = taxonomy or default_taxonomy()
    lexicons = lexicons or default_lexicons()
    config = config or FeatureConfig.from_name("fl+fs+fm", include_coarse_class=True)
    mode = mode.upper()
    if mode in ("GOLD", "GOLD_PARTITION"):
        mode = GOLD_PARTITION
    elif mode in ("PIPELINED", "PIPELINE"):
        mode = PIPELINED
    else:
        raise ValueError(f"unknown fine-grained mode {mode!r}")

    models = {}
    for c in taxonomy.coarse_classes():
        try:
            models[c] = train_fine_model(c, train, approach, config, lexicons, taxonomy)
        except EmptyCoarsePartition:
            pass

    routed = {r.id: r.label.coarse for r in test}
    if mode == PIPELINED:
        coarse_cfg = FeatureConfig(config.groups, False, config.unigrams)
        prep = prepare(train, test, coarse_cfg, lexicons, taxonomy)
        cmodel = fit(coarse_approach or approach, prep.train)
        names = taxonomy.coarse_classes()
        routed = {r.id: names[k] for r, k in zip(test, cmodel.predict_labels(prep.X_test))}

    rows = []
    for c in taxonomy.coarse_classes():
        gold = [r for r in test if r.label.coarse == c]
        n_train = sum(r.label.coarse == c for r in train)
        if not gold or c not in models:
            rows.append(FineRow(c, None, len(gold), n_train,
                                note="no test questions" if c in models else "no training questions"))
            continue
        correct = 0
        for r in gold:
            pc = routed[r.id]
            if pc not in models:
                continue
            model, index = models[pc]
            hint = [pc] if config.include_coarse_class else None
            X = to_matrix(vectorize_all([r], index, config, lexicons, hint), index)
            fine = taxonomy.fine_classes(pc)[int(model.predict_labels(X)[0])].name
            correct += (pc == c and fine == r.label.fine)
        rows.append(FineRow(c, correct / len(gold), len(gold), n_train, models[c][1].N))
    return FineGrainedReport(mode, rows, approach.to_dict())
