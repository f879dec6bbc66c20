"""Annotated question corpora: loading, splitting, statistics, agreement.

Corpus files are JSON Lines, one question per line::

    {"id": "q1", "text": "ke gOdZa prawiRTA karena ?",
     "tokens": [{"form": "ke", "pos": "WQ", "chunk": "B-NP", "ne": null}, ...],
     "end_marker": "?", "coarse": "PER", "fine": "INDIVIDUAL", "split": "train"}

POS, chunk and named-entity annotations are taken as given.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (CorpusError, DegenerateMarginals, DuplicateId, InvalidLabel, LabelError,
                     MissingSplitTag, ParseError)
from .taxonomy import COARSE_NAMES, Label, Taxonomy, default_taxonomy

END_MARKERS = {"?": "QUESTION_MARK", "|": "DANDA"}
SPLITS = ("train", "test")


@dataclass(frozen=True)
class Token:
    form: str
    pos: str
    chunk: Optional[str] = None
    ne: Optional[str] = None

    def __post_init__(self):
        if not self.form:
            raise ValueError("token form is empty")
        if not self.pos:
            raise ValueError(f"token {self.form!r} has no POS tag")


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    text: str
    tokens: tuple
    end_marker: str
    label: Label
    split: Optional[str] = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"record {self.id!r} has no tokens")
        if self.end_marker not in END_MARKERS:
            raise ValueError(f"record {self.id!r}: end marker must be '?' or '|'")
        if self.tokens[-1].form != self.end_marker:
            raise ValueError(f"record {self.id!r}: last token must be the end marker")
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"record {self.id!r}: bad split {self.split!r}")

    @property
    def content_tokens(self):
        """Tokens without the trailing end marker."""
        return self.tokens[:-1]

    def with_split(self, split):
        return QuestionRecord(self.id, self.text, self.tokens, self.end_marker, self.label, split)

    def with_label(self, label):
        return QuestionRecord(self.id, self.text, self.tokens, self.end_marker, label, self.split)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "tokens": [{"form": t.form, "pos": t.pos, "chunk": t.chunk, "ne": t.ne}
                       for t in self.tokens],
            "end_marker": self.end_marker,
            "coarse": self.label.coarse,
            "fine": self.label.fine,
            "split": self.split,
        }


def record_from_json(obj: Mapping, taxonomy: Optional[Taxonomy] = None) -> QuestionRecord:
    """Build a record from its decoded JSON object; raises CorpusError subclasses."""
    taxonomy = taxonomy or default_taxonomy()
    if not isinstance(obj, Mapping):
        raise CorpusError("record must be a JSON object")
    for key in ("id", "text", "tokens", "end_marker", "coarse"):
        if key not in obj:
            raise CorpusError(f"missing field {key!r}")
    rid = str(obj["id"])
    try:
        label = taxonomy.validate_label(obj["coarse"], obj.get("fine"))
    except LabelError as e:
        raise InvalidLabel(rid, f"({e.__class__.__name__}: {e})") from e
    try:
        tokens = tuple(Token(t["form"], t["pos"], t.get("chunk"), t.get("ne"))
                       for t in obj["tokens"])
        return QuestionRecord(rid, obj["text"], tokens, obj["end_marker"], label, obj.get("split"))
    except (KeyError, TypeError, ValueError) as e:
        raise CorpusError(f"record {rid!r}: {e}") from e


def _lines(source):
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def iter_corpus(source, taxonomy=None):
    """Yield ``(line_number, record_or_exception)`` for every non-blank line."""
    for lineno, line in enumerate(_lines(source), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            yield lineno, ParseError(lineno, f"invalid JSON ({e.msg})")
            continue
        try:
            yield lineno, record_from_json(obj, taxonomy)
        except CorpusError as e:
            yield lineno, e


def validate_corpus(source, taxonomy=None) -> list[tuple[int, CorpusError]]:
    """Return every problem found in ``source`` as ``(line, error)`` pairs."""
    problems = []
    seen = set()
    for lineno, item in iter_corpus(source, taxonomy):
        if isinstance(item, Exception):
            problems.append((lineno, item))
        elif item.id in seen:
            problems.append((lineno, DuplicateId(item.id)))
        else:
            seen.add(item.id)
    return problems


def load_corpus(source, taxonomy=None) -> list[QuestionRecord]:
    """Load and validate a corpus; the first problem is raised.

    ``source`` may be a path, raw bytes or a (binary or text) file object.
    """
    records = []
    seen = set()
    for lineno, item in iter_corpus(source, taxonomy):
        if isinstance(item, InvalidLabel):
            raise item
        if isinstance(item, ParseError):
            raise item
        if isinstance(item, Exception):
            raise ParseError(lineno, str(item)) from item
        if item.id in seen:
            raise DuplicateId(item.id)
        seen.add(item.id)
        records.append(item)
    return records


def dump_corpus(records: Iterable[QuestionRecord], dest=None) -> str:
    text = "".join(json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n"
                   for r in records)
    if dest is not None:
        Path(dest).write_text(text, encoding="utf-8")
    return text


# -- splitting ---------------------------------------------------------------

@dataclass(frozen=True)
class RatioSplit:
    train_fraction: float = 0.7
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class ExplicitSplit:
    pass


def _allocate(counts, fraction):
    """Per-group train sizes summing to floor(fraction * total) (largest remainder)."""
    total = int(np.floor(fraction * sum(counts)))
    exact = [fraction * c for c in counts]
    alloc = [int(np.floor(e)) for e in exact]
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - alloc[i]), i))
    for i in order[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def split_corpus(records: Sequence[QuestionRecord], policy=RatioSplit()):
    """Partition records into ``(train, test)`` lists.

    Under :class:`RatioSplit` records are sorted by id, shuffled with the seeded
    generator and the first ``floor(f * n)`` taken as training data (per class,
    with largest-remainder rounding, when stratified).
    """
    if isinstance(policy, ExplicitSplit):
        train, test = [], []
        for r in records:
            if r.split is None:
                raise MissingSplitTag(r.id)
            (train if r.split == "train" else test).append(r)
        return train, test
    if not isinstance(policy, RatioSplit):
        raise TypeError(f"unknown split policy {policy!r}")

    rng = np.random.default_rng(policy.seed)
    ordered = sorted(records, key=lambda r: r.id)
    if policy.stratified:
        groups = defaultdict(list)
        for r in ordered:
            groups[r.label.coarse].append(r)
        keys = sorted(groups)
    else:
        groups = {"*": ordered}
        keys = ["*"]
    alloc = _allocate([len(groups[k]) for k in keys], policy.train_fraction)
    train_ids = set()
    for k, n_train in zip(keys, alloc):
        members = groups[k]
        perm = rng.permutation(len(members))
        train_ids.update(members[i].id for i in perm[:n_train])
    train = [r for r in records if r.id in train_ids]
    test = [r for r in records if r.id not in train_ids]
    return train, test


# -- statistics ----------------------------------------------------------------

@dataclass
class ClassDistribution:
    classes: list
    train: dict
    test: dict

    def overall(self, coarse):
        return self.train[coarse] + self.test[coarse]

    def row(self, coarse):
        return self.train[coarse], self.test[coarse], self.overall(coarse)

    @property
    def totals(self):
        tr = sum(self.train.values())
        te = sum(self.test.values())
        return tr, te, tr + te

    def to_table(self) -> str:
        lines = [f"{'Class':<15}{'Train':>7}{'Test':>7}{'Overall':>9}"]
        for c in self.classes:
            tr, te, ov = self.row(c)
            lines.append(f"{COARSE_NAMES.get(c, c):<15}{tr:>7}{te:>7}{ov:>9}")
        tr, te, ov = self.totals
        lines.append(f"{'Total':<15}{tr:>7}{te:>7}{ov:>9}")
        return "\n".join(lines)


def corpus_stats(train, test, taxonomy=None) -> ClassDistribution:
    classes = (taxonomy or default_taxonomy()).coarse_classes()
    tr = Counter(r.label.coarse for r in train)
    te = Counter(r.label.coarse for r in test)
    return ClassDistribution(classes, {c: tr[c] for c in classes}, {c: te[c] for c in classes})


def load_manifest(source=None) -> dict:
    """Read a ``coarse<TAB>train<TAB>test`` manifest (default: the bundled reference counts)."""
    if source is None:
        from importlib import resources
        text = resources.files("qclf").joinpath("data/table2_manifest.tsv").read_text("utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    manifest = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        coarse, train, test = line.split("\t")
        manifest[coarse.strip()] = (int(train), int(test))
    return manifest


# -- inter-annotator agreement -------------------------------------------------

AnnotationPairs = Union[Mapping[str, tuple], Iterable[tuple]]


def _pairs(pairs):
    if isinstance(pairs, Mapping):
        return list(pairs.values())
    return [(p[-2], p[-1]) for p in pairs]


def cohen_kappa(pairs: AnnotationPairs) -> float:
    """Non-weighted Cohen's kappa between two annotators.

    ``pairs`` is either a mapping ``id -> (label_a, label_b)`` or an iterable of
    ``(label_a, label_b)`` (or ``(id, label_a, label_b)``) tuples.
    """
    pairs = _pairs(pairs)
    n = len(pairs)
    if n == 0:
        raise ValueError("kappa needs at least one annotated item")
    agree = sum(a == b for a, b in pairs)
    if agree == n:
        return 1.0
    ca = Counter(a for a, _ in pairs)
    cb = Counter(b for _, b in pairs)
    chance = sum(ca[c] * cb[c] for c in ca)  # n^2 * p_e, exact integer
    if chance == n * n:
        raise DegenerateMarginals("expected agreement is 1 but observed agreement is not")
    return (n * agree - chance) / (n * n - chance)


def load_annotation_pairs(source) -> dict:
    """Read ``id<TAB>labelA<TAB>labelB`` lines into a mapping."""
    pairs = {}
    for lineno, line in enumerate(_lines(source), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(lineno, "expected id<TAB>labelA<TAB>labelB")
        rid, a, b = (p.strip() for p in parts)
        if rid in pairs:
            raise DuplicateId(rid)
        pairs[rid] = (a, b)
    return pairs


def merge_annotations(source_a, source_b) -> dict:
    """Pair two single-annotator ``id<TAB>label`` files by id."""
    def read(src):
        out = {}
        for lineno, line in enumerate(_lines(src), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(lineno, "expected id<TAB>label")
            out[parts[0].strip()] = parts[1].strip()
        return out
    a, b = read(source_a), read(source_b)
    if set(a) != set(b):
        raise CorpusError("annotators cover different id sets")
    return {k: (a[k], b[k]) for k in sorted(a)}
