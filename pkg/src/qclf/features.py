"""Lexical, syntactic and semantic question features and sparse question vectors.

A question is a sparse term-frequency vector over named features.  Features
are keyed by ``FeatureId(namespace, key)``; the trailing end-marker token only
contributes to the question length and the END_MARKER feature.
"""
from __future__ import annotations

import functools
import hashlib
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .corpus import END_MARKERS, QuestionRecord
from .errors import EmptyFeatureSpace, IndexMismatch, MissingCoarseHint, NoInterrogative
from .taxonomy import Taxonomy, default_taxonomy

NAMESPACES = (
    "WORD", "WH_WORD", "WH_POS", "WH_TYPE", "QLEN", "END_MARKER", "WORD_SHAPE",
    "POS_TAG", "TAGGED_UNIGRAM", "HEAD_WORD", "RELATED", "NE", "COARSE_CLASS",
)
NUMERIC_NAMESPACES = frozenset({"QLEN"})

LEXICAL, SYNTACTIC, SEMANTIC = "L", "S", "M"

FEATURE_SETS = {
    "fl": frozenset({LEXICAL}),
    "fl+fs": frozenset({LEXICAL, SYNTACTIC}),
    "fl+fs+fm": frozenset({LEXICAL, SYNTACTIC, SEMANTIC}),
}

FIRST, MIDDLE, LAST = "FIRST", "MIDDLE", "LAST"
ALL_DIGITS, MIXED, OTHER = "ALL_DIGITS", "MIXED", "OTHER"
WH_TYPES = ("SI", "DI", "CI")


class FeatureId(NamedTuple):
    namespace: str
    key: str

    def __str__(self):
        return f"{self.namespace}:{self.key}"


QLEN_FEATURE = FeatureId("QLEN", "length")


@dataclass(frozen=True)
class FeatureConfig:
    groups: frozenset = FEATURE_SETS["fl+fs+fm"]
    include_coarse_class: bool = False
    unigrams: bool = True

    def __post_init__(self):
        object.__setattr__(self, "groups", frozenset(self.groups))
        if not self.groups:
            raise ValueError("at least one feature group must be enabled")
        if not self.groups <= {LEXICAL, SYNTACTIC, SEMANTIC}:
            raise ValueError(f"unknown feature groups {set(self.groups)}")

    @classmethod
    def from_name(cls, name: str, include_coarse_class=False, unigrams=True):
        key = name.lower().replace(" ", "").replace("_", "")
        if key not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {name!r}; expected one of {list(FEATURE_SETS)}")
        return cls(FEATURE_SETS[key], include_coarse_class, unigrams)

    @property
    def name(self):
        for k, v in FEATURE_SETS.items():
            if v == self.groups:
                return k
        return "+".join(sorted(self.groups))


@dataclass(frozen=True, eq=False)
class Lexicons:
    """Interrogative word list (word -> SI/DI/CI) and named gazetteers."""

    interrogatives: dict
    gazetteers: dict

    def __post_init__(self):
        for word in self.interrogatives:
            if not word.strip():
                raise ValueError("empty interrogative entry")
        for name, words in self.gazetteers.items():
            if any(not w.strip() for w in words):
                raise ValueError(f"empty entry in gazetteer {name!r}")

    @functools.cached_property
    def single_interrogatives(self):
        return frozenset(w for w in self.interrogatives if " " not in w)

    @functools.cached_property
    def multiword(self):
        return tuple((tuple(w.split()), tag) for w, tag in sorted(self.interrogatives.items())
                     if " " in w)

    @functools.cached_property
    def word_lists(self):
        """word -> sorted tuple of gazetteer names it belongs to."""
        out = {}
        for name in sorted(self.gazetteers):
            for w in self.gazetteers[name]:
                out.setdefault(w, []).append(name)
        return {w: tuple(v) for w, v in out.items()}

    @classmethod
    def parse(cls, interrogatives_text: str, gazetteers_text: str) -> "Lexicons":
        wh = {}
        for line in _data_lines(interrogatives_text):
            word, _, tag = line.partition("\t")
            tag = tag.strip().upper()
            if tag not in WH_TYPES:
                raise ValueError(f"bad interrogative type in line {line!r}")
            wh[" ".join(word.split())] = tag
        gaz = {}
        for line in _data_lines(gazetteers_text):
            name, _, word = line.partition("\t")
            if not word.strip():
                raise ValueError(f"bad gazetteer line {line!r}")
            gaz.setdefault(name.strip(), set()).add(word.strip())
        return cls(wh, {k: frozenset(v) for k, v in gaz.items()})

    @classmethod
    def from_files(cls, interrogatives_path, gazetteers_path) -> "Lexicons":
        return cls.parse(Path(interrogatives_path).read_text("utf-8"),
                         Path(gazetteers_path).read_text("utf-8"))


def _data_lines(text):
    for line in text.splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            yield line.rstrip("\n")


@functools.lru_cache(maxsize=None)
def default_lexicons() -> Lexicons:
    data = resources.files("qclf").joinpath("data")
    return Lexicons.parse(data.joinpath("interrogatives.tsv").read_text("utf-8"),
                          data.joinpath("gazetteers.tsv").read_text("utf-8"))


# -- lexical -------------------------------------------------------------------

def word_shape(form: str) -> str:
    if not form:
        raise ValueError("empty token form")
    digits = sum(ch.isdecimal() for ch in form)
    if digits == len(form):
        return ALL_DIGITS
    if digits:
        return MIXED
    return OTHER


def is_interrogative(token, lexicons: Lexicons) -> bool:
    return token.pos == "WQ" or token.form in lexicons.single_interrogatives


def wh_positions(record: QuestionRecord, lexicons: Lexicons = None):
    """``(token index, form, FIRST|MIDDLE|LAST)`` for each interrogative token."""
    lexicons = lexicons or default_lexicons()
    content = record.content_tokens
    last = len(content) - 1
    out = []
    for i, tok in enumerate(content):
        if not is_interrogative(tok, lexicons):
            continue
        if i == 0:
            pos = FIRST
        elif i == last:
            pos = LAST
        else:
            pos = MIDDLE
        out.append((i, tok.form, pos))
    return out


def _contains(seq, sub):
    n = len(sub)
    return any(tuple(seq[i:i + n]) == sub for i in range(len(seq) - n + 1))


def wh_type(record: QuestionRecord, lexicons: Lexicons = None) -> str:
    """SI, DI or CI.

    Adjacent interrogative tokens (e.g. reduplicated ``ki ki``) give DI; a
    matched lexicon entry tagged CI gives CI; otherwise SI.
    """
    lexicons = lexicons or default_lexicons()
    positions = wh_positions(record, lexicons)
    if not positions:
        raise NoInterrogative(record.id)
    idx = [p[0] for p in positions]
    if any(b == a + 1 for a, b in zip(idx, idx[1:])):
        return "DI"
    forms = [t.form for t in record.content_tokens]
    matched = {lexicons.interrogatives[f] for _, f, _ in positions if f in lexicons.interrogatives}
    matched.update(tag for words, tag in lexicons.multiword if _contains(forms, words))
    if "CI" in matched:
        return "CI"
    if "DI" in matched:
        return "DI"
    return "SI"


def extract_lexical(record: QuestionRecord, lexicons: Lexicons = None, unigrams=True) -> Counter:
    lexicons = lexicons or default_lexicons()
    feats = Counter()
    positions = wh_positions(record, lexicons)
    for _, form, pos in positions:
        feats[FeatureId("WH_WORD", form)] += 1
        feats[FeatureId("WH_POS", pos)] += 1
    if positions:
        feats[FeatureId("WH_TYPE", wh_type(record, lexicons))] = 1
    feats[QLEN_FEATURE] = len(record.tokens)
    feats[FeatureId("END_MARKER", END_MARKERS[record.end_marker])] = 1
    for tok in record.content_tokens:
        feats[FeatureId("WORD_SHAPE", word_shape(tok.form))] += 1
        if unigrams:
            feats[FeatureId("WORD", tok.form)] += 1
    return feats


# -- syntactic -----------------------------------------------------------------

class Span(NamedTuple):
    start: int
    stop: int
    text: str


def chunks(tokens: Sequence) -> list[tuple[str, int, int]]:
    """BIO chunk tags -> ``(type, start, stop)`` spans."""
    out = []
    cur = None
    for i, tok in enumerate(tokens):
        tag = tok.chunk or "O"
        prefix, _, ctype = tag.partition("-")
        if prefix == "B" or (prefix == "I" and (cur is None or cur[0] != ctype)):
            if cur:
                out.append(tuple(cur))
            cur = [ctype, i, i + 1]
        elif prefix == "I":
            cur[2] = i + 1
        else:
            if cur:
                out.append(tuple(cur))
            cur = None
    if cur:
        out.append(tuple(cur))
    return out


def find_head_word(record: QuestionRecord, lexicons: Lexicons = None) -> Optional[Span]:
    """Locate the head-word NP chunk relative to the first interrogative.

    Interrogative first: first NP chunk after it.  Otherwise: nearest NP
    chunk ending before it.
    """
    positions = wh_positions(record, lexicons)
    if not positions:
        return None
    wh_index, _, where = positions[0]
    content = record.content_tokens
    nps = [(s, e) for t, s, e in chunks(content) if t == "NP"]
    if where == FIRST:
        cands = [(s, e) for s, e in nps if s > wh_index]
        chosen = cands[0] if cands else None
    else:
        cands = [(s, e) for s, e in nps if e <= wh_index]
        chosen = cands[-1] if cands else None
    if chosen is None:
        return None
    s, e = chosen
    return Span(s, e, " ".join(t.form for t in content[s:e]))


def extract_syntactic(record: QuestionRecord, lexicons: Lexicons = None) -> Counter:
    feats = Counter()
    for tok in record.content_tokens:
        feats[FeatureId("POS_TAG", tok.pos)] += 1
        feats[FeatureId("TAGGED_UNIGRAM", f"{tok.form}/{tok.pos}")] += 1
    head = find_head_word(record, lexicons)
    if head is not None:
        feats[FeatureId("HEAD_WORD", head.text)] = 1
    return feats


# -- semantic ------------------------------------------------------------------

def extract_semantic(record: QuestionRecord, lexicons: Lexicons = None) -> Counter:
    lexicons = lexicons or default_lexicons()
    feats = Counter()
    lists = lexicons.word_lists
    for tok in record.content_tokens:
        for name in lists.get(tok.form.strip(), ()):
            feats[FeatureId("RELATED", name)] += 1
        if tok.ne and tok.ne != "O":
            feats[FeatureId("NE", tok.ne)] += 1
    return feats


def extract(record, config: FeatureConfig, lexicons=None, coarse_hint=None) -> Counter:
    """All features of the enabled groups (plus the coarse-class feature)."""
    lexicons = lexicons or default_lexicons()
    feats = Counter()
    if LEXICAL in config.groups:
        feats.update(extract_lexical(record, lexicons, config.unigrams))
    if SYNTACTIC in config.groups:
        feats.update(extract_syntactic(record, lexicons))
    if SEMANTIC in config.groups:
        feats.update(extract_semantic(record, lexicons))
    if config.include_coarse_class:
        if coarse_hint is None:
            raise MissingCoarseHint(record.id)
        feats[FeatureId("COARSE_CLASS", coarse_hint)] = 1
    return feats


# -- vector space --------------------------------------------------------------

class FeatureIndex:
    """Frozen bidirectional map between feature ids and column numbers."""

    def __init__(self, features: Iterable[FeatureId]):
        ids = tuple(sorted(set(FeatureId(*f) for f in features)))
        self._ids = ids
        self._col = {f: i for i, f in enumerate(ids)}
        h = hashlib.sha256("\n".join(map(str, ids)).encode("utf-8"))
        self.fingerprint = h.hexdigest()[:16]
        self.numeric_columns = tuple(i for i, f in enumerate(ids)
                                     if f.namespace in NUMERIC_NAMESPACES)

    def __len__(self):
        return len(self._ids)

    @property
    def N(self):
        return len(self._ids)

    def __contains__(self, feature):
        return feature in self._col

    def column(self, feature) -> int:
        return self._col[feature]

    def get(self, feature, default=None):
        return self._col.get(feature, default)

    def feature(self, column: int) -> FeatureId:
        return self._ids[column]

    @property
    def features(self):
        return self._ids

    def __eq__(self, other):
        return isinstance(other, FeatureIndex) and self._ids == other._ids

    def __hash__(self):
        return hash(self._ids)

    def __repr__(self):
        return f"FeatureIndex(N={len(self)}, fingerprint={self.fingerprint})"


class SparseVector:
    """Non-zero entries of a question vector, sorted by column."""

    __slots__ = ("indices", "values", "index")

    def __init__(self, indices, values, index: FeatureIndex):
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(indices, kind="stable")
        indices, values = indices[order], values[order]
        keep = values != 0
        indices, values = indices[keep], values[keep]
        if np.any(np.diff(indices) <= 0):
            raise ValueError("duplicate column in sparse vector")
        if np.any(values < 0):
            raise ValueError("feature values must be non-negative")
        if len(indices) and (indices[0] < 0 or indices[-1] >= len(index)):
            raise ValueError("column out of range")
        self.indices = indices
        self.values = values
        self.index = index

    @property
    def nnz(self):
        return len(self.indices)

    def __getitem__(self, column):
        pos = np.searchsorted(self.indices, column)
        if pos < len(self.indices) and self.indices[pos] == column:
            return float(self.values[pos])
        return 0.0

    def to_dense(self) -> np.ndarray:
        out = np.zeros(len(self.index))
        out[self.indices] = self.values
        return out

    def items(self):
        return [(self.index.feature(int(i)), float(v)) for i, v in zip(self.indices, self.values)]

    def __eq__(self, other):
        return (isinstance(other, SparseVector) and self.index == other.index
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"SparseVector(nnz={self.nnz}, N={len(self.index)})"


def build_feature_index(train: Iterable[QuestionRecord], config: FeatureConfig,
                        lexicons: Lexicons = None, taxonomy: Taxonomy = None) -> FeatureIndex:
    lexicons = lexicons or default_lexicons()
    plain = FeatureConfig(config.groups, False, config.unigrams)
    seen = set()
    for r in train:
        seen.update(extract(r, plain, lexicons))
    if config.include_coarse_class:
        seen.update(FeatureId("COARSE_CLASS", c)
                    for c in (taxonomy or default_taxonomy()).coarse_classes())
    if not seen:
        raise EmptyFeatureSpace("no features extracted from the training records")
    return FeatureIndex(seen)


def vectorize(record: QuestionRecord, index: FeatureIndex, config: FeatureConfig,
              lexicons: Lexicons = None, coarse_hint: Optional[str] = None) -> SparseVector:
    """Question vector restricted to ``index``; unseen features are dropped."""
    feats = extract(record, config, lexicons, coarse_hint)
    cols, vals = [], []
    for f, v in feats.items():
        c = index.get(f)
        if c is not None and v:
            cols.append(c)
            vals.append(v)
    return SparseVector(cols, vals, index)


def vectorize_all(records, index, config, lexicons=None, coarse_hints=None) -> list[SparseVector]:
    if coarse_hints is None:
        coarse_hints = [None] * len(records)
    return [vectorize(r, index, config, lexicons, h) for r, h in zip(records, coarse_hints)]


def to_matrix(vectors: Sequence[SparseVector], index: FeatureIndex = None) -> np.ndarray:
    """Stack sparse vectors into a dense ``(n, N)`` array."""
    if index is None:
        if not vectors:
            raise ValueError("cannot infer feature index from no vectors")
        index = vectors[0].index
    X = np.zeros((len(vectors), len(index)))
    for i, v in enumerate(vectors):
        if v.index is not index and v.index != index:
            raise IndexMismatch("vectors come from different feature spaces")
        X[i, v.indices] = v.values
    return X
