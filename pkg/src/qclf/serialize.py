"""Deterministic JSON persistence for trained models.

A saved model is one JSON document ``{"format", "version", "header", "body"}``.
The header carries the model kind, the feature-space fingerprint, ``K`` and
the feature count; the body is model specific.  Keys are sorted and floats
use ``repr`` round-tripping, so saving the same model twice gives identical
bytes and loading restores bit-identical predictions.
"""
from __future__ import annotations

import json
import os
import tempfile

from .errors import QCError

FORMAT = "qclf-model"
VERSION = 1


class ModelFormatError(QCError):
    pass


def _registry():
    from .ensembles import BaggedModel, BoostModel, StackModel, VotedModel
    from .learners import DecisionTreeModel, KernelNaiveBayesModel, NaiveBayesModel, RuleModel
    return {cls.kind: cls for cls in (NaiveBayesModel, KernelNaiveBayesModel, RuleModel,
                                      DecisionTreeModel, BaggedModel, BoostModel, StackModel,
                                      VotedModel)}


def model_to_dict(model) -> dict:
    return {"header": model.header(), "body": model.to_dict()}


def model_from_dict(d: dict):
    try:
        header, body = d["header"], d["body"]
        cls = _registry()[header["kind"]]
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"not a serialized model: {exc}") from None
    return cls.from_dict(header, body)


def dumps(model) -> str:
    doc = {"format": FORMAT, "version": VERSION, **model_to_dict(model)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid model JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("missing or unknown model format tag")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    return model_from_dict(doc)


def atomic_write(path, data: str | bytes):
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(model, path):
    atomic_write(path, dumps(model))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


# -- bundles: model + feature space -------------------------------------------

BUNDLE_FORMAT = "qclf-bundle"


class Bundle:
    """A trained model together with everything needed to vectorize new questions.

    ``classes`` names the model's output labels in index order (coarse class
    codes, or fine class names when ``coarse`` is set).
    """

    def __init__(self, model, index, config, classes, coarse=None, metadata=None):
        self.model = model
        self.index = index
        self.config = config
        self.classes = list(classes)
        self.coarse = coarse
        self.metadata = dict(metadata or {})

    def vectorize(self, records, coarse_hints=None):
        from .features import to_matrix, vectorize_all
        if coarse_hints is None and self.config.include_coarse_class:
            coarse_hints = [self.coarse] * len(records) if self.coarse else \
                [r.label.coarse for r in records]
        return to_matrix(vectorize_all(records, self.index, self.config, None, coarse_hints),
                         self.index)

    def to_dict(self):
        return {
            "format": BUNDLE_FORMAT, "version": VERSION,
            "features": [list(f) for f in self.index.features],
            "config": {"groups": sorted(self.config.groups),
                       "include_coarse_class": self.config.include_coarse_class,
                       "unigrams": self.config.unigrams},
            "classes": self.classes, "coarse": self.coarse, "metadata": self.metadata,
            "model": model_to_dict(self.model),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, text):
        from .features import FeatureConfig, FeatureIndex
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"invalid bundle JSON: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != BUNDLE_FORMAT:
            raise ModelFormatError("not a model bundle")
        if doc.get("version") != VERSION:
            raise ModelFormatError(f"unsupported bundle version {doc.get('version')!r}")
        cfg = doc["config"]
        config = FeatureConfig(tuple(cfg["groups"]), cfg["include_coarse_class"], cfg["unigrams"])
        index = FeatureIndex(tuple(f) for f in doc["features"])
        model = model_from_dict(doc["model"])
        if index.fingerprint != model.fingerprint:
            raise ModelFormatError("bundle feature list does not match the model fingerprint")
        return cls(model, index, config, doc["classes"], doc.get("coarse"), doc.get("metadata"))

    def save(self, path):
        atomic_write(path, self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())
