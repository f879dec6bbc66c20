"""Two-layer (coarse / fine) question class taxonomy.

The taxonomy is read from a tab-separated data file so fine classes can be
added without code changes::

    PER<TAB>GROUP,INDIVIDUAL,...
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .errors import FineCoarseMismatch, UnknownCoarse, UnknownFine

#: display names used in corpus statistics tables
COARSE_NAMES = {
    "PER": "Person",
    "ORG": "Organization",
    "LOC": "Location",
    "TEM": "Temporal",
    "NUM": "Numerical",
    "METH": "Methodical",
    "REA": "Reason",
    "DEF": "Definition",
    "MISC": "Miscellaneous",
}


@dataclass(frozen=True)
class FineClass:
    coarse: str
    name: str

    def __str__(self):
        return f"{self.coarse}:{self.name}"


@dataclass(frozen=True, order=True)
class Label:
    coarse: str
    fine: Optional[str] = None

    def __str__(self):
        return self.coarse if self.fine is None else f"{self.coarse}:{self.fine}"


def _norm(ident):
    return ident.strip().upper()


class Taxonomy:
    """Immutable coarse -> fine class table."""

    def __init__(self, rows: Iterable[tuple[str, list[str]]]):
        table = {}
        for coarse, fines in rows:
            coarse = _norm(coarse)
            if coarse in table:
                raise ValueError(f"coarse class {coarse} listed twice")
            table[coarse] = tuple(_norm(f) for f in fines if f.strip())
        self._table = table
        self._coarse = tuple(table)
        self._fine_owner = {}
        for coarse, fines in table.items():
            for fine in fines:
                self._fine_owner.setdefault(fine, []).append(coarse)

    @classmethod
    def parse(cls, text: str) -> "Taxonomy":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            coarse, sep, fines = line.partition("\t")
            if not sep:
                raise ValueError(f"taxonomy line {lineno}: expected COARSE<TAB>FINES")
            rows.append((coarse, fines.split(",")))
        return cls(rows)

    @classmethod
    def from_file(cls, path) -> "Taxonomy":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def coarse_classes(self) -> list[str]:
        return list(self._coarse)

    def fine_classes(self, coarse: str) -> list[FineClass]:
        coarse = _norm(coarse)
        if coarse not in self._table:
            raise UnknownCoarse(coarse)
        return [FineClass(coarse, f) for f in self._table[coarse]]

    def all_fine_classes(self) -> list[FineClass]:
        return [f for c in self._coarse for f in self.fine_classes(c)]

    def validate_label(self, coarse: str, fine: Optional[str] = None) -> Label:
        c = _norm(coarse)
        if c not in self._table:
            raise UnknownCoarse(coarse)
        if fine is None or not fine.strip():
            return Label(c)
        f = _norm(fine)
        owners = self._fine_owner.get(f)
        if not owners:
            raise UnknownFine(fine)
        if c not in owners:
            raise FineCoarseMismatch(f"{f} belongs to {'/'.join(owners)}, not {c}")
        return Label(c, f)

    def parse_label(self, text: str) -> Label:
        coarse, _, fine = text.partition(":")
        return self.validate_label(coarse, fine or None)

    def coarse_index(self, coarse: str) -> int:
        return self._coarse.index(_norm(coarse))

    def __len__(self):
        return len(self._coarse)


@functools.lru_cache(maxsize=None)
def default_taxonomy() -> Taxonomy:
    text = resources.files("qclf").joinpath("data/taxonomy.tsv").read_text(encoding="utf-8")
    return Taxonomy.parse(text)


def coarse_classes() -> list[str]:
    return default_taxonomy().coarse_classes()


def fine_classes(coarse: str) -> list[FineClass]:
    return default_taxonomy().fine_classes(coarse)


def validate_label(coarse: str, fine: Optional[str] = None) -> Label:
    return default_taxonomy().validate_label(coarse, fine)


def parse_label(text: str) -> Label:
    return default_taxonomy().parse_label(text)


def format_label(label: Label) -> str:
    return str(label)
