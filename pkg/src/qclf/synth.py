"""Synthetic annotated question corpora and the bundled hand-written sample.

Synthetic questions are WX-looking token strings built from class templates:
a class-typical interrogative, class-signature content words, optional
fine-class words, shared "confusable" content words that appear in every
class, gazetteer words and a verb.  A fraction of coarse labels can be
flipped to model annotation noise.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

from .corpus import QuestionRecord, Token, load_corpus, load_manifest
from .taxonomy import Label, Taxonomy, default_taxonomy

#: overall class counts of the reference corpus, in taxonomy order
REFERENCE_COUNTS = {"PER": 262, "ORG": 104, "LOC": 106, "TEM": 116, "NUM": 101,
                  "METH": 104, "REA": 99, "DEF": 116, "MISC": 92}

# Interrogatives typical of each class.  Several forms are shared across
# classes on purpose (a single interrogative does not fix the class).
CLASS_INTERROGATIVES = {
    "PER": ["ke", "kAra", "kAke"],
    "ORG": ["koVna", "koVnati"],
    "LOC": ["koWAyZa", "koWA"],
    "TEM": ["kabe", "kaKana"],
    "NUM": ["kawa", "kayZati", "kawajana"],
    "METH": ["kiBAbeV", "kemana"],
    "REA": ["keVna", "ki kAraNeV"],
    "DEF": ["ki", "kI"],
    "MISC": ["ki ki", "koVna koVna"],
}

CLASS_GAZETTEER = {"TEM": "date", "DEF": "food", "PER": "human-authority"}
CLASS_NE = {"PER": "Person", "LOC": "Location", "ORG": "Organization"}
CLASS_POSITIONS = {  # P(FIRST), P(MIDDLE), P(LAST)
    "PER": (0.7, 0.2, 0.1), "ORG": (0.5, 0.4, 0.1), "LOC": (0.1, 0.6, 0.3),
    "TEM": (0.2, 0.6, 0.2), "NUM": (0.1, 0.4, 0.5), "METH": (0.2, 0.7, 0.1),
    "REA": (0.3, 0.6, 0.1), "DEF": (0.0, 0.1, 0.9), "MISC": (0.1, 0.5, 0.4),
}
VERBS = ["karena", "Cila", "hayZa", "balA", "yAyZa", "Ce", "kareVna", "Cilena", "pAoVyZA",
         "xeVoVyZA"]

_ONSETS = ["k", "K", "g", "G", "c", "C", "j", "J", "t", "T", "w", "W", "x", "X", "n", "p",
           "P", "b", "B", "m", "y", "r", "l", "S", "s", "h", "d", "D"]
_VOWELS = ["a", "A", "i", "I", "u", "U", "e", "o", "eV", "oV"]


@dataclass(frozen=True)
class SynthSpec:
    n: int = 1100
    class_distribution: Optional[dict] = None   # default: reference-corpus proportions
    fine_mixing: float = 0.9     # P(question carries a fine-class word)
    fine_vocab_size: int = 1     # cue words per fine class
    noise: float = 0.0           # fraction of coarse labels flipped
    vocab_size: int = 3          # signature words per coarse class
    interrogative_rate: float = 0.85  # P(class-typical interrogative)
    gazetteer_rate: float = 0.5
    confusable_rate: float = 0.6      # P(each of up to two shared content words)
    confusable_pool: int = 30
    signature_rate: float = 1.0       # P(question carries a class-signature word)
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise must be in [0, 0.5)")
        if min(self.vocab_size, self.fine_vocab_size, self.confusable_pool) < 1:
            raise ValueError("word pool sizes must be >= 1")
        dist = self.distribution()
        if abs(sum(dist.values()) - 1) > 1e-9:
            raise ValueError("class distribution must sum to 1")
        for name in ("fine_mixing", "interrogative_rate", "gazetteer_rate", "confusable_rate",
                     "signature_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be a probability")

    def distribution(self):
        if self.class_distribution is not None:
            return dict(self.class_distribution)
        total = sum(REFERENCE_COUNTS.values())
        return {c: v / total for c, v in REFERENCE_COUNTS.items()}


def _make_words(rng, count, taken):
    words = []
    while len(words) < count:
        k = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(k))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


@functools.lru_cache(maxsize=8)
def _vocabulary(vocab_size, fine_vocab_size, confusable_pool, taxonomy_key):
    """Deterministic, disjoint word pools (independent of the corpus seed)."""
    from .features import default_lexicons
    taxonomy = default_taxonomy()
    lex = default_lexicons()
    taken = set(lex.interrogatives) | set(VERBS) | {w for ws in lex.gazetteers.values() for w in ws}
    taken |= {w for s in lex.interrogatives for w in s.split()}
    rng = np.random.default_rng(20240917)
    signature = {c: _make_words(rng, vocab_size, taken) for c in taxonomy.coarse_classes()}
    fine = {str(f): _make_words(rng, fine_vocab_size, taken) for f in taxonomy.all_fine_classes()}
    confusable = _make_words(rng, confusable_pool, taken)
    return signature, fine, confusable


def _class_counts(n, dist, classes):
    """Largest-remainder rounding of ``n * p`` per class."""
    exact = [n * dist.get(c, 0.0) for c in classes]
    alloc = [int(np.floor(e)) for e in exact]
    order = sorted(range(len(classes)), key=lambda i: (-(exact[i] - alloc[i]), i))
    for i in order[: n - sum(alloc)]:
        alloc[i] += 1
    return dict(zip(classes, alloc))


def _question(rng, coarse, fine, spec, vocab, lexicons):
    signature, fine_words, confusable = vocab
    # interrogative
    if rng.random() < spec.interrogative_rate:
        opts = CLASS_INTERROGATIVES[coarse]
    else:
        opts = [w for ws in CLASS_INTERROGATIVES.values() for w in ws]
    wh = opts[rng.integers(len(opts))].split()

    nouns = []  # (form, pos, ne)
    if rng.random() < spec.signature_rate:
        for _ in range(int(rng.integers(1, 3))):
            w = signature[coarse][rng.integers(len(signature[coarse]))]
            ne = CLASS_NE.get(coarse) if rng.random() < 0.5 else None
            nouns.append((w, "NNP" if ne else "NN", ne))
    if fine is not None and rng.random() < spec.fine_mixing:
        fw = fine_words[f"{coarse}:{fine}"]
        nouns.append((fw[rng.integers(len(fw))], "NN", None))
    for _ in range(2):
        if rng.random() < spec.confusable_rate:
            nouns.append((confusable[rng.integers(len(confusable))], "NN", None))
    gaz = CLASS_GAZETTEER.get(coarse)
    if gaz and rng.random() < spec.gazetteer_rate:
        words = sorted(lexicons.gazetteers[gaz])
        nouns.append((words[rng.integers(len(words))], "NN", None))
    if not nouns:
        nouns.append((confusable[rng.integers(len(confusable))], "NN", None))
    nouns = [nouns[i] for i in rng.permutation(len(nouns))]

    noun_tokens = [Token(f, p, "B-NP" if i == 0 else "I-NP", ne)
                   for i, (f, p, ne) in enumerate(nouns)]
    wh_tokens = [Token(w, "WQ", "O", None) for w in wh]
    verb = Token(VERBS[rng.integers(len(VERBS))], "VM", "B-VGF", None)

    where = rng.choice(3, p=CLASS_POSITIONS[coarse])
    if where == 0:
        body = wh_tokens + noun_tokens + [verb]
    elif where == 1:
        body = noun_tokens + wh_tokens + [verb]
    else:
        body = noun_tokens + [verb] + wh_tokens
    marker = "|" if coarse == "DEF" and rng.random() < 0.3 else "?"
    tokens = tuple(body) + (Token(marker, "SYM", "O", None),)
    return tokens, marker


def generate_corpus(spec: SynthSpec, taxonomy: Taxonomy = None,
                    class_counts: Optional[dict] = None, splits: Optional[dict] = None):
    """Generate ``spec.n`` labelled records, deterministic in ``spec.seed``.

    ``class_counts`` overrides the per-class totals; ``splits`` maps a coarse
    class to its number of training records, tagging the rest as test.
    """
    from .features import default_lexicons
    taxonomy = taxonomy or default_taxonomy()
    lexicons = default_lexicons()
    classes = taxonomy.coarse_classes()
    vocab = _vocabulary(spec.vocab_size, spec.fine_vocab_size, spec.confusable_pool, id(taxonomy))
    counts = class_counts or _class_counts(spec.n, spec.distribution(), classes)
    n = sum(counts.values())

    master = np.random.default_rng(np.random.SeedSequence([int(spec.seed), 1]))
    labels = [c for c in classes for _ in range(counts.get(c, 0))]
    split_tags = [None] * n
    if splits is not None:
        i = 0
        for c in classes:
            k = counts.get(c, 0)
            for j in range(k):
                split_tags[i + j] = "train" if j < splits.get(c, 0) else "test"
            i += k
    order = master.permutation(n)
    n_noisy = int(round(spec.noise * n))
    noisy = set(master.permutation(n)[:n_noisy].tolist())

    records = []
    for pos, src in enumerate(order):
        coarse = labels[src]
        rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), 2, pos]))
        fines = taxonomy.fine_classes(coarse)
        fine = fines[rng.integers(len(fines))].name
        tokens, marker = _question(rng, coarse, fine, spec, vocab, lexicons)
        label = Label(coarse, fine)
        if pos in noisy:
            others = [c for c in classes if c != coarse]
            new = others[rng.integers(len(others))]
            nf = taxonomy.fine_classes(new)
            label = Label(new, nf[rng.integers(len(nf))].name)
        text = " ".join(t.form for t in tokens)
        records.append(QuestionRecord(f"syn-{pos:05d}", text, tokens, marker, label,
                                      split_tags[src]))
    return records


def table2_corpus(seed=0, manifest=None, **spec_kwargs):
    """Synthetic corpus whose per-class train/test counts follow a manifest
    (by default the bundled reference counts: 769 train / 331 test)."""
    manifest = manifest or load_manifest()
    counts = {c: tr + te for c, (tr, te) in manifest.items()}
    spec = SynthSpec(n=sum(counts.values()), seed=seed, **spec_kwargs)
    return generate_corpus(spec, class_counts=counts,
                           splits={c: tr for c, (tr, _) in manifest.items()})


def benchmark_corpus(seed=0, n=1100, noise=0.15, **kwargs):
    """The standard noisy synthetic benchmark (reference proportions, confusables on)."""
    return generate_corpus(SynthSpec(n=n, noise=noise, seed=seed, **kwargs))


def bundled_sample():
    """The packaged hand-annotated sample questions."""
    data = resources.files("qclf").joinpath("data/sample.jsonl").read_bytes()
    return load_corpus(data)


def bundled_sample_manifest() -> dict:
    text = resources.files("qclf").joinpath("data/sample_manifest.tsv").read_text("utf-8")
    out = {}
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            c, k = line.split("\t")
            out[c] = int(k)
    return out


def manifest_text(records, taxonomy=None) -> str:
    """Per-class count sidecar for a generated corpus."""
    from collections import Counter
    classes = (taxonomy or default_taxonomy()).coarse_classes()
    counts = Counter(r.label.coarse for r in records)
    return "# coarse\tcount\n" + "".join(f"{c}\t{counts[c]}\n" for c in classes)
