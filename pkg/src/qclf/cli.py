"""Command-line interface: ``qclf <command> [options]``.

Every option can also come from a JSON config file (``--config run.json``)
whose keys are the option names with dashes replaced by underscores, plus
``"version": 1``.  Flags given on the command line win over the file.

Exit codes: 0 success, 1 usage or configuration error, 2 data validation
error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from . import corpus as qc
from . import ensembles as ens
from . import evaluation as ev
from . import features as qf
from . import synth
from .errors import CorpusError, DegenerateMarginals, LabelError, QCError
from .serialize import Bundle, ModelFormatError, atomic_write
from .taxonomy import Taxonomy, default_taxonomy

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
CONFIG_VERSION = 1
SAMPLE = "@sample"

DEFAULTS = {
    "features": "fl+fs+fm",
    "approach": "individual",
    "learner": "DT",
    "meta_learner": "DT",
    "size": 10,
    "max_iters": 10,
    "meta_cv_folds": None,
    "proba": False,
    "split": "explicit",
    "train_fraction": 0.7,
    "seed": 0,
    "seeds": None,
    "jobs": 1,
    "level": "coarse",
    "coarse": None,
    "mode": "gold",
    "sizes": "1..25",
    "tol": 0.001,
    "window": 3,
    "individual": False,
    "n": 1100,
    "noise": 0.0,
    "table2": False,
    "taxonomy": None,
    "interrogatives": None,
    "gazetteers": None,
    "corpus": None,
    "model": None,
    "out": None,
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- option helpers ------------------------------------------------------------

def _add_common(p, *names):
    S = argparse.SUPPRESS
    adders = {
        "corpus": lambda: p.add_argument("--corpus", default=S,
                                         help=f"corpus JSON Lines file ({SAMPLE} = bundled sample)"),
        "split": lambda: (
            p.add_argument("--split", choices=["explicit", "ratio"], default=S,
                           help="use the records' split tags, or a seeded stratified ratio split"),
            p.add_argument("--train-fraction", type=float, default=S)),
        "features": lambda: p.add_argument("--features", default=S,
                                           help="fl, fl+fs or fl+fs+fm"),
        "approach": lambda: (
            p.add_argument("--approach", default=S,
                           choices=["individual", "bagging", "boosting", "stacking", "voting"]),
            p.add_argument("--learner", default=S, help="base learner: NB, KNB, RI or DT"),
            p.add_argument("--meta-learner", default=S, help="stacking model learner"),
            p.add_argument("--size", type=int, default=S, help="bagging size"),
            p.add_argument("--max-iters", type=int, default=S, help="boosting rounds"),
            p.add_argument("--meta-cv-folds", type=int, default=S,
                           help="stacking: train the model learner on out-of-fold outputs"),
            p.add_argument("--proba", action="store_true", default=S,
                           help="stacking: feed base score vectors instead of one-hot labels")),
        "seed": lambda: p.add_argument("--seed", type=int, default=S),
        "jobs": lambda: p.add_argument("--jobs", type=int, default=S),
        "out": lambda: p.add_argument("--out", default=S, help="output path"),
        "model": lambda: p.add_argument("--model", default=S, help="model bundle file"),
        "lexicons": lambda: (
            p.add_argument("--taxonomy", default=S, help="taxonomy TSV"),
            p.add_argument("--interrogatives", default=S, help="interrogative lexicon TSV"),
            p.add_argument("--gazetteers", default=S, help="gazetteer TSV")),
    }
    for n in names:
        adders[n]()


def build_parser():
    parser = _Parser(prog="qclf", description="Bengali question classification experiments.")
    parser.add_argument("--config", help="JSON config file; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a corpus file")
    p.add_argument("path", help=f"corpus JSON Lines file ({SAMPLE} = bundled sample)")
    _add_common(p, "lexicons")

    p = sub.add_parser("train", help="train a model and write a bundle")
    _add_common(p, "corpus", "split", "features", "approach", "seed", "out", "lexicons")
    p.add_argument("--level", choices=["coarse", "fine"], default=argparse.SUPPRESS)
    p.add_argument("--coarse", default=argparse.SUPPRESS,
                   help="coarse class whose fine classifier to train (with --level fine)")

    p = sub.add_parser("evaluate", help="score a model, or run fine-grained evaluation")
    _add_common(p, "corpus", "split", "features", "approach", "seed", "out", "model", "lexicons")
    p.add_argument("--level", choices=["coarse", "fine"], default=argparse.SUPPRESS)
    p.add_argument("--mode", choices=["gold", "pipelined"], default=argparse.SUPPRESS)

    p = sub.add_parser("grid", help="approach x feature-set accuracy grid")
    _add_common(p, "corpus", "split", "seed", "jobs", "out", "lexicons")
    p.add_argument("--features", default=argparse.SUPPRESS,
                   help="comma-separated feature sets (default: all three)")
    p.add_argument("--seeds", default=argparse.SUPPRESS, help="comma-separated learner seeds")
    p.add_argument("--individual", action="store_true", default=argparse.SUPPRESS,
                   help="add the four single-learner rows")
    p.add_argument("--size", type=int, default=argparse.SUPPRESS)
    p.add_argument("--max-iters", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("sweep", help="accuracy against bagging size or boosting rounds")
    _add_common(p, "corpus", "split", "features", "seed", "jobs", "out", "lexicons")
    p.add_argument("--approach", choices=["bagging", "boosting"], default=argparse.SUPPRESS)
    p.add_argument("--learner", default=argparse.SUPPRESS)
    p.add_argument("--sizes", default=argparse.SUPPRESS, help="'A..B' or comma-separated list")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    p.add_argument("--window", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("predict", help="label the questions of a corpus file")
    _add_common(p, "corpus", "model", "out", "lexicons")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_common(p, "seed", "out")
    p.add_argument("--n", type=int, default=argparse.SUPPRESS)
    p.add_argument("--noise", type=float, default=argparse.SUPPRESS)
    p.add_argument("--table2", action="store_true", default=argparse.SUPPRESS,
                   help="reference per-class counts with explicit train/test tags")

    p = sub.add_parser("kappa", help="Cohen's kappa between two annotators")
    p.add_argument("files", nargs="+",
                   help="one id<TAB>A<TAB>B file, or two id<TAB>label files")
    return parser


def resolve(args) -> dict:
    """Merge defaults, config file and explicit flags (flags win)."""
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        if cfg.pop("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise UsageError(f"unsupported config version; expected {CONFIG_VERSION}")
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update(cfg)
        given = set(cfg)
    else:
        given = set()
    flags = {k: v for k, v in vars(args).items() if k != "config"}
    opts.update(flags)
    opts["_given"] = frozenset(given | set(flags))
    return opts


# -- shared loading ------------------------------------------------------------

def _taxonomy(opts):
    if opts.get("taxonomy"):
        _require_file(opts["taxonomy"])
        return Taxonomy.from_file(opts["taxonomy"])
    return default_taxonomy()


def _lexicons(opts):
    i, g = opts.get("interrogatives"), opts.get("gazetteers")
    if not i and not g:
        return qf.default_lexicons()
    from importlib import resources
    data = resources.files("qclf").joinpath("data")
    i = i or str(data.joinpath("interrogatives.tsv"))
    g = g or str(data.joinpath("gazetteers.tsv"))
    _require_file(i)
    _require_file(g)
    return qf.Lexicons.from_files(i, g)


def _require_file(path):
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")


def _load(path, taxonomy):
    if path is None:
        raise UsageError("--corpus is required")
    if path == SAMPLE:
        return synth.bundled_sample()
    _require_file(path)
    problems = qc.validate_corpus(path, taxonomy)
    if problems:
        raise DataError("\n".join(f"line {ln}: {err}" for ln, err in problems))
    return qc.load_corpus(path, taxonomy)


def _split(records, opts):
    if opts["split"] == "explicit":
        try:
            return qc.split_corpus(records, qc.ExplicitSplit())
        except CorpusError as exc:
            raise DataError(f"{exc} (use --split ratio for untagged corpora)") from None
    return qc.split_corpus(records, qc.RatioSplit(float(opts["train_fraction"]), int(opts["seed"])))


def _approach(opts) -> ens.Approach:
    kind = opts["approach"]
    learner = opts["meta_learner"] if kind == "stacking" else opts["learner"]
    try:
        return ens.Approach(kind, None if kind == "voting" else learner, size=int(opts["size"]),
                            max_iters=int(opts["max_iters"]), seed=int(opts["seed"]),
                            meta_cv_folds=opts["meta_cv_folds"],
                            encoding="proba" if opts["proba"] else "onehot")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(opts, include_coarse_class=False):
    try:
        return qf.FeatureConfig.from_name(opts["features"], include_coarse_class)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text, out):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _parse_sizes(text):
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes value {text!r}") from None


# -- commands ------------------------------------------------------------------

def cmd_validate(opts):
    path = opts["path"]
    taxonomy = _taxonomy(opts)
    if path == SAMPLE:
        n = len(synth.bundled_sample())
        print(f"ok: {n} records")
        return EXIT_OK
    _require_file(path)
    problems = qc.validate_corpus(path, taxonomy)
    for ln, err in problems:
        # parse errors already name their line
        print(f"{path}: {err}" if isinstance(err, qc.ParseError) else f"{path}:{ln}: {err}")
    if problems:
        print(f"{len(problems)} invalid record(s)")
        return EXIT_DATA
    print(f"ok: {len(qc.load_corpus(path, taxonomy))} records")
    return EXIT_OK


def _summary(model, indent=""):
    if isinstance(model, ens.BoostModel):
        return model.summary()
    if isinstance(model, ens.BaggedModel):
        return f"bagging {model.base.kind}: {model.size} member(s)"
    if isinstance(model, ens.StackModel):
        bases = ", ".join(m.kind for m in model.bases)
        return (f"stacking: bases [{bases}] -> model learner {model.meta.kind}, "
                f"meta input dimension {model.meta_dimension} ({model.encoding})")
    if isinstance(model, ens.VotedModel):
        return (f"voting: {len(model.members)} members ({', '.join(model.members)}), "
                f"tie-break priority {' > '.join(model.priority)}")
    return f"individual {model.kind}"


def cmd_train(opts):
    taxonomy = _taxonomy(opts)
    lexicons = _lexicons(opts)
    records = _load(opts["corpus"], taxonomy)
    train, _ = _split(records, opts)
    approach = _approach(opts)
    if opts["level"] == "fine":
        coarse = opts["coarse"]
        if coarse is None:
            raise UsageError("--level fine needs --coarse")
        config = _config(opts, include_coarse_class=True)
        model, index = ev.train_fine_model(coarse, train, approach, config, lexicons, taxonomy)
        classes = [f.name for f in taxonomy.fine_classes(coarse)]
    else:
        coarse = None
        config = _config(opts)
        prep = ev.prepare(train, [], config, lexicons, taxonomy)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            model = ens.fit(approach, prep.train)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        index = prep.index
        classes = taxonomy.coarse_classes()
    meta = {"approach": approach.to_dict(), "features": config.name, "level": opts["level"],
            "n_train": len(train)}
    bundle = Bundle(model, index, config, classes, coarse, meta)
    out = opts["out"] or "model.json"
    bundle.save(out)
    print(_summary(model))
    print(f"features: {config.name} ({index.N} dimensions), training questions: {len(train)}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_evaluate(opts):
    taxonomy = _taxonomy(opts)
    lexicons = _lexicons(opts)
    records = _load(opts["corpus"], taxonomy)
    train, test = _split(records, opts)
    if opts["level"] == "fine":
        report = ev.fine_grained_eval(train, test, _approach(opts), _config(opts, True),
                                      opts["mode"], lexicons, taxonomy)
        print(f"fine-grained accuracy ({report.mode})")
        print(report.to_table())
        if opts["out"]:
            atomic_write(opts["out"], report.to_csv())
        return EXIT_OK
    if not opts["model"]:
        raise UsageError("--model is required for coarse evaluation")
    _require_file(opts["model"])
    bundle = Bundle.load(opts["model"])
    if bundle.coarse is not None:
        raise UsageError("fine-class bundles are evaluated with --level fine")
    if not test:
        raise DataError("the test split is empty")
    report = ev.evaluate(bundle.model, test, bundle.index, bundle.config, lexicons, taxonomy,
                         metadata=bundle.metadata)
    print(report.to_table())
    if opts["out"]:
        atomic_write(opts["out"], report.to_json() + "\n")
    return EXIT_OK


def cmd_grid(opts):
    taxonomy = _taxonomy(opts)
    lexicons = _lexicons(opts)
    records = _load(opts["corpus"], taxonomy)
    train, test = _split(records, opts)
    feature_sets = None
    if "features" in opts["_given"]:
        fs = opts["features"]
        feature_sets = [f.strip() for f in fs.split(",")] if isinstance(fs, str) else list(fs)
    seeds = opts["seeds"]
    if seeds is None:
        seeds = [int(opts["seed"])]
    elif isinstance(seeds, str):
        seeds = [int(s) for s in seeds.split(",") if s.strip()]
    rows = ens.table3_rows(size=int(opts["size"]), max_iters=int(opts["max_iters"]))
    if opts["individual"]:
        rows = ens.individual_rows() + rows
    try:
        spec = ev.GridSpec(feature_sets or tuple(qf.FEATURE_SETS), rows, seeds)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = ev.run_grid(spec, train, test, lexicons, taxonomy, jobs=int(opts["jobs"]))
    print(result.to_table())
    if opts["out"]:
        out = opts["out"]
        os.makedirs(out, exist_ok=True)
        atomic_write(os.path.join(out, "grid.csv"), result.to_csv())
        atomic_write(os.path.join(out, "grid.txt"), result.to_table() + "\n")
        print(f"wrote {os.path.join(out, 'grid.csv')}")
    return EXIT_OK


def cmd_sweep(opts):
    taxonomy = _taxonomy(opts)
    lexicons = _lexicons(opts)
    records = _load(opts["corpus"], taxonomy)
    train, test = _split(records, opts)
    combiner = opts["approach"]
    if combiner not in ("bagging", "boosting"):
        raise UsageError("sweep needs --approach bagging or boosting")
    prep = ev.prepare(train, test, _config(opts), lexicons, taxonomy)
    try:
        base = ens.LearnerSpec(opts["learner"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        curve = ev.size_sweep(combiner, base, prep.train, prep.X_test, prep.y_test,
                              _parse_sizes(opts["sizes"]), float(opts["tol"]),
                              int(opts["window"]), int(opts["seed"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for s, a in curve.points:
        print(f"{s:>4}  {100 * a:6.2f}")
    print(f"stable size: {curve.stable_size if curve.stable_size is not None else 'none'}"
          + (f"; halt: {curve.halt}" if curve.halt else ""))
    if opts["out"]:
        atomic_write(opts["out"], curve.to_csv())
    return EXIT_OK


def cmd_predict(opts):
    taxonomy = _taxonomy(opts)
    if not opts["model"]:
        raise UsageError("--model is required")
    _require_file(opts["model"])
    bundle = Bundle.load(opts["model"])
    records = _load(opts["corpus"], taxonomy)
    X = bundle.vectorize(records)
    scores = bundle.model.predict_scores(X)
    labels = bundle.model.predict_labels(X)
    lines = []
    for r, k, s in zip(records, labels, scores):
        name = bundle.classes[int(k)]
        label = f"{bundle.coarse}:{name}" if bundle.coarse else name
        lines.append(json.dumps({"id": r.id, "label": label, "score": float(s[int(k)]),
                                 "scores": {c: float(v) for c, v in zip(bundle.classes, s)}},
                                sort_keys=True))
    _emit("\n".join(lines) + ("\n" if lines else ""), opts["out"])
    return EXIT_OK


def cmd_synth(opts):
    n, noise, seed = int(opts["n"]), float(opts["noise"]), int(opts["seed"])
    try:
        if opts["table2"]:
            records = synth.table2_corpus(seed, noise=noise)
        else:
            records = synth.generate_corpus(synth.SynthSpec(n=n, noise=noise, seed=seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = qc.dump_corpus(records)
    out = opts["out"]
    if out:
        atomic_write(out, text)
        atomic_write(out + ".manifest.tsv", synth.manifest_text(records))
        print(f"wrote {len(records)} records to {out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_kappa(opts):
    files = opts["files"]
    for f in files:
        _require_file(f)
    if len(files) == 1:
        pairs = qc.load_annotation_pairs(files[0])
    elif len(files) == 2:
        pairs = qc.merge_annotations(files[0], files[1])
    else:
        raise UsageError("kappa takes one paired file or two annotator files")
    print(repr(qc.cohen_kappa(pairs)))
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "train": cmd_train, "evaluate": cmd_evaluate,
            "grid": cmd_grid, "sweep": cmd_sweep, "predict": cmd_predict, "synth": cmd_synth,
            "kappa": cmd_kappa}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"qclf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CorpusError, LabelError, DegenerateMarginals) as exc:
        print(f"qclf: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (QCError, ModelFormatError, OSError, ValueError) as exc:
        print(f"qclf: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
