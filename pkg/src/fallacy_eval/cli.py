"""Command-line interface: ``fallacy-eval <subcommand> ...``.

Reports go to stdout (JSON by default, TSV with ``--report tsv``),
diagnostics to stderr. Exit status is 0 on success, 1 on data or
validation failures and 2 on usage errors.
"""

import argparse
import json
import logging
import sys

from . import analysis, plots
from .agreement import AgreementConfig, AgreementError, gamma
from .fixtures import GenConfig, GenConfigError, generate
from .formats import (FormatError, parse_predictions,
                      read_corpus, validate, write_conll, write_corpus_records)
from .labels import UnknownLabelError, canonical
from .scoring import ConfigError, ScoringConfig, Task, evaluate
from .splits import SplitError, make_folds, read_test_folds
from .taxonomy import TaxonomyError, default_taxonomy, load_taxonomy

class DataError(Exception):
    """Bad input data; reported with exit status 1."""


def _error(msg):
    print(f"error: {msg}", file=sys.stderr)


def _dump_json(obj, out):
    json.dump(obj, out, indent=2, ensure_ascii=False, allow_nan=False, default=_json_default)
    out.write("\n")


def _json_default(obj):
    raise TypeError(f"not serializable: {obj!r}")


def _clean(obj):
    """Replace NaN with None so reports stay valid JSON."""
    if isinstance(obj, float) and obj != obj:
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _fmt(v):
    if isinstance(v, float):
        return "NA" if v != v else repr(v)
    return str(v)


def _write_tsv(header, rows, out):
    out.write("\t".join(header) + "\n")
    for row in rows:
        out.write("\t".join(_fmt(v) for v in row) + "\n")


def _load_corpus(path, check=True):
    try:
        return read_corpus(path, check=check)
    except FormatError as exc:
        raise DataError(f"{path}: {exc}") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


def _load_taxonomy(path):
    if path is None:
        return default_taxonomy()
    try:
        with open(path, encoding="utf-8") as fh:
            return load_taxonomy(fh)
    except TaxonomyError as exc:
        raise DataError(f"{path}: {exc}") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


# -- subcommands ----------------------------------------------------------------

def cmd_validate(args, out):
    corpus = _load_corpus(args.file, check=False)
    violations = validate(corpus)
    if args.report == "tsv":
        _write_tsv(["post_id", "kind", "message"],
                   [(v.post_id, v.kind.value, v.message) for v in violations], out)
    else:
        _dump_json({"file": args.file, "posts": len(corpus), "valid": not violations,
                    "violations": [{"post_id": v.post_id, "kind": v.kind.value,
                                    "message": v.message} for v in violations]}, out)
    for v in violations:
        _error(f"{args.file}: post {v.post_id}: {v.kind.value}: {v.message}")
    return 1 if violations else 0


def cmd_convert(args, out):
    corpus = _load_corpus(args.file)
    text = write_conll(corpus) if args.to == "conll" else write_corpus_records(corpus)
    _emit_text(text, args.output, out)
    return 0


def _emit_text(text, path, out):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_stats(args, out):
    corpus = _load_corpus(args.file)
    try:
        report = analysis.corpus_stats(corpus, view=None if args.pooled else args.view)
    except KeyError as exc:
        raise DataError(f"{args.file}: {exc.args[0]}") from None
    if args.report == "tsv":
        _write_tsv(["views", "label", "spans", "mean_length", "std_length"], report.tsv_rows(), out)
    else:
        _dump_json(_clean(report.as_dict()), out)
    if args.figure:
        plots.span_counts(report, args.figure)
    return 0


def cmd_overlaps(args, out):
    corpus = _load_corpus(args.file)
    taxonomy = _load_taxonomy(args.taxonomy)
    views = None if args.pooled or not args.view else [args.view]
    try:
        matrix = analysis.overlap_matrix(corpus, views, args.granularity, taxonomy)
    except KeyError as exc:
        raise DataError(f"{args.file}: {exc.args[0]}") from None
    if args.report == "json":
        _dump_json(matrix.as_dict(), out)
    else:
        out.write(matrix.to_tsv())
    if args.figure:
        plots.overlap_heatmap(matrix, args.figure)
    return 0


def cmd_tokens(args, out):
    corpus = _load_corpus(args.file)
    try:
        with open(args.stopwords, encoding="utf-8") as fh:
            stopwords = analysis.read_stopwords(fh)
    except OSError as exc:
        raise DataError(f"{args.stopwords}: {exc.strerror}") from None
    try:
        ranked = analysis.informative_tokens(corpus, args.label, args.k, stopwords)
    except KeyError as exc:
        raise DataError(f"{args.file}: {exc.args[0]}") from None
    if args.report == "tsv":
        _write_tsv(["rank", "token", "score"], [(i + 1, t, s) for i, (t, s) in enumerate(ranked)], out)
    else:
        _dump_json({"label": canonical(args.label), "k": args.k,
                    "metric": "max(0, npmi) * log(1 + count)",
                    "tokens": [{"token": t, "score": s} for t, s in ranked]}, out)
    return 0


def cmd_split(args, out):
    corpus = _load_corpus(args.file)
    try:
        folds = make_folds(corpus, args.k, args.seed, args.stratify)
    except SplitError as exc:
        raise DataError(f"{args.file}: {exc}") from None
    folds.write(args.out)
    _dump_json(folds.manifest(), out)
    return 0


def cmd_score(args, out, config):
    taxonomy = _load_taxonomy(args.taxonomy)
    gold = _load_corpus(args.gold)
    try:
        with open(args.pred, encoding="utf-8") as fh:
            preds = parse_predictions(fh)
    except FormatError as exc:
        raise DataError(f"{args.pred}: {exc}") from None
    except OSError as exc:
        raise DataError(f"{args.pred}: {exc.strerror}") from None
    folds = None
    if args.folds:
        try:
            folds = read_test_folds(args.folds)
        except FileNotFoundError as exc:
            raise DataError(str(exc)) from None
    try:
        report = evaluate(gold, preds, config, taxonomy, folds=folds, per_post=args.per_post)
    except (ValueError, UnknownLabelError) as exc:
        raise DataError(f"{args.pred}: {exc}") from None
    if args.report == "tsv":
        _write_tsv(["fold", "view", "precision", "recall", "f1"], report.tsv_rows(), out)
    else:
        _dump_json(_clean(report.as_dict()), out)
    if args.figure:
        plots.view_scores(report, args.figure)
    return 0


def cmd_agree(args, out, config):
    corpus = _load_corpus(args.file)
    views = args.views.split(",") if args.views else None
    try:
        result = gamma(corpus, views, config)
    except AgreementError as exc:
        raise DataError(f"{args.file}: {exc}") from None
    if args.report == "tsv":
        d = result.as_dict()
        rows = [(k, d[k]) for k in ("gamma", "gamma_cat", "observed_disorder", "expected_disorder",
                                    "observed_cat_disorder", "expected_cat_disorder")]
        rows += [(f"config.{k}", v) for k, v in d["config"].items()]
        _write_tsv(["key", "value"], rows, out)
    else:
        _dump_json(result.as_dict(), out)
    return 0


def cmd_generate(args, out):
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = GenConfig.from_json(fh)
    except (GenConfigError, json.JSONDecodeError, UnknownLabelError) as exc:
        raise DataError(f"{args.config}: {exc}") from None
    except OSError as exc:
        raise DataError(f"{args.config}: {exc.strerror}") from None
    corpus = generate(config)
    text = write_conll(corpus) if args.format == "conll" else write_corpus_records(corpus)
    _emit_text(text, args.output, out)
    return 0


# -- parser ---------------------------------------------------------------------

def _report_flag(p, default="json"):
    p.add_argument("--report", choices=("json", "tsv"), default=default,
                   help=f"report format (default: {default})")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fallacy-eval",
        description="Evaluation and corpus tools for multi-view fallacy span annotations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    D = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("validate", help="check a corpus file", formatter_class=D)
    p.add_argument("file", help="corpus in record or CoNLL format")
    _report_flag(p)

    p = sub.add_parser("convert", help="convert between record and CoNLL formats", formatter_class=D)
    p.add_argument("file", help="input corpus (format detected from content)")
    p.add_argument("--to", choices=("records", "conll"), required=True, help="output format")
    p.add_argument("-o", "--output", help="output path (default: stdout)")

    p = sub.add_parser("stats", help="span counts, lengths and density", formatter_class=D)
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--view", help="restrict to one view")
    g.add_argument("--pooled", action="store_true", help="pool all views (default)")
    _report_flag(p)
    p.add_argument("--figure", help="write a bar chart of span counts to this image file")

    p = sub.add_parser("overlaps", help="token overlap matrix between fallacy types",
                       formatter_class=D)
    p.add_argument("file")
    p.add_argument("--granularity", choices=("fine", "coarse"), default="fine")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--view", help="restrict to one view")
    g.add_argument("--pooled", action="store_true", help="pool all views (default)")
    p.add_argument("--taxonomy", help="taxonomy file (default: packaged taxonomy)")
    _report_flag(p, default="tsv")
    p.add_argument("--figure", help="write a heatmap to this image file")

    p = sub.add_parser("tokens-informative", help="top tokens of a fallacy type by weighted PMI",
                       formatter_class=D)
    p.add_argument("file")
    p.add_argument("--label", required=True, help="fallacy code or name")
    p.add_argument("--k", type=int, default=10, help="number of tokens")
    p.add_argument("--stopwords", required=True, help="file with one lowercase stopword per line")
    _report_flag(p)

    p = sub.add_parser("split", help="deterministic k-fold splits", formatter_class=D)
    p.add_argument("file")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratify", choices=("topic",), default=None)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("score", help="score predictions against every gold view",
                       formatter_class=D)
    p.add_argument("--gold", required=True, help="gold corpus")
    p.add_argument("--pred", required=True, help="prediction records")
    p.add_argument("--task", choices=[t.value for t in Task], required=True)
    p.add_argument("--mode", choices=("strict", "soft"), default="strict",
                   help="soft gives partial label credit (span-f only)")
    p.add_argument("--delta", type=float, default=0.5, help="partial label credit in soft mode")
    p.add_argument("--taxonomy", help="taxonomy file (default: packaged taxonomy)")
    p.add_argument("--folds", help="directory with fold<i>.test.ids files")
    p.add_argument("--cap-per-span", action="store_true",
                   help="clamp each span's summed credit to 1")
    p.add_argument("--symmetric-soft", action="store_true",
                   help="also credit gold labels that are parents of the prediction")
    p.add_argument("--per-post", action="store_true", help="add a per-post diagnostic breakdown")
    _report_flag(p)
    p.add_argument("--figure", help="write a per-view score chart to this image file")

    p = sub.add_parser("agree", help="gamma / gamma_cat agreement between two views",
                       formatter_class=D)
    p.add_argument("file")
    p.add_argument("--views", help="two comma-separated view ids (default: first two)")
    p.add_argument("--alpha", type=float, default=1.0, help="positional weight")
    p.add_argument("--beta", type=float, default=1.0, help="categorical weight")
    p.add_argument("--delta-empty", type=float, default=1.0, help="cost factor of unpaired units")
    p.add_argument("--resamples", type=int, default=30, help="random corpora for expected disorder")
    p.add_argument("--seed", type=int, default=0)
    _report_flag(p)

    p = sub.add_parser("generate", help="synthetic corpus from a JSON config", formatter_class=D)
    p.add_argument("--config", required=True, help="JSON generator config")
    p.add_argument("--format", choices=("records", "conll"), default="records")
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    return parser


def run(argv=None, out=None):
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)

    # flag validation happens before any file is opened
    try:
        if args.command == "score":
            config = ScoringConfig(args.task, args.mode, args.delta, args.cap_per_span,
                                   args.symmetric_soft)
        elif args.command == "agree":
            if args.views and len(args.views.split(",")) != 2:
                raise AgreementError("--views takes exactly two comma-separated ids")
            config = AgreementConfig(args.alpha, args.beta, args.delta_empty,
                                     args.resamples, args.seed)
        elif args.command in ("split",) and args.k < 2:
            raise SplitError("--k must be >= 2")
        elif args.command == "tokens-informative":
            if args.k < 1:
                raise ValueError("--k must be >= 1")
            canonical(args.label)
    except (ConfigError, AgreementError, SplitError, ValueError) as exc:
        parser.error(f"{args.command}: {exc}")

    try:
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "convert":
            return cmd_convert(args, out)
        if args.command == "stats":
            return cmd_stats(args, out)
        if args.command == "overlaps":
            return cmd_overlaps(args, out)
        if args.command == "tokens-informative":
            return cmd_tokens(args, out)
        if args.command == "split":
            return cmd_split(args, out)
        if args.command == "score":
            return cmd_score(args, out, config)
        if args.command == "agree":
            return cmd_agree(args, out, config)
        if args.command == "generate":
            return cmd_generate(args, out)
    except DataError as exc:
        _error(str(exc))
        return 1
    parser.error(f"unknown command {args.command}")


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
