"""Command-line surface: ingest, featurize, train, rate, evaluate, simulate.

Every command writes its outputs plus a ``manifest.json`` recording the
tool version, the resolved parameters and the exact argument vector, so
re-dispatching the manifest's argv reproduces the CSV outputs byte for
byte.  Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .active import ALConfig, screened_histogram, simulate
from .corpus import Corpus, CorpusError, PrevalenceGroup, load_corpus, prevalence
from .features import EmbeddingTable, Vocabulary, embed_corpus, normalize, unibigram_matrix
from .methods import METHODS, FeatureContext, resolve_methods
from .metrics import METRIC_NAMES
from .relrank import EnsembleConfig, assign_stars, relrank
from .report import histogram_svg, polyline_svg, write_csv
from .stats import ExperimentGrid, equivalence_groups, rank_groups_rows, run_experiment_grid
from .svm import load_model, save_model, score_citations, train as train_any

RANKGROUPS_HEADER = ("metric", "group", "rank_group", "method_ids", "representative_value")


class UsageError(Exception):
    pass


def _write_manifest(out_dir: Path, command: str, argv, params: dict,
                    seed=None, config_path=None) -> None:
    manifest = {
        "tool": "screenkit",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "config": config_path,
        "seed": seed,
        "out_dir": str(out_dir),
        "parameters": params,
        "csv_schema_version": 1,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpora(paths, fmt, label_field="label") -> list[Corpus]:
    return [load_corpus(p, format=fmt, label_field=label_field) for p in paths]


def _context(corpus: Corpus, args) -> FeatureContext:
    return FeatureContext(corpus, dim=args.dim, seed=args.seed)


# --- command handlers ---------------------------------------------------

def _cmd_ingest(args, argv):
    out = _outdir(args)
    rows = []
    for corpus in _load_corpora(args.corpus, args.format, args.labeled_field):
        n_rel = corpus.n_relevant
        n_lab = corpus.n_labeled
        if n_lab == len(corpus):
            frac, group = prevalence(corpus)
            prev, grp = repr(100.0 * frac), group.value
        else:
            prev, grp = "", ""
        rows.append([corpus.name, len(corpus), n_lab, n_rel, n_lab - n_rel,
                     len(corpus) - n_lab, prev, grp])
    write_csv(out / "summary.csv",
              ("corpus", "n", "labeled", "relevant", "irrelevant", "unlabeled",
               "prevalence_pct", "prevalence_group"), rows)
    _write_manifest(out, "ingest", argv, {"corpus": args.corpus, "format": args.format})


def _cmd_embed(args, argv):
    out = _outdir(args)
    corpora = _load_corpora(args.corpus, args.format, args.labeled_field)
    from .features import train_skipgram

    table = train_skipgram(corpora, dim=args.dim, window=args.window,
                           min_count=args.min_count, epochs=args.epochs, seed=args.seed)
    table.save_tsv(out / "embeddings.tsv")
    _write_manifest(out, "embed", argv, {
        "corpus": args.corpus, "dim": args.dim, "window": args.window,
        "min_count": args.min_count, "epochs": args.epochs,
    }, seed=args.seed)


def _cmd_featurize(args, argv):
    out = _outdir(args)
    corpus = load_corpus(args.corpus, format=args.format)
    ctx = _context(corpus, args)
    if args.kind == "unibi":
        matrix = ctx.matrix("unibi")
        ctx.vocabulary.save_tsv(out / "vocab.tsv")
        import scipy.sparse as sp

        sp.save_npz(out / "features.npz", matrix)
    else:
        if args.embeddings:
            table = EmbeddingTable.load_tsv(args.embeddings)
            raw = embed_corpus(corpus, table)
            matrix = normalize(raw, "row" if args.kind == "w2v_row" else "col").values
        else:
            ctx.embedding_table.save_tsv(out / "embeddings.tsv")
            matrix = ctx.matrix(args.kind)
        np.save(out / "features.npy", matrix)
    write_csv(out / "rows.csv", ("row", "id"), list(enumerate(corpus.ids)))
    _write_manifest(out, "featurize", argv, {
        "corpus": args.corpus, "kind": args.kind, "dim": args.dim,
        "embeddings": args.embeddings,
    }, seed=args.seed)


def _cmd_train(args, argv):
    out = _outdir(args)
    corpus = load_corpus(args.corpus, format=args.format, label_field=args.labeled_field)
    spec = resolve_methods([args.method])[0]
    ctx = _context(corpus, args)
    matrix = ctx.matrix(spec.feature_kind)
    labeled_rows = np.array([i for i, c in enumerate(corpus) if c.label is not None], dtype=np.int64)
    unlabeled_rows = np.array([i for i, c in enumerate(corpus) if c.label is None], dtype=np.int64)
    if labeled_rows.size == 0:
        raise CorpusError(f"{corpus.name}: no labeled citations to train on")
    y = corpus.labels()[labeled_rows]
    model = train_any(matrix[labeled_rows], y, spec.config,
                      features_unlabeled=matrix[unlabeled_rows] if unlabeled_rows.size else None)
    save_model(model, out / "model.txt")
    if spec.feature_kind == "unibi":
        ctx.vocabulary.save_tsv(out / "vocab.tsv")
    else:
        ctx.embedding_table.save_tsv(out / "embeddings.tsv")
    _write_manifest(out, "train", argv, {
        "corpus": args.corpus, "method": args.method, "feature_kind": spec.feature_kind,
        "dim": args.dim,
    }, seed=args.seed)


def _cmd_score(args, argv):
    out = _outdir(args)
    corpus = load_corpus(args.corpus, format=args.format, label_field=args.labeled_field)
    model_dir = Path(args.model)
    model = load_model(model_dir / "model.txt")
    if (model_dir / "vocab.tsv").exists():
        vocab = Vocabulary.load_tsv(model_dir / "vocab.tsv")
        matrix = unibigram_matrix(corpus, vocab)
    elif (model_dir / "embeddings.tsv").exists():
        table = EmbeddingTable.load_tsv(model_dir / "embeddings.tsv")
        raw = embed_corpus(corpus, table)
        matrix = normalize(raw, args.normalization).values
    else:
        raise CorpusError(f"{model_dir}: no vocab.tsv or embeddings.tsv next to model.txt")
    scores = score_citations(model, matrix)
    preds = np.where(scores >= model.decision_threshold, 1, -1)
    write_csv(out / "scores.csv", ("id", "score", "prediction"),
              [[cid, repr(float(s)), int(p)] for cid, s, p in zip(corpus.ids, scores, preds)])
    _write_manifest(out, "score", argv, {"corpus": args.corpus, "model": args.model},
                    seed=args.seed)


def _cmd_rate(args, argv):
    out = _outdir(args)
    corpus = load_corpus(args.corpus, format=args.format, label_field=args.labeled_field)
    labeled = corpus.labeled()
    unlabeled = corpus.unlabeled()
    if len(labeled) == 0 or len(unlabeled) == 0:
        raise CorpusError(
            f"{corpus.name}: rating needs both labeled and unlabeled citations "
            f"(found {len(labeled)} labeled, {len(unlabeled)} unlabeled)"
        )
    ctx = _context(corpus, args)
    config = EnsembleConfig()
    combined = relrank(labeled, unlabeled, config, ctx)
    stars = {r.citation_id: r.stars for r in assign_stars(combined, config)}
    write_csv(out / "ratings.csv", ("id", "score", "nv", "fv", "rs", "ns", "stars"),
              [[cs.citation_id, repr(cs.score), cs.nv, repr(cs.fv), repr(cs.rs), repr(cs.ns),
                stars[cs.citation_id]] for cs in combined])
    _write_manifest(out, "rate", argv, {
        "corpus": args.corpus, "labeled_field": args.labeled_field, "dim": args.dim,
        "n_labeled": len(labeled), "n_unlabeled": len(unlabeled),
    }, seed=args.seed)


def _evaluate_one(payload):
    path, fmt, label_field, method_ids, reps, folds, seed, dim, per_fold = payload
    corpus = load_corpus(path, format=fmt, label_field=label_field)
    ctx = FeatureContext(corpus, dim=dim, seed=seed)
    rows = [] if per_fold else None
    grid = run_experiment_grid([corpus], resolve_methods(method_ids),
                               repetitions=reps, k=folds, seed=seed,
                               contexts={corpus.name: ctx}, fold_rows=rows)
    return grid, rows


def _merge_grids(parts) -> ExperimentGrid:
    first = parts[0]
    merged = ExperimentGrid(
        datasets=tuple(d for p in parts for d in p.datasets),
        method_ids=first.method_ids,
        metrics=first.metrics,
        repetitions=first.repetitions, k=first.k, seed=first.seed,
    )
    for p in parts:
        merged.means.update(p.means)
        merged.counts.update(p.counts)
        merged.groups.update(p.groups)
    return merged


def _cmd_evaluate(args, argv):
    out = _outdir(args)
    method_ids = [int(x) for x in args.methods.split(",")]
    resolve_methods(method_ids)  # validate early
    payloads = [(p, args.format, args.labeled_field, method_ids, args.reps, args.folds,
                 args.seed, args.dim, args.per_fold) for p in args.corpus]
    if args.workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            parts = list(pool.map(_evaluate_one, payloads))
    else:
        parts = [_evaluate_one(p) for p in payloads]
    grid = _merge_grids([g for g, _ in parts])
    grid.to_csv(out / "grid.csv")
    if args.per_fold:
        from .stats import FOLD_CSV_HEADER

        write_csv(out / "folds.csv", FOLD_CSV_HEADER,
                  [row for _, rows in parts for row in rows])
    _write_manifest(out, "evaluate", argv, {
        "corpus": args.corpus, "methods": method_ids, "reps": args.reps,
        "folds": args.folds, "dim": args.dim, "workers": args.workers,
        "per_fold": args.per_fold,
    }, seed=args.seed)


def _parse_group(text: str) -> PrevalenceGroup | None:
    if text == "all":
        return None
    return PrevalenceGroup(text)


def _cmd_rankgroups(args, argv):
    out = _outdir(args)
    grid = ExperimentGrid.from_csv(args.grid)
    result = equivalence_groups(grid, args.metric, _parse_group(args.group), alpha=args.alpha)
    write_csv(out / "rankgroups.csv", RANKGROUPS_HEADER, rank_groups_rows(result))
    _write_manifest(out, "rankgroups", argv, {
        "grid": args.grid, "metric": args.metric, "group": args.group, "alpha": args.alpha,
        "anova_p_method": None if result.anova is None else result.anova.p_method,
    })


def _cmd_simulate_al(args, argv):
    out = _outdir(args)
    agg_rows, run_rows, trace_rows = [], [], []
    fractions = []
    for path in args.corpus:
        corpus = load_corpus(path, format=args.format, label_field=args.labeled_field)
        ctx = _context(corpus, args)
        config = ALConfig(seed_relevant=args.seed_relevant, seed_irrelevant=args.seed_irrelevant,
                          batch_size=args.batch_size, repeats=args.repeats,
                          method=METHODS[args.method], seed=args.seed)
        result = simulate(corpus, config, ctx, keep_traces=args.traces)
        mean_frac = result.mean_fraction
        fractions.append(mean_frac)
        agg_rows.append([corpus.name, len(corpus), corpus.n_relevant, args.repeats, repr(mean_frac)])
        run_rows.extend([[corpus.name, r, repr(float(f))] for r, f in enumerate(result.fractions)])
        if args.traces:
            for r, trace in enumerate(result.traces):
                trace_rows.extend([[corpus.name, r, i, s, f]
                                   for i, (s, f) in enumerate(zip(trace.screened, trace.found))])
    write_csv(out / "aggregate.csv",
              ("corpus", "n", "relevant", "repeats", "mean_fraction"), agg_rows)
    write_csv(out / "runs.csv", ("corpus", "run", "fraction"), run_rows)
    if args.traces:
        write_csv(out / "traces.csv", ("corpus", "run", "iteration", "screened", "found"),
                  trace_rows)
    counts, edges = screened_histogram(np.asarray(fractions))
    write_csv(out / "histogram.csv", ("bin_lo", "bin_hi", "count"),
              [[repr(float(edges[i])), repr(float(edges[i + 1])), int(c)]
               for i, c in enumerate(counts)])
    (out / "histogram.svg").write_text(histogram_svg(counts, edges), encoding="utf-8")
    _write_manifest(out, "simulate-al", argv, {
        "corpus": args.corpus, "repeats": args.repeats, "batch_size": args.batch_size,
        "method": args.method, "dim": args.dim, "traces": args.traces,
    }, seed=args.seed)


def _cmd_report(args, argv):
    out = _outdir(args)
    if args.kind == "metric_table":
        grid = ExperimentGrid.from_csv(args.input)
        rows = []
        groups_present = sorted({g.value for g in grid.groups.values()})
        targets = [None] if not groups_present else [PrevalenceGroup(g) for g in groups_present]
        for metric in grid.metrics:
            for group in targets:
                try:
                    result = equivalence_groups(grid, metric, group, alpha=args.alpha)
                except ValueError:
                    continue
                rows.extend(rank_groups_rows(result))
        write_csv(out / "metric_table.csv", RANKGROUPS_HEADER, rows)
    elif args.kind == "rank_groups":
        grid = ExperimentGrid.from_csv(args.input)
        result = equivalence_groups(grid, args.metric, _parse_group(args.group), alpha=args.alpha)
        write_csv(out / "rankgroups.csv", RANKGROUPS_HEADER, rank_groups_rows(result))
    elif args.kind == "al_histogram":
        with open(args.input, encoding="utf-8") as fh:
            import csv as _csv

            reader = _csv.DictReader(fh)
            if "mean_fraction" in reader.fieldnames:
                fractions = [float(r["mean_fraction"]) for r in reader]
            elif "fraction" in reader.fieldnames:
                fractions = [float(r["fraction"]) for r in reader]
            else:
                raise CorpusError(f"{args.input}: expected a fraction or mean_fraction column")
        counts, edges = screened_histogram(np.asarray(fractions))
        write_csv(out / "histogram.csv", ("bin_lo", "bin_hi", "count"),
                  [[repr(float(edges[i])), repr(float(edges[i + 1])), int(c)]
                   for i, c in enumerate(counts)])
        (out / "histogram.svg").write_text(histogram_svg(counts, edges), encoding="utf-8")
    elif args.kind == "inclusion_curve":
        import csv as _csv

        points = []
        wanted_corpus = args.corpus_name
        with open(args.input, encoding="utf-8") as fh:
            for row in _csv.DictReader(fh):
                if wanted_corpus is None:
                    wanted_corpus = row["corpus"]
                if row["corpus"] != wanted_corpus or int(row["run"]) != args.run:
                    continue
                points.append((int(row["screened"]), int(row["found"])))
        if not points:
            raise CorpusError(f"{args.input}: no trace points matched run {args.run}")
        total = max(f for _, f in points)  # trace ends with all relevant found
        curve = [(s, total - f) for s, f in points]
        write_csv(out / "inclusion_curve.csv", ("screened", "remaining_relevant"), curve)
        (out / "inclusion_curve.svg").write_text(
            polyline_svg(curve, "Remaining relevant citations while screening",
                         "citations screened", "remaining relevant"),
            encoding="utf-8")
    _write_manifest(out, "report", argv, {"kind": args.kind, "input": args.input})


# --- parser -------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="screenkit",
                                     description="Citation screening toolkit")
    parser.add_argument("--version", action="version", version=f"screenkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus_nargs=None, needs_out=True):
        if corpus_nargs is not None:
            p.add_argument("--corpus", required=True, nargs=corpus_nargs)
            p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
            p.add_argument("--labeled-field", default="label")
        if needs_out:
            p.add_argument("--out", required=True)
        p.add_argument("--config", default=None, help="JSON file with default flag values")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dim", type=int, default=100)

    p = sub.add_parser("ingest", help="validate corpora and write a summary")
    common(p, corpus_nargs="+")

    p = sub.add_parser("embed", help="train skip-gram embeddings on corpus text")
    common(p, corpus_nargs="+")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--min-count", type=int, default=15)
    p.add_argument("--epochs", type=int, default=5)

    p = sub.add_parser("featurize", help="write feature matrices for one corpus")
    common(p, corpus_nargs=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--labeled-field", default="label")
    p.add_argument("--kind", choices=("unibi", "w2v_row", "w2v_col"), required=True)
    p.add_argument("--embeddings", default=None, help="reuse a saved embeddings.tsv")

    p = sub.add_parser("train", help="train one method on the labeled citations")
    common(p, corpus_nargs=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--labeled-field", default="label")
    p.add_argument("--method", type=int, required=True,
                   help=f"method id, one of {sorted(METHODS)}")

    p = sub.add_parser("score", help="score a corpus with a trained model directory")
    common(p, corpus_nargs=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--labeled-field", default="label")
    p.add_argument("--model", required=True, help="directory produced by `screenkit train`")
    p.add_argument("--normalization", choices=("row", "col"), default="row")

    p = sub.add_parser("rate", help="5-star rating of unlabeled citations")
    common(p, corpus_nargs=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--labeled-field", default="label")

    p = sub.add_parser("evaluate", help="repeated stratified CV over methods")
    common(p, corpus_nargs="+")
    p.add_argument("--methods", default="5,7,21,25",
                   help="comma-separated method ids")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--per-fold", action="store_true",
                   help="also write one metric row per (repetition, fold)")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("SCREENKIT_WORKERS", "1")))

    p = sub.add_parser("rankgroups", help="equivalence groups from a grid CSV")
    p.add_argument("--grid", required=True)
    p.add_argument("--metric", choices=METRIC_NAMES, required=True)
    p.add_argument("--group", choices=("low", "mid", "high", "all"), default="all")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)

    p = sub.add_parser("simulate-al", help="active-learning screening simulation")
    common(p, corpus_nargs="+")
    p.add_argument("--repeats", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=50)
    p.add_argument("--seed-relevant", type=int, default=5)
    p.add_argument("--seed-irrelevant", type=int, default=45)
    p.add_argument("--method", type=int, default=21)
    p.add_argument("--traces", action="store_true")

    p = sub.add_parser("report", help="render tables and SVG plots from output CSVs")
    p.add_argument("--kind", choices=("metric_table", "rank_groups", "al_histogram",
                                      "inclusion_curve"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=METRIC_NAMES, default="auc")
    p.add_argument("--group", choices=("low", "mid", "high", "all"), default="all")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--run", type=int, default=0)
    p.add_argument("--corpus-name", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)

    parser._sk_subparsers = sub
    return parser


_HANDLERS = {
    "ingest": _cmd_ingest,
    "embed": _cmd_embed,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "score": _cmd_score,
    "rate": _cmd_rate,
    "evaluate": _cmd_evaluate,
    "rankgroups": _cmd_rankgroups,
    "simulate-al": _cmd_simulate_al,
    "report": _cmd_report,
}


def _apply_config(parser, argv):
    """Use --config JSON values as defaults for flags not given on the line.

    Keys are flag names with underscores (e.g. "min_count").  Explicit
    command-line flags always win; required path flags cannot come from
    the config file.
    """
    if "--config" not in argv:
        return
    try:
        cfg_path = argv[argv.index("--config") + 1]
    except IndexError:
        raise UsageError("--config needs a file argument")
    with open(cfg_path, encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise UsageError(f"{cfg_path}: config must be a JSON object")
    known_anywhere: set[str] = set()
    for subparser in parser._sk_subparsers.choices.values():
        known = {a.dest for a in subparser._actions if a.dest not in ("help",)}
        known_anywhere |= known
        subparser.set_defaults(**{k: v for k, v in config.items() if k in known})
    unknown = set(config) - known_anywhere
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")


def dispatch(argv) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    argv = list(argv)
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code == 0 else 1
    except (UsageError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        _HANDLERS[args.command](args, argv)
    except (CorpusError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
