"""Command-line entry point: score, fit, bench, tag, curate.

Exit codes: 0 success, 2 malformed/missing input, 3 validation or degenerate
data. Every command is deterministic given identical inputs and --seed.

File formats
  reports        one report per line, UTF-8; pairing is by line number
  rated pairs    JSON lines: {"id", "reference", "candidate", "human"} or
                 {"id", "reference", "candidate", "error_count", "potential_errors"}
  triads         JSON lines: {"id", "original", "synonymous", "antonymous"}
  gazetteer      TSV: name<TAB>type, type in {Anatomy, Abnormality, Disease}
  predictions    TSV: token<TAB>tag per line, blank line between reports;
                 tags O / B-<T> / I-<T> over the five entity types
  embeddings     TSV: header "#dim=D", then name<TAB>v1..vD
  params         JSON: {"type_order": [...5 names...], "W": 5x5 rows, "p": penalty}
  negation       JSON: {"forward_triggers", "backward_triggers", "terminators",
                 "self_negating"} (arrays; omitted keys keep defaults)
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import bench as bench_mod
from . import paramfit
from .curation import max_library_similarity, sentence_density
from .encoder import EmbeddingTable, HashEncoder, TableEncoder
from .ner import (
    Gazetteer,
    NegationLexicon,
    apply_polarity,
    entities_to_iob,
    gazetteer_tag,
    load_predictions,
)
from .pipeline import BleuMetric, EntityMetric, GazetteerTagger, OracleMetric, RougeLMetric
from .preprocess import split_sentences, token_spans
from .scorer import EncodedReport, directional_score, harmonic_mean
from .types import DegenerateDataError, FormatError, ScoreParams

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDATION = 3


def _read_report_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _open_output(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _add_resource_args(parser: argparse.ArgumentParser, need_gazetteer: bool = True) -> None:
    if need_gazetteer:
        parser.add_argument("--gazetteer", help="gazetteer TSV (name<TAB>type)")
        parser.add_argument("--negation", help="negation lexicon JSON; defaults built in")
    parser.add_argument(
        "--encoder", choices=("hash", "table"), default="hash", help="embedding backend"
    )
    parser.add_argument("--table", help="embedding table TSV (required with --encoder table)")
    parser.add_argument(
        "--dimension", type=int, default=256, help="hash encoder dimension (default 256)"
    )


def _build_encoder(args):
    if args.encoder == "table":
        if not args.table:
            raise FormatError("--encoder table requires --table FILE")
        return TableEncoder(EmbeddingTable.load(args.table))
    return HashEncoder(args.dimension)


def _build_tagger(args) -> GazetteerTagger:
    if not args.gazetteer:
        raise FormatError("--gazetteer FILE is required for gazetteer tagging")
    lexicon = NegationLexicon.load(args.negation) if args.negation else NegationLexicon()
    return GazetteerTagger(Gazetteer.load(args.gazetteer), lexicon)


def _load_params(path) -> ScoreParams:
    return ScoreParams.load(path) if path else ScoreParams.default()


def _record_dict(record) -> dict:
    return dataclasses.asdict(record)


def _score_rows_sequential(metric: EntityMetric, refs, cands, explain: bool) -> list[dict]:
    rows = []
    for i, (ref, cand) in enumerate(zip(refs, cands)):
        detail = metric.score_detail(ref, cand)
        row = {
            "id": str(i),
            "ratescore": detail.score,
            "S_forward": detail.forward,
            "S_backward": detail.backward,
        }
        if explain:
            row["forward_matches"] = [_record_dict(r) for r in detail.forward_records]
            row["backward_matches"] = [_record_dict(r) for r in detail.backward_records]
        rows.append(row)
    return rows


_POOL_METRIC: EntityMetric | None = None


def _pool_init(metric: EntityMetric) -> None:
    global _POOL_METRIC
    _POOL_METRIC = metric


def _pool_score(chunk) -> list[dict]:
    indexed, explain = chunk
    rows = _score_rows_sequential(
        _POOL_METRIC, [r for _, r, _ in indexed], [c for _, _, c in indexed], explain
    )
    for row, (i, _, _) in zip(rows, indexed):
        row["id"] = str(i)
    return rows


def _score_rows(metric: EntityMetric, refs, cands, explain: bool, workers: int) -> list[dict]:
    if workers <= 1 or len(refs) < 2 * workers:
        return _score_rows_sequential(metric, refs, cands, explain)
    indexed = list(zip(range(len(refs)), refs, cands))
    size = (len(indexed) + workers - 1) // workers
    chunks = [(indexed[k : k + size], explain) for k in range(0, len(indexed), size)]
    with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init, initargs=(metric,)) as pool:
        parts = list(pool.map(_pool_score, chunks))
    return [row for part in parts for row in part]


def cmd_score(args) -> int:
    params = _load_params(args.params)
    encoder = _build_encoder(args)

    if args.ner == "predictions":
        ref_reports = load_predictions(args.ref)
        cand_reports = load_predictions(args.cand)
        if len(ref_reports) != len(cand_reports):
            raise FormatError(
                f"report count mismatch: {len(ref_reports)} references "
                f"vs {len(cand_reports)} candidates"
            )
        rows = []
        for i, (ref, cand) in enumerate(zip(ref_reports, cand_reports)):
            x = EncodedReport.build(ref, encoder)
            x_hat = EncodedReport.build(cand, encoder)
            forward = directional_score(x, x_hat, params)
            backward = directional_score(x_hat, x, params)
            rows.append(
                {
                    "id": str(i),
                    "ratescore": harmonic_mean(forward, backward),
                    "S_forward": forward,
                    "S_backward": backward,
                }
            )
    else:
        refs = _read_report_lines(args.ref)
        cands = _read_report_lines(args.cand)
        if len(refs) != len(cands):
            raise FormatError(
                f"line count mismatch: {len(refs)} references vs {len(cands)} candidates"
            )
        metric = EntityMetric(_build_tagger(args), encoder, params)
        rows = _score_rows(metric, refs, cands, args.explain, args.workers)

    out, close = _open_output(args.output)
    try:
        for row in rows:
            out.write(json.dumps(row) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_fit(args) -> int:
    pairs = bench_mod.load_rated_pairs(args.pairs, rating_scale=args.scale)
    metric = EntityMetric(_build_tagger(args), _build_encoder(args))

    config_kwargs = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                config_kwargs = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(config_kwargs, dict):
            raise FormatError(f"{args.config}: expected a JSON object")
    if args.seed is not None:
        config_kwargs["seed"] = args.seed
    config = paramfit.FitConfig(**config_kwargs)

    result = paramfit.fit(pairs, metric, config)
    result.params.save(args.out_params)
    if args.out_trials:
        paramfit.write_trials_csv(result.history, args.out_trials)
    print(
        f"fit: {len(pairs)} pairs, {config.n_trials} trials, "
        f"best {config.objective_kind} = {result.objective:.6f}"
    )
    return EXIT_OK


def _build_bench_metric(name: str, args) -> object:
    if name == "ratescore":
        return EntityMetric(_build_tagger(args), _build_encoder(args), _load_params(args.params))
    if name == "bleu":
        return BleuMetric()
    if name == "rouge_l":
        return RougeLMetric()
    return OracleMetric()


def cmd_bench(args) -> int:
    metric_names = args.metric or ["ratescore"]

    fit_kwargs = {"seed": args.seed}
    if args.trials is not None:
        fit_kwargs["n_trials"] = args.trials
    fit_config = paramfit.FitConfig(**fit_kwargs)

    results = []
    if args.task == "synthetic":
        triads = bench_mod.load_triads(args.data)
        for name in metric_names:
            results.append(bench_mod.run_synthetic_task(triads, _build_bench_metric(name, args)))
        print(f"{'metric':<12} {'acc':>8}")
        for res in results:
            print(f"{res['metric']:<12} {res['accuracy']:>8.4f}")
    else:
        scale = "five_point" if args.task == "paragraph" else "unit"
        pairs = bench_mod.load_rated_pairs(args.data, rating_scale=scale)
        for name in metric_names:
            results.append(
                bench_mod.run_correlation_task(
                    pairs,
                    _build_bench_metric(name, args),
                    split_ratio=args.split_ratio,
                    seed=args.seed,
                    fit_config=fit_config,
                )
            )
        print(f"{'metric':<12} {'pearson':>8} {'kendall':>8} {'spearman':>9}")
        for res in results:
            s = res["summary"]
            print(
                f"{res['metric']:<12} {s['pearson']:>8.4f} "
                f"{s['kendall']:>8.4f} {s['spearman']:>9.4f}"
            )

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump({"task": args.task, "results": results}, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_tag(args) -> int:
    tagger = _build_tagger(args)
    reports = _read_report_lines(args.input)
    out, close = _open_output(args.output)
    try:
        for i, text in enumerate(reports):
            tagged = tagger.tag(text)
            if args.format == "iob":
                spans = token_spans(text)
                tags = entities_to_iob(
                    [t for t, _, _ in spans],
                    list(tagged.entities),
                    [(s, e) for _, s, e in spans],
                )
                for (tok, _, _), tag in zip(spans, tags):
                    out.write(f"{tok}\t{tag}\n")
                out.write("\n")
            else:
                row = {
                    "id": str(i),
                    "text": text,
                    "entities": [
                        {
                            "name": e.name,
                            "type": e.type.value,
                            "start": e.span[0],
                            "end": e.span[1],
                        }
                        for e in tagged.entities
                    ],
                }
                out.write(json.dumps(row) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_curate(args) -> int:
    tagger = _build_tagger(args)
    library = EmbeddingTable.load(args.library)
    encoder = TableEncoder(library)
    reports = _read_report_lines(args.input)

    out, close = _open_output(args.output)
    try:
        for i, text in enumerate(reports):
            for sentence in split_sentences(text):
                entities = apply_polarity(
                    sentence.text,
                    gazetteer_tag(sentence.text, tagger.gazetteer),
                    tagger.lexicon,
                )
                entity_rows = []
                kept_entities = []
                for e in entities:
                    sim = max_library_similarity(e.name, library, encoder)
                    kept = sim >= args.sim_threshold
                    if kept:
                        kept_entities.append(e)
                    entity_rows.append(
                        {"name": e.name, "type": e.type.value, "similarity": sim, "kept": kept}
                    )
                density = sentence_density(sentence.text, kept_entities)
                row = {
                    "report": str(i),
                    "sentence": sentence.index,
                    "text": sentence.text,
                    "density": density,
                    "kept": density is not None and density >= args.density_threshold,
                    "entities": entity_rows,
                }
                out.write(json.dumps(row) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entscore",
        description="Entity-aware similarity scoring for radiology reports.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score candidate reports against references")
    p_score.add_argument("--ref", required=True, help="reference reports (one per line)")
    p_score.add_argument("--cand", required=True, help="candidate reports (one per line)")
    p_score.add_argument("--params", help="params JSON; defaults to uniform W, p=0.5")
    p_score.add_argument(
        "--ner",
        choices=("gazetteer", "predictions"),
        default="gazetteer",
        help="tagging backend; 'predictions' reads CoNLL TSVs instead of text",
    )
    _add_resource_args(p_score)
    p_score.add_argument("--output", help="output JSONL path (default stdout)")
    p_score.add_argument("--explain", action="store_true", help="include match records")
    p_score.add_argument("--workers", type=int, default=1, help="worker processes")
    p_score.set_defaults(func=cmd_score)

    p_fit = sub.add_parser("fit", help="fit affinity matrix and penalty to rated pairs")
    p_fit.add_argument("--pairs", required=True, help="rated pairs JSONL")
    p_fit.add_argument("--scale", choices=("unit", "five_point"), default="unit")
    p_fit.add_argument("--config", help="fit config JSON (n_trials, gamma, ...)")
    p_fit.add_argument("--seed", type=int, default=None, help="override config seed")
    p_fit.add_argument("--out-params", required=True, help="fitted params JSON path")
    p_fit.add_argument("--out-trials", help="trials log CSV path")
    _add_resource_args(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_bench = sub.add_parser("bench", help="run a benchmark task")
    p_bench.add_argument("--task", choices=("sentence", "paragraph", "synthetic"), required=True)
    p_bench.add_argument("--data", required=True, help="rated pairs or triads JSONL")
    p_bench.add_argument(
        "--metric",
        action="append",
        choices=("ratescore", "bleu", "rouge_l", "oracle"),
        help="metric to evaluate (repeatable; default ratescore)",
    )
    p_bench.add_argument("--params", help="initial params JSON for ratescore")
    p_bench.add_argument("--split-ratio", type=float, default=0.8)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--trials", type=int, default=None, help="fit trials override")
    p_bench.add_argument("--output", help="full JSON report path")
    _add_resource_args(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_tag = sub.add_parser("tag", help="tag reports with entities")
    p_tag.add_argument("--input", required=True, help="reports, one per line")
    p_tag.add_argument("--output", help="output path (default stdout)")
    p_tag.add_argument("--format", choices=("json", "iob"), default="json")
    _add_resource_args(p_tag)
    p_tag.set_defaults(func=cmd_tag)

    p_curate = sub.add_parser("curate", help="similarity/density curation filters")
    p_curate.add_argument("--input", required=True, help="reports, one per line")
    p_curate.add_argument("--library", required=True, help="entity library embedding TSV")
    p_curate.add_argument("--sim-threshold", type=float, default=0.83)
    p_curate.add_argument("--density-threshold", type=float, default=0.7)
    p_curate.add_argument("--output", help="output JSONL path (default stdout)")
    _add_resource_args(p_curate)
    p_curate.set_defaults(func=cmd_curate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc.filename or exc}: no such file", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
