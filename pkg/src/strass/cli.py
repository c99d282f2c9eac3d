"""Command-line entry points: synth, train, summarize, evaluate, gridsearch, bench, stats.

Reports are tab-separated UTF-8. Every command takes its randomness from
``--seed``.
"""
import argparse
import csv
import io
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import (
    SyntheticConfig,
    compute_stats,
    generate_synthetic,
    load_candidates,
    load_split,
    split_records,
    write_splits,
)
from .document import Document, build_document, build_pairs, training_examples
from .embedding_space import EmbeddingSpace, load_word_vectors_file
from .errors import DimensionMismatch, EmptySplit, NoUsableSentences, StrassError
from .extractors import (
    EXTRACTORS,
    Selection,
    extract_baseline,
    extract_lead3,
    extract_oracle,
    extract_oracle_sent,
    extract_strass,
    render_summary,
    score_sentences,
)
from .model import AffineTransform, Hyperparams, load_checkpoint, save_checkpoint, train, transform
from .rouge import METRICS, ConfidenceInterval, bootstrap_ci, per_document_scores
from .text_pipeline import PreprocessOptions, preprocess, tokenize

logger = logging.getLogger("strass")

# threshold, lambda
PRESETS = {"cass": (0.8, 0.3), "cnndm": (0.8, 0.4)}
STATS = ("precision", "recall", "f1")


class UsageError(StrassError):
    pass


@dataclass
class RunConfig:
    embeddings: Optional[Path] = None
    corpus: Optional[Path] = None
    checkpoint: Optional[Path] = None
    out: Optional[Path] = None
    hp: Hyperparams = field(default_factory=Hyperparams)
    extractors: Tuple[str, ...] = ("strass",)
    preprocess: PreprocessOptions = field(default_factory=PreprocessOptions)
    no_header: bool = False
    resamples: int = 1000

    @property
    def seed(self) -> int:
        return self.hp.seed


# -- shared plumbing ---------------------------------------------------------


def _require(path: Optional[Path], what: str) -> Path:
    if path is None:
        raise UsageError(f"--{what} is required")
    if not Path(path).exists():
        raise UsageError(f"{what} path does not exist: {path}")
    return Path(path)


def _space(config: RunConfig) -> EmbeddingSpace:
    return load_word_vectors_file(_require(config.embeddings, "embeddings"),
                                  has_header=not config.no_header)


def _params(config: RunConfig, dim: int) -> AffineTransform:
    with open(_require(config.checkpoint, "checkpoint"), encoding="utf-8") as fh:
        params, _ = load_checkpoint(fh)
    if params.dim != dim:
        raise DimensionMismatch(
            f"checkpoint dimension {params.dim} does not match embeddings dimension {dim}"
        )
    return params


def _emit(config: RunConfig, text: str) -> None:
    if config.out is None:
        sys.stdout.write(text)
    else:
        Path(config.out).write_text(text, encoding="utf-8")


def _tsv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def select(name: str, doc: Document, summary: Optional[Document], t: float,
           params: Optional[AffineTransform] = None) -> Selection:
    """Run extractor ``name`` on ``doc``; an unusable document yields an empty selection."""
    try:
        if name == "strass":
            return extract_strass(params, doc, t)
        if name == "baseline":
            return extract_baseline(doc, t)
        if name == "lead3":
            return extract_lead3(doc)
        if summary is None or summary.degenerate:
            return Selection(())
        if name == "oracle":
            return extract_oracle(doc, summary.embedding, t)
        if name == "oracle-sent":
            return extract_oracle_sent(doc, summary.usable_vectors)
    except NoUsableSentences:
        return Selection(())
    raise UsageError(f"unknown extractor {name!r}; choose from {', '.join(EXTRACTORS)}")


# -- synth ------------------------------------------------------------------------


def cmd_synth(config: RunConfig, synthetic: SyntheticConfig) -> None:
    """Write a synthetic split directory and matching word-vector file."""
    out = Path(config.out or "synthetic")
    records, space = generate_synthetic(synthetic)
    write_splits(out, split_records(records))
    with open(out / "vectors.txt", "w", encoding="utf-8") as fh:
        space.dump(fh)
    logger.info("wrote %d records and %d vectors to %s", len(records), space.vocab_size, out)


# -- train -----------------------------------------------------------------------


def cmd_train(config: RunConfig, split: str = "train") -> Tuple[AffineTransform, List[float]]:
    """Train on ``split`` and write the checkpoint plus a per-epoch loss report."""
    space = _space(config)
    records = load_split(_require(config.corpus, "corpus"), split)
    if config.checkpoint is None:
        raise UsageError("--checkpoint (output path) is required for training")
    examples = training_examples(build_pairs(records, space, config.preprocess))
    if not examples:
        raise EmptySplit(f"no usable training pairs in split {split!r}")
    params, history = train(examples, config.hp)
    with open(config.checkpoint, "w", encoding="utf-8") as fh:
        save_checkpoint(params, config.hp, fh)
    _emit(config, _tsv(("epoch", "mean_loss"), list(enumerate(history))))
    return params, history


# -- summarize ---------------------------------------------------------------------


@dataclass
class SummaryResult:
    summary: str
    selection: Selection
    scores: np.ndarray


def summarize_text(text: str, space: EmbeddingSpace, extractor: str, t: float,
                   params: Optional[AffineTransform] = None,
                   reference: Optional[str] = None,
                   opts: PreprocessOptions = PreprocessOptions()) -> SummaryResult:
    doc = build_document(text, space, opts)
    ref_doc = build_document(reference, space, opts) if reference is not None else None
    if extractor in ("oracle", "oracle-sent") and ref_doc is None:
        raise UsageError(f"extractor {extractor!r} needs --reference")
    sel = select(extractor, doc, ref_doc, t, params)
    if extractor == "strass":
        scores = score_sentences(doc, transform(params, doc.embedding))
    elif extractor == "oracle":
        scores = score_sentences(doc, ref_doc.embedding)
    elif doc.usable.any():
        scores = score_sentences(doc, doc.embedding)
    else:
        scores = np.full(len(doc), np.nan)
    return SummaryResult(render_summary(doc, sel), sel, scores)


def cmd_summarize(config: RunConfig, input_path: Path,
                  reference_path: Optional[Path] = None) -> SummaryResult:
    """Summarize one document; prints the summary then a per-sentence score table.

    For lead3 and oracle-sent the score column holds baseline scores for
    reference.
    """
    space = _space(config)
    text = _require(input_path, "input").read_text(encoding="utf-8")
    reference = None
    if reference_path is not None:
        reference = _require(reference_path, "reference").read_text(encoding="utf-8")
    extractor = config.extractors[0]
    params = _params(config, space.dim) if extractor == "strass" else None
    result = summarize_text(text, space, extractor, config.hp.threshold, params,
                            reference, config.preprocess)
    chosen = result.selection.as_set()
    rows = [(i, float(s), int(i in chosen)) for i, s in enumerate(result.scores)]
    sys.stdout.write(result.summary + "\n")
    _emit(config, _tsv(("sentence", "score", "selected"), rows))
    return result


# -- evaluate ------------------------------------------------------------------------


Results = Dict[str, Dict[str, Dict[str, ConfidenceInterval]]]


def evaluate_pairs(candidates: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
                   resamples: int = 1000, seed: int = 0) -> Dict[str, Dict[str, ConfidenceInterval]]:
    """Mean and bootstrap interval for every metric and statistic."""
    per_doc = per_document_scores(list(zip(candidates, references)))
    if not per_doc:
        raise EmptySplit("nothing to evaluate")
    out = {}
    for metric in METRICS:
        out[metric] = {
            stat: bootstrap_ci([getattr(s[metric], stat) for s in per_doc], resamples, seed)
            for stat in STATS
        }
    return out


def cmd_evaluate(config: RunConfig, split: str = "test",
                 candidates_path: Optional[Path] = None) -> Results:
    """Score extractors (or a file of candidate summaries) against a split's references.

    Writes the machine-readable table to ``--out`` (or stdout) and an
    aligned table to stderr.
    """
    corpus_dir = _require(config.corpus, "corpus")
    records = load_split(corpus_dir, split)
    opts = config.preprocess
    refs = [tokenize_text(r.summary, opts) for r in records]
    results: Results = {}

    if candidates_path is not None:
        with open(_require(candidates_path, "candidates"), encoding="utf-8") as fh:
            given = load_candidates(fh)
        cands = [tokenize_text(given.get(r.id, ""), opts) for r in records]
        results["candidates"] = evaluate_pairs(cands, refs, config.resamples, config.seed)
    else:
        space = _space(config)
        pairs = build_pairs(records, space, opts)
        params = _params(config, space.dim) if "strass" in config.extractors else None
        for name in config.extractors:
            cands = [
                tokenize(render_summary(doc, select(name, doc, summ, config.hp.threshold, params)))
                for doc, summ in pairs
            ]
            results[name] = evaluate_pairs(cands, refs, config.resamples, config.seed)

    _emit(config, format_results(results))
    sys.stderr.write(format_table(results))
    return results


def tokenize_text(text: str, opts: PreprocessOptions) -> List[str]:
    return tokenize(preprocess(text, opts))


def format_results(results: Results) -> str:
    rows = [
        (name, metric, stat, ci.mean, ci.lower, ci.upper)
        for name, by_metric in results.items()
        for metric, by_stat in by_metric.items()
        for stat, ci in by_stat.items()
    ]
    return _tsv(("system", "metric", "stat", "mean", "lower", "upper"), rows)


def parse_results(text: str) -> Results:
    results: Results = {}
    reader = csv.DictReader(io.StringIO(text), delimiter="\t")
    for row in reader:
        ci = ConfidenceInterval(float(row["mean"]), float(row["lower"]), float(row["upper"]))
        results.setdefault(row["system"], {}).setdefault(row["metric"], {})[row["stat"]] = ci
    return results


def format_table(results: Results) -> str:
    """Human-readable table, scores in percent with the 95% interval."""
    cols = [(m, s) for m in METRICS for s in STATS]
    short = {"rouge-1": "R1", "rouge-2": "R2", "rouge-l": "RL",
             "precision": "P", "recall": "R", "f1": "F1"}
    header = ["system"] + [f"{short[m]} {short[s]}" for m, s in cols]
    lines = [header]
    for name, by_metric in results.items():
        row = [name]
        for m, s in cols:
            ci = by_metric[m][s]
            row.append(f"{100 * ci.mean:.2f} [{100 * ci.lower:.2f},{100 * ci.upper:.2f}]")
        lines.append(row)
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() + "\n"
                   for line in lines)


# -- gridsearch ---------------------------------------------------------------------


@dataclass
class GridCell:
    threshold: float
    lam: float
    rouge_l_f1: float
    final_loss: float


def grid_search(train_pairs, valid_pairs, base: Hyperparams, thresholds: Sequence[float],
                lambdas: Sequence[float]) -> Tuple[GridCell, List[GridCell], Dict[Tuple[float, float], AffineTransform]]:
    """Train one model per (threshold, lambda) cell and score it on validation pairs.

    Every cell starts from the same seeded initialization; see ``best_cell``
    for the selection rule.
    """
    examples = training_examples(train_pairs)
    if not examples:
        raise EmptySplit("no usable training pairs")
    if not valid_pairs:
        raise EmptySplit("no validation pairs")
    init = AffineTransform.initialize(examples[0].d.shape[0], base.seed)
    cells, models = [], {}
    for lam in lambdas:
        for t in thresholds:
            hp = replace(base, threshold=t, lam=lam)
            params, history = train(examples, hp, init=init)
            cands = [tokenize(render_summary(doc, select("strass", doc, s, t, params)))
                     for doc, s in valid_pairs]
            refs = [s.tokens for _, s in valid_pairs]
            f1 = float(np.mean([sc["rouge-l"].f1 for sc in per_document_scores(list(zip(cands, refs)))]))
            cells.append(GridCell(t, lam, f1, history[-1]))
            models[(t, lam)] = params
            logger.info("grid cell t=%g lambda=%g: ROUGE-L F1 %.4f", t, lam, f1)
    return best_cell(cells), cells, models


def best_cell(cells: Sequence[GridCell]) -> GridCell:
    """Highest ROUGE-L F1; ties prefer smaller lambda, then larger threshold."""
    return min(cells, key=lambda c: (-c.rouge_l_f1, c.lam, -c.threshold))


def cmd_gridsearch(config: RunConfig, thresholds: Sequence[float],
                   lambdas: Sequence[float]) -> Tuple[GridCell, List[GridCell]]:
    """Grid search on the validation split; writes the best cell's checkpoint if requested."""
    space = _space(config)
    corpus_dir = _require(config.corpus, "corpus")
    train_pairs = build_pairs(load_split(corpus_dir, "train"), space, config.preprocess)
    valid_pairs = build_pairs(load_split(corpus_dir, "valid"), space, config.preprocess)
    best, cells, models = grid_search(train_pairs, valid_pairs, config.hp, thresholds, lambdas)
    if config.checkpoint is not None:
        with open(config.checkpoint, "w", encoding="utf-8") as fh:
            save_checkpoint(models[(best.threshold, best.lam)],
                            replace(config.hp, threshold=best.threshold, lam=best.lam), fh)
    rows = [(c.threshold, c.lam, c.rouge_l_f1, c.final_loss,
             int(c is best)) for c in cells]
    _emit(config, _tsv(("threshold", "lambda", "rouge_l_f1", "final_loss", "best"), rows))
    sys.stderr.write(f"best: threshold={best.threshold:g} lambda={best.lam:g} "
                     f"ROUGE-L F1={best.rouge_l_f1:.4f}\n")
    return best, cells


# -- bench ------------------------------------------------------------------------------


def benchmark(sizes: Sequence[int], repeats: int = 5, dim: int = 16, seed: int = 0,
              params: Optional[AffineTransform] = None, space: Optional[EmbeddingSpace] = None,
              t: float = 0.8) -> List[Tuple[int, float]]:
    """Median wall time of ``summarize_text`` on synthetic documents of each size."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    rows = []
    for size in sizes:
        records, gen_space = generate_synthetic(
            SyntheticConfig(docs=1, sentences_per_doc=size, dim=dim, seed=seed))
        use_space = space if space is not None else gen_space
        p = params if params is not None else AffineTransform.identity(use_space.dim)
        text = records[0].document
        timings = []
        for _ in range(repeats):
            start = time.perf_counter()
            summarize_text(text, use_space, "strass", t, p)
            timings.append(time.perf_counter() - start)
        rows.append((int(size), float(np.median(timings))))
    return rows


def linear_fit_r2(rows: Sequence[Tuple[int, float]]) -> Tuple[float, float, float]:
    """Least-squares ``time = slope * size + intercept``; returns (slope, intercept, R^2)."""
    x = np.array([r[0] for r in rows], dtype=np.float64)
    y = np.array([r[1] for r in rows], dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / total if total > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def cmd_bench(config: RunConfig, sizes: Sequence[int], repeats: int = 5,
              dim: int = 16) -> List[Tuple[int, float]]:
    params = None
    if config.checkpoint is not None:
        params, _ = load_checkpoint(_require(config.checkpoint, "checkpoint").read_text(encoding="utf-8"))
        dim = params.dim
    rows = benchmark(sizes, repeats, dim, config.seed, params, t=config.hp.threshold)
    _emit(config, _tsv(("sentences", "median_seconds"), rows))
    if len(rows) >= 2:
        slope, intercept, r2 = linear_fit_r2(rows)
        sys.stderr.write(f"linear fit: slope={slope:.3g} s/sentence intercept={intercept:.3g} s "
                         f"R^2={r2:.4f}\n")
    return rows


# -- stats -----------------------------------------------------------------------------


def cmd_stats(config: RunConfig, split: str = "test"):
    records = load_split(_require(config.corpus, "corpus"), split)
    stats = compute_stats(records, config.preprocess)
    _emit(config, _tsv(
        ("split", "records", "sentences_per_doc", "sentences_per_summary",
         "tokens_per_doc", "tokens_per_summary"),
        [(split, stats.records, stats.sentences_per_doc, stats.sentences_per_summary,
          stats.tokens_per_doc, stats.tokens_per_summary)],
    ))
    return stats


# -- argument parsing --------------------------------------------------------------------


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--embeddings", type=Path, help="word vectors in text format")
    common.add_argument("--no-header", action="store_true",
                        help="word-vector file has no 'vocab_size dim' header line")
    common.add_argument("--corpus", type=Path, help="directory with train/valid/test .jsonl")
    common.add_argument("--checkpoint", type=Path)
    common.add_argument("--out", type=Path, help="report path (default: stdout)")
    common.add_argument("--preset", choices=sorted(PRESETS), default="cass",
                        help="default threshold/lambda pair (default: cass)")
    common.add_argument("--threshold", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--steepness", type=float, default=1.0)
    common.add_argument("--lr", type=float, default=1.0)
    common.add_argument("--epochs", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--stochastic", action="store_true",
                        help="update after every example instead of full-batch descent")
    common.add_argument("--literal-loss", action="store_true",
                        help="add the similarity term to the loss instead of subtracting it")
    common.add_argument("--extractor", action="append", choices=EXTRACTORS,
                        help="may be repeated for evaluate (default: strass)")
    common.add_argument("--no-lowercase", action="store_true")
    common.add_argument("--no-strip-accents", action="store_true")
    common.add_argument("--resamples", type=int, default=1000)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="strass", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--docs", type=int, default=200)
    p.add_argument("--sentences", type=int, default=8)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--planted", type=int, default=1)

    sub.add_parser("train", parents=[common], help="train the transform")

    p = sub.add_parser("summarize", parents=[common], help="summarize one document")
    p.add_argument("input", type=Path)
    p.add_argument("--reference", type=Path, help="reference summary for oracle extractors")

    p = sub.add_parser("evaluate", parents=[common], help="ROUGE with bootstrap intervals")
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    p.add_argument("--candidates", type=Path,
                   help="score these summaries (.jsonl with id and summary) instead of extractors")

    p = sub.add_parser("gridsearch", parents=[common], help="search threshold and lambda")
    p.add_argument("--thresholds", type=_floats, default=[0.6, 0.7, 0.8, 0.9, 1.0])
    p.add_argument("--lambdas", type=_floats, default=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5])

    p = sub.add_parser("bench", parents=[common], help="time summarization by document size")
    p.add_argument("--sizes", type=_ints, default=[10, 50, 100, 250, 500, 1000])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--dim", type=int, default=16)

    p = sub.add_parser("stats", parents=[common], help="corpus size statistics")
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    t, lam = PRESETS[args.preset]
    hp = Hyperparams(
        threshold=args.threshold if args.threshold is not None else t,
        lam=args.lam if args.lam is not None else lam,
        steepness=args.steepness,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        stochastic=args.stochastic,
        literal_loss=args.literal_loss,
    )
    return RunConfig(
        embeddings=args.embeddings,
        corpus=args.corpus,
        checkpoint=args.checkpoint,
        out=args.out,
        hp=hp,
        extractors=tuple(args.extractor or ("strass",)),
        preprocess=PreprocessOptions(lowercase=not args.no_lowercase,
                                     strip_accents=not args.no_strip_accents),
        no_header=args.no_header,
        resamples=args.resamples,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        if args.command == "synth":
            cmd_synth(config, SyntheticConfig(docs=args.docs, sentences_per_doc=args.sentences,
                                              dim=args.dim, planted_summary_size=args.planted,
                                              seed=args.seed))
        elif args.command == "train":
            cmd_train(config)
        elif args.command == "summarize":
            cmd_summarize(config, args.input, args.reference)
        elif args.command == "evaluate":
            cmd_evaluate(config, args.split, args.candidates)
        elif args.command == "gridsearch":
            cmd_gridsearch(config, args.thresholds, args.lambdas)
        elif args.command == "bench":
            cmd_bench(config, args.sizes, args.repeats, args.dim)
        elif args.command == "stats":
            cmd_stats(config, args.split)
    except (StrassError, ValueError, OSError) as exc:
        sys.stderr.write(f"strass {args.command}: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
