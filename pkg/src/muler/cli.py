"""Command-line interface.

Subcommands: report, compare, validate, stats, convert. All randomness
flows from --seed, every output embeds the resolved configuration, and
identical configs over identical inputs produce byte-identical artifacts
regardless of --parallel (timestamps live only in the sidecar .log file).

Exit codes: 0 ok, 2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import (
    XMeasure,
    YMeasure,
    correlate,
    load_report_dir,
    points_long_format,
    serialize_report,
    to_json,
)
from .corpus import (
    AnnotatedSentence,
    ParallelCorpus,
    SentencePair,
    load_corpus,
    parse_tagged_sentences,
    save_corpus,
    serialize_corpus,
    validate_corpus,
)
from .errors import CorpusError, LexiconError, MulerError
from .features import (
    Side,
    builtin_features,
    feature_stats,
    load_feature_file,
    resolve_features,
)
from .lexicons import DEFAULT_NEGATION_WORDS, load_lexicon
from .masking import MaskKind, MaskStrategy, mask_side
from .metrics import (
    BleuSmoothing,
    MetricConfig,
    MetricKind,
    SimMode,
    masked_sim_score,
    parse_similarity_file,
)
from .scores import (
    MulerEntry,
    MulerReport,
    discrepancy_breakdown,
    feature_report,
    muler_score,
    similarity_extremes,
)
from .validation import (
    frequency_to_dict,
    hybrid_to_dict,
    run_frequency,
    run_hybrid,
    run_specificity,
    specificity_to_dict,
)

_METRICS = {
    "bleu": MetricKind.BLEU,
    "rouge1": MetricKind.ROUGE1,
    "rouge2": MetricKind.ROUGE2,
    "rougel": MetricKind.ROUGE_L,
    "rouge-l": MetricKind.ROUGE_L,
    "masked-sim": MetricKind.MASKED_SIM,
}


@dataclass
class RunConfig:
    command: str
    corpus: str | None = None
    meta: str | None = None
    features: list[str] = field(default_factory=list)
    feature_file: str | None = None
    metric: str = "bleu"
    bleu_max_n: int = 4
    bleu_smoothing: str = "add1_on_zero"
    case_fold: bool = True
    lexicons: list[str] = field(default_factory=list)
    out: str = ""
    fmt: str = "json"
    seed: int = 42
    parallel: int = 1
    figures: bool = True

    def resolved(self) -> dict:
        payload = {k: v for k, v in vars(self).items() if v is not None}
        # worker count never changes artifact content, so it stays out of
        # the provenance echo to keep outputs parallelism-invariant
        payload.pop("parallel", None)
        payload["version"] = __version__
        return payload


def _metric_config(cfg: RunConfig) -> MetricConfig:
    kind = _METRICS.get(cfg.metric)
    if kind is None:
        raise MulerError(f"unknown metric {cfg.metric!r}")
    return MetricConfig(
        kind=kind,
        bleu_max_n=cfg.bleu_max_n,
        bleu_smoothing=BleuSmoothing(cfg.bleu_smoothing.upper()),
        case_fold=cfg.case_fold,
    )


def _feature_specs(cfg: RunConfig):
    specs = []
    if cfg.feature_file:
        specs.extend(load_feature_file(cfg.feature_file))
    names = [n for n in cfg.features if n]
    if len(names) == 1 and names[0].lower() == "all":
        specs.extend(builtin_features().values())
    elif names:
        known = {s.feature_id for s in specs}
        specs.extend(resolve_features([n for n in names if n not in known]))
    if not specs:
        raise MulerError("no features selected (use --features or --feature-file)")
    return specs


def _resolve_lexicon_path(raw: str) -> Path:
    path = Path(raw)
    if path.exists():
        return path
    search_dir = os.environ.get("MULER_LEXICON_DIR")
    if search_dir:
        for candidate in (Path(search_dir) / raw, Path(search_dir) / f"{raw}.tsv"):
            if candidate.exists():
                return candidate
    raise LexiconError(f"lexicon file not found: {raw}")


def _load_lexicons(bindings: list[str]):
    lexicons = []
    for binding in bindings:
        name, sep, raw_path = binding.partition("=")
        if not sep:
            name, raw_path = binding, binding
        path = _resolve_lexicon_path(raw_path)
        negation = DEFAULT_NEGATION_WORDS if name == "sentiment" else frozenset()
        lexicons.append(load_lexicon(path, name=name, negation_words=negation))
    return lexicons


class _Artifacts:
    """Collects output files so a failed run leaves nothing behind."""

    def __init__(self):
        self.paths: list[Path] = []

    def write_text(self, path, text: str):
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
        self.paths.append(path)

    def track(self, path):
        self.paths.append(Path(path))

    def cleanup(self):
        for path in self.paths:
            try:
                path.unlink()
            except OSError:
                pass


def _write_sidecar_log(out: Path, cfg: RunConfig):
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    log_path = out.with_name(out.name + ".log")
    log_path.write_text(
        json.dumps({"finished": stamp, "config": cfg.resolved()}, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )


def _check_corpus(corpus: ParallelCorpus):
    for diag in validate_corpus(corpus):
        if diag.severity == "error":
            raise CorpusError(diag.message)
        print(f"warning: {diag.message}", file=sys.stderr)


def _similarity_report(corpus, feature_specs, cfg: RunConfig, sim_dir) -> MulerReport:
    if len(feature_specs) != 1:
        raise MulerError("masked-sim reports take exactly one feature label")
    spec = feature_specs[0]
    matrices = []
    for pair in corpus.pairs:
        path = Path(sim_dir) / f"{pair.pair_id}.sim"
        if not path.exists():
            raise CorpusError(f"missing similarity file {path}")
        with open(path, encoding="utf-8") as fh:
            matrices.append(parse_similarity_file(fh))
    extremes, indices = similarity_extremes(matrices)
    score, flags = muler_score(*extremes)
    overall = sum(masked_sim_score(m, SimMode.PLAIN) for m in matrices) / len(matrices)
    entry = MulerEntry(
        feature_id=spec.feature_id,
        index_count=len(indices),
        eta=discrepancy_breakdown(corpus, spec),
        stats=feature_stats(corpus, spec, Side.REF),
        base=extremes.base,
        max_score=extremes.max_score,
        min_score=extremes.min_score,
        muler=score,
        abl_muler=extremes.max_score - extremes.base,
        flags=flags,
    )
    meta = dict(corpus.metadata)
    meta["metric_config"] = {"metric": "MASKED_SIM", "source": str(sim_dir)}
    return MulerReport(metadata=meta, overall_score=overall, entries=(entry,))


def _dump_masked(corpus, feature_specs, out_dir, artifacts: _Artifacts):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    strategies = {
        "oracle": MaskStrategy(MaskKind.ORACLE),
        "anti": MaskStrategy(MaskKind.ANTI_ORACLE),
    }
    for spec in feature_specs:
        safe = spec.feature_id.replace(":", "_").replace("/", "_")
        for label, strategy in strategies.items():
            pairs = []
            for pair in corpus.pairs:
                refs = tuple(
                    AnnotatedSentence.from_words(mask_side(r, spec, strategy, False)[0])
                    for r in pair.references
                )
                cand = AnnotatedSentence.from_words(
                    mask_side(pair.candidate, spec, strategy, True)[0]
                )
                pairs.append(
                    SentencePair(references=refs, candidate=cand, pair_id=pair.pair_id)
                )
            masked = ParallelCorpus(pairs=tuple(pairs), metadata=dict(corpus.metadata))
            text = "\n".join(serialize_corpus(masked)) + "\n"
            artifacts.write_text(out_dir / f"{safe}.{label}.jsonl", text)


def _cmd_report(args, artifacts: _Artifacts) -> None:
    cfg: RunConfig = args.run_config
    corpus = load_corpus(cfg.corpus, meta_path=cfg.meta)
    _check_corpus(corpus)
    specs = _feature_specs(cfg)
    out = Path(cfg.out)
    if cfg.metric == "masked-sim":
        if not args.sim_dir:
            raise MulerError("--metric masked-sim requires --sim-dir")
        report = _similarity_report(corpus, specs, cfg, args.sim_dir)
    else:
        metric = _metric_config(cfg)
        lexicons = _load_lexicons(cfg.lexicons)
        meta = dict(corpus.metadata)
        meta["run_config"] = cfg.resolved()
        meta["scorer_config"] = [lx.fingerprint() for lx in lexicons]
        report = feature_report(
            corpus,
            specs,
            metric,
            scorers=lexicons,
            workers=cfg.parallel,
            metadata=meta,
        )
    artifacts.write_text(out, serialize_report(report, cfg.fmt))
    csv_path = out.with_suffix(".csv")
    if csv_path != out:
        artifacts.write_text(csv_path, serialize_report(report, "csv"))
    if cfg.figures:
        from . import figures

        figure_path = out.with_suffix(".png")
        figures.render_report(report, figure_path)
        artifacts.track(figure_path)
    if args.dump_masked:
        _dump_masked(corpus, specs, args.dump_masked, artifacts)
    _write_sidecar_log(out, cfg)


def _cmd_compare(args, artifacts: _Artifacts) -> None:
    cfg: RunConfig = args.run_config
    series = load_report_dir(args.reports)
    x = XMeasure(args.x.replace("-", "_").upper())
    y = YMeasure(args.y.replace("-", "_").upper())
    group_by = [g.strip() for g in args.group_by.split(",") if g.strip()]
    matrix = correlate(series, x, y, group_by=group_by)
    out = Path(cfg.out)
    artifacts.write_text(out, serialize_report(matrix, cfg.fmt))
    points = points_long_format(series, x, y, group_by=group_by)
    lines = ["language\tfeature\tx\ty"]
    lines += [f"{g}\t{f}\t{xv!r}\t{yv!r}" for g, f, xv, yv in points]
    artifacts.write_text(
        out.with_name(out.stem + "_points.tsv"), "\n".join(lines) + "\n"
    )
    if cfg.figures:
        from . import figures

        figure_path = out.with_suffix(".png")
        figures.render_matrix(matrix, figure_path)
        artifacts.track(figure_path)
    _write_sidecar_log(out, cfg)


def _parse_alpha_list(raw: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise MulerError(f"bad fraction list {raw!r}")


def _cmd_validate(args, artifacts: _Artifacts) -> None:
    cfg: RunConfig = args.run_config
    corpus = load_corpus(cfg.corpus, meta_path=cfg.meta)
    _check_corpus(corpus)
    metric = _metric_config(cfg)
    spec = resolve_features([args.feature])[0]
    payload: dict = {"config": cfg.resolved(), "feature": spec.feature_id}
    curve = None
    if args.hybrid:
        curve = run_hybrid(corpus, spec, metric, _parse_alpha_list(args.hybrid))
        payload["hybrid"] = hybrid_to_dict(curve)
    if args.specificity:
        result = run_specificity(
            corpus,
            p=args.specificity,
            repeats=args.repeats,
            seed=cfg.seed,
            metric=metric,
            workers=cfg.parallel,
        )
        payload["specificity"] = specificity_to_dict(result)
    if args.frequency:
        result = run_frequency(corpus, spec, metric, _parse_alpha_list(args.frequency))
        payload["frequency"] = frequency_to_dict(result)
    if len(payload) == 2:
        raise MulerError("nothing to validate: pass --hybrid, --specificity, or --frequency")
    out = Path(cfg.out)
    artifacts.write_text(out, to_json(payload))
    if cfg.figures and curve is not None:
        from . import figures

        figure_path = out.with_suffix(".png")
        figures.render_hybrid(curve, figure_path)
        artifacts.track(figure_path)
    _write_sidecar_log(out, cfg)


def _cmd_stats(args, artifacts: _Artifacts) -> None:
    cfg: RunConfig = args.run_config
    corpus = load_corpus(cfg.corpus, meta_path=cfg.meta)
    _check_corpus(corpus)
    specs = _feature_specs(cfg)
    rows = []
    for spec in specs:
        for side in (Side.REF, Side.CAND):
            st = feature_stats(corpus, spec, side)
            rows.append(
                {
                    "feature": spec.feature_id,
                    "side": side.value.lower(),
                    "frequency": st.frequency,
                    "uniqueness": st.uniqueness,
                    "total_occurrences": st.total_occurrences,
                    "unique_surface_forms": st.unique_surface_forms,
                }
            )
    out = Path(cfg.out)
    if cfg.fmt == "json":
        artifacts.write_text(out, to_json({"config": cfg.resolved(), "stats": rows}))
    else:
        delim = "," if cfg.fmt == "csv" else "\t"
        header = [
            "feature", "side", "frequency", "uniqueness",
            "total_occurrences", "unique_surface_forms",
        ]
        lines = [delim.join(header)]
        for r in rows:
            lines.append(delim.join(str(r[k]) for k in header))
        artifacts.write_text(out, "\n".join(lines) + "\n")
    _write_sidecar_log(out, cfg)


def _cmd_convert(args, artifacts: _Artifacts) -> None:
    cfg: RunConfig = args.run_config
    with open(args.ref_tags, encoding="utf-8") as fh:
        refs = parse_tagged_sentences(fh, source=args.ref_tags)
    with open(args.cand_tags, encoding="utf-8") as fh:
        cands = parse_tagged_sentences(fh, source=args.cand_tags)
    if len(refs) != len(cands):
        raise CorpusError(
            f"sentence count mismatch: {len(refs)} references vs {len(cands)} candidates"
        )
    if not refs:
        raise CorpusError("empty corpus")
    meta = {}
    for item in args.meta_kv or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise MulerError(f"bad --meta entry {item!r}, expected key=value")
        meta[key] = value
    pairs = tuple(
        SentencePair(references=(ref,), candidate=cand, pair_id=f"p{i}")
        for i, (ref, cand) in enumerate(zip(refs, cands), start=1)
    )
    corpus = ParallelCorpus(pairs=pairs, metadata=meta)
    out = Path(cfg.out)
    save_corpus(corpus, out)
    artifacts.track(out)
    _write_sidecar_log(out, cfg)


def _add_common(parser, need_corpus=True):
    if need_corpus:
        parser.add_argument("--corpus", required=True, help="corpus JSONL file")
        parser.add_argument("--meta", help="sidecar metadata JSON")
    parser.add_argument("--out", required=True, help="output file")
    parser.add_argument(
        "--format", default="json", choices=["json", "csv", "tsv"], dest="fmt"
    )
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--parallel", type=int, default=1)
    parser.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering"
    )


def _add_metric(parser):
    parser.add_argument("--metric", default="bleu", choices=sorted(_METRICS))
    parser.add_argument("--bleu-max-n", type=int, default=4)
    parser.add_argument(
        "--bleu-smoothing", default="add1_on_zero", choices=["add1_on_zero", "none"]
    )
    parser.add_argument("--no-case-fold", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muler",
        description="Decompose reference-based metrics into per-feature scores.",
    )
    parser.add_argument("--version", action="version", version=f"muler {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("report", help="per-feature score report")
    _add_common(rep)
    _add_metric(rep)
    rep.add_argument("--features", default="all", help="comma list of ids, or 'all'")
    rep.add_argument("--feature-file", help="JSON feature spec file")
    rep.add_argument(
        "--lexicon",
        action="append",
        default=[],
        metavar="NAME=PATH",
        help="sentence scorer lexicon (repeatable)",
    )
    rep.add_argument("--sim-dir", help="similarity matrices for --metric masked-sim")
    rep.add_argument("--dump-masked", help="directory for masked-corpus debug dumps")
    rep.set_defaults(fn=_cmd_report)

    cmp_ = sub.add_parser("compare", help="cross-system correlation matrix")
    _add_common(cmp_, need_corpus=False)
    cmp_.add_argument("--reports", required=True, help="directory of report JSON files")
    cmp_.add_argument(
        "--x", default="bleu", choices=["bleu", "indices-bleu", "max-minus-min"]
    )
    cmp_.add_argument("--y", default="neg-muler", choices=["neg-muler", "muler"])
    cmp_.add_argument("--group-by", default="langs", help="langs or year,langs")
    cmp_.set_defaults(fn=_cmd_compare)

    val = sub.add_parser("validate", help="synthetic validation experiments")
    _add_common(val)
    _add_metric(val)
    val.add_argument("--feature", required=True)
    val.add_argument("--hybrid", help="comma list of anti-oracle fractions")
    val.add_argument("--specificity", type=int, help="number of synthetic groups p")
    val.add_argument("--repeats", type=int, default=1000)
    val.add_argument("--frequency", help="comma list of head fractions in (0,1]")
    val.set_defaults(fn=_cmd_validate)

    st = sub.add_parser("stats", help="feature frequency and uniqueness table")
    _add_common(st)
    st.add_argument("--features", default="all")
    st.add_argument("--feature-file")
    st.set_defaults(fn=_cmd_stats)

    conv = sub.add_parser("convert", help="tagged text to corpus JSONL")
    conv.add_argument("--ref-tags", required=True, help="tagged reference file")
    conv.add_argument("--cand-tags", required=True, help="tagged candidate file")
    conv.add_argument("--out", required=True)
    conv.add_argument(
        "--meta", action="append", dest="meta_kv", metavar="KEY=VALUE", default=[]
    )
    conv.set_defaults(fn=_cmd_convert, fmt="json", seed=42, parallel=1, no_figures=True)

    return parser


def _run_config_from(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        corpus=getattr(args, "corpus", None),
        meta=getattr(args, "meta", None) if args.command != "convert" else None,
        features=[s.strip() for s in getattr(args, "features", "").split(",")]
        if getattr(args, "features", "")
        else [],
        feature_file=getattr(args, "feature_file", None),
        metric=getattr(args, "metric", "bleu"),
        bleu_max_n=getattr(args, "bleu_max_n", 4),
        bleu_smoothing=getattr(args, "bleu_smoothing", "add1_on_zero"),
        case_fold=not getattr(args, "no_case_fold", False),
        lexicons=list(getattr(args, "lexicon", []) or []),
        out=args.out,
        fmt=getattr(args, "fmt", "json"),
        seed=getattr(args, "seed", 42),
        parallel=max(1, getattr(args, "parallel", 1)),
        figures=not getattr(args, "no_figures", False),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.run_config = _run_config_from(args)
    artifacts = _Artifacts()
    try:
        args.fn(args, artifacts)
    except (CorpusError, LexiconError, FileNotFoundError, IsADirectoryError) as exc:
        artifacts.cleanup()
        _emit_error(exc, "input")
        return 2
    except MulerError as exc:
        artifacts.cleanup()
        _emit_error(exc, "computation")
        return 3
    return 0


def _emit_error(exc: Exception, kind: str) -> None:
    print(
        json.dumps(
            {"error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)}},
            sort_keys=True,
        ),
        file=sys.stderr,
    )


if __name__ == "__main__":
    sys.exit(main())
