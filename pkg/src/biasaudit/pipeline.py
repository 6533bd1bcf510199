"""Run orchestration: configuration, manifests, and report emission.

Each command reads its inputs, runs the pure operations, and writes plain
CSV/JSON artifacts plus a manifest that lists every emitted file with its
digest.  Apart from the manifest timestamp, two runs from identical inputs
and configuration produce byte-identical outputs.
"""

from __future__ import annotations

import concurrent.futures
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import __version__ as toolkit_version
from . import jsonio
from .attribution import consistency_report, load_attributions, topk_membership
from .bst import TestConfig, format_p_value, format_probability, run_bst
from .errors import CoverageError, MissingInputError, ValidationError
from .evaluation import (
    MetricsReport,
    PredictionRecord,
    aggregate_votes,
    classification_report,
    per_descriptor_performance,
)
from .lexicon import Lexicon, add_derived_forms, load_derivations, load_lexicon
from .matcher import MatchOptions, match_units
from .preprocess import (
    SPLIT_THRESHOLD,
    AnalysisUnit,
    Document,
    TokenCounterConfig,
    chunk_document,
    load_external_counts,
    overflowing,
)
from .summarizer import CentralityConfig, SummaryConfig, summarize_budget

PREP_MODES = ("summarize", "chunk", "both")


@dataclass(frozen=True)
class RunConfig:
    corpus: Path
    lexicon: Path
    out_dir: Path
    derivations: Path | None = None
    languages: tuple[str, ...] = ("de", "fr", "it")
    mode: str = "chunk"
    counter: TokenCounterConfig = field(default_factory=TokenCounterConfig)
    summary: SummaryConfig = field(default_factory=SummaryConfig)
    centrality: CentralityConfig = field(default_factory=CentralityConfig)
    similarity_threshold: float = 0.1
    test: TestConfig = field(default_factory=TestConfig)
    match: MatchOptions = field(default_factory=MatchOptions)
    split_threshold: int = SPLIT_THRESHOLD
    external_counts: Path | None = None
    seed: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in PREP_MODES:
            raise ValidationError(f"unknown preprocessing mode {self.mode!r}")


def load_run_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from a JSON file plus flat CLI overrides."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"config file not found: {path}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    base = path.parent

    def _path(key: str, required: bool = False) -> Path | None:
        value = raw.get(key)
        if value is None:
            if required:
                raise MissingInputError(f"config key {key!r} is required")
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    counter_raw = dict(raw.get("counter", {}))
    external = _path("external_counts")
    if counter_raw.get("mode") == "external_counts":
        if external is None:
            raise MissingInputError("external_counts mode needs an external_counts file")
        counter_raw["external_counts"] = load_external_counts(external)
    counter = TokenCounterConfig(**counter_raw)

    return RunConfig(
        corpus=_path("corpus", required=True),
        lexicon=_path("lexicon", required=True),
        out_dir=_path("out_dir", required=True),
        derivations=_path("derivations"),
        languages=tuple(raw.get("languages", ("de", "fr", "it"))),
        mode=raw.get("mode", "chunk"),
        counter=counter,
        summary=SummaryConfig(**raw.get("summary", {})),
        centrality=CentralityConfig(**raw.get("centrality", {})),
        similarity_threshold=raw.get("similarity_threshold", 0.1),
        test=TestConfig(**raw.get("test", {})),
        match=MatchOptions(**raw.get("match", {})),
        split_threshold=raw.get("split_threshold", SPLIT_THRESHOLD),
        external_counts=external,
        seed=raw.get("seed"),
        workers=raw.get("workers", 1),
    )


def _config_snapshot(config: RunConfig) -> dict:
    return {
        "corpus": str(config.corpus),
        "lexicon": str(config.lexicon),
        "derivations": str(config.derivations) if config.derivations else None,
        "languages": list(config.languages),
        "mode": config.mode,
        "counter": {
            "mode": config.counter.mode,
            "factor": config.counter.factor,
            "budget": config.counter.budget,
            "chunk_word_limit": config.counter.chunk_word_limit,
        },
        "summary": {
            "min_sentences": config.summary.min_sentences,
            "max_sentences": config.summary.max_sentences,
            "budget_tokens": config.summary.budget_tokens,
        },
        "centrality": {
            "damping": config.centrality.damping,
            "epsilon": config.centrality.epsilon,
            "max_iterations": config.centrality.max_iterations,
        },
        "similarity_threshold": config.similarity_threshold,
        "test": {
            "pi0_dismissal": config.test.pi0_dismissal,
            "pi0_approval": config.test.pi0_approval,
            "alpha": config.test.alpha,
            "min_count": config.test.min_count,
            "count_mode": config.test.count_mode,
        },
        "match": {
            "case_sensitive": config.match.case_sensitive,
            "unicode_word_boundaries": config.match.unicode_word_boundaries,
            "overlap_policy": config.match.overlap_policy,
        },
        "split_threshold": config.split_threshold,
        "seed": config.seed,
    }


class ManifestWriter:
    """Collects artifact digests and run facts, then writes one manifest."""

    def __init__(self, config: RunConfig, command: str):
        self.config = config
        self.command = command
        self.facts: dict = {}
        self.inputs: dict[str, str] = {}
        self.artifacts: dict[str, str] = {}

    def record_input(self, path: Path) -> None:
        self.inputs[path.name] = jsonio.sha256_file(path)

    def record_artifact(self, path: Path) -> None:
        self.artifacts[path.name] = jsonio.sha256_file(path)

    def write(self) -> Path:
        payload = {
            "toolkit_version": toolkit_version,
            "command": self.command,
            "config": _config_snapshot(self.config),
            "inputs": self.inputs,
            "artifacts": self.artifacts,
            "facts": self.facts,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        path = self.config.out_dir / f"manifest_{self.command}.json"
        jsonio.write_json(path, payload)
        return path


def _require(path: Path | None, what: str) -> Path:
    if path is None or not Path(path).exists():
        raise MissingInputError(f"{what} not found: {path}")
    return Path(path)


def load_full_lexicon(config: RunConfig) -> Lexicon:
    lexicon = load_lexicon(_require(config.lexicon, "lexicon"))
    if config.derivations is not None:
        lexicon = add_derived_forms(lexicon, load_derivations(_require(config.derivations, "derivations")))
    return lexicon


def _load_corpus(config: RunConfig) -> list[Document]:
    docs = jsonio.read_corpus(_require(config.corpus, "corpus"))
    docs = [d for d in docs if d.language in config.languages]
    return sorted(docs, key=lambda d: d.id)


def _prepare_chunks(docs: list[Document], config: RunConfig) -> list[AnalysisUnit]:
    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
            batches = list(
                pool.map(lambda d: chunk_document(d, config.counter, config.split_threshold), docs)
            )
    else:
        batches = [chunk_document(d, config.counter, config.split_threshold) for d in docs]
    units = [u for batch in batches for u in batch]
    units.sort(key=lambda u: (u.doc_id, u.index))
    return units


def _prepare_summaries(docs: list[Document], config: RunConfig) -> list[AnalysisUnit]:
    def one(doc: Document) -> AnalysisUnit:
        return summarize_budget(
            doc.text,
            doc.language,
            config.counter,
            config.summary,
            config.centrality,
            threshold=config.similarity_threshold,
            doc_id=doc.id,
            label=doc.label,
        )

    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
            units = list(pool.map(one, docs))
    else:
        units = [one(d) for d in docs]
    units.sort(key=lambda u: (u.doc_id, u.index))
    return units


def cmd_prepare(config: RunConfig) -> dict[str, Path]:
    """Emit summary and/or chunk units plus a manifest."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    docs = _load_corpus(config)
    manifest = ManifestWriter(config, "prepare")
    manifest.record_input(config.corpus)
    manifest.facts["documents"] = len(docs)

    out: dict[str, Path] = {}
    budget = config.counter.budget
    if config.mode in ("chunk", "both"):
        units = _prepare_chunks(docs, config)
        path = config.out_dir / "units_chunk.jsonl"
        jsonio.write_units(units, path)
        manifest.record_artifact(path)
        over = overflowing(units, budget)
        manifest.facts["chunk_units"] = len(units)
        manifest.facts["chunk_overflowing"] = len(over)
        out["chunk"] = path
    if config.mode in ("summarize", "both"):
        units = _prepare_summaries(docs, config)
        path = config.out_dir / "units_summary.jsonl"
        jsonio.write_units(units, path)
        manifest.record_artifact(path)
        over = overflowing(units, budget)
        manifest.facts["summary_units"] = len(units)
        manifest.facts["summary_overflowing"] = len(over)
        manifest.facts["summary_empty"] = sum(1 for u in units if u.word_count == 0)
        out["summary"] = path
    out["manifest"] = manifest.write()
    return out


def _units_path(config: RunConfig, kind: str | None = None) -> Path:
    kind = kind or ("summary" if config.mode == "summarize" else "chunk")
    return config.out_dir / f"units_{kind}.jsonl"


def cmd_analyze(config: RunConfig, units_path: Path | None = None) -> dict[str, Path]:
    """Match descriptors over prepared units and run the binomial tests."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    units_path = _require(units_path or _units_path(config), "units file (run prepare first)")
    lexicon = load_full_lexicon(config)
    units = jsonio.read_units(units_path)
    docs = _load_corpus(config)
    language_of = {d.id: d.language for d in docs}

    manifest = ManifestWriter(config, "analyze")
    manifest.record_input(units_path)
    manifest.record_input(config.lexicon)
    manifest.facts["units"] = len(units)
    manifest.facts["lexicon_version"] = lexicon.version
    manifest.facts["lexicon_entries"] = len(lexicon)

    matches = match_units(units, lexicon, language_of, config.match)
    manifest.facts["matches"] = len(matches)
    results = run_bst(matches, {u.unit_id: u for u in units}, config.test, lexicon)
    manifest.facts["descriptors_tested"] = len(results)

    bst_path = config.out_dir / "bst_results.csv"
    jsonio.write_csv(
        bst_path,
        ["Token", "Total_Count", "0_Count", "0_Prob", "1_Count", "1_Prob", "0_P_Value", "1_P_Value"],
        (
            [
                r.token,
                str(r.total_count),
                str(r.count0),
                format_probability(r.prob0),
                str(r.count1),
                format_probability(r.prob1),
                format_p_value(r.p_value0),
                format_p_value(r.p_value1),
            ]
            for r in results
        ),
    )
    manifest.record_artifact(bst_path)

    biased = {
        "dismissal": [r.token for r in results if r.biased_toward == "dismissal"],
        "approval": [r.token for r in results if r.biased_toward == "approval"],
    }
    biased_path = config.out_dir / "biased_descriptors.json"
    jsonio.write_json(biased_path, biased)
    manifest.record_artifact(biased_path)

    out = {"bst": bst_path, "biased": biased_path}
    for label_name, attr in (("dismissal", "p_value0"), ("approval", "p_value1")):
        path = config.out_dir / f"scatter_{label_name}.csv"
        jsonio.write_csv(
            path,
            ["token", "total_count", "p_value"],
            ([r.token, str(r.total_count), format_p_value(getattr(r, attr))] for r in results),
        )
        manifest.record_artifact(path)
        out[f"scatter_{label_name}"] = path
    out["manifest"] = manifest.write()
    return out


def _metrics_payload(report: MetricsReport) -> dict:
    return {
        "per_class": {
            str(label): {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
            for label, m in report.per_class.items()
        },
        "accuracy": report.accuracy,
        "macro_avg": {
            "precision": report.macro_precision,
            "recall": report.macro_recall,
            "f1": report.macro_f1,
        },
        "weighted_avg": {
            "precision": report.weighted_precision,
            "recall": report.weighted_recall,
            "f1": report.weighted_f1,
        },
        "total_support": report.total_support,
    }


def _metrics_table(report: MetricsReport) -> str:
    """Six-column human-readable layout: label, precision, recall, F1, support."""
    rows = [["Label", "Precision", "Recall", "F1-Score", "Support"]]
    names = {0: "Dismissal (0)", 1: "Approval (1)"}
    for label in (0, 1):
        m = report.per_class[label]
        rows.append(
            [names[label], f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}", str(m.support)]
        )
    rows.append(["Accuracy", "-", "-", f"{report.accuracy:.2f}", str(report.total_support)])
    rows.append(
        [
            "Macro Avg",
            f"{report.macro_precision:.2f}",
            f"{report.macro_recall:.2f}",
            f"{report.macro_f1:.2f}",
            str(report.total_support),
        ]
    )
    rows.append(
        [
            "Weighted Avg",
            f"{report.weighted_precision:.2f}",
            f"{report.weighted_recall:.2f}",
            f"{report.weighted_f1:.2f}",
            str(report.total_support),
        ]
    )
    widths = [max(len(row[c]) for row in rows) for c in range(5)]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)


def cmd_evaluate(
    config: RunConfig, predictions_path: Path, units_path: Path | None = None
) -> dict[str, Path]:
    """Aggregate chunk votes, compute metrics, and break them down per descriptor."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    units_path = _require(units_path or _units_path(config), "units file (run prepare first)")
    predictions_path = _require(predictions_path, "predictions file")
    units = jsonio.read_units(units_path)
    predictions = jsonio.read_predictions(predictions_path)

    by_unit = {p.unit_id: p for p in predictions}
    missing = sorted(u.unit_id for u in units if u.unit_id not in by_unit)
    if missing:
        raise CoverageError(
            f"predictions missing for {len(missing)} unit(s): {', '.join(missing[:20])}",
            missing=missing,
        )

    evaluated = [by_unit[u.unit_id] for u in units]
    verdicts = aggregate_votes(evaluated, tie_break="majority_class")
    truths = {u.doc_id: u.label for u in units}

    manifest = ManifestWriter(config, "evaluate")
    manifest.record_input(units_path)
    manifest.record_input(predictions_path)
    manifest.facts["units"] = len(units)
    manifest.facts["documents"] = len(verdicts)

    verdicts_path = config.out_dir / "verdicts.jsonl"
    jsonio.write_predictions((verdicts[d] for d in sorted(verdicts)), verdicts_path)
    manifest.record_artifact(verdicts_path)

    pairs = [(verdicts[d].predicted, truths[d]) for d in sorted(verdicts)]
    report = classification_report(pairs)
    metrics_path = config.out_dir / "metrics.json"
    jsonio.write_json(metrics_path, _metrics_payload(report))
    manifest.record_artifact(metrics_path)
    table_path = config.out_dir / "metrics.txt"
    table_path.write_text(_metrics_table(report) + "\n", encoding="utf-8")
    manifest.record_artifact(table_path)

    lexicon = load_full_lexicon(config)
    docs = _load_corpus(config)
    language_of = {d.id: d.language for d in docs}
    matches = match_units(units, lexicon, language_of, config.match)
    outcome_rows = per_descriptor_performance(
        {d: v.predicted for d, v in verdicts.items()}, truths, matches, lexicon
    )
    perf_path = config.out_dir / "per_descriptor_performance.csv"
    jsonio.write_csv(
        perf_path,
        ["descriptor", "language", "correct", "wrong"],
        ([r.descriptor, r.language, str(r.correct), str(r.wrong)] for r in outcome_rows),
    )
    manifest.record_artifact(perf_path)

    return {
        "verdicts": verdicts_path,
        "metrics": metrics_path,
        "table": table_path,
        "per_descriptor": perf_path,
        "manifest": manifest.write(),
    }


def cmd_attribution(
    config: RunConfig,
    attributions_path: Path,
    ks: Iterable[int] = (10, 20, 30),
    min_occurrences: int = 10,
    consistency_threshold: float = 0.8,
) -> dict[str, Path]:
    """Emit top-k membership and sign-consistency reports."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    attributions_path = _require(attributions_path, "attributions file")
    records = load_attributions(attributions_path)
    lexicon = load_full_lexicon(config)

    manifest = ManifestWriter(config, "attribution")
    manifest.record_input(attributions_path)
    manifest.facts["records"] = len(records)

    ks = sorted(set(ks))
    topk = topk_membership(records, lexicon, ks, config.match) if records else []
    topk_csv = config.out_dir / "topk.csv"
    jsonio.write_csv(
        topk_csv,
        ["descriptor", "k", "occurrences_in_topk", "occurrences_total"],
        ([r.descriptor, str(r.k), str(r.occurrences_in_topk), str(r.occurrences_total)] for r in topk),
    )
    manifest.record_artifact(topk_csv)
    topk_json = config.out_dir / "topk.json"
    jsonio.write_json(
        topk_json,
        [
            {
                "descriptor": r.descriptor,
                "k": r.k,
                "occurrences_in_topk": r.occurrences_in_topk,
                "occurrences_total": r.occurrences_total,
                "by_cell": {
                    f"pred{p}_true{t}": list(v) for (p, t), v in r.by_cell.items()
                },
            }
            for r in topk
        ],
    )
    manifest.record_artifact(topk_json)

    consistency = (
        consistency_report(records, lexicon, min_occurrences, consistency_threshold, config.match)
        if records
        else []
    )
    cons_csv = config.out_dir / "consistency.csv"
    jsonio.write_csv(
        cons_csv,
        [
            "descriptor",
            "count_positive_toward_dismissal",
            "count_negative_toward_dismissal",
            "occurrences_total",
            "consistency",
            "flagged",
        ],
        (
            [
                r.descriptor,
                str(r.count_positive_toward_dismissal),
                str(r.count_negative_toward_dismissal),
                str(r.occurrences_total),
                f"{r.consistency:.6f}",
                str(r.flagged).lower(),
            ]
            for r in consistency
        ),
    )
    manifest.record_artifact(cons_csv)
    cons_json = config.out_dir / "consistency.json"
    jsonio.write_json(
        cons_json,
        [
            {
                "descriptor": r.descriptor,
                "count_positive_toward_dismissal": r.count_positive_toward_dismissal,
                "count_negative_toward_dismissal": r.count_negative_toward_dismissal,
                "occurrences_total": r.occurrences_total,
                "consistency": r.consistency,
                "flagged": r.flagged,
            }
            for r in consistency
        ],
    )
    manifest.record_artifact(cons_json)

    return {
        "topk_csv": topk_csv,
        "topk_json": topk_json,
        "consistency_csv": cons_csv,
        "consistency_json": cons_json,
        "manifest": manifest.write(),
    }
