"""Command-line interface.

Exit codes: 0 on success, 1 when input data fails validation, 2 when a
required input is missing.  Diagnostics go to stderr as JSON lines so runs
are machine-checkable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import BiasAuditError, MissingInputError, ValidationError
from .lexicon import (
    HttpTranslationProvider,
    TranslationCache,
    add_derived_forms,
    load_derivations,
    load_lexicon,
    save_lexicon,
    translate_lexicon,
)
from .pipeline import (
    cmd_analyze,
    cmd_attribution,
    cmd_evaluate,
    cmd_prepare,
    load_run_config,
)


def emit(event: str, **fields) -> None:
    print(json.dumps({"event": event, **fields}, ensure_ascii=False), file=sys.stderr)


def _parse_ks(raw: str) -> list[int]:
    try:
        return [int(k) for k in raw.split(",") if k.strip()]
    except ValueError:
        raise ValidationError(f"bad k list {raw!r}; expected comma-separated integers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biasaudit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    lex = sub.add_parser("lexicon", help="validate, translate, or expand a lexicon")
    lex_sub = lex.add_subparsers(dest="lexicon_command", required=True)

    v = lex_sub.add_parser("validate", help="load a lexicon and report its composition")
    v.add_argument("--lexicon", required=True, type=Path)
    v.add_argument("--derivations", type=Path)

    t = lex_sub.add_parser("translate", help="add translated entries for the dispreferred originals")
    t.add_argument("--lexicon", required=True, type=Path)
    t.add_argument("--targets", default="de,fr,it", help="comma-separated target languages")
    t.add_argument("--cache", required=True, type=Path, help="JSONL translation cache (read/write)")
    t.add_argument("--endpoint", help="HTTPS translation endpoint; omit for cache-only runs")
    t.add_argument("--out", required=True, type=Path)

    d = lex_sub.add_parser("derive", help="apply a derivations file")
    d.add_argument("--lexicon", required=True, type=Path)
    d.add_argument("--derivations", required=True, type=Path)
    d.add_argument("--out", required=True, type=Path)

    for name, help_text in (
        ("prepare", "emit budget-respecting units from a corpus"),
        ("analyze", "match descriptors and run the binomial significance tests"),
        ("evaluate", "aggregate votes and compute classification metrics"),
        ("attribution", "analyze exported word attributions"),
        ("all", "prepare + analyze (+ evaluate/attribution when inputs are given)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="run configuration JSON")
        p.add_argument("--out-dir", type=Path, help="override the configured output directory")
        p.add_argument("--units", type=Path, help="override the units file to analyze/evaluate")
        if name in ("evaluate", "all"):
            p.add_argument("--predictions", type=Path, required=(name == "evaluate"))
        if name in ("attribution", "all"):
            p.add_argument("--attributions", type=Path, required=(name == "attribution"))
            p.add_argument("--ks", default="10,20,30", help="comma-separated top-k cutoffs")
        if name == "analyze":
            p.add_argument("--pi0", type=float, help="override the dismissal null probability")

    return parser


def _run_config(args) -> "RunConfig":  # noqa: F821 - forward name for readability
    overrides = {}
    if getattr(args, "out_dir", None) is not None:
        overrides["out_dir"] = str(args.out_dir)
    config = load_run_config(args.config, overrides)
    pi0 = getattr(args, "pi0", None)
    if pi0 is not None:
        from dataclasses import replace

        from .bst import TestConfig

        config = replace(
            config,
            test=TestConfig(
                pi0_dismissal=pi0,
                pi0_approval=config.test.pi0_approval,
                alpha=config.test.alpha,
                min_count=config.test.min_count,
                count_mode=config.test.count_mode,
            ),
        )
    return config


def _dispatch(args) -> int:
    if args.command == "lexicon":
        if args.lexicon_command == "validate":
            lexicon = load_lexicon(args.lexicon)
            if args.derivations is not None:
                lexicon = add_derived_forms(lexicon, load_derivations(args.derivations))
            by_provenance: dict[str, int] = {}
            for d in lexicon:
                by_provenance[d.provenance] = by_provenance.get(d.provenance, 0) + 1
            emit(
                "lexicon_valid",
                entries=len(lexicon),
                version=lexicon.version,
                provenance=by_provenance,
                original_dispreferred=len(lexicon.originals("dispreferred")),
            )
            return 0
        if args.lexicon_command == "translate":
            lexicon = load_lexicon(args.lexicon)
            provider = HttpTranslationProvider(args.endpoint) if args.endpoint else None
            cache = TranslationCache(args.cache)
            translated = translate_lexicon(
                lexicon, targets=args.targets.split(","), provider=provider, cache=cache
            )
            save_lexicon(translated, args.out)
            emit("lexicon_translated", added=len(translated) - len(lexicon), out=str(args.out))
            return 0
        if args.lexicon_command == "derive":
            lexicon = load_lexicon(args.lexicon)
            expanded = add_derived_forms(lexicon, load_derivations(args.derivations))
            save_lexicon(expanded, args.out)
            emit("lexicon_derived", added=len(expanded) - len(lexicon), out=str(args.out))
            return 0
        raise ValidationError(f"unknown lexicon command {args.lexicon_command!r}")

    config = _run_config(args)
    if args.command == "prepare":
        out = cmd_prepare(config)
        emit("prepared", **{k: str(v) for k, v in out.items()})
        return 0
    if args.command == "analyze":
        out = cmd_analyze(config, units_path=args.units)
        emit("analyzed", **{k: str(v) for k, v in out.items()})
        return 0
    if args.command == "evaluate":
        out = cmd_evaluate(config, predictions_path=args.predictions, units_path=args.units)
        emit("evaluated", **{k: str(v) for k, v in out.items()})
        return 0
    if args.command == "attribution":
        out = cmd_attribution(config, attributions_path=args.attributions, ks=_parse_ks(args.ks))
        emit("attribution_done", **{k: str(v) for k, v in out.items()})
        return 0
    if args.command == "all":
        out = cmd_prepare(config)
        emit("prepared", **{k: str(v) for k, v in out.items()})
        out = cmd_analyze(config, units_path=args.units)
        emit("analyzed", **{k: str(v) for k, v in out.items()})
        if getattr(args, "predictions", None) is not None:
            out = cmd_evaluate(config, predictions_path=args.predictions, units_path=args.units)
            emit("evaluated", **{k: str(v) for k, v in out.items()})
        if getattr(args, "attributions", None) is not None:
            out = cmd_attribution(
                config, attributions_path=args.attributions, ks=_parse_ks(args.ks)
            )
            emit("attribution_done", **{k: str(v) for k, v in out.items()})
        return 0
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except MissingInputError as exc:
        emit("missing_input", error=str(exc))
        return 2
    except FileNotFoundError as exc:
        emit("missing_input", error=str(exc))
        return 2
    except BiasAuditError as exc:
        emit("validation_failure", error=str(exc), kind=type(exc).__name__)
        return 1


if __name__ == "__main__":
    sys.exit(main())
