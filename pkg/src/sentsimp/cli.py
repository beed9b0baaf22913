"""Command-line entry points: train, simplify, evaluate, build-lexicon,
extract-templates, serve.

Exit status: 0 on success, 1 on input/validation problems, 2 on runtime
failures. A small key=value config file can override model and training
settings; ``SENTSIMP_PORT`` overrides the serve port.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .corpus import (
    CorpusFormatError,
    ParallelPair,
    Sentence,
    TreeValidationError,
    load_conllu_file,
    load_parallel_corpus,
)
from .decode import ConstraintInfeasibleError, DecodeSettings, beam_search
from .lexicon import (
    build_complex_list,
    build_dictionary,
    load_manual_dictionary,
    train_ibm1,
)
from .markers import Level, Marker, PROFILE_MODES, Profile, mark_test_sentence
from .metrics import EvalInstance, evaluate_all
from .model import ModelConfig, save_checkpoint
from .service import load_session
from .syntax import (
    extract_rules,
    extract_synchronous_rules,
    extract_template,
    rank_rules_by_complexity,
    save_rules,
    save_synchronous,
)
from .training import TrainSettings, train_model

logger = logging.getLogger(__name__)


class CliError(ValueError):
    """User-facing validation problem; exits with status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; bad usage is validation
        self.print_usage(sys.stderr)
        raise CliError(message)


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _coerce(instance, values: dict[str, str]) -> dict:
    """Pick the keys that name fields of ``instance``, typed like the defaults."""
    out = {}
    current = dataclasses.asdict(instance)
    for key, value in values.items():
        if key not in current:
            continue
        kind = type(current[key])
        if kind is bool:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        elif kind is int:
            out[key] = int(value)
        elif kind is float:
            out[key] = float(value)
        else:
            out[key] = value
    return out


def _load_pairs(args) -> list[ParallelPair]:
    pairs = load_parallel_corpus(args.complex, args.simple)

    def side_trees(path):
        if not path:
            return None
        trees = load_conllu_file(path)
        if len(trees) != len(pairs):
            raise CliError(f"{path}: {len(trees)} parses for {len(pairs)} sentence pairs")
        return trees

    source_trees = side_trees(getattr(args, "complex_conllu", None))
    target_trees = side_trees(getattr(args, "simple_conllu", None))
    if source_trees or target_trees:
        pairs = [
            ParallelPair(p.source, p.target,
                         source_trees[i] if source_trees else None,
                         target_trees[i] if target_trees else None)
            for i, p in enumerate(pairs)
        ]
    return pairs


def _cmd_train(args) -> int:
    pairs = _load_pairs(args)
    overrides = _read_config_file(args.config) if args.config else {}
    config = ModelConfig.paper() if args.profile == "paper" else ModelConfig.desk()
    config = dataclasses.replace(config, **_coerce(config, overrides))
    settings = TrainSettings(epochs=args.epochs, seed=args.seed,
                             validate_every=args.validate_every,
                             patience=args.patience)
    settings = dataclasses.replace(settings, **_coerce(settings, overrides))
    validation = pairs if args.val_complex is None else load_parallel_corpus(
        args.val_complex, args.val_simple)
    result = train_model(pairs, validation, config, settings)
    save_checkpoint(args.out, result.params, result.vocab,
                    extra={"best_epoch": result.best_epoch, "best_sari": result.best_sari})
    if args.log_json:
        result.save_log(args.log_json)
    logger.info("saved checkpoint to %s (best epoch %d, SARI %.2f)",
                args.out, result.best_epoch, result.best_sari)
    return 0


def _parse_markers_line(line: str, n_tokens: int, path: str, lineno: int):
    entries = line.split()
    if len(entries) != n_tokens:
        raise CliError(f"{path}:{lineno}: {len(entries)} markers for {n_tokens} tokens")
    out = []
    for entry in entries:
        if entry == "-":
            out.append(None)
        else:
            try:
                out.append(Marker(entry.upper()))
            except ValueError as exc:
                raise CliError(f"{path}:{lineno}: unknown marker {entry!r}") from exc
    return out


def _cmd_simplify(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise CliError(f"input file {args.input} is empty")
    session = load_session(args.checkpoint, args.complex_list, args.dictionary,
                           args.rules, args.synchronous,
                           DecodeSettings(beam_size=args.beam))
    profile = Profile(args.profile.upper())
    level = Level(args.level.upper())
    constraints = session.constraint_set(profile, level)
    marker_lines = None
    if args.markers:
        marker_lines = Path(args.markers).read_text(encoding="utf-8").splitlines()
        if len([l for l in marker_lines if l.strip()]) != len(lines):
            raise CliError(f"markers file {args.markers} does not align with input lines")
    parses = load_conllu_file(args.conllu) if args.conllu else None
    if parses is not None and len(parses) != len(lines):
        raise CliError(f"{args.conllu}: {len(parses)} parses for {len(lines)} lines")

    outputs, templates = [], []
    for i, line in enumerate(lines):
        sentence = Sentence.from_text(line)
        overrides = None
        if marker_lines is not None:
            overrides = _parse_markers_line(marker_lines[i], len(sentence),
                                            args.markers, i + 1)
        marked = mark_test_sentence(sentence, constraints, PROFILE_MODES[profile],
                                    overrides=overrides,
                                    parse=parses[i] if parses else None)
        result = beam_search(session.params, session.vocab, marked, constraints,
                             session.decode_settings,
                             parse=parses[i] if parses else None)
        outputs.append(result.sentence.text())
        templates.append(result.template_text)
    out_text = "\n".join(outputs) + "\n"
    if args.out:
        Path(args.out).write_text(out_text, encoding="utf-8")
    else:
        sys.stdout.write(out_text)
    if args.templates_out:
        Path(args.templates_out).write_text("\n".join(templates) + "\n", encoding="utf-8")
    return 0


def _read_lines(path: str) -> list[str]:
    lines = [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines:
        raise CliError(f"input file {path} is empty")
    return lines


def _cmd_evaluate(args) -> int:
    sources = _read_lines(args.source)
    outputs = _read_lines(args.output)
    ref_files = [_read_lines(p) for p in args.refs]
    if len(outputs) != len(sources) or any(len(r) != len(sources) for r in ref_files):
        raise CliError("source, output and reference files must have equal line counts")
    instances = [
        EvalInstance(sources[i], outputs[i], tuple(refs[i] for refs in ref_files))
        for i in range(len(sources))
    ]
    report = evaluate_all(instances)
    sys.stdout.write(report.to_json())
    sys.stderr.write(report.to_table() + "\n")
    if args.json:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
    return 0


def _cmd_build_lexicon(args) -> int:
    pairs = load_parallel_corpus(args.complex, args.simple)
    complex_list = build_complex_list(pairs, args.n)
    complex_list.save(args.list_out)
    table = train_ibm1(pairs, iterations=args.iterations)
    manual = None if args.no_manual else load_manual_dictionary()
    dictionary = build_dictionary(table, complex_list, manual, args.threshold)
    dictionary.save(args.dict_out)
    logger.info("wrote %d complex words and %d dictionary entries",
                len(complex_list), len(dictionary))
    return 0


def _cmd_extract_templates(args) -> int:
    trees = load_conllu_file(args.conllu)
    if not trees:
        raise CliError(f"no sentences in {args.conllu}")
    templates = [extract_template(t) for t in trees]
    if args.templates_out:
        with open(args.templates_out, "w", encoding="utf-8") as fh:
            for template in templates:
                fh.write(template.render() + "\n")
    if args.rules_out:
        seen = []
        for template in templates:
            for rule in sorted(extract_rules(template)):
                if rule not in seen:
                    seen.append(rule)
        with open(args.rules_out, "w", encoding="utf-8") as fh:
            for rule in seen:
                fh.write(rule.render(uppercase=False) + "\n")
    if args.simple_conllu:
        simple_trees = load_conllu_file(args.simple_conllu)
        if len(simple_trees) != len(trees):
            raise CliError("complex and simple CoNLL-U files must align")
        pairs = [
            ParallelPair(Sentence.from_surfaces([n.surface for n in ct.nodes]),
                         Sentence.from_surfaces([n.surface for n in st.nodes]),
                         ct, st)
            for ct, st in zip(trees, simple_trees)
        ]
        if args.synchronous_out:
            save_synchronous(extract_synchronous_rules(pairs), args.synchronous_out)
        if args.ranked_out:
            save_rules(rank_rules_by_complexity(pairs, args.fraction), args.ranked_out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    session = load_session(args.checkpoint, args.complex_list, args.dictionary,
                           args.rules, args.synchronous,
                           DecodeSettings(beam_size=args.beam))
    if args.ui and not Path(args.ui).is_dir():
        raise CliError(f"UI directory not found: {args.ui}")
    port = int(os.environ.get("SENTSIMP_PORT", args.port))
    uvicorn.run(create_app(session, ui_dir=args.ui), host=args.host, port=port,
                log_level="info")
    return 0


def _add_inventory_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--complex-list", default=None, help="complex word list file")
    p.add_argument("--dictionary", default=None, help="substitution dictionary file")
    p.add_argument("--rules", default=None, help="ranked complex rules file")
    p.add_argument("--synchronous", default=None, help="synchronous rules file")
    p.add_argument("--beam", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sentsimp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a parallel corpus")
    p.add_argument("--complex", required=True)
    p.add_argument("--simple", required=True)
    p.add_argument("--complex-conllu", default=None)
    p.add_argument("--simple-conllu", default=None)
    p.add_argument("--val-complex", default=None)
    p.add_argument("--val-simple", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--validate-every", type=int, default=5)
    p.add_argument("--profile", choices=("desk", "paper"), default="desk")
    p.add_argument("--config", default=None, help="key=value overrides file")
    p.add_argument("--log-json", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("simplify", help="simplify sentences with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="one tokenized sentence per line")
    p.add_argument("--conllu", default=None, help="parses aligned with the input")
    p.add_argument("--markers", default=None,
                   help="per-line marker overrides (KEEP/REPLACE/INDIFFERENT/-)")
    p.add_argument("--profile", choices=[p.value for p in Profile], default="NEWSELA")
    p.add_argument("--level", choices=[l.value for l in Level], default="SIMPLE")
    p.add_argument("--out", default=None)
    p.add_argument("--templates-out", default=None)
    _add_inventory_flags(p)
    p.set_defaults(func=_cmd_simplify)

    p = sub.add_parser("evaluate", help="score outputs against references")
    p.add_argument("--source", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--refs", nargs="+", required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("build-lexicon", help="induce complex list and dictionary")
    p.add_argument("--complex", required=True)
    p.add_argument("--simple", required=True)
    p.add_argument("--list-out", required=True)
    p.add_argument("--dict-out", required=True)
    p.add_argument("--n", type=int, default=12000)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-manual", action="store_true")
    p.set_defaults(func=_cmd_build_lexicon)

    p = sub.add_parser("extract-templates", help="templates and rules from CoNLL-U")
    p.add_argument("--conllu", required=True)
    p.add_argument("--templates-out", default=None)
    p.add_argument("--rules-out", default=None)
    p.add_argument("--simple-conllu", default=None)
    p.add_argument("--synchronous-out", default=None)
    p.add_argument("--ranked-out", default=None)
    p.add_argument("--fraction", type=float, default=1.0)
    p.set_defaults(func=_cmd_extract_templates)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--ui", default=None, help="serve a built frontend from this directory")
    _add_inventory_flags(p)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except (CliError, CorpusFormatError, TreeValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConstraintInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary: report and exit 2
        logger.exception("unhandled failure")
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
