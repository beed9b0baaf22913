"""Turning marked sentences and parallel pairs into model-ready id arrays.

The encoder input is the joined "template ||| tokens" line for the source
side; the decoder target is the same joint line for the target side. Lexical
markers ride on the token positions, syntactic (rule) markers on template
positions and on the tokens inside each rule's subtree span.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import SEP, DependencyTree, ParallelPair, Vocabulary
from .markers import MarkedSentence, Marker, mark_training_pair
from .model import lexical_rows, syntactic_rows
from .syntax import (
    ROOT_LABEL,
    SyntaxRule,
    Template,
    extract_rules,
    extract_template,
    rules_for_tree,
)


@dataclass(frozen=True)
class EncodedSource:
    ids: np.ndarray  # (S,)
    lex_rows: np.ndarray  # (S,)
    syn_rows: np.ndarray | None  # (S,)
    surfaces: tuple[str, ...]
    token_offset: int  # first position after the separator


@dataclass(frozen=True)
class EncodedInstance:
    source: EncodedSource
    dec_in_ids: np.ndarray  # (T,) BOS-prefixed
    target_vocab_ids: np.ndarray  # (T,) -1 for out-of-vocabulary targets
    target_match: np.ndarray  # (T, S) source positions sharing the target surface
    target_surfaces: tuple[str, ...]


def _unit_rule(template: Template, unit_index: int) -> SyntaxRule:
    unit = template.units[unit_index]
    return SyntaxRule(parent=unit.label, children=tuple(sorted(c for c, _ in unit.children)))


def project_rule_markers(parse: DependencyTree,
                         rule_markers: dict[SyntaxRule, Marker]) -> list[Marker]:
    """Per-token syntactic markers: REPLACE across each replace-rule's subtree."""
    out = [Marker.KEEP] * len(parse.nodes)
    template = extract_template(parse)
    root_rule = SyntaxRule(parent=ROOT_LABEL,
                           children=tuple(sorted(u.label for u in template.units)))
    if rule_markers.get(root_rule) is Marker.REPLACE:
        out[parse.root.index - 1] = Marker.REPLACE
    for child in parse.children(parse.root.index):
        grandchildren = tuple(sorted(c.label.upper() for c in parse.children(child.index)))
        rule = SyntaxRule(parent=child.label.upper(), children=grandchildren)
        if rule_markers.get(rule) is Marker.REPLACE:
            for idx in parse.subtree_indices(child.index):
                out[idx - 1] = Marker.REPLACE
    return out


def template_rule_markers(template: Template,
                          rule_markers: dict[SyntaxRule, Marker]) -> list[Marker]:
    """Markers for the rendered (labeled) template tokens, one per token."""
    _, owners = template.tokens_with_units(labeled=True)
    return [rule_markers.get(_unit_rule(template, ui), Marker.KEEP) for ui in owners]


def encode_marked_source(marked: MarkedSentence, vocab: Vocabulary,
                         parse: DependencyTree | None = None,
                         use_syntax: bool = True) -> EncodedSource:
    template = marked.template
    template_tokens = template.tokens(labeled=True) if template is not None else []
    surfaces = tuple(template_tokens) + (SEP,) + marked.sentence.surfaces
    ids = np.asarray([vocab.lookup(s) for s in surfaces], dtype=np.int64)

    lex = [Marker.INDIFFERENT] * (len(template_tokens) + 1) + list(marked.lexical_markers)
    syn_rows_arr = None
    if use_syntax and template is not None and marked.rule_markers:
        syn = template_rule_markers(template, dict(marked.rule_markers))
        syn.append(Marker.INDIFFERENT)  # separator
        if parse is not None:
            syn.extend(project_rule_markers(parse, dict(marked.rule_markers)))
        else:
            syn.extend([Marker.INDIFFERENT] * len(marked.sentence))
        syn_rows_arr = syntactic_rows(syn)
    return EncodedSource(
        ids=ids,
        lex_rows=lexical_rows(lex),
        syn_rows=syn_rows_arr,
        surfaces=surfaces,
        token_offset=len(template_tokens) + 1,
    )


def build_training_instance(pair: ParallelPair, vocab: Vocabulary,
                            indifferent_fraction: float = 0.5, seed: int = 0,
                            use_syntax: bool = True) -> EncodedInstance:
    marked = mark_training_pair(pair, indifferent_fraction, seed)
    source = encode_marked_source(marked, vocab, parse=pair.source_parse,
                                  use_syntax=use_syntax)

    target_template_tokens: list[str] = []
    if pair.target_parse is not None:
        target_template_tokens = extract_template(pair.target_parse).tokens(labeled=True)
    target_surfaces = tuple(target_template_tokens) + (SEP,) + pair.target.surfaces

    target_ids = [vocab.lookup(s) for s in target_surfaces]
    dec_in = np.asarray([vocab.bos_id] + target_ids, dtype=np.int64)
    fold_ids = [vocab.id_of[s] if s in vocab.id_of else -1 for s in target_surfaces]
    fold_ids.append(vocab.eos_id)
    all_targets = list(target_surfaces) + ["<eos>"]
    match = np.zeros((len(all_targets), len(source.surfaces)))
    for t, surface in enumerate(all_targets):
        for s, src_surface in enumerate(source.surfaces):
            if surface == src_surface:
                match[t, s] = 1.0
    return EncodedInstance(
        source=source,
        dec_in_ids=dec_in,
        target_vocab_ids=np.asarray(fold_ids, dtype=np.int64),
        target_match=match,
        target_surfaces=tuple(all_targets),
    )


def source_rules_of(marked: MarkedSentence,
                    parse: DependencyTree | None = None) -> frozenset[SyntaxRule]:
    """Rules describing the source syntax, from the parse or the carried template."""
    if parse is not None:
        return rules_for_tree(parse)
    if marked.template is not None:
        return extract_rules(marked.template)
    return frozenset()
