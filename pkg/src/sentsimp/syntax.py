"""Dependency-parse linearization, depth-2 templates, and parent/children rules.

Linearizations keep surface order and head words; templates drop head words,
abbreviate anything below level 2 with a d<k> maximum-depth token, and sort
siblings alphabetically so that rules extracted from them are canonical.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import DependencyTree, ParallelPair, Sentence, TreeNode

logger = logging.getLogger(__name__)

SEPARATOR = "|||"
ROOT_LABEL = "ROOT"


class TemplateFormatError(ValueError):
    """A template string cannot be parsed back into units."""


@dataclass(frozen=True, slots=True)
class LinearizedParse:
    text: str


@dataclass(frozen=True, slots=True)
class TemplateUnit:
    label: str  # uppercase dependency label
    children: tuple[tuple[str, int], ...]  # (uppercase label, max depth below)


@dataclass(frozen=True, slots=True)
class Template:
    units: tuple[TemplateUnit, ...]

    def tokens_with_units(self, labeled: bool = False) -> tuple[list[str], list[int]]:
        """Token stream plus, per token, the index of the unit it belongs to.

        ``labeled`` closes non-empty units with "LABEL)" (model input/output
        convention); the plain form closes every bracket with ")".
        """
        toks: list[str] = []
        owner: list[int] = []
        for ui, unit in enumerate(self.units):
            start = len(toks)
            toks.append(f"{unit.label}(")
            for child, depth in unit.children:
                toks.extend([f"{child}(", f"d{depth}", ")"])
            if unit.children and labeled:
                toks.append(f"{unit.label})")
            else:
                toks.append(")")
            owner.extend([ui] * (len(toks) - start))
        return toks, owner

    def render(self, labeled: bool = False) -> str:
        """Space-joined token string; ``labeled`` closes non-empty units with "LABEL)"."""
        return " ".join(self.tokens_with_units(labeled=labeled)[0])

    def tokens(self, labeled: bool = True) -> list[str]:
        return self.tokens_with_units(labeled=labeled)[0]

    def __len__(self) -> int:
        return len(self.units)


@dataclass(frozen=True, slots=True, order=True)
class SyntaxRule:
    parent: str  # uppercase label or ROOT
    children: tuple[str, ...]  # uppercase labels, sorted, multiplicity kept

    def render(self, uppercase: bool = True) -> str:
        if uppercase:
            return f"{self.parent}({', '.join(self.children)})"
        return f"{self.parent.capitalize()}({', '.join(c.lower() for c in self.children)})"

    @classmethod
    def parse(cls, text: str) -> "SyntaxRule":
        head, _, rest = text.strip().partition("(")
        if not rest.endswith(")"):
            raise TemplateFormatError(f"bad rule: {text!r}")
        body = rest[:-1].strip()
        children = tuple(sorted(c.strip().upper() for c in body.split(",") if c.strip()))
        return cls(parent=head.strip().upper(), children=children)


@dataclass(frozen=True, slots=True)
class SynchronousRule:
    complex_side: SyntaxRule
    simple_side: SyntaxRule

    def __post_init__(self) -> None:
        if self.complex_side.parent != self.simple_side.parent:
            raise ValueError("synchronous rule sides must share a parent label")


@dataclass(frozen=True, slots=True)
class RuleComplexityEntry:
    rule: SyntaxRule
    ratio: float


def _subtree_depth(tree: DependencyTree, index: int) -> int:
    """Edge count of the longest chain below ``index``."""
    kids = tree.children(index)
    if not kids:
        return 0
    return 1 + max(_subtree_depth(tree, k.index) for k in kids)


def _render_node(tree: DependencyTree, node: TreeNode, label: str) -> str:
    parts = [f"{label.upper()}(", node.surface]
    for child in tree.children(node.index):
        parts.append(_render_node(tree, child, child.label))
    parts.append(")")
    return " ".join(parts)


def linearize_parse(tree: DependencyTree) -> LinearizedParse:
    """Render head-first, with each head's dependents following in surface order."""
    return LinearizedParse(_render_node(tree, tree.root, ROOT_LABEL))


def extract_template(tree_or_linear: DependencyTree | LinearizedParse) -> Template:
    """Depth-2 template: level-1/level-2 labels with d<k> subtree-depth tokens."""
    if isinstance(tree_or_linear, LinearizedParse):
        tree = parse_linearized(tree_or_linear)
    else:
        tree = tree_or_linear
    units = []
    for level1 in tree.children(tree.root.index):
        children = tuple(
            sorted((c.label.upper(), _subtree_depth(tree, c.index)) for c in tree.children(level1.index))
        )
        units.append(TemplateUnit(label=level1.label.upper(), children=children))
    units.sort(key=lambda u: (u.label, u.children))
    return Template(units=tuple(units))


def parse_linearized(linear: LinearizedParse) -> DependencyTree:
    """Rebuild a tree (labels and head words only) from a linearization."""
    tokens = linear.text.split()
    nodes: list[TreeNode] = []
    pos = 0
    counter = [0]

    def parse_unit(head_index: int) -> None:
        nonlocal pos
        opener = tokens[pos]
        if not opener.endswith("("):
            raise TemplateFormatError(f"expected LABEL( at token {pos}: {opener!r}")
        label = opener[:-1]
        pos += 1
        if pos >= len(tokens) or tokens[pos].endswith(("(", ")")):
            raise TemplateFormatError(f"missing head word for {label} at token {pos}")
        counter[0] += 1
        my_index = counter[0]
        nodes.append(TreeNode(index=my_index, surface=tokens[pos], head=head_index,
                              label=label.lower()))
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            parse_unit(my_index)
        if pos >= len(tokens):
            raise TemplateFormatError("unbalanced brackets")
        pos += 1  # consume ')'

    parse_unit(0)
    if pos != len(tokens):
        raise TemplateFormatError(f"trailing tokens after position {pos}")
    return DependencyTree(tuple(nodes))


def _is_depth_token(token: str) -> bool:
    return len(token) > 1 and token[0] == "d" and token[1:].isdigit()


def parse_template(text_or_tokens: str | Sequence[str]) -> Template:
    """Strict inverse of :meth:`Template.render`.

    Accepts labeled or plain unit closes, and a bare d<k> token standing in
    for a unit's whole (abbreviated) content, which contributes no children.
    """
    tokens = text_or_tokens.split() if isinstance(text_or_tokens, str) else list(text_or_tokens)
    units: list[TemplateUnit] = []
    pos = 0
    while pos < len(tokens):
        opener = tokens[pos]
        if not opener.endswith("(") or len(opener) < 2:
            raise TemplateFormatError(f"expected LABEL( at token {pos}: {opener!r}")
        label = opener[:-1]
        pos += 1
        children: list[tuple[str, int]] = []
        if pos < len(tokens) and _is_depth_token(tokens[pos]):
            pos += 1  # abbreviated unit content
        else:
            while pos < len(tokens) and tokens[pos] not in (")", f"{label})"):
                child_open = tokens[pos]
                if not child_open.endswith("(") or len(child_open) < 2:
                    raise TemplateFormatError(
                        f"expected child LABEL( at token {pos}: {child_open!r}")
                child_label = child_open[:-1]
                if pos + 2 >= len(tokens):
                    raise TemplateFormatError("truncated template unit")
                depth_token = tokens[pos + 1]
                if not _is_depth_token(depth_token):
                    raise TemplateFormatError(f"expected d<k> token, got {depth_token!r}")
                if tokens[pos + 2] != ")":
                    raise TemplateFormatError(
                        f"expected ) after depth token, got {tokens[pos + 2]!r}")
                children.append((child_label, int(depth_token[1:])))
                pos += 3
        if pos >= len(tokens) or tokens[pos] not in (")", f"{label})"):
            raise TemplateFormatError("unbalanced brackets")
        pos += 1  # consume the unit close
        units.append(TemplateUnit(label=label, children=tuple(sorted(children))))
    units.sort(key=lambda u: (u.label, u.children))
    return Template(units=tuple(units))


def extract_rules(template: Template) -> frozenset[SyntaxRule]:
    """One ROOT rule over level-1 labels plus one rule per level-1 unit."""
    rules = {SyntaxRule(parent=ROOT_LABEL,
                        children=tuple(sorted(u.label for u in template.units)))}
    for unit in template.units:
        rules.add(SyntaxRule(parent=unit.label,
                             children=tuple(sorted(c for c, _ in unit.children))))
    return frozenset(rules)


def rules_for_tree(tree: DependencyTree) -> frozenset[SyntaxRule]:
    return extract_rules(extract_template(tree))


def extract_synchronous_rules(pairs: Iterable[ParallelPair]) -> Counter:
    """Count complex-rule -> simple-rule rewrites over parsed pairs.

    Rules are aligned by parent label; identical rules on both sides are
    skipped. Pairs missing a parse are skipped (with a warning tally).
    """
    counts: Counter[SynchronousRule] = Counter()
    skipped = 0
    for pair in pairs:
        if pair.source_parse is None or pair.target_parse is None:
            skipped += 1
            continue
        complex_rules = rules_for_tree(pair.source_parse)
        simple_rules = rules_for_tree(pair.target_parse)
        for crule in complex_rules:
            for srule in simple_rules:
                if crule.parent == srule.parent and crule != srule:
                    counts[SynchronousRule(complex_side=crule, simple_side=srule)] += 1
    if skipped:
        logger.warning("extract_synchronous_rules: skipped %d pairs without parses", skipped)
    return counts


def rank_rules_by_complexity(pairs: Sequence[ParallelPair],
                             top_fraction: float = 1.0,
                             smoothing: float = 1.0) -> list[RuleComplexityEntry]:
    """Rules whose add-k smoothed P(rule|complex)/P(rule|simple) exceeds 1.

    Sorted by descending ratio (ties by rendered rule); the leading
    ``top_fraction`` of qualifying rules is returned.
    """
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction must be in (0, 1]")
    complex_counts: Counter[SyntaxRule] = Counter()
    simple_counts: Counter[SyntaxRule] = Counter()
    for pair in pairs:
        if pair.source_parse is not None:
            complex_counts.update(rules_for_tree(pair.source_parse))
        if pair.target_parse is not None:
            simple_counts.update(rules_for_tree(pair.target_parse))
    inventory = set(complex_counts) | set(simple_counts)
    if not inventory:
        raise ValueError("no rules found in corpus")
    total_complex = sum(complex_counts.values())
    total_simple = sum(simple_counts.values())
    k = smoothing
    v = len(inventory)
    entries = []
    for rule in inventory:
        p_complex = (complex_counts[rule] + k) / (total_complex + k * v)
        p_simple = (simple_counts[rule] + k) / (total_simple + k * v)
        ratio = p_complex / p_simple
        if ratio > 1.0:
            entries.append(RuleComplexityEntry(rule=rule, ratio=ratio))
    entries.sort(key=lambda e: (-e.ratio, e.rule.render()))
    keep = max(1, math.floor(top_fraction * len(entries))) if entries else 0
    return entries[:keep]


def join_template_and_tokens(template: Template, sentence: Sentence) -> str:
    """Labeled template text, the "|||" separator, then the tokens."""
    rendered = template.render(labeled=True)
    if rendered:
        return f"{rendered} {SEPARATOR} {sentence.text()}"
    return f"{SEPARATOR} {sentence.text()}"


def split_generated(line: str) -> tuple[str, list[str]]:
    """Inverse of :func:`join_template_and_tokens`; splits on the first separator."""
    tokens = line.split()
    if SEPARATOR not in tokens:
        raise TemplateFormatError(f"no {SEPARATOR!r} separator in line: {line!r}")
    at = tokens.index(SEPARATOR)
    return " ".join(tokens[:at]), tokens[at + 1:]


def save_rules(entries: Iterable[RuleComplexityEntry], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry.rule.render(uppercase=False) + "\n")


def load_rules(path) -> list[SyntaxRule]:
    out = []
    for line in open(path, encoding="utf-8"):
        line = line.strip()
        if line:
            out.append(SyntaxRule.parse(line))
    return out


def save_synchronous(counts: Counter, path) -> None:
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].complex_side.render()))
    with open(path, "w", encoding="utf-8") as fh:
        for rule, _ in ordered:
            fh.write(f"{rule.complex_side.render(uppercase=False)}\t"
                     f"{rule.simple_side.render(uppercase=False)}\n")


def load_synchronous(path) -> list[SynchronousRule]:
    out = []
    for line in open(path, encoding="utf-8"):
        line = line.strip()
        if not line:
            continue
        left, _, right = line.partition("\t")
        out.append(SynchronousRule(SyntaxRule.parse(left), SyntaxRule.parse(right)))
    return out
