"""Keep/replace/indifferent markers for tokens and rules, and constraint sets.

Marking precedence at test time: explicit user override, then function-word
indifference, then the ban inventory, then the mode default.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import ParallelPair, Sentence
from .lexicon import ComplexWordList, SimplificationDictionary
from .stemming import stem
from .syntax import (
    RuleComplexityEntry,
    SynchronousRule,
    SyntaxRule,
    Template,
    extract_template,
    rules_for_tree,
)


class Marker(enum.Enum):
    REPLACE = "REPLACE"
    KEEP = "KEEP"
    INDIFFERENT = "INDIFFERENT"


class Level(enum.Enum):
    SIMPLE = "SIMPLE"
    XSIMPLE = "XSIMPLE"


class Profile(enum.Enum):
    WIKILARGE = "WIKILARGE"
    NEWSELA = "NEWSELA"


class MarkingMode(enum.Enum):
    KEEP_SIMPLE = "KEEP_SIMPLE"  # unconstrained tokens default to KEEP
    INDIFFERENT_SIMPLE = "INDIFFERENT_SIMPLE"  # unconstrained tokens stay unmarked


#: Default token marking mode per corpus profile.
PROFILE_MODES = {
    Profile.WIKILARGE: MarkingMode.KEEP_SIMPLE,
    Profile.NEWSELA: MarkingMode.INDIFFERENT_SIMPLE,
}

#: (complex-word budget, fraction of ranked complex rules) per profile and level.
DEFAULT_BUDGETS: dict[tuple[Profile, Level], tuple[int, float]] = {
    (Profile.WIKILARGE, Level.SIMPLE): (12_000, 0.13),
    (Profile.WIKILARGE, Level.XSIMPLE): (18_000, 0.25),
    (Profile.NEWSELA, Level.SIMPLE): (7_000, 0.29),
    (Profile.NEWSELA, Level.XSIMPLE): (12_000, 0.40),
}


@dataclass(frozen=True)
class MarkedSentence:
    sentence: Sentence
    lexical_markers: tuple[Marker, ...]
    rule_markers: Mapping[SyntaxRule, Marker] = field(default_factory=dict)
    template: Template | None = None

    def __post_init__(self) -> None:
        if len(self.lexical_markers) != len(self.sentence):
            raise ValueError("one lexical marker per token required")

    def to_text(self) -> str:
        return " ".join(
            f"{token.surface}/{marker.value}"
            for token, marker in zip(self.sentence.tokens, self.lexical_markers)
        )

    @classmethod
    def from_text(cls, text: str) -> "MarkedSentence":
        surfaces, markers = [], []
        for chunk in text.split():
            surface, _, name = chunk.rpartition("/")
            if not surface:
                raise ValueError(f"missing marker in {chunk!r}")
            surfaces.append(surface)
            markers.append(Marker(name))
        return cls(Sentence.from_surfaces(surfaces), tuple(markers))


@dataclass(frozen=True)
class ConstraintSet:
    banned_words: frozenset[str]
    substitutions: SimplificationDictionary
    banned_rules: frozenset[SyntaxRule]
    synchronous: tuple[SynchronousRule, ...] = ()
    level: Level = Level.SIMPLE

    def __post_init__(self) -> None:
        overlap = self.banned_words & self.substitutions.all_targets()
        if overlap:
            raise ValueError(f"banned words overlap substitution targets: {sorted(overlap)[:5]}")

    def banned_stems(self) -> frozenset[str]:
        """Stems that must never appear in output: ban list plus dictionary sources."""
        return frozenset(stem(w) for w in self.banned_words) | frozenset(
            self.substitutions.complex_stems()
        )

    def is_empty(self) -> bool:
        return not (self.banned_words or len(self.substitutions) or self.banned_rules)

    def to_json(self) -> str:
        payload = {
            "banned_words": sorted(self.banned_words),
            "substitutions": {w: self.substitutions.targets(w)
                              for w in sorted(self.substitutions.complex_words())},
            "banned_rules": sorted(r.render(uppercase=False) for r in self.banned_rules),
            "synchronous_rules": [
                [r.complex_side.render(uppercase=False), r.simple_side.render(uppercase=False)]
                for r in self.synchronous
            ],
            "level": self.level.value,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConstraintSet":
        payload = json.loads(text)
        subs = SimplificationDictionary(
            {w: tuple((t, 1.0) for t in targets)
             for w, targets in payload.get("substitutions", {}).items()}
        )
        return cls(
            banned_words=frozenset(payload.get("banned_words", [])),
            substitutions=subs,
            banned_rules=frozenset(SyntaxRule.parse(r) for r in payload.get("banned_rules", [])),
            synchronous=tuple(
                SynchronousRule(SyntaxRule.parse(a), SyntaxRule.parse(b))
                for a, b in payload.get("synchronous_rules", [])
            ),
            level=Level(payload.get("level", "SIMPLE")),
        )

    @classmethod
    def empty(cls, level: Level = Level.SIMPLE) -> "ConstraintSet":
        return cls(frozenset(), SimplificationDictionary.empty(), frozenset(), (), level)


def mark_training_pair(pair: ParallelPair, indifferent_fraction: float = 0.5,
                       seed: int = 0) -> MarkedSentence:
    """Training-time markers: stem-match against the target, then random noise.

    A source token is KEEP when its stem occurs among target stems, REPLACE
    otherwise; exactly floor(fraction * length) tokens are then reassigned
    INDIFFERENT, chosen uniformly by the seed. Rules from the source parse are
    KEEP when also present in the target parse's rule set.
    """
    if not 0.0 <= indifferent_fraction <= 1.0:
        raise ValueError("indifferent_fraction must be in [0, 1]")
    target_stems = set(pair.target.stems)
    markers = [
        Marker.KEEP if token.stem in target_stems else Marker.REPLACE
        for token in pair.source.tokens
    ]
    n_indifferent = int(indifferent_fraction * len(markers))
    if n_indifferent:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(markers), size=n_indifferent, replace=False)
        for idx in chosen:
            markers[idx] = Marker.INDIFFERENT

    rule_markers: dict[SyntaxRule, Marker] = {}
    template = None
    if pair.source_parse is not None:
        template = extract_template(pair.source_parse)
        source_rules = rules_for_tree(pair.source_parse)
        target_rules = (
            rules_for_tree(pair.target_parse) if pair.target_parse is not None else frozenset()
        )
        for rule in source_rules:
            rule_markers[rule] = Marker.KEEP if rule in target_rules else Marker.REPLACE
    return MarkedSentence(pair.source, tuple(markers), rule_markers, template)


def mark_test_sentence(sentence: Sentence, constraints: ConstraintSet,
                       mode: MarkingMode,
                       function_words: frozenset[str] | None = None,
                       overrides: Sequence[Marker | None] | None = None,
                       parse=None) -> MarkedSentence:
    """Test-time markers from the constraint inventory and the mode default.

    When a dependency parse of the sentence is supplied, the source template
    is carried along and its rules are marked REPLACE when banned, KEEP
    otherwise.
    """
    banned = constraints.banned_stems()
    default = Marker.KEEP if mode is MarkingMode.KEEP_SIMPLE else Marker.INDIFFERENT
    markers = []
    for i, token in enumerate(sentence.tokens):
        if overrides is not None and i < len(overrides) and overrides[i] is not None:
            markers.append(overrides[i])
            continue
        if function_words is None:
            is_function = token.is_function_word
        else:
            is_function = token.surface.lower() in function_words
        if is_function:
            markers.append(Marker.INDIFFERENT)
        elif token.stem in banned:
            markers.append(Marker.REPLACE)
        else:
            markers.append(default)
    template = None
    rule_markers: dict[SyntaxRule, Marker] = {}
    if parse is not None:
        template = extract_template(parse)
        for rule in rules_for_tree(parse):
            rule_markers[rule] = (
                Marker.REPLACE if rule in constraints.banned_rules else Marker.KEEP
            )
    return MarkedSentence(sentence, tuple(markers), rule_markers, template)


def build_constraint_set(complex_list: ComplexWordList,
                         dictionary: SimplificationDictionary | None,
                         ranked_rules: Sequence[RuleComplexityEntry],
                         level: Level,
                         profile: Profile,
                         synchronous: Sequence[SynchronousRule] = (),
                         budgets: Mapping[tuple[Profile, Level], tuple[int, float]] | None = None,
                         ) -> ConstraintSet:
    """Assemble the user-facing constraint set for a profile and level.

    Word budgets and rule fractions come from ``budgets`` (profile defaults
    unless overridden) and are clipped to the available inventories. XSIMPLE
    budgets are strict supersets of SIMPLE ones, so the resulting sets nest.
    """
    table = dict(DEFAULT_BUDGETS)
    if budgets:
        table.update(budgets)
    word_budget, rule_fraction = table[(profile, level)]
    words = frozenset(entry.word for entry in complex_list.top(word_budget))
    dictionary = dictionary or SimplificationDictionary.empty()
    n_rules = round(rule_fraction * len(ranked_rules))
    banned_rules = frozenset(entry.rule for entry in ranked_rules[:n_rules])
    return ConstraintSet(
        banned_words=words - dictionary.all_targets(),
        substitutions=dictionary,
        banned_rules=banned_rules,
        synchronous=tuple(synchronous),
        level=level,
    )
