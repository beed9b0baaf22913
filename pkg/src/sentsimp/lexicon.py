"""Word-complexity scoring, complex-word lists, and simplification dictionaries.

Complexity is the add-k smoothed ratio of a word's probability in the complex
corpus side to its probability in the simple side; words scoring above 1 are
candidates for the complex list. The dictionary combines a small bundled
manual fixture with entries induced from word alignments trained here with
IBM model 1 (expectation maximization, NULL source token included).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import ParallelPair
from .stemming import stem

NULL_SOURCE = ""  # inserted as the empty-string source word inside the aligner


@dataclass(frozen=True, slots=True)
class ComplexityScore:
    word: str
    ratio: float
    stem: str = field(default="")

    def __post_init__(self) -> None:
        if not self.stem:
            object.__setattr__(self, "stem", stem(self.word))


@dataclass(frozen=True)
class ComplexWordList:
    entries: tuple[ComplexityScore, ...]

    def __post_init__(self) -> None:
        ratios = [e.ratio for e in self.entries]
        if any(r <= 1.0 for r in ratios):
            raise ValueError("complex-list entries must have ratio > 1")
        if any(a < b for a, b in zip(ratios, ratios[1:])):
            raise ValueError("complex-list ratios must be non-increasing")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def words(self) -> list[str]:
        return [e.word for e in self.entries]

    def top(self, n: int) -> "ComplexWordList":
        return ComplexWordList(self.entries[: max(0, n)])

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(entry.word + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ComplexWordList":
        """Load a word-per-line list; ranks map onto placeholder ratios."""
        words = [w.strip() for w in Path(path).read_text(encoding="utf-8").splitlines() if w.strip()]
        n = len(words)
        return cls(tuple(ComplexityScore(w, float(n - i + 1)) for i, w in enumerate(words)))


@dataclass(frozen=True)
class SimplificationDictionary:
    entries: Mapping[str, tuple[tuple[str, float], ...]]

    def __post_init__(self) -> None:
        for source, targets in self.entries.items():
            for target, weight in targets:
                if target == source:
                    raise ValueError(f"identity entry {source!r}")
                if not 0.0 < weight <= 1.0:
                    raise ValueError(f"weight out of (0, 1] for {source!r} -> {target!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def targets(self, word: str) -> list[str]:
        return [t for t, _ in self.entries.get(word, ())]

    def complex_words(self) -> list[str]:
        return list(self.entries)

    def all_targets(self) -> set[str]:
        return {t for targets in self.entries.values() for t, _ in targets}

    def complex_stems(self) -> set[str]:
        return {stem(w) for w in self.entries}

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for source in sorted(self.entries):
                targets = ",".join(t for t, _ in self.entries[source])
                fh.write(f"{source}\t{targets}\n")

    @classmethod
    def load(cls, path: str | Path) -> "SimplificationDictionary":
        entries: dict[str, tuple[tuple[str, float], ...]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            source, _, targets = line.partition("\t")
            entries[source] = tuple((t, 1.0) for t in targets.split(",") if t)
        return cls(entries)

    @classmethod
    def empty(cls) -> "SimplificationDictionary":
        return cls({})


def load_manual_dictionary() -> SimplificationDictionary:
    """Small bundled stand-in for a hand-curated simplification dictionary."""
    ref = resources.files("sentsimp.data").joinpath("manual_dictionary.tsv")
    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        source, _, targets = line.partition("\t")
        entries[source] = tuple((t, 1.0) for t in targets.split(",") if t)
    return SimplificationDictionary(entries)


class TranslationTable:
    """Dense t(simple | complex) table; rows sum to one."""

    def __init__(self, table: np.ndarray, complex_words: Sequence[str],
                 simple_words: Sequence[str]):
        self._table = table
        self._complex_index = {w: i for i, w in enumerate(complex_words)}
        self._simple_index = {w: i for i, w in enumerate(simple_words)}
        self.complex_words = list(complex_words)
        self.simple_words = list(simple_words)

    def prob(self, simple_word: str, complex_word: str) -> float:
        ci = self._complex_index.get(complex_word)
        si = self._simple_index.get(simple_word)
        if ci is None or si is None:
            return 0.0
        return float(self._table[ci, si])

    def row(self, complex_word: str) -> list[tuple[str, float]]:
        ci = self._complex_index.get(complex_word)
        if ci is None:
            return []
        row = self._table[ci]
        order = np.argsort(-row)
        return [(self.simple_words[j], float(row[j])) for j in order if row[j] > 0.0]

    def row_sums(self) -> np.ndarray:
        return self._table.sum(axis=1)


def _count_words(pairs: Sequence[ParallelPair]) -> tuple[Counter, Counter]:
    complex_counts: Counter[str] = Counter()
    simple_counts: Counter[str] = Counter()
    for pair in pairs:
        complex_counts.update(t.surface for t in pair.source.tokens)
        simple_counts.update(t.surface for t in pair.target.tokens)
    return complex_counts, simple_counts


def word_complexity(word: str, complex_counts: Mapping[str, int],
                    simple_counts: Mapping[str, int], smoothing: float = 1.0) -> float:
    """Smoothed P(word | complex) / P(word | simple) over the union vocabulary."""
    if smoothing <= 0:
        raise ValueError("smoothing constant must be positive")
    vocab = set(complex_counts) | set(simple_counts)
    v = len(vocab)
    total_complex = sum(complex_counts.values())
    total_simple = sum(simple_counts.values())
    p_complex = (complex_counts.get(word, 0) + smoothing) / (total_complex + smoothing * v)
    p_simple = (simple_counts.get(word, 0) + smoothing) / (total_simple + smoothing * v)
    return p_complex / p_simple


def build_complex_list(pairs: Sequence[ParallelPair], n: int,
                       smoothing: float = 1.0) -> ComplexWordList:
    """The ``n`` highest-ratio words with ratio > 1, ties broken lexicographically."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not pairs:
        raise ValueError("empty corpus")
    complex_counts, simple_counts = _count_words(pairs)
    vocab = set(complex_counts) | set(simple_counts)
    scored = []
    for word in vocab:
        ratio = word_complexity(word, complex_counts, simple_counts, smoothing)
        if ratio > 1.0:
            scored.append(ComplexityScore(word, ratio))
    scored.sort(key=lambda e: (-e.ratio, e.word))
    return ComplexWordList(tuple(scored[:n]))


def train_ibm1(pairs: Sequence[ParallelPair], iterations: int = 5) -> TranslationTable:
    """IBM model 1 EM from uniform initialization, complex side as source."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not pairs:
        raise ValueError("empty corpus")
    complex_vocab = [NULL_SOURCE]
    complex_index = {NULL_SOURCE: 0}
    simple_vocab: list[str] = []
    simple_index: dict[str, int] = {}
    src_ids, tgt_ids = [], []
    src_off, tgt_off = [0], [0]
    for pair in pairs:
        for token in pair.source.tokens:
            if token.surface not in complex_index:
                complex_index[token.surface] = len(complex_vocab)
                complex_vocab.append(token.surface)
            src_ids.append(complex_index[token.surface])
        src_ids.append(0)  # NULL alignment target for every sentence
        src_off.append(len(src_ids))
        for token in pair.target.tokens:
            if token.surface not in simple_index:
                simple_index[token.surface] = len(simple_vocab)
                simple_vocab.append(token.surface)
            tgt_ids.append(simple_index[token.surface])
        tgt_off.append(len(tgt_ids))

    table = np.full((len(complex_vocab), len(simple_vocab)),
                    1.0 / len(simple_vocab), dtype=np.float64)
    src_flat = np.asarray(src_ids, dtype=np.int64)
    tgt_flat = np.asarray(tgt_ids, dtype=np.int64)
    src_offsets = np.asarray(src_off, dtype=np.int64)
    tgt_offsets = np.asarray(tgt_off, dtype=np.int64)
    for _ in range(iterations):
        counts, totals = kernels.ibm1_accumulate(table, src_flat, src_offsets,
                                                 tgt_flat, tgt_offsets)
        nonzero = totals > 0
        table[nonzero] = counts[nonzero] / totals[nonzero, None]
    return TranslationTable(table, complex_vocab, simple_vocab)


def ibm1_log_likelihood(table: TranslationTable, pairs: Sequence[ParallelPair]) -> float:
    """Corpus log-likelihood under the model (length factors included)."""
    total = 0.0
    for pair in pairs:
        sources = [NULL_SOURCE] + list(pair.source.surfaces)
        for target in pair.target.surfaces:
            mass = sum(table.prob(target, s) for s in sources)
            total += np.log(mass / len(sources)) if mass > 0 else -np.inf
    return float(total)


def build_dictionary(table: TranslationTable, complex_list: ComplexWordList,
                     manual: SimplificationDictionary | None = None,
                     prob_threshold: float = 0.5) -> SimplificationDictionary:
    """Alignment-induced entries for complex-list words, manual entries on top.

    A target qualifies when t(target | complex) clears the threshold and the
    two words differ in both surface and stem form.
    """
    if not 0.0 < prob_threshold <= 1.0:
        raise ValueError("prob_threshold must be in (0, 1]")
    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    for score in complex_list:
        word = score.word
        targets = [
            (target, prob)
            for target, prob in table.row(word)
            if prob >= prob_threshold and target != word and stem(target) != stem(word)
        ]
        if targets:
            entries[word] = tuple(targets)
    if manual is not None:
        entries.update(manual.entries)
    return SimplificationDictionary(entries)
