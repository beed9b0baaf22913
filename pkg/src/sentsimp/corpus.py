"""Parallel corpus ingestion, CoNLL-U dependency trees, and the shared vocabulary."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .stemming import stem

# Closed-class word list used for the "function word" flag: determiners,
# prepositions, conjunctions, pronouns, auxiliaries, and a few particles.
FUNCTION_WORDS = frozenset("""
a an the this that these those some any each every either neither no
and or but nor so yet for because although though while if unless until
when whenever where wherever since as than whether
of in on at by with from to into onto upon about above below under over
between among through during before after against without within along
across behind beyond near off out up down around past toward towards
i you he she it we they me him her us them my your his its our their
mine yours hers ours theirs myself yourself himself herself itself
ourselves themselves who whom whose which what
am is are was were be been being do does did done have has had having
will would shall should can could may might must ought
not n't there here then also just only very too
""".split())

# Universal-dependency relation inventory (v2 core labels); parses may carry
# subtyped or unknown labels, which pass through untouched.
UD_LABELS = (
    "acl advcl advmod amod appos aux case cc ccomp clf compound conj cop "
    "csubj dep det discourse dislocated expl fixed flat goeswith iobj list "
    "mark nmod nsubj nummod obj obl orphan parataxis punct reparandum root "
    "vocative xcomp"
).split()

# Largest subtree-depth token injected into every vocabulary; deeper subtrees
# are astronomically rare in depth-limited templates.
MAX_DEPTH_TOKEN = 15

PAD, UNK, BOS, EOS, SEP = "<pad>", "<unk>", "<bos>", "<eos>", "|||"
RESERVED = (PAD, UNK, BOS, EOS, SEP)


class CorpusFormatError(ValueError):
    """A corpus or CoNLL-U file violates the expected layout."""


class TreeValidationError(ValueError):
    """Head links do not form a single rooted tree."""


@dataclass(frozen=True, slots=True)
class Token:
    surface: str
    stem: str
    is_function_word: bool

    def __post_init__(self) -> None:
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"bad token surface: {self.surface!r}")


def make_token(surface: str) -> Token:
    return Token(surface, stem(surface), surface.lower() in FUNCTION_WORDS)


@dataclass(frozen=True, slots=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")

    @classmethod
    def from_surfaces(cls, surfaces: Iterable[str]) -> "Sentence":
        return cls(tuple(make_token(s) for s in surfaces))

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        return cls.from_surfaces(text.split())

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def stems(self) -> tuple[str, ...]:
        return tuple(t.stem for t in self.tokens)

    def text(self) -> str:
        return " ".join(self.surfaces)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)


@dataclass(frozen=True, slots=True)
class TreeNode:
    index: int  # 1-based surface position
    surface: str
    head: int  # 0 for root
    label: str


@dataclass(frozen=True, slots=True)
class DependencyTree:
    nodes: tuple[TreeNode, ...]

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if n == 0:
            raise TreeValidationError("empty tree")
        roots = [node for node in self.nodes if node.head == 0]
        if len(roots) != 1:
            raise TreeValidationError(f"expected exactly one root, found {len(roots)}")
        by_index = {node.index: node for node in self.nodes}
        if sorted(by_index) != list(range(1, n + 1)):
            raise TreeValidationError("node indices must be 1..n without gaps")
        for node in self.nodes:
            if node.head != 0 and node.head not in by_index:
                raise TreeValidationError(f"node {node.index} points at missing head {node.head}")
        # Walking head links from every node must reach the root without revisits.
        for node in self.nodes:
            seen = set()
            cur = node
            while cur.head != 0:
                if cur.index in seen:
                    raise TreeValidationError(f"cycle through node {cur.index}")
                seen.add(cur.index)
                cur = by_index[cur.head]

    @property
    def root(self) -> TreeNode:
        return next(node for node in self.nodes if node.head == 0)

    def children(self, index: int) -> tuple[TreeNode, ...]:
        """Dependents of the node at ``index``, in surface order."""
        return tuple(n for n in sorted(self.nodes, key=lambda n: n.index) if n.head == index)

    def subtree_indices(self, index: int) -> frozenset[int]:
        """1-based indices of ``index`` and everything below it."""
        out = {index}
        frontier = [index]
        while frontier:
            head = frontier.pop()
            for node in self.nodes:
                if node.head == head and node.index not in out:
                    out.add(node.index)
                    frontier.append(node.index)
        return frozenset(out)


@dataclass(frozen=True, slots=True)
class ParallelPair:
    source: Sentence
    target: Sentence
    source_parse: DependencyTree | None = None
    target_parse: DependencyTree | None = None


def load_parallel_corpus(complex_path: str | Path, simple_path: str | Path) -> list[ParallelPair]:
    """Join line ``i`` of the complex file with line ``i`` of the simple file."""
    complex_lines = Path(complex_path).read_text(encoding="utf-8").splitlines()
    simple_lines = Path(simple_path).read_text(encoding="utf-8").splitlines()
    if len(complex_lines) != len(simple_lines):
        raise CorpusFormatError(
            f"line counts differ: {complex_path} has {len(complex_lines)}, "
            f"{simple_path} has {len(simple_lines)}"
        )
    pairs = []
    for i, (c, s) in enumerate(zip(complex_lines, simple_lines), start=1):
        if not c.strip():
            raise CorpusFormatError(f"empty line {i} in {complex_path}")
        if not s.strip():
            raise CorpusFormatError(f"empty line {i} in {simple_path}")
        pairs.append(ParallelPair(Sentence.from_text(c), Sentence.from_text(s)))
    return pairs


def load_conllu(text: str) -> list[DependencyTree]:
    """Parse a CoNLL-U document into dependency trees.

    Keeps the ID, FORM, HEAD and DEPREL columns. Multiword-token ranges
    ("1-2") and empty nodes ("1.1") are skipped; comment lines start with '#'.
    """
    trees: list[DependencyTree] = []
    nodes: list[TreeNode] = []

    def flush() -> None:
        nonlocal nodes
        if nodes:
            trees.append(DependencyTree(tuple(nodes)))
            nodes = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise CorpusFormatError(
                f"line {lineno}: expected 10 tab-separated columns, got {len(cols)}"
            )
        ident = cols[0]
        if "-" in ident or "." in ident:
            continue
        try:
            index = int(ident)
            head = int(cols[6])
        except ValueError as exc:
            raise CorpusFormatError(f"line {lineno}: non-numeric ID or HEAD") from exc
        nodes.append(TreeNode(index=index, surface=cols[1], head=head, label=cols[7]))
    flush()
    return trees


def load_conllu_file(path: str | Path) -> list[DependencyTree]:
    return load_conllu(Path(path).read_text(encoding="utf-8"))


def template_symbols(extra_labels: Iterable[str] = ()) -> list[str]:
    """Symbols a generated template may contain, injected into every vocabulary."""
    labels = sorted({lbl.upper() for lbl in UD_LABELS} | {lbl.upper() for lbl in extra_labels})
    symbols = [")"]
    symbols += [f"d{k}" for k in range(MAX_DEPTH_TOKEN + 1)]
    for label in labels:
        symbols.append(f"{label}(")
        symbols.append(f"{label})")
    return symbols


@dataclass(frozen=True)
class Vocabulary:
    id_of: Mapping[str, int]
    surface_of: tuple[str, ...]
    max_size: int

    @property
    def pad_id(self) -> int:
        return self.id_of[PAD]

    @property
    def unk_id(self) -> int:
        return self.id_of[UNK]

    @property
    def bos_id(self) -> int:
        return self.id_of[BOS]

    @property
    def eos_id(self) -> int:
        return self.id_of[EOS]

    @property
    def sep_id(self) -> int:
        return self.id_of[SEP]

    def __len__(self) -> int:
        return len(self.surface_of)

    def lookup(self, surface: str) -> int:
        return self.id_of.get(surface, self.unk_id)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for idx, surface in enumerate(self.surface_of):
                fh.write(f"{surface}\t{idx}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        id_of: dict[str, int] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            surface, _, idx = line.partition("\t")
            id_of[surface] = int(idx)
        surfaces = tuple(s for s, _ in sorted(id_of.items(), key=lambda kv: kv[1]))
        return cls(id_of=id_of, surface_of=surfaces, max_size=len(surfaces))

    @classmethod
    def from_entries(cls, words: Sequence[str], max_size: int | None = None,
                     extra_labels: Iterable[str] = ()) -> "Vocabulary":
        """Build directly from a word list (reserved + template symbols injected)."""
        entries = list(RESERVED) + [s for s in template_symbols(extra_labels) if s not in RESERVED]
        for w in words:
            if w not in entries:
                entries.append(w)
        id_of = {s: i for i, s in enumerate(entries)}
        return cls(id_of=id_of, surface_of=tuple(entries), max_size=max_size or len(words))


def build_vocabulary(pairs: Sequence[ParallelPair], max_size: int) -> Vocabulary:
    """Keep the ``max_size`` most frequent surfaces from both corpus sides.

    Ties break by first occurrence; reserved ids and template symbols (labels,
    brackets, depth tokens, the separator) are always present.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if not pairs:
        raise CorpusFormatError("empty corpus")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    tick = 0
    for pair in pairs:
        for sentence in (pair.source, pair.target):
            for token in sentence.tokens:
                counts[token.surface] += 1
                if token.surface not in first_seen:
                    first_seen[token.surface] = tick
                    tick += 1
    parse_labels = set()
    for pair in pairs:
        for tree in (pair.source_parse, pair.target_parse):
            if tree is not None:
                parse_labels.update(node.label for node in tree.nodes)

    entries = list(RESERVED)
    entries += [s for s in template_symbols(parse_labels) if s not in entries]
    injected = set(entries)
    ranked = sorted(counts, key=lambda w: (-counts[w], first_seen[w]))
    kept = 0
    for surface in ranked:
        if kept >= max_size:
            break
        if surface not in injected:
            entries.append(surface)
        kept += 1
    id_of = {s: i for i, s in enumerate(entries)}
    return Vocabulary(id_of=id_of, surface_of=tuple(entries), max_size=max_size)


def encode(sentence: Sentence, vocab: Vocabulary) -> list[int]:
    """Map surfaces to ids; out-of-vocabulary surfaces map to ``unk_id``."""
    return [vocab.lookup(t.surface) for t in sentence.tokens]


def decode(ids: Sequence[int], vocab: Vocabulary) -> Sentence:
    """Inverse of :func:`encode` for in-vocabulary sentences."""
    return Sentence.from_surfaces(vocab.surface_of[i] for i in ids)
