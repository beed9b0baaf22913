"""Synthetic parallel corpus with planted substitutions and rule deletions.

Two sentence families:

* lexical: "the <noun> <verb> a <adj> <noun2> ." where complex verbs
  (occurs, terminates, purchases) map to simple ones (is, ends, buys) and
  complex adjectives (arduous, enormous, luminous) to (hard, big, bright);
  variants keep or replace each slot so markers carry real signal.
* syntactic: "<v1> and <v2> ." whose simplified variant drops the
  conjunction clause, planting the Root(conj,punct) -> Root(punct) rewrite.

Frequencies are tuned so the complexity ranking puts the verbs above the
adjectives and both above incidental words.
"""

from __future__ import annotations

from dataclasses import dataclass

from sentsimp.corpus import DependencyTree, ParallelPair, Sentence, TreeNode

VERB_MAP = {"occurs": "is", "terminates": "ends", "purchases": "buys"}
ADJ_MAP = {"arduous": "hard", "enormous": "big", "luminous": "bright"}
NOUNS = ["cat", "dog", "bird", "fox", "cow", "hen", "man", "kid", "owl", "bee"]
OBJECTS = ["mat", "rope", "cart", "lamp", "door", "stone", "leaf", "cup", "drum", "net"]
V1_POOL = ["run", "play", "jump"]
V2_POOL = ["rest", "sing", "walk"]


def lexical_tree(surfaces: list[str]) -> DependencyTree:
    # the(1) noun(2) verb(3) a(4) adj(5) noun2(6) .(7)
    return DependencyTree((
        TreeNode(1, surfaces[0], 2, "det"),
        TreeNode(2, surfaces[1], 3, "nsubj"),
        TreeNode(3, surfaces[2], 0, "root"),
        TreeNode(4, surfaces[3], 6, "det"),
        TreeNode(5, surfaces[4], 6, "amod"),
        TreeNode(6, surfaces[5], 3, "obj"),
        TreeNode(7, surfaces[6], 3, "punct"),
    ))


def conj_tree(surfaces: list[str]) -> DependencyTree:
    # v1(1) and(2) v2(3) .(4)
    return DependencyTree((
        TreeNode(1, surfaces[0], 0, "root"),
        TreeNode(2, surfaces[1], 3, "cc"),
        TreeNode(3, surfaces[2], 1, "conj"),
        TreeNode(4, surfaces[3], 1, "punct"),
    ))


def single_tree(surfaces: list[str]) -> DependencyTree:
    # v1(1) .(2)
    return DependencyTree((
        TreeNode(1, surfaces[0], 0, "root"),
        TreeNode(2, surfaces[1], 1, "punct"),
    ))


def _lexical_pair(noun: str, verb: str, adj: str, obj: str,
                  keep_verb: bool, keep_adj: bool) -> ParallelPair:
    src = ["the", noun, verb, "a", adj, obj, "."]
    tgt = list(src)
    if not keep_verb:
        tgt[2] = VERB_MAP[verb]
    if not keep_adj:
        tgt[4] = ADJ_MAP[adj]
    return ParallelPair(Sentence.from_surfaces(src), Sentence.from_surfaces(tgt),
                        lexical_tree(src), lexical_tree(tgt))


def _conj_pair(v1: str, v2: str, drop: bool) -> ParallelPair:
    src = [v1, "and", v2, "."]
    if drop:
        tgt = [v1, "."]
        return ParallelPair(Sentence.from_surfaces(src), Sentence.from_surfaces(tgt),
                            conj_tree(src), single_tree(tgt))
    return ParallelPair(Sentence.from_surfaces(src), Sentence.from_surfaces(src),
                        conj_tree(src), conj_tree(src))


def make_corpus() -> list[ParallelPair]:
    """50 pairs: 30 lexical (verbs kept 2/10, adjectives 5/10), 20 conjunction
    (6 dropped, 14 kept)."""
    pairs: list[ParallelPair] = []
    verbs = list(VERB_MAP)
    adjs = list(ADJ_MAP)
    for i in range(30):
        noun = NOUNS[i % len(NOUNS)]
        obj = OBJECTS[(i * 3 + 1) % len(OBJECTS)]
        verb = verbs[i % 3]
        adj = adjs[(i // 3) % 3]
        keep_verb = (i % 10) < 2
        keep_adj = (i % 2) == 0
        pairs.append(_lexical_pair(noun, verb, adj, obj, keep_verb, keep_adj))
    drops = {0, 4, 8, 12, 16, 19}  # two per v2 verb, keeping ratios below the adjectives
    for i in range(20):
        v1 = V1_POOL[i % 3]
        v2 = V2_POOL[(i // 3) % 3]
        pairs.append(_conj_pair(v1, v2, drop=i in drops))
    return pairs


def to_text_files(pairs: list[ParallelPair]) -> tuple[str, str]:
    complex_text = "\n".join(p.source.text() for p in pairs) + "\n"
    simple_text = "\n".join(p.target.text() for p in pairs) + "\n"
    return complex_text, simple_text


def to_conllu(tree: DependencyTree) -> str:
    lines = []
    for node in tree.nodes:
        lines.append("\t".join([str(node.index), node.surface, "_", "_", "_", "_",
                                str(node.head), node.label, "_", "_"]))
    return "\n".join(lines) + "\n"


def to_conllu_files(pairs: list[ParallelPair]) -> tuple[str, str]:
    src = "\n".join(to_conllu(p.source_parse) for p in pairs)
    tgt = "\n".join(to_conllu(p.target_parse) for p in pairs)
    return src, tgt
