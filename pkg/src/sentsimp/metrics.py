"""Simplification metrics: SARI (delete precision), BLEU, FKGL, S-BLEU, Copy.

All text inputs are pre-tokenized strings (space-separated tokens), one
sentence per line for file-level interfaces. BLEU is corpus-level with
n-gram orders that have at least one candidate n-gram (effective orders);
SARI is averaged per instance. FKGL treats every non-empty line as one
sentence and counts syllables with a deterministic vowel-group heuristic.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EvalInstance:
    source: str
    output: str
    references: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.references:
            raise ValueError("at least one reference required")


@dataclass(frozen=True)
class MetricReport:
    sari: float
    bleu: float
    fkgl: float
    s_bleu: float
    copy_rate: float

    def to_json(self) -> str:
        payload = {
            "sari": round(self.sari, 6),
            "bleu": round(self.bleu, 6),
            "fkgl": round(self.fkgl, 6),
            "s_bleu": round(self.s_bleu, 6),
            "copy_rate": round(self.copy_rate, 6),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        rows = [("SARI", self.sari), ("BLEU", self.bleu), ("FKGL", self.fkgl),
                ("S-BLEU", self.s_bleu), ("Copy%", self.copy_rate)]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value:>9.4f}" for name, value in rows)


def _tokens(text: str | Sequence[str]) -> list[str]:
    return text.split() if isinstance(text, str) else list(text)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(outputs: Sequence[str], reference_sets: Sequence[Sequence[str]],
         max_n: int = 4) -> float:
    """Corpus BLEU on tokenized text, clipped against the per-n-gram max over references."""
    if not outputs:
        raise ValueError("empty corpus")
    if len(outputs) != len(reference_sets):
        raise ValueError("outputs and reference sets must align")
    matches = [0] * max_n
    totals = [0] * max_n
    cand_len = 0
    ref_len = 0
    for output, refs in zip(outputs, reference_sets):
        out_tokens = _tokens(output)
        ref_tokens = [_tokens(r) for r in refs]
        cand_len += len(out_tokens)
        closest = min(ref_tokens, key=lambda r: (abs(len(r) - len(out_tokens))))
        ref_len += len(closest)
        for n in range(1, max_n + 1):
            out_counts = _ngrams(out_tokens, n)
            if not out_counts:
                continue
            max_ref = Counter()
            for r in ref_tokens:
                for gram, count in _ngrams(r, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            totals[n - 1] += sum(out_counts.values())
            matches[n - 1] += sum(min(c, max_ref[g]) for g, c in out_counts.items())
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(max_n):
        if totals[n] == 0:
            continue
        orders += 1
        if matches[n] == 0:
            return 0.0
        log_sum += np.log(matches[n] / totals[n])
    if orders == 0:
        return 0.0
    bp = 1.0 if cand_len > ref_len else float(np.exp(1.0 - ref_len / cand_len))
    return float(100.0 * bp * np.exp(log_sum / orders))


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def _convention(cand_empty: bool, target_empty: bool) -> float:
    """Zero-candidate convention: 1 when both sets are empty, 0 otherwise."""
    return 1.0 if (cand_empty and target_empty) else 0.0


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _sari_ngram(src: Counter, out: Counter, ref_sum: Counter, numref: int):
    src_rep = Counter({g: c * numref for g, c in src.items()})
    out_rep = Counter({g: c * numref for g, c in out.items()})

    keep_cand = src_rep & out_rep
    keep_good = keep_cand & ref_sum
    keep_all = src_rep & ref_sum
    if keep_cand:
        keep_p = sum(keep_good[g] / keep_cand[g] for g in keep_good) / len(keep_cand)
    else:
        keep_p = _convention(True, not keep_all)
    if keep_all:
        keep_r = sum(keep_good[g] / keep_all[g] for g in keep_good) / len(keep_all)
    else:
        keep_r = _convention(not keep_cand, True)
    keep_f = _f1(keep_p, keep_r)

    del_cand = src_rep - out_rep
    del_good = del_cand - ref_sum
    del_all = src_rep - ref_sum
    if del_cand:
        del_p = sum(del_good[g] / del_cand[g] for g in del_good) / len(del_cand)
    else:
        del_p = _convention(True, not del_all)

    add_cand = set(out) - set(src)
    add_good = add_cand & set(ref_sum)
    add_all = set(ref_sum) - set(src)
    add_p = _ratio(len(add_good), len(add_cand)) if add_cand else _convention(True, not add_all)
    add_r = _ratio(len(add_good), len(add_all)) if add_all else _convention(not add_cand, True)
    add_f = _f1(add_p, add_r)

    return keep_f, del_p, add_f


def sari_instance(source: str, output: str, references: Sequence[str],
                  max_n: int = 4) -> tuple[float, float, float]:
    """Per-operation scores (keep-F1, delete-precision, add-F1) averaged over n."""
    src_tokens = _tokens(source)
    out_tokens = _tokens(output)
    ref_tokens = [_tokens(r) for r in references]
    numref = len(ref_tokens)
    keeps, dels, adds = [], [], []
    for n in range(1, max_n + 1):
        ref_sum = Counter()
        for r in ref_tokens:
            ref_sum.update(_ngrams(r, n))
        k, d, a = _sari_ngram(_ngrams(src_tokens, n), _ngrams(out_tokens, n),
                              ref_sum, numref)
        keeps.append(k)
        dels.append(d)
        adds.append(a)
    return (sum(keeps) / max_n, sum(dels) / max_n, sum(adds) / max_n)


def sari(sources: Sequence[str], outputs: Sequence[str],
         reference_sets: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """Mean of keep, delete and add operation scores, averaged over instances."""
    if not sources:
        raise ValueError("empty corpus")
    if not (len(sources) == len(outputs) == len(reference_sets)):
        raise ValueError("sources, outputs and references must align")
    total = 0.0
    for source, output, refs in zip(sources, outputs, reference_sets):
        keep_f, del_p, add_f = sari_instance(source, output, refs, max_n)
        total += (keep_f + del_p + add_f) / 3.0
    return float(100.0 * total / len(sources))


_VOWEL_GROUPS = re.compile(r"[aeiouy]+")


def count_syllables(token: str) -> int:
    """Contiguous vowel groups; a trailing lone 'e' is silent unless it is the
    only group; every word counts at least one syllable."""
    low = token.lower()
    groups = _VOWEL_GROUPS.findall(low)
    n = len(groups)
    if n > 1 and low.endswith("e") and groups[-1] == "e":
        n -= 1
    return max(1, n)


def _is_word(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


def fkgl(text: str) -> float:
    """Flesch-Kincaid grade level; every non-empty line is one sentence."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("no sentences in input")
    n_sentences = len(lines)
    words = [tok for line in lines for tok in line.split() if _is_word(tok)]
    if not words:
        raise ValueError("no words in input")
    n_syllables = sum(count_syllables(w) for w in words)
    return float(0.39 * (len(words) / n_sentences)
                 + 11.8 * (n_syllables / len(words)) - 15.59)


def self_bleu(outputs: Sequence[str], sources: Sequence[str]) -> float:
    """BLEU of the output against its own source (how little was changed)."""
    return bleu(outputs, [[s] for s in sources])


def copy_rate(outputs: Sequence[str], sources: Sequence[str]) -> float:
    """Percentage of outputs token-identical to their sources."""
    if not outputs:
        raise ValueError("empty corpus")
    if len(outputs) != len(sources):
        raise ValueError("outputs and sources must align")
    same = sum(1 for o, s in zip(outputs, sources) if _tokens(o) == _tokens(s))
    return 100.0 * same / len(outputs)


def evaluate_all(instances: Sequence[EvalInstance]) -> MetricReport:
    if not instances:
        raise ValueError("empty corpus")
    sources = [i.source for i in instances]
    outputs = [i.output for i in instances]
    refs = [list(i.references) for i in instances]
    return MetricReport(
        sari=sari(sources, outputs, refs),
        bleu=bleu(outputs, refs),
        fkgl=fkgl("\n".join(outputs)),
        s_bleu=self_bleu(outputs, sources),
        copy_rate=copy_rate(outputs, sources),
    )
