"""Template-first beam search under lexical and syntactic constraints.

The decoder first emits template tokens, crosses to the token phase at the
"|||" separator, and finishes at EOS. Banned surfaces (matched by stem) get
zero probability in both the generation softmax and the copy branch during
the token phase; banned rules prune hypotheses when the finished template is
parsed at the phase transition. Positive constraints (dictionary targets,
synchronous simple-side rules) bucket hypotheses by satisfaction count, so
better-constrained outputs outrank likelier unconstrained ones without ever
deadlocking the search.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .corpus import DependencyTree, Sentence, Vocabulary
from .markers import ConstraintSet, MarkedSentence, Marker
from .model import ModelParameters, decoder_forward, embed_input, encode_source, output_head
from .pipeline import encode_marked_source, source_rules_of
from .stemming import stem
from .syntax import SyntaxRule, TemplateFormatError, extract_rules, parse_template

logger = logging.getLogger(__name__)

TEMPLATE, TOKENS = "TEMPLATE", "TOKENS"


class ConstraintInfeasibleError(RuntimeError):
    """Every hypothesis was pruned; carries the blocking constraints."""

    def __init__(self, blocking: list[str]):
        super().__init__("no feasible hypothesis under the active constraints: "
                         + "; ".join(blocking[:8]))
        self.blocking = blocking


@dataclass(frozen=True)
class DecodeSettings:
    beam_size: int = 5
    max_template_len: int = 24
    max_token_len: int = 40
    length_penalty: float = 1.0

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")


@dataclass(frozen=True)
class Hypothesis:
    ids: tuple[int, ...] = ()  # generated ids in the extended (vocab + OOV) space
    surfaces: tuple[str, ...] = ()
    logprob: float = 0.0
    phase: str = TEMPLATE
    template_len: int = 0
    token_len: int = 0
    satisfied: frozenset[int] = frozenset()
    sync_bonus: int = 0
    rules: frozenset[SyntaxRule] = frozenset()

    @property
    def bucket(self) -> int:
        return len(self.satisfied) + self.sync_bonus

    def normalized(self, length_penalty: float) -> float:
        return self.logprob / (max(1, len(self.ids)) ** length_penalty)


@dataclass(frozen=True)
class DecodeResult:
    template_text: str
    sentence: Sentence
    logprob: float
    normalized_logprob: float
    bucket: int
    pruned_rules: tuple[SyntaxRule, ...]

    def __iter__(self):
        yield self.template_text
        yield self.sentence


def _banned_candidate_mask(vocab: Vocabulary, extra_surfaces: list[str],
                           banned_stems: frozenset[str]) -> np.ndarray:
    """True where a candidate id may never be generated in the token phase."""
    mask = np.zeros(len(vocab) + len(extra_surfaces), dtype=bool)
    if not banned_stems:
        return mask
    for idx, surface in enumerate(vocab.surface_of):
        if stem(surface) in banned_stems:
            mask[idx] = True
    for j, surface in enumerate(extra_surfaces):
        if stem(surface) in banned_stems:
            mask[len(vocab) + j] = True
    return mask


def beam_search(params: ModelParameters, vocab: Vocabulary, marked: MarkedSentence,
                constraints: ConstraintSet, settings: DecodeSettings = DecodeSettings(),
                parse: DependencyTree | None = None) -> DecodeResult:
    """Best constrained decode of a marked source sentence."""
    source = encode_marked_source(marked, vocab, parse=parse)
    enc_out = encode_source(params, source.ids[None, :], source.lex_rows[None, :],
                            None if source.syn_rows is None else source.syn_rows[None, :])
    v = len(vocab)
    s_len = len(source.surfaces)

    # Extended candidate space: vocabulary ids, then one id per distinct
    # out-of-vocabulary source surface (reachable through the copy branch).
    oov_surfaces: list[str] = []
    fold_ids = []
    for surface in source.surfaces:
        if surface in vocab.id_of:
            fold_ids.append(vocab.id_of[surface])
        else:
            if surface not in oov_surfaces:
                oov_surfaces.append(surface)
            fold_ids.append(v + oov_surfaces.index(surface))
    n_cand = v + len(oov_surfaces)
    fold = np.zeros((s_len, n_cand))
    for i, cid in enumerate(fold_ids):
        fold[i, cid] = 1.0

    def cand_surface(cid: int) -> str:
        return vocab.surface_of[cid] if cid < v else oov_surfaces[cid - v]

    banned_mask = _banned_candidate_mask(vocab, oov_surfaces, constraints.banned_stems())

    # Positive dictionary constraints: one slot per REPLACE-marked source token
    # with a dictionary entry; a hypothesis satisfies a slot by containing any
    # of the listed simple targets.
    positive_targets: list[frozenset[str]] = []
    for token, marker in zip(marked.sentence.tokens, marked.lexical_markers):
        if marker is Marker.REPLACE and token.surface in constraints.substitutions:
            positive_targets.append(frozenset(constraints.substitutions.targets(token.surface)))

    source_rules = source_rules_of(marked, parse)
    sync_expected = frozenset(
        rule.simple_side for rule in constraints.synchronous
        if rule.complex_side in source_rules
    )

    never = np.zeros(n_cand, dtype=bool)
    never[vocab.pad_id] = True
    never[vocab.bos_id] = True
    sep_id, eos_id = vocab.sep_id, vocab.eos_id

    prune_reasons: Counter[str] = Counter()
    pruned_rules: set[SyntaxRule] = set()
    finished: list[Hypothesis] = []
    live: list[Hypothesis] = [Hypothesis()]
    max_steps = settings.max_template_len + settings.max_token_len + 2

    for _ in range(max_steps):
        if not live:
            break
        prefix = np.asarray(
            [[vocab.bos_id] + [i if i < v else vocab.unk_id for i in hyp.ids] for hyp in live],
            dtype=np.int64,
        )
        h0 = embed_input(params, prefix)
        enc_batch = np.broadcast_to(enc_out, (len(live),) + enc_out.shape[1:])
        dec_out, _, cross_p = decoder_forward(params, h0, enc_batch)
        ext, _ = output_head(params, dec_out, enc_batch, cross_p)
        step = ext[:, -1, :]
        cand = step[:, :v].copy()
        cand = np.concatenate([cand, np.zeros((len(live), len(oov_surfaces)))], axis=1)
        cand += step[:, v:] @ fold

        for row, hyp in enumerate(live):
            cand[row, never] = 0.0
            if hyp.phase == TEMPLATE:
                cand[row, eos_id] = 0.0
                if hyp.template_len >= settings.max_template_len:
                    keep = cand[row, sep_id]
                    cand[row, :] = 0.0
                    cand[row, sep_id] = keep
            else:
                cand[row, sep_id] = 0.0
                cand[row, banned_mask] = 0.0
                if hyp.token_len == 0:
                    cand[row, eos_id] = 0.0
                if hyp.token_len >= settings.max_token_len:
                    keep = cand[row, eos_id]
                    cand[row, :] = 0.0
                    cand[row, eos_id] = keep

        with np.errstate(divide="ignore"):
            logp = np.log(cand)

        k = min(n_cand, max(2 * settings.beam_size + 2, 16))
        buckets: dict[int, list[Hypothesis]] = defaultdict(list)
        for row, hyp in enumerate(live):
            order = np.argsort(-logp[row])[:k]
            for cid in order:
                lp = logp[row, cid]
                if not np.isfinite(lp):
                    break
                new = _extend(hyp, int(cid), float(lp), cand_surface(int(cid)),
                              sep_id, eos_id, constraints, sync_expected,
                              positive_targets, prune_reasons, pruned_rules)
                if new is None:
                    continue
                if new.phase == "DONE":
                    finished.append(new)
                else:
                    buckets[new.bucket].append(new)
        live = []
        for bucket_hyps in buckets.values():
            bucket_hyps.sort(key=lambda h: (-h.logprob, h.ids))
            live.extend(bucket_hyps[: settings.beam_size])

    if not finished:
        blocking = [f"{reason} x{count}" for reason, count in prune_reasons.most_common()]
        if not blocking:
            blocking = ["no hypothesis finished within the length limits"]
        raise ConstraintInfeasibleError(blocking)

    finished.sort(key=lambda h: (-h.bucket, -h.normalized(settings.length_penalty), h.ids))
    if logger.isEnabledFor(logging.DEBUG):
        for i, hyp in enumerate(finished[: settings.beam_size]):
            logger.debug("n-best %d: bucket=%d norm=%.4f %s", i, hyp.bucket,
                         hyp.normalized(settings.length_penalty), " ".join(hyp.surfaces))
    best = finished[0]
    at = best.surfaces.index("|||")
    template_text = " ".join(best.surfaces[:at])
    sentence = Sentence.from_surfaces(best.surfaces[at + 1 : -1])
    return DecodeResult(
        template_text=template_text,
        sentence=sentence,
        logprob=best.logprob,
        normalized_logprob=best.normalized(settings.length_penalty),
        bucket=best.bucket,
        pruned_rules=tuple(sorted(pruned_rules)),
    )


def _extend(hyp: Hypothesis, cid: int, lp: float, surface: str, sep_id: int, eos_id: int,
            constraints: ConstraintSet, sync_expected: frozenset[SyntaxRule],
            positive_targets: list[frozenset[str]], prune_reasons: Counter,
            pruned_rules: set) -> Hypothesis | None:
    ids = hyp.ids + (cid,)
    surfaces = hyp.surfaces + (surface,)
    logprob = hyp.logprob + lp
    if cid == eos_id:
        return Hypothesis(ids=ids, surfaces=surfaces, logprob=logprob, phase="DONE",
                          template_len=hyp.template_len, token_len=hyp.token_len,
                          satisfied=hyp.satisfied, sync_bonus=hyp.sync_bonus,
                          rules=hyp.rules)
    if cid == sep_id:
        template_tokens = surfaces[:-1]
        try:
            template = parse_template(list(template_tokens))
        except TemplateFormatError:
            prune_reasons["malformed template"] += 1
            return None
        rules = extract_rules(template)
        hit = rules & constraints.banned_rules
        if hit:
            for rule in hit:
                prune_reasons[f"banned rule {rule.render(uppercase=False)}"] += 1
                pruned_rules.add(rule)
            return None
        bonus = len(rules & sync_expected)
        return Hypothesis(ids=ids, surfaces=surfaces, logprob=logprob, phase=TOKENS,
                          template_len=hyp.template_len, token_len=0,
                          satisfied=hyp.satisfied, sync_bonus=bonus, rules=rules)
    if hyp.phase == TEMPLATE:
        return Hypothesis(ids=ids, surfaces=surfaces, logprob=logprob, phase=TEMPLATE,
                          template_len=hyp.template_len + 1, token_len=0,
                          satisfied=hyp.satisfied, sync_bonus=hyp.sync_bonus,
                          rules=hyp.rules)
    satisfied = hyp.satisfied
    for slot, targets in enumerate(positive_targets):
        if slot not in satisfied and surface in targets:
            satisfied = satisfied | {slot}
    return Hypothesis(ids=ids, surfaces=surfaces, logprob=logprob, phase=TOKENS,
                      template_len=hyp.template_len, token_len=hyp.token_len + 1,
                      satisfied=satisfied, sync_bonus=hyp.sync_bonus, rules=hyp.rules)
