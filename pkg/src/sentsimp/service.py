"""JSON-over-HTTP service: simplify, evaluate, and inventory inspection.

The model checkpoint and constraint inventories load once into an immutable
session; request handling only reads shared state, so concurrent requests
are safe. Marker overrides arrive per token (null = no override) and the
effective markers are echoed back so a client can mirror server state.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .corpus import Sentence, Vocabulary
from .decode import ConstraintInfeasibleError, DecodeSettings, beam_search
from .lexicon import ComplexWordList, SimplificationDictionary
from .markers import (
    PROFILE_MODES,
    ConstraintSet,
    Level,
    Marker,
    Profile,
    build_constraint_set,
    mark_test_sentence,
)
from .metrics import EvalInstance, evaluate_all
from .model import ModelParameters, load_checkpoint
from .stemming import stem
from .syntax import RuleComplexityEntry, SynchronousRule, load_rules, load_synchronous

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Session:
    params: ModelParameters
    vocab: Vocabulary
    complex_list: ComplexWordList = field(default_factory=lambda: ComplexWordList(()))
    dictionary: SimplificationDictionary = field(
        default_factory=SimplificationDictionary.empty)
    ranked_rules: tuple[RuleComplexityEntry, ...] = ()
    synchronous: tuple[SynchronousRule, ...] = ()
    budgets: Mapping[tuple[Profile, Level], tuple[int, float]] | None = None
    decode_settings: DecodeSettings = DecodeSettings()

    def constraint_set(self, profile: Profile, level: Level) -> ConstraintSet:
        return build_constraint_set(
            self.complex_list, self.dictionary, list(self.ranked_rules),
            level, profile, synchronous=self.synchronous, budgets=self.budgets,
        )


def load_session(checkpoint: str | Path,
                 complex_list_path: str | Path | None = None,
                 dictionary_path: str | Path | None = None,
                 rules_path: str | Path | None = None,
                 synchronous_path: str | Path | None = None,
                 decode_settings: DecodeSettings = DecodeSettings()) -> Session:
    params, vocab, _ = load_checkpoint(checkpoint)
    complex_list = (ComplexWordList.load(complex_list_path)
                    if complex_list_path else ComplexWordList(()))
    dictionary = (SimplificationDictionary.load(dictionary_path)
                  if dictionary_path else SimplificationDictionary.empty())
    ranked: tuple[RuleComplexityEntry, ...] = ()
    if rules_path:
        rules = load_rules(rules_path)
        n = len(rules)
        ranked = tuple(RuleComplexityEntry(rule=r, ratio=float(n - i + 1))
                       for i, r in enumerate(rules))
    synchronous = tuple(load_synchronous(synchronous_path)) if synchronous_path else ()
    return Session(params=params, vocab=vocab, complex_list=complex_list,
                   dictionary=dictionary, ranked_rules=ranked,
                   synchronous=synchronous, decode_settings=decode_settings)


class SimplifyRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)
    markers: list[str | None] | None = None
    profile: str = "NEWSELA"
    level: str = "SIMPLE"
    beam_size: int | None = None


class SimplifyResponse(BaseModel):
    output_tokens: list[str]
    template: str
    applied_markers: list[str]
    banned_words_hit: list[str]
    rules_banned_hit: list[str]
    latency_ms: float


class EvaluateRequest(BaseModel):
    sources: list[str]
    outputs: list[str]
    references: list[list[str]]


def handle_simplify(request: SimplifyRequest, session: Session) -> SimplifyResponse:
    started = time.perf_counter()
    try:
        profile = Profile(request.profile.upper())
        level = Level(request.level.upper())
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    if request.markers is not None and len(request.markers) != len(request.tokens):
        raise HTTPException(
            status_code=400,
            detail=f"markers length {len(request.markers)} != tokens length "
                   f"{len(request.tokens)}")
    try:
        sentence = Sentence.from_surfaces(request.tokens)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    overrides = None
    if request.markers is not None:
        try:
            overrides = [None if m is None else Marker(m.upper()) for m in request.markers]
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"bad marker name: {exc}") from exc

    constraints = session.constraint_set(profile, level)
    marked = mark_test_sentence(sentence, constraints, PROFILE_MODES[profile],
                                overrides=overrides)
    settings = session.decode_settings
    if request.beam_size:
        settings = DecodeSettings(beam_size=request.beam_size,
                                  max_template_len=settings.max_template_len,
                                  max_token_len=settings.max_token_len,
                                  length_penalty=settings.length_penalty)
    try:
        result = beam_search(session.params, session.vocab, marked, constraints, settings)
    except ConstraintInfeasibleError as exc:
        raise HTTPException(status_code=422, detail={
            "error": "constraint_infeasible", "blocking": exc.blocking}) from exc

    banned_stems = constraints.banned_stems()
    hits = sorted({t.surface for t in sentence.tokens if t.stem in banned_stems})
    return SimplifyResponse(
        output_tokens=list(result.sentence.surfaces),
        template=result.template_text,
        applied_markers=[m.value for m in marked.lexical_markers],
        banned_words_hit=hits,
        rules_banned_hit=[r.render(uppercase=False) for r in result.pruned_rules],
        latency_ms=(time.perf_counter() - started) * 1000.0,
    )


def create_app(session: Session, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="sentsimp", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.get("/health")
    def health():
        return {"status": "ok", "vocab_size": len(session.vocab),
                "layers": session.params.config.layers}

    @app.post("/simplify", response_model=SimplifyResponse)
    def simplify(request: SimplifyRequest):
        return handle_simplify(request, session)

    @app.post("/evaluate")
    def evaluate(request: EvaluateRequest):
        if not (len(request.sources) == len(request.outputs) == len(request.references)):
            raise HTTPException(status_code=400, detail="sources, outputs and "
                                "references must have equal lengths")
        try:
            instances = [EvalInstance(s, o, tuple(r)) for s, o, r in
                         zip(request.sources, request.outputs, request.references)]
            report = evaluate_all(instances)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"sari": report.sari, "bleu": report.bleu, "fkgl": report.fkgl,
                "s_bleu": report.s_bleu, "copy_rate": report.copy_rate}

    @app.get("/lexicon")
    def lexicon(prefix: str = ""):
        entries = []
        dict_words = set(session.dictionary.complex_words())
        for score in session.complex_list:
            if score.word.startswith(prefix):
                entries.append({
                    "word": score.word,
                    "stem": score.stem,
                    "ratio": score.ratio,
                    "in_dictionary": score.word in dict_words,
                    "targets": session.dictionary.targets(score.word),
                })
        for word in sorted(dict_words):
            if word.startswith(prefix) and all(e["word"] != word for e in entries):
                entries.append({"word": word, "stem": stem(word), "ratio": None,
                                "in_dictionary": True,
                                "targets": session.dictionary.targets(word)})
        return {"entries": entries[:200]}

    @app.get("/rules")
    def rules():
        return {
            "ranked": [{"rule": e.rule.render(uppercase=False), "ratio": e.ratio}
                       for e in session.ranked_rules],
            "synchronous": [
                {"complex": r.complex_side.render(uppercase=False),
                 "simple": r.simple_side.render(uppercase=False)}
                for r in session.synchronous
            ],
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so the API routes above keep precedence
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
