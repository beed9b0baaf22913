"""Cross-entropy training with Adam and SARI-based early stopping."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .corpus import ParallelPair, Vocabulary, build_vocabulary
from .decode import ConstraintInfeasibleError, DecodeSettings, beam_search
from .markers import ConstraintSet, mark_training_pair
from .metrics import sari
from .model import ModelConfig, ModelParameters, init_parameters, sequence_loss
from .pipeline import build_training_instance
from .syntax import extract_template

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainSettings:
    epochs: int = 200
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.998
    adam_eps: float = 1e-9
    warmup_steps: int = 400
    patience: int = 3
    seed: int = 0
    indifferent_fraction: float = 0.5
    validate_every: int = 1
    validation_beam: int = 2


@dataclass
class TrainResult:
    params: ModelParameters
    vocab: Vocabulary
    history: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_sari: float = float("-inf")

    def save_log(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.history, indent=2), encoding="utf-8")


class AdamOptimizer:
    def __init__(self, params: ModelParameters, settings: TrainSettings):
        self.settings = settings
        self.m = params.zero_grads()
        self.v = params.zero_grads()
        self.step_count = 0

    def step(self, params: ModelParameters, grads: dict[str, np.ndarray]) -> None:
        s = self.settings
        self.step_count += 1
        lr = s.learning_rate * min(1.0, self.step_count / max(1, s.warmup_steps))
        bc1 = 1.0 - s.beta1 ** self.step_count
        bc2 = 1.0 - s.beta2 ** self.step_count
        for name, tensor in params.tensors.items():
            kernels.adam_update(tensor.ravel(), grads[name].ravel(),
                                self.m[name].ravel(), self.v[name].ravel(),
                                lr, s.beta1, s.beta2, s.adam_eps, bc1, bc2)


def _decode_settings_for(pairs: Sequence[ParallelPair], beam: int) -> DecodeSettings:
    max_tpl, max_tok = 4, 4
    for pair in pairs:
        max_tok = max(max_tok, len(pair.target))
        if pair.target_parse is not None:
            max_tpl = max(max_tpl, len(extract_template(pair.target_parse).tokens()))
    return DecodeSettings(beam_size=beam, max_template_len=max_tpl + 4,
                          max_token_len=max_tok + 6)


def validation_sari(params: ModelParameters, vocab: Vocabulary,
                    pairs: Sequence[ParallelPair], beam: int = 2) -> float:
    """Decode the validation pairs (deterministic markers) and score SARI."""
    settings = _decode_settings_for(pairs, beam)
    constraints = ConstraintSet.empty()
    sources, outputs, refs = [], [], []
    for pair in pairs:
        marked = mark_training_pair(pair, indifferent_fraction=0.0)
        try:
            result = beam_search(params, vocab, marked, constraints, settings,
                                 parse=pair.source_parse)
            output = result.sentence.text()
        except ConstraintInfeasibleError:
            # early in training no hypothesis may survive; score as a copy
            output = pair.source.text()
        sources.append(pair.source.text())
        outputs.append(output)
        refs.append([pair.target.text()])
    return sari(sources, outputs, refs)


def train_model(pairs: Sequence[ParallelPair],
                validation: Sequence[ParallelPair],
                config: ModelConfig,
                settings: TrainSettings = TrainSettings(),
                vocab: Vocabulary | None = None) -> TrainResult:
    """Token-level cross-entropy with Adam; keeps the best-validation-SARI weights."""
    if not pairs or not validation:
        raise TrainingError("training and validation sets must be non-empty")
    if vocab is None:
        vocab = build_vocabulary(pairs, config.vocab_cap)
    params = init_parameters(config, len(vocab), seed=settings.seed)
    optimizer = AdamOptimizer(params, settings)
    order_rng = np.random.default_rng(settings.seed + 1)
    dropout_rng = np.random.default_rng(settings.seed + 2)

    result = TrainResult(params=params, vocab=vocab)
    best_params = params.copy()
    stale = 0
    for epoch in range(settings.epochs):
        order = order_rng.permutation(len(pairs))
        total_loss = 0.0
        for step, idx in enumerate(order):
            pair = pairs[int(idx)]
            instance = build_training_instance(
                pair, vocab, settings.indifferent_fraction,
                seed=settings.seed * 100003 + epoch * 1009 + int(idx),
            )
            src = instance.source
            loss, grads = sequence_loss(
                params, src.ids[None, :], src.lex_rows[None, :],
                None if src.syn_rows is None else src.syn_rows[None, :],
                instance.dec_in_ids[None, :], instance.target_vocab_ids[None, :],
                instance.target_match[None, :, :], len(vocab),
                dropout_rng=dropout_rng if config.dropout > 0 else None,
            )
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch} step {step}")
            total_loss += loss
            optimizer.step(params, grads)
        mean_loss = total_loss / len(pairs)
        record = {"epoch": epoch, "loss": mean_loss}

        if (epoch + 1) % settings.validate_every == 0 or epoch == settings.epochs - 1:
            score = validation_sari(params, vocab, validation, settings.validation_beam)
            record["sari"] = score
            logger.info("epoch %d: loss %.4f, validation SARI %.2f", epoch, mean_loss, score)
            if score > result.best_sari:
                result.best_sari = score
                result.best_epoch = epoch
                best_params = params.copy()
                stale = 0
            else:
                stale += 1
            result.history.append(record)
            if stale > settings.patience:
                logger.info("early stop at epoch %d (best %d)", epoch, result.best_epoch)
                break
        else:
            logger.debug("epoch %d: loss %.4f", epoch, mean_loss)
            result.history.append(record)

    result.params = best_params
    return result
