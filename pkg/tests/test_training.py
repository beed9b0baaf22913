import numpy as np
import pytest

from sentsimp.corpus import ParallelPair, Sentence
from sentsimp.decode import DecodeSettings, beam_search
from sentsimp.markers import ConstraintSet, mark_training_pair
from sentsimp.model import ModelConfig
from sentsimp.training import TrainSettings, TrainingError, train_model


def _single_pair():
    return ParallelPair(Sentence.from_text("the cat occurs here ."),
                        Sentence.from_text("the cat is here ."))


def test_one_pair_memorization():
    pairs = [_single_pair()]
    config = ModelConfig(layers=1, hidden_dim=32, heads=2, feedforward_dim=64,
                         dropout=0.0, vocab_cap=50)
    settings = TrainSettings(epochs=300, learning_rate=3e-3, validate_every=100,
                             patience=99, seed=0, warmup_steps=20,
                             indifferent_fraction=0.0)
    result = train_model(pairs, pairs, config, settings)
    losses = [r["loss"] for r in result.history]
    assert losses[-1] < 0.01
    marked = mark_training_pair(pairs[0], 0.0)
    decoded = beam_search(result.params, result.vocab, marked, ConstraintSet.empty(),
                          DecodeSettings(beam_size=1, max_template_len=2, max_token_len=8))
    assert decoded.sentence.text() == pairs[0].target.text()


def test_early_stopping_returns_best_epoch(toy_model):
    history = [r for r in toy_model.history if "sari" in r]
    best = max(history, key=lambda r: r["sari"])
    assert toy_model.best_sari == best["sari"]
    assert toy_model.best_epoch == min(
        r["epoch"] for r in history if r["sari"] == best["sari"])


def test_empty_sets_rejected():
    with pytest.raises(TrainingError):
        train_model([], [_single_pair()], ModelConfig(layers=1))
    with pytest.raises(TrainingError):
        train_model([_single_pair()], [], ModelConfig(layers=1))


def test_training_is_seed_deterministic():
    pairs = [_single_pair(),
             ParallelPair(Sentence.from_text("a dog occurs there ."),
                          Sentence.from_text("a dog is there ."))]
    config = ModelConfig(layers=1, hidden_dim=16, heads=2, feedforward_dim=32,
                         dropout=0.1, vocab_cap=50)
    settings = TrainSettings(epochs=8, validate_every=8, patience=2, seed=5,
                             warmup_steps=20)
    a = train_model(pairs, pairs, config, settings)
    b = train_model(pairs, pairs, config, settings)
    for name in a.params.names():
        assert np.array_equal(a.params[name], b.params[name])
    assert a.history == b.history


def test_log_save(tmp_path, toy_model):
    path = tmp_path / "log.json"
    toy_model.save_log(path)
    import json

    entries = json.loads(path.read_text())
    assert all("loss" in e for e in entries)
    assert any("sari" in e for e in entries)
