import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import make_corpus

from sentsimp.model import ModelConfig
from sentsimp.training import TrainSettings, train_model

# Dependency parse of "take the square root of the variance ." reconstructed
# so that linearization, template and rule extraction reproduce the reference
# strings below (head word of OBJ rendered, which its source omits).
TABLE1_CONLLU = """\
1\ttake\t_\t_\t_\t_\t0\troot\t_\t_
2\tthe\t_\t_\t_\t_\t4\tdet\t_\t_
3\tsquare\t_\t_\t_\t_\t4\tamod\t_\t_
4\troot\t_\t_\t_\t_\t1\tobj\t_\t_
5\tof\t_\t_\t_\t_\t7\tcase\t_\t_
6\tthe\t_\t_\t_\t_\t7\tdet\t_\t_
7\tvariance\t_\t_\t_\t_\t4\tnmod\t_\t_
8\t.\t_\t_\t_\t_\t1\tpunct\t_\t_
"""

TABLE1_TOKENS = "take the square root of the variance ."
TABLE1_LINEARIZED = ("ROOT( take OBJ( root DET( the ) AMOD( square ) "
                     "NMOD( variance CASE( of ) DET( the ) ) ) PUNCT( . ) )")
TABLE1_TEMPLATE = "OBJ( AMOD( d0 ) DET( d0 ) NMOD( d1 ) ) PUNCT( )"
TABLE1_TEMPLATE_LABELED = "OBJ( AMOD( d0 ) DET( d0 ) NMOD( d1 ) OBJ) PUNCT( )"
TABLE1_RULES = {"ROOT(OBJ, PUNCT)", "OBJ(AMOD, DET, NMOD)", "PUNCT()"}
TABLE1_JOINED = TABLE1_TEMPLATE_LABELED + " ||| " + TABLE1_TOKENS


@pytest.fixture(scope="session")
def table1_conllu() -> str:
    return TABLE1_CONLLU


@pytest.fixture(scope="session")
def synthetic_pairs():
    return make_corpus()


@pytest.fixture(scope="session")
def toy_model(synthetic_pairs):
    """A model trained to convergence on the 50-pair synthetic corpus."""
    import time

    config = ModelConfig(layers=2, hidden_dim=64, heads=4, feedforward_dim=128,
                         dropout=0.1, vocab_cap=500)
    settings = TrainSettings(epochs=60, validate_every=10, patience=2, seed=7,
                             warmup_steps=200)
    started = time.perf_counter()
    result = train_model(synthetic_pairs, synthetic_pairs[:10], config, settings)
    result.train_seconds = time.perf_counter() - started
    return result
