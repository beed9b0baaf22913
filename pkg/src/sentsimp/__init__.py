"""Controllable sentence simplification.

Induces complexity lexicons and dependency templates from parallel corpora,
trains a small encoder-decoder with keep/replace/indifferent indicator
features and a copy gate, and decodes with template-first constrained beam
search so output simplicity can be steered at test time.
"""

from .corpus import (
    DependencyTree,
    ParallelPair,
    Sentence,
    Token,
    Vocabulary,
    build_vocabulary,
    decode,
    encode,
    load_conllu,
    load_parallel_corpus,
)
from .decode import ConstraintInfeasibleError, DecodeResult, DecodeSettings, beam_search
from .lexicon import (
    ComplexWordList,
    SimplificationDictionary,
    TranslationTable,
    build_complex_list,
    build_dictionary,
    train_ibm1,
    word_complexity,
)
from .markers import (
    ConstraintSet,
    Level,
    MarkedSentence,
    Marker,
    MarkingMode,
    Profile,
    build_constraint_set,
    mark_test_sentence,
    mark_training_pair,
)
from .metrics import EvalInstance, MetricReport, bleu, copy_rate, evaluate_all, fkgl, sari, self_bleu
from .model import ModelConfig, ModelParameters, load_checkpoint, save_checkpoint
from .stemming import stem
from .syntax import (
    LinearizedParse,
    SynchronousRule,
    SyntaxRule,
    Template,
    extract_rules,
    extract_synchronous_rules,
    extract_template,
    join_template_and_tokens,
    linearize_parse,
    rank_rules_by_complexity,
    split_generated,
)
from .training import TrainResult, TrainSettings, train_model

__version__ = "0.1.0"
