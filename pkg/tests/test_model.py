import numpy as np
import pytest

from sentsimp.corpus import ParallelPair, Sentence, build_vocabulary
from sentsimp.markers import Marker
from sentsimp.model import (
    LengthError,
    ModelConfig,
    ModelParameters,
    causal_mask,
    decoder_forward,
    decoder_step,
    embed_input,
    encode_source,
    encoder_forward,
    init_parameters,
    lexical_rows,
    load_checkpoint,
    output_head,
    save_checkpoint,
    syntactic_rows,
)

CONFIG = ModelConfig(layers=2, hidden_dim=16, heads=2, feedforward_dim=24,
                     max_positions=32, dropout=0.0)


@pytest.fixture()
def params():
    return init_parameters(CONFIG, vocab_size=20, seed=1)


class TestConfig:
    def test_paper_profile(self):
        paper = ModelConfig.paper()
        assert (paper.layers, paper.hidden_dim, paper.heads) == (8, 500, 10)
        assert paper.vocab_cap == 50_000
        assert paper.copy_enabled

    def test_head_divisibility(self):
        with pytest.raises(ValueError):
            ModelConfig(hidden_dim=10, heads=3)

    def test_layers_positive(self):
        with pytest.raises(ValueError):
            ModelConfig(layers=0)


class TestEmbedInput:
    def test_zeroed_indicators_additive_identity(self, params):
        ids = np.array([[1, 2, 3]])
        rows = np.array([[0, 1, 2]])
        params.tensors["cw"][...] = 0.0
        h0 = embed_input(params, ids, rows)
        expected = params["E"][ids] + params["e_pos"][:3]
        assert np.allclose(h0, expected)

    def test_marker_difference_is_cw_row_difference(self, params):
        ids = np.array([[1, 2, 3]])
        a = embed_input(params, ids, lexical_rows([Marker.KEEP] * 3))
        rows_b = lexical_rows([Marker.KEEP, Marker.REPLACE, Marker.KEEP])
        b = embed_input(params, ids, rows_b[None, :])
        diff = b - a
        assert np.allclose(diff[0, 0], 0.0)
        assert np.allclose(diff[0, 2], 0.0)
        expected = params["cw"][0] - params["cw"][1]  # REPLACE minus KEEP rows
        assert np.allclose(diff[0, 1], expected)

    def test_six_indicator_rows(self, params):
        assert params["cw"].shape == (6, CONFIG.hidden_dim)
        ids = np.array([[1, 2]])
        both = embed_input(params, ids,
                           lexical_rows([Marker.KEEP, Marker.REPLACE])[None, :],
                           syntactic_rows([Marker.INDIFFERENT, Marker.KEEP])[None, :])
        lex_only = embed_input(params, ids,
                               lexical_rows([Marker.KEEP, Marker.REPLACE])[None, :])
        assert np.allclose(both - lex_only,
                           params["cw"][[5, 4]][None, :, :])

    def test_length_error(self, params):
        with pytest.raises(LengthError):
            embed_input(params, np.zeros((1, CONFIG.max_positions + 1), dtype=np.int64))


class TestEncoder:
    @pytest.mark.parametrize("length", [1, 2, 5, 16])
    def test_output_shape(self, params, length):
        h0 = np.random.default_rng(0).normal(size=(1, length, CONFIG.hidden_dim))
        out, cache = encoder_forward(params, h0)
        assert out.shape == h0.shape
        assert len(cache["hidden"]) == CONFIG.layers + 1

    def test_non_finite_raises(self, params):
        from sentsimp.model import NumericError

        params.tensors["enc0.ln1.g"][0] = np.inf
        h0 = np.random.default_rng(0).normal(size=(1, 3, CONFIG.hidden_dim))
        with np.errstate(invalid="ignore"), pytest.raises(NumericError):
            encoder_forward(params, h0)

    def test_permutation_equivariance(self, params):
        # self-attention without a mask commutes with position permutations
        rng = np.random.default_rng(4)
        h0 = rng.normal(size=(1, 5, CONFIG.hidden_dim))
        perm = np.array([3, 0, 4, 1, 2])
        out, _ = encoder_forward(params, h0)
        out_perm, _ = encoder_forward(params, h0[:, perm])
        assert np.allclose(out[:, perm], out_perm, atol=1e-10)

    def test_zero_weight_fixture(self):
        # with zeroed attention/feed-forward weights and identity layer norm
        # the output is the twice-normalized residual stream (golden values)
        config = ModelConfig(layers=2, hidden_dim=8, heads=2, feedforward_dim=12,
                             dropout=0.0, max_positions=8)
        params = init_parameters(config, 10, seed=0)
        for name, tensor in params.tensors.items():
            if ".attn." in name or ".ffn." in name:
                tensor[...] = 0.0
            if name.endswith((".ln1.g", ".ln2.g")):
                tensor[...] = 1.0
            if name.endswith((".ln1.b", ".ln2.b")):
                tensor[...] = 0.0
        h0 = np.random.default_rng(5).normal(size=(1, 3, 8))
        out, _ = encoder_forward(params, h0)
        golden = np.array([
            [-0.7418845329459596, -1.451484694207121, 0.010015335793034963,
             0.9184387857313088, 1.8904219327115728, 0.49637007690628127,
             -0.4032882357017147, -0.7185886682874025],
            [0.5733588985169157, 1.3184578068931605, 0.17309363832705604,
             -1.0934349756924708, -0.8621247485068108, 1.2892236144296496,
             0.11432383958185087, -1.5128980735493511],
            [0.6431720021588138, -1.5723716876607794, -0.476558750721491,
             -0.18660191105153198, -0.6490057520435215, 1.9506549222781626,
             0.685470830465267, -0.3947596534249193],
        ])
        assert np.allclose(out[0], golden, atol=1e-12)
        # and it equals layer-norming the residual stream twice
        from sentsimp.kernels import layernorm_rows_np

        ref = h0[0]
        for _ in range(2):
            ref, _, _ = layernorm_rows_np(ref, np.ones(8), np.zeros(8))
        assert np.allclose(out[0], ref, atol=1e-12)


class TestDecoderStep:
    def _setup(self, copy_enabled=True, seed=2):
        config = ModelConfig(layers=2, hidden_dim=16, heads=2, feedforward_dim=24,
                             max_positions=32, dropout=0.0, copy_enabled=copy_enabled)
        params = init_parameters(config, vocab_size=15, seed=seed)
        enc_ids = np.array([[1, 5, 9, 3]])
        enc = encode_source(params, enc_ids)
        return params, enc, enc_ids

    def test_distribution_sums_to_one(self):
        params, enc, enc_ids = self._setup()
        dist = decoder_step(params, np.array([2, 4, 7]), enc, enc_ids[0])
        assert dist.shape == (15 + 4,)
        assert dist.sum() == pytest.approx(1.0, abs=1e-6)
        assert (dist >= 0).all()

    def test_copy_disabled_support_only_vocab(self):
        params, enc, enc_ids = self._setup(copy_enabled=False)
        dist = decoder_step(params, np.array([2, 4]), enc, enc_ids[0])
        assert np.allclose(dist[15:], 0.0)
        assert dist[:15].sum() == pytest.approx(1.0, abs=1e-6)

    def test_unk_source_token_receives_copy_mass(self):
        # a pair whose source token is out of vocabulary still gets probability
        # through the copy branch at its source position
        vocab = build_vocabulary(
            [ParallelPair(Sentence.from_text("a b"), Sentence.from_text("a"))],
            max_size=3)
        config = ModelConfig(layers=1, hidden_dim=16, heads=2, feedforward_dim=16,
                             dropout=0.0)
        params = init_parameters(config, len(vocab), seed=0)
        enc_ids = np.array([[vocab.lookup("zzz"), vocab.lookup("a")]])
        assert enc_ids[0, 0] == vocab.unk_id
        enc = encode_source(params, enc_ids)
        dist = decoder_step(params, np.array([vocab.bos_id]), enc, enc_ids[0])
        v = len(vocab)
        assert dist[v + 0] > 0.0  # position of the OOV token

    def test_causality(self):
        params, enc, enc_ids = self._setup()
        prefix = np.array([2, 4, 7, 1, 3])
        h0 = embed_input(params, prefix[None, :])
        dec_out, _, _ = decoder_forward(params, h0, enc)
        changed = prefix.copy()
        changed[4] = 9  # future token relative to step 3
        h0c = embed_input(params, changed[None, :])
        dec_out_c, _, _ = decoder_forward(params, h0c, enc)
        assert np.allclose(dec_out[0, :4], dec_out_c[0, :4], atol=1e-12)

    def test_empty_prefix_rejected(self):
        params, enc, enc_ids = self._setup()
        with pytest.raises(ValueError):
            decoder_step(params, np.zeros((0,), dtype=np.int64), enc, enc_ids[0])

    def test_causal_mask_shape(self):
        mask = causal_mask(4)
        assert (mask[np.triu_indices(4, k=1)] < -1e20).all()
        assert (np.tril(mask) == 0).all()


class TestCheckpoint:
    def test_round_trip(self, params, tmp_path):
        vocab = build_vocabulary(
            [ParallelPair(Sentence.from_text("a b c"), Sentence.from_text("a"))],
            max_size=20)
        params2 = init_parameters(CONFIG, len(vocab), seed=1)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, params2, vocab, extra={"note": 1})
        loaded, vocab2, extra = load_checkpoint(path)
        assert extra == {"note": 1}
        assert vocab2.id_of == dict(vocab.id_of)
        assert loaded.config == params2.config
        for name in params2.names():
            assert np.array_equal(loaded[name], params2[name])

    def test_deterministic_bytes(self, tmp_path):
        vocab = build_vocabulary(
            [ParallelPair(Sentence.from_text("a b"), Sentence.from_text("a"))],
            max_size=10)
        p = init_parameters(CONFIG, len(vocab), seed=3)
        path1, path2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(path1, p, vocab)
        save_checkpoint(path2, p, vocab)
        assert path1.read_bytes() == path2.read_bytes()

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(ValueError):
            load_checkpoint(path)
