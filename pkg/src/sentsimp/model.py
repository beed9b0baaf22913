"""Encoder-decoder transformer with indicator-feature embeddings and a copy gate.

Everything is plain float64 numpy with hand-written backward passes so the
whole loss is exactly differentiable and checkable against finite differences.
Shapes: batches of same-length sequences only (no padding); ``(B, T, d)``
activations throughout. The output head mixes the generation softmax with a
copy distribution over source positions, gated per step.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import Vocabulary
from .markers import Marker

_NEG = -1e30  # attention mask filler; large-but-finite keeps softmax NaN-free

LEXICAL_ROWS = {Marker.REPLACE: 0, Marker.KEEP: 1, Marker.INDIFFERENT: 2}
SYNTACTIC_ROWS = {Marker.REPLACE: 3, Marker.KEEP: 4, Marker.INDIFFERENT: 5}


class NumericError(RuntimeError):
    """Non-finite values appeared in a forward pass."""


class LengthError(ValueError):
    """A sequence exceeds the positional-encoding table."""


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 2
    hidden_dim: int = 64
    heads: int = 4
    feedforward_dim: int = 128
    vocab_cap: int = 8000
    max_positions: int = 128
    copy_enabled: bool = True
    dropout: float = 0.1

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.hidden_dim % self.heads:
            raise ValueError("hidden_dim must be divisible by heads")

    @classmethod
    def desk(cls, **overrides) -> "ModelConfig":
        return cls(**overrides)

    @classmethod
    def paper(cls) -> "ModelConfig":
        """Full-scale configuration; kept as a named profile, not used in tests."""
        return cls(layers=8, hidden_dim=500, heads=10, feedforward_dim=2048,
                   vocab_cap=50_000, max_positions=512, copy_enabled=True)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls(**json.loads(text))


class ModelParameters:
    """Named float64 tensors plus the configuration that shaped them."""

    def __init__(self, config: ModelConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        self.tensors = tensors

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def names(self) -> list[str]:
        return list(self.tensors)

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    def copy(self) -> "ModelParameters":
        return ModelParameters(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.tensors.values())


def _attn_names(prefix: str) -> list[str]:
    return [f"{prefix}.{n}" for n in ("Wq", "bq", "Wk", "bk", "Wv", "bv", "Wo", "bo")]


def init_parameters(config: ModelConfig, vocab_size: int, seed: int = 0) -> ModelParameters:
    rng = np.random.default_rng(seed)
    d, ff = config.hidden_dim, config.feedforward_dim
    t: dict[str, np.ndarray] = {}

    def w(shape, fan_in):
        return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)

    t["E"] = rng.normal(0.0, 0.1, size=(vocab_size, d))
    t["e_pos"] = rng.normal(0.0, 0.1, size=(config.max_positions, d))
    t["cw"] = rng.normal(0.0, 0.1, size=(6, d))

    def add_attn(prefix):
        for name in ("Wq", "Wk", "Wv", "Wo"):
            t[f"{prefix}.{name}"] = w((d, d), d)
        for name in ("bq", "bk", "bv", "bo"):
            t[f"{prefix}.{name}"] = np.zeros(d)

    def add_ffn(prefix):
        t[f"{prefix}.W1"] = w((d, ff), d)
        t[f"{prefix}.b1"] = np.zeros(ff)
        t[f"{prefix}.W2"] = w((ff, d), ff)
        t[f"{prefix}.b2"] = np.zeros(d)

    def add_ln(prefix):
        t[f"{prefix}.g"] = np.ones(d)
        t[f"{prefix}.b"] = np.zeros(d)

    for i in range(config.layers):
        add_attn(f"enc{i}.attn")
        add_ffn(f"enc{i}.ffn")
        add_ln(f"enc{i}.ln1")
        add_ln(f"enc{i}.ln2")
        add_attn(f"dec{i}.self")
        add_attn(f"dec{i}.cross")
        add_ffn(f"dec{i}.ffn")
        add_ln(f"dec{i}.ln1")
        add_ln(f"dec{i}.ln2")
        add_ln(f"dec{i}.ln3")

    t["copy.wc"] = w(d, d)
    t["copy.ws"] = w(d, d)
    t["copy.b"] = np.zeros(1)
    return ModelParameters(config, t)


def lexical_rows(markers: Sequence[Marker]) -> np.ndarray:
    return np.asarray([LEXICAL_ROWS[m] for m in markers], dtype=np.int64)


def syntactic_rows(markers: Sequence[Marker]) -> np.ndarray:
    return np.asarray([SYNTACTIC_ROWS[m] for m in markers], dtype=np.int64)


# ---------------------------------------------------------------------------
# primitive blocks (forward returns a cache consumed by the matching backward)

def _linear_fwd(x, W, b):
    return x @ W + b


def _linear_bwd(dy, x, W):
    dW = np.einsum("bti,bto->io", x, dy)
    db = dy.sum(axis=(0, 1))
    dx = dy @ W.T
    return dx, dW, db


def _split_heads(x, heads):
    b, t, d = x.shape
    return x.reshape(b, t, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


def _softmax_last(x):
    shape = x.shape
    flat = np.ascontiguousarray(x.reshape(-1, shape[-1]))
    return kernels.softmax_rows(flat).reshape(shape)


def _softmax_last_bwd(p, dp):
    shape = p.shape
    out = kernels.softmax_backward_rows(
        np.ascontiguousarray(p.reshape(-1, shape[-1])),
        np.ascontiguousarray(dp.reshape(-1, shape[-1])),
    )
    return out.reshape(shape)


def _attention_fwd(params, prefix, xq, xkv, heads, mask=None):
    Wq, bq = params[f"{prefix}.Wq"], params[f"{prefix}.bq"]
    Wk, bk = params[f"{prefix}.Wk"], params[f"{prefix}.bk"]
    Wv, bv = params[f"{prefix}.Wv"], params[f"{prefix}.bv"]
    Wo, bo = params[f"{prefix}.Wo"], params[f"{prefix}.bo"]
    q = _split_heads(_linear_fwd(xq, Wq, bq), heads)
    k = _split_heads(_linear_fwd(xkv, Wk, bk), heads)
    v = _split_heads(_linear_fwd(xkv, Wv, bv), heads)
    dh = q.shape[-1]
    scores = np.einsum("bhqd,bhkd->bhqk", q, k) / np.sqrt(dh)
    if mask is not None:
        scores = scores + mask
    p = _softmax_last(scores)
    ctx = np.einsum("bhqk,bhkd->bhqd", p, v)
    merged = _merge_heads(ctx)
    out = _linear_fwd(merged, Wo, bo)
    cache = (xq, xkv, q, k, v, p, merged)
    return out, p, cache


def _attention_bwd(params, prefix, dout, cache, grads, extra_dp=None):
    xq, xkv, q, k, v, p, merged = cache
    Wq, Wk, Wv, Wo = (params[f"{prefix}.Wq"], params[f"{prefix}.Wk"],
                      params[f"{prefix}.Wv"], params[f"{prefix}.Wo"])
    heads = q.shape[1]
    dh = q.shape[-1]
    dmerged, dWo, dbo = _linear_bwd(dout, merged, Wo)
    grads[f"{prefix}.Wo"] += dWo
    grads[f"{prefix}.bo"] += dbo
    dctx = _split_heads(dmerged, heads)
    dp = np.einsum("bhqd,bhkd->bhqk", dctx, v)
    if extra_dp is not None:
        dp = dp + extra_dp
    dv = np.einsum("bhqk,bhqd->bhkd", p, dctx)
    ds = _softmax_last_bwd(p, dp) / np.sqrt(dh)
    dq = np.einsum("bhqk,bhkd->bhqd", ds, k)
    dk = np.einsum("bhqk,bhqd->bhkd", ds, q)
    dxq, dWq, dbq = _linear_bwd(_merge_heads(dq), xq, Wq)
    dxk, dWk, dbk = _linear_bwd(_merge_heads(dk), xkv, Wk)
    dxv, dWv, dbv = _linear_bwd(_merge_heads(dv), xkv, Wv)
    grads[f"{prefix}.Wq"] += dWq
    grads[f"{prefix}.bq"] += dbq
    grads[f"{prefix}.Wk"] += dWk
    grads[f"{prefix}.bk"] += dbk
    grads[f"{prefix}.Wv"] += dWv
    grads[f"{prefix}.bv"] += dbv
    return dxq, dxk + dxv


def _ffn_fwd(params, prefix, x):
    u = _linear_fwd(x, params[f"{prefix}.W1"], params[f"{prefix}.b1"])
    r = np.maximum(u, 0.0)
    y = _linear_fwd(r, params[f"{prefix}.W2"], params[f"{prefix}.b2"])
    return y, (x, u, r)


def _ffn_bwd(params, prefix, dy, cache, grads):
    x, u, r = cache
    dr, dW2, db2 = _linear_bwd(dy, r, params[f"{prefix}.W2"])
    grads[f"{prefix}.W2"] += dW2
    grads[f"{prefix}.b2"] += db2
    du = dr * (u > 0.0)
    dx, dW1, db1 = _linear_bwd(du, x, params[f"{prefix}.W1"])
    grads[f"{prefix}.W1"] += dW1
    grads[f"{prefix}.b1"] += db1
    return dx


def _ln_fwd(params, prefix, x):
    b, t, d = x.shape
    flat = np.ascontiguousarray(x.reshape(-1, d))
    y, mean, rstd = kernels.layernorm_rows(flat, params[f"{prefix}.g"], params[f"{prefix}.b"])
    return y.reshape(b, t, d), (flat, mean, rstd)


def _ln_bwd(params, prefix, dy, cache, grads):
    flat, mean, rstd = cache
    d = flat.shape[1]
    dx, dg, db = kernels.layernorm_backward_rows(
        np.ascontiguousarray(dy.reshape(-1, d)), flat, params[f"{prefix}.g"], mean, rstd
    )
    grads[f"{prefix}.g"] += dg
    grads[f"{prefix}.b"] += db
    return dx.reshape(dy.shape)


def _dropout_fwd(x, rate, rng):
    if rng is None or rate <= 0.0:
        return x, None
    keep = 1.0 - rate
    mask = (rng.random(x.shape) < keep) / keep
    return x * mask, mask


def _dropout_bwd(dy, mask):
    return dy if mask is None else dy * mask


# ---------------------------------------------------------------------------
# embedding, encoder, decoder

def embed_input(params: ModelParameters, ids: np.ndarray,
                lexical_rows: np.ndarray | None = None,
                syntactic_rows: np.ndarray | None = None) -> np.ndarray:
    """Sum of word embedding, positional encoding, and indicator embeddings."""
    ids = np.atleast_2d(np.asarray(ids, dtype=np.int64))
    b, t = ids.shape
    if t > params.config.max_positions:
        raise LengthError(f"sequence of length {t} exceeds max_positions "
                          f"{params.config.max_positions}")
    h0 = params["E"][ids] + params["e_pos"][:t]
    if lexical_rows is not None:
        rows = np.atleast_2d(np.asarray(lexical_rows, dtype=np.int64))
        if rows.shape != ids.shape:
            raise ValueError("one lexical marker per input id required")
        h0 = h0 + params["cw"][rows]
    if syntactic_rows is not None:
        rows = np.atleast_2d(np.asarray(syntactic_rows, dtype=np.int64))
        if rows.shape != ids.shape:
            raise ValueError("one syntactic marker per input id required")
        h0 = h0 + params["cw"][rows]
    return h0


def encoder_forward(params: ModelParameters, h0: np.ndarray, dropout_rng=None):
    """Stack of self-attention + feed-forward sublayers with residuals and layer norm."""
    config = params.config
    x = h0
    caches = []
    hidden = [x]
    for i in range(config.layers):
        attn_out, _, attn_cache = _attention_fwd(params, f"enc{i}.attn", x, x, config.heads)
        attn_drop, attn_mask = _dropout_fwd(attn_out, config.dropout, dropout_rng)
        ln1_in = x + attn_drop
        a, ln1_cache = _ln_fwd(params, f"enc{i}.ln1", ln1_in)
        ffn_out, ffn_cache = _ffn_fwd(params, f"enc{i}.ffn", a)
        ffn_drop, ffn_mask = _dropout_fwd(ffn_out, config.dropout, dropout_rng)
        ln2_in = a + ffn_drop
        x, ln2_cache = _ln_fwd(params, f"enc{i}.ln2", ln2_in)
        caches.append((attn_cache, attn_mask, ln1_cache, ffn_cache, ffn_mask, ln2_cache))
        hidden.append(x)
    if not np.isfinite(x).all():
        raise NumericError("encoder produced non-finite values")
    return x, {"layers": caches, "hidden": hidden}


def encoder_backward(params, dout, cache, grads):
    config = params.config
    dx = dout
    for i in reversed(range(config.layers)):
        attn_cache, attn_mask, ln1_cache, ffn_cache, ffn_mask, ln2_cache = cache["layers"][i]
        dln2_in = _ln_bwd(params, f"enc{i}.ln2", dx, ln2_cache, grads)
        dffn = _dropout_bwd(dln2_in, ffn_mask)
        da = dln2_in + _ffn_bwd(params, f"enc{i}.ffn", dffn, ffn_cache, grads)
        dln1_in = _ln_bwd(params, f"enc{i}.ln1", da, ln1_cache, grads)
        dattn = _dropout_bwd(dln1_in, attn_mask)
        dxq, dxkv = _attention_bwd(params, f"enc{i}.attn", dattn, attn_cache, grads)
        dx = dln1_in + dxq + dxkv
    return dx


def causal_mask(t: int) -> np.ndarray:
    mask = np.zeros((t, t))
    mask[np.triu_indices(t, k=1)] = _NEG
    return mask


def decoder_forward(params: ModelParameters, h0: np.ndarray, enc_out: np.ndarray,
                    dropout_rng=None):
    """Causal self-attention, cross-attention over the source, feed-forward."""
    config = params.config
    x = h0
    mask = causal_mask(x.shape[1])
    caches = []
    cross_p_last = None
    for i in range(config.layers):
        self_out, _, self_cache = _attention_fwd(params, f"dec{i}.self", x, x,
                                                 config.heads, mask)
        self_drop, self_mask = _dropout_fwd(self_out, config.dropout, dropout_rng)
        ln1_in = x + self_drop
        a, ln1_cache = _ln_fwd(params, f"dec{i}.ln1", ln1_in)
        cross_out, cross_p, cross_cache = _attention_fwd(params, f"dec{i}.cross", a,
                                                         enc_out, config.heads)
        cross_drop, cross_mask = _dropout_fwd(cross_out, config.dropout, dropout_rng)
        ln2_in = a + cross_drop
        b, ln2_cache = _ln_fwd(params, f"dec{i}.ln2", ln2_in)
        ffn_out, ffn_cache = _ffn_fwd(params, f"dec{i}.ffn", b)
        ffn_drop, ffn_mask = _dropout_fwd(ffn_out, config.dropout, dropout_rng)
        ln3_in = b + ffn_drop
        x, ln3_cache = _ln_fwd(params, f"dec{i}.ln3", ln3_in)
        caches.append((self_cache, self_mask, ln1_cache, cross_cache, cross_mask,
                       ln2_cache, ffn_cache, ffn_mask, ln3_cache))
        cross_p_last = cross_p
    if not np.isfinite(x).all():
        raise NumericError("decoder produced non-finite values")
    return x, caches, cross_p_last


def decoder_backward(params, dout, caches, grads, d_cross_p_last=None):
    config = params.config
    dx = dout
    denc = None
    for i in reversed(range(config.layers)):
        (self_cache, self_mask, ln1_cache, cross_cache, cross_mask,
         ln2_cache, ffn_cache, ffn_mask, ln3_cache) = caches[i]
        dln3_in = _ln_bwd(params, f"dec{i}.ln3", dx, ln3_cache, grads)
        dffn = _dropout_bwd(dln3_in, ffn_mask)
        db = dln3_in + _ffn_bwd(params, f"dec{i}.ffn", dffn, ffn_cache, grads)
        dln2_in = _ln_bwd(params, f"dec{i}.ln2", db, ln2_cache, grads)
        dcross = _dropout_bwd(dln2_in, cross_mask)
        extra = d_cross_p_last if i == config.layers - 1 else None
        dxq, dxenc = _attention_bwd(params, f"dec{i}.cross", dcross, cross_cache,
                                    grads, extra_dp=extra)
        denc = dxenc if denc is None else denc + dxenc
        da = dln2_in + dxq
        dln1_in = _ln_bwd(params, f"dec{i}.ln1", da, ln1_cache, grads)
        dself = _dropout_bwd(dln1_in, self_mask)
        dsq, dskv = _attention_bwd(params, f"dec{i}.self", dself, self_cache, grads)
        dx = dln1_in + dsq + dskv
    return dx, denc


def output_head(params: ModelParameters, dec_out: np.ndarray, enc_out: np.ndarray,
                cross_p_last: np.ndarray):
    """Mixture of the tied-projection softmax and the copy distribution.

    Returns an extended distribution of width ``V + S``: the first ``V``
    entries carry the gated generation softmax, the final ``S`` entries the
    gated cross-attention mass per source position. Rows sum to one.
    """
    E = params["E"]
    logits = dec_out @ E.T
    gen_p = _softmax_last(logits)
    attn_mean = cross_p_last.mean(axis=1)  # (B, T, S)
    if not params.config.copy_enabled:
        b, t, _ = gen_p.shape
        ext = np.concatenate([gen_p, np.zeros((b, t, enc_out.shape[1]))], axis=-1)
        return ext, {"gen_p": gen_p, "attn_mean": attn_mean, "gate": None,
                     "dec_out": dec_out, "enc_out": enc_out}
    context = np.einsum("bts,bsd->btd", attn_mean, enc_out)
    gate_logit = dec_out @ params["copy.ws"] + context @ params["copy.wc"] + params["copy.b"][0]
    gate = 1.0 / (1.0 + np.exp(-gate_logit))  # (B, T)
    ext = np.concatenate([gen_p * gate[..., None], attn_mean * (1.0 - gate)[..., None]],
                         axis=-1)
    cache = {"gen_p": gen_p, "attn_mean": attn_mean, "context": context,
             "gate": gate, "dec_out": dec_out, "enc_out": enc_out}
    return ext, cache


def output_head_backward(params, dext, cache, grads):
    """Returns (d_dec_out, d_enc_out, d_cross_p_last)."""
    gen_p = cache["gen_p"]
    attn_mean = cache["attn_mean"]
    v = gen_p.shape[-1]
    heads = params.config.heads
    if not params.config.copy_enabled:
        dgen_p = dext[..., :v]
        dlogits = _softmax_last_bwd(gen_p, dgen_p)
        ddec = dlogits @ params["E"]
        grads["E"] += np.einsum("btv,btd->vd", dlogits, cache["dec_out"])
        b, t, s = attn_mean.shape
        d_cross_p = np.zeros((b, heads, t, s))
        return ddec, np.zeros_like(cache["enc_out"]), d_cross_p

    gate = cache["gate"]
    dec_out = cache["dec_out"]
    enc_out = cache["enc_out"]
    context = cache["context"]
    dgen_scaled = dext[..., :v]
    dcopy_scaled = dext[..., v:]
    dgen_p = dgen_scaled * gate[..., None]
    dgate = (dgen_scaled * gen_p).sum(-1) - (dcopy_scaled * attn_mean).sum(-1)
    d_attn_mean = dcopy_scaled * (1.0 - gate)[..., None]

    dgate_logit = dgate * gate * (1.0 - gate)
    ddec = dgate_logit[..., None] * params["copy.ws"]
    grads["copy.ws"] += np.einsum("bt,btd->d", dgate_logit, dec_out)
    dcontext = dgate_logit[..., None] * params["copy.wc"]
    grads["copy.wc"] += np.einsum("bt,btd->d", dgate_logit, context)
    grads["copy.b"] += np.array([dgate_logit.sum()])

    d_attn_mean = d_attn_mean + np.einsum("btd,bsd->bts", dcontext, enc_out)
    denc = np.einsum("bts,btd->bsd", attn_mean, dcontext)

    dlogits = _softmax_last_bwd(gen_p, dgen_p)
    ddec = ddec + dlogits @ params["E"]
    grads["E"] += np.einsum("btv,btd->vd", dlogits, dec_out)

    d_cross_p = np.broadcast_to((d_attn_mean / heads)[:, None],
                                (d_attn_mean.shape[0], heads) + d_attn_mean.shape[1:]).copy()
    return ddec, denc, d_cross_p


# ---------------------------------------------------------------------------
# end-to-end forward / backward on one batch

def forward_pass(params: ModelParameters, enc_ids, lex_rows, syn_rows,
                 dec_in_ids, dropout_rng=None):
    h0_enc = embed_input(params, enc_ids, lex_rows, syn_rows)
    h0_enc, drop_enc = _dropout_fwd(h0_enc, params.config.dropout, dropout_rng)
    enc_out, enc_cache = encoder_forward(params, h0_enc, dropout_rng)
    h0_dec = embed_input(params, dec_in_ids)
    h0_dec, drop_dec = _dropout_fwd(h0_dec, params.config.dropout, dropout_rng)
    dec_out, dec_caches, cross_p_last = decoder_forward(params, h0_dec, enc_out, dropout_rng)
    ext, head_cache = output_head(params, dec_out, enc_out, cross_p_last)
    cache = {
        "enc_ids": np.atleast_2d(np.asarray(enc_ids, dtype=np.int64)),
        "dec_in_ids": np.atleast_2d(np.asarray(dec_in_ids, dtype=np.int64)),
        "lex_rows": None if lex_rows is None else np.atleast_2d(np.asarray(lex_rows)),
        "syn_rows": None if syn_rows is None else np.atleast_2d(np.asarray(syn_rows)),
        "drop_enc": drop_enc, "drop_dec": drop_dec,
        "enc_cache": enc_cache, "dec_caches": dec_caches, "head_cache": head_cache,
    }
    return ext, cache


def backward_pass(params: ModelParameters, dext, cache):
    grads = params.zero_grads()
    ddec, denc_head, d_cross_p = output_head_backward(params, dext, cache["head_cache"], grads)
    ddec_h0, denc_dec = decoder_backward(params, ddec, cache["dec_caches"], grads,
                                         d_cross_p_last=d_cross_p)
    denc = denc_head + denc_dec
    ddec_h0 = _dropout_bwd(ddec_h0, cache["drop_dec"])
    denc_h0 = encoder_backward(params, denc, cache["enc_cache"], grads)
    denc_h0 = _dropout_bwd(denc_h0, cache["drop_enc"])

    np.add.at(grads["E"], cache["dec_in_ids"], ddec_h0)
    grads["e_pos"][: ddec_h0.shape[1]] += ddec_h0.sum(axis=0)
    np.add.at(grads["E"], cache["enc_ids"], denc_h0)
    grads["e_pos"][: denc_h0.shape[1]] += denc_h0.sum(axis=0)
    if cache["lex_rows"] is not None:
        np.add.at(grads["cw"], cache["lex_rows"], denc_h0)
    if cache["syn_rows"] is not None:
        np.add.at(grads["cw"], cache["syn_rows"], denc_h0)
    return grads


def fold_probability(ext: np.ndarray, vocab_ids: np.ndarray, match: np.ndarray,
                     vocab_size: int) -> np.ndarray:
    """P(token) = generation mass (when in vocabulary) + matching copy mass.

    ``vocab_ids`` uses -1 for out-of-vocabulary targets; ``match`` is a
    ``(B, T, S)`` 0/1 array marking source positions with the same surface.
    """
    b, t = vocab_ids.shape
    bi, ti = np.meshgrid(np.arange(b), np.arange(t), indexing="ij")
    safe_ids = np.where(vocab_ids >= 0, vocab_ids, 0)
    gen = np.where(vocab_ids >= 0, ext[bi, ti, safe_ids], 0.0)
    copy = (ext[..., vocab_size:] * match).sum(-1)
    return gen + copy


def nll_loss_and_dext(ext, vocab_ids, match, vocab_size):
    probs = fold_probability(ext, vocab_ids, match, vocab_size)
    clamped = np.maximum(probs, 1e-300)
    loss = float(-np.log(clamped).mean())
    n = probs.size
    dprob = -1.0 / (clamped * n)
    dprob = np.where(probs > 1e-300, dprob, 0.0)
    dext = np.zeros_like(ext)
    b, t = vocab_ids.shape
    bi, ti = np.meshgrid(np.arange(b), np.arange(t), indexing="ij")
    inside = vocab_ids >= 0
    np.add.at(dext, (bi[inside], ti[inside], vocab_ids[inside]), dprob[inside])
    dext[..., vocab_size:] += dprob[..., None] * match
    return loss, dext


def sequence_loss(params: ModelParameters, enc_ids, lex_rows, syn_rows, dec_in_ids,
                  target_vocab_ids, target_match, vocab_size, dropout_rng=None,
                  with_grads=True):
    """Mean token-level negative log-likelihood (and its gradients)."""
    ext, cache = forward_pass(params, enc_ids, lex_rows, syn_rows, dec_in_ids, dropout_rng)
    loss, dext = nll_loss_and_dext(ext, np.atleast_2d(target_vocab_ids), target_match,
                                   vocab_size)
    if not with_grads:
        return loss, None
    grads = backward_pass(params, dext, cache)
    return loss, grads


# ---------------------------------------------------------------------------
# single-step decoding interface

def encode_source(params: ModelParameters, enc_ids, lex_rows=None, syn_rows=None):
    h0 = embed_input(params, enc_ids, lex_rows, syn_rows)
    enc_out, _ = encoder_forward(params, h0)
    return enc_out


def decoder_step(params: ModelParameters, prefix_ids, encoder_states, source_ids=None):
    """Distribution over vocabulary + source positions for the next token.

    ``prefix_ids`` may be ``(T,)`` or ``(B, T)``; rows must begin with BOS and
    share a length. Returns ``(B, V + S)`` (squeezed to 1-D for 1-D input).
    """
    prefix = np.atleast_2d(np.asarray(prefix_ids, dtype=np.int64))
    if prefix.shape[1] == 0:
        raise ValueError("prefix must be non-empty (begin with BOS)")
    enc = encoder_states
    if enc.ndim == 2:
        enc = enc[None]
    if enc.shape[0] == 1 and prefix.shape[0] > 1:
        enc = np.broadcast_to(enc, (prefix.shape[0],) + enc.shape[1:])
    h0 = embed_input(params, prefix)
    dec_out, _, cross_p_last = decoder_forward(params, h0, enc)
    ext, _ = output_head(params, dec_out, enc, cross_p_last)
    step = ext[:, -1, :]
    if np.asarray(prefix_ids).ndim == 1:
        return step[0]
    return step


# ---------------------------------------------------------------------------
# checkpoint container

_MAGIC = b"SSCK"
_VERSION = 1


def save_checkpoint(path: str | Path, params: ModelParameters, vocab: Vocabulary,
                    extra: Mapping[str, object] | None = None) -> None:
    """Deterministic binary container: header JSON + raw little-endian tensors."""
    tensors = params.tensors
    index = []
    offset = 0
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
        index.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.nbytes
    header = {
        "version": _VERSION,
        "config": json.loads(params.config.to_json()),
        "vocab": list(vocab.surface_of),
        "vocab_max_size": vocab.max_size,
        "tensors": index,
        "extra": dict(extra or {}),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for entry in index:
            arr = np.ascontiguousarray(tensors[entry["name"]], dtype=np.float64)
            fh.write(arr.astype("<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[ModelParameters, Vocabulary, dict]:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"not a checkpoint file: {path}")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (header_len,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + header_len].decode("utf-8"))
    body = raw[16 + header_len:]
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=start)
        tensors[entry["name"]] = arr.reshape(shape).astype(np.float64)
    config = ModelConfig(**header["config"])
    surfaces = header["vocab"]
    vocab = Vocabulary(id_of={s: i for i, s in enumerate(surfaces)},
                       surface_of=tuple(surfaces),
                       max_size=header.get("vocab_max_size", len(surfaces)))
    params = ModelParameters(config, tensors)
    return params, vocab, header.get("extra", {})
