"""Hot numeric kernels, each with a numba-compiled and a pure-numpy twin.

The numba path is used when numba imports cleanly, unless the environment
variable ``SENTSIMP_NUMBA`` is set to ``0`` (or ``false``/``off``), in which
case the vectorized numpy fallbacks are bound instead. Both paths compute
identical math; ``benchmarks/bench_kernels.py`` times them side by side.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("SENTSIMP_NUMBA", "auto").strip().lower()

if _FLAG in ("0", "false", "off"):
    NUMBA_ENABLED = False
else:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def _jit(fn):
        return _njit(cache=True, fastmath=False)(fn)
else:
    def _jit(fn):
        return fn


# ---------------------------------------------------------------------------
# softmax over rows

def softmax_rows_np(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@_jit
def _softmax_rows_nb(x):
    rows, cols = x.shape
    out = np.empty_like(x)
    for r in range(rows):
        m = x[r, 0]
        for c in range(1, cols):
            if x[r, c] > m:
                m = x[r, c]
        s = 0.0
        for c in range(cols):
            v = np.exp(x[r, c] - m)
            out[r, c] = v
            s += v
        inv = 1.0 / s
        for c in range(cols):
            out[r, c] *= inv
    return out


def softmax_backward_rows_np(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    dot = (dp * p).sum(axis=1, keepdims=True)
    return p * (dp - dot)


@_jit
def _softmax_backward_rows_nb(p, dp):
    rows, cols = p.shape
    out = np.empty_like(p)
    for r in range(rows):
        dot = 0.0
        for c in range(cols):
            dot += dp[r, c] * p[r, c]
        for c in range(cols):
            out[r, c] = p[r, c] * (dp[r, c] - dot)
    return out


# ---------------------------------------------------------------------------
# layer normalization over rows

def layernorm_rows_np(x, gamma, beta, eps=1e-5):
    mean = x.mean(axis=1)
    var = ((x - mean[:, None]) ** 2).mean(axis=1)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean[:, None]) * rstd[:, None]
    return xhat * gamma + beta, mean, rstd


@_jit
def _layernorm_rows_nb(x, gamma, beta, eps):
    rows, cols = x.shape
    y = np.empty_like(x)
    mean = np.empty(rows, dtype=x.dtype)
    rstd = np.empty(rows, dtype=x.dtype)
    for r in range(rows):
        mu = 0.0
        for c in range(cols):
            mu += x[r, c]
        mu /= cols
        var = 0.0
        for c in range(cols):
            d = x[r, c] - mu
            var += d * d
        var /= cols
        rs = 1.0 / np.sqrt(var + eps)
        mean[r] = mu
        rstd[r] = rs
        for c in range(cols):
            y[r, c] = (x[r, c] - mu) * rs * gamma[c] + beta[c]
    return y, mean, rstd


def layernorm_backward_rows_np(dy, x, gamma, mean, rstd):
    xhat = (x - mean[:, None]) * rstd[:, None]
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = (dxhat - m1 - xhat * m2) * rstd[:, None]
    return dx, dgamma, dbeta


@_jit
def _layernorm_backward_rows_nb(dy, x, gamma, mean, rstd):
    rows, cols = x.shape
    dx = np.empty_like(x)
    dgamma = np.zeros(cols, dtype=x.dtype)
    dbeta = np.zeros(cols, dtype=x.dtype)
    for r in range(rows):
        mu = mean[r]
        rs = rstd[r]
        m1 = 0.0
        m2 = 0.0
        for c in range(cols):
            xh = (x[r, c] - mu) * rs
            dxh = dy[r, c] * gamma[c]
            dgamma[c] += dy[r, c] * xh
            dbeta[c] += dy[r, c]
            m1 += dxh
            m2 += dxh * xh
        m1 /= cols
        m2 /= cols
        for c in range(cols):
            xh = (x[r, c] - mu) * rs
            dxh = dy[r, c] * gamma[c]
            dx[r, c] = (dxh - m1 - xh * m2) * rs
    return dx, dgamma, dbeta


# ---------------------------------------------------------------------------
# Adam parameter update (flattened tensors, in place)

def adam_update_np(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / bc1
    vhat = v / bc2
    param -= lr * mhat / (np.sqrt(vhat) + eps)


@_jit
def _adam_update_nb(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    n = param.shape[0]
    for i in range(n):
        g = grad[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * g
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
        mhat = m[i] / bc1
        vhat = v[i] / bc2
        param[i] -= lr * mhat / (np.sqrt(vhat) + eps)


# ---------------------------------------------------------------------------
# IBM model 1 expectation step
#
# Sentences are flattened into id arrays with offsets; ``table`` is the dense
# t(target | source) matrix, row 0 reserved for the NULL source token by the
# caller's encoding.

def ibm1_accumulate_np(table, src_flat, src_off, tgt_flat, tgt_off):
    counts = np.zeros_like(table)
    totals = np.zeros(table.shape[0], dtype=table.dtype)
    for p in range(len(src_off) - 1):
        src = src_flat[src_off[p]:src_off[p + 1]]
        tgt = tgt_flat[tgt_off[p]:tgt_off[p + 1]]
        probs = table[np.ix_(src, tgt)]  # (|src|, |tgt|)
        denom = probs.sum(axis=0)
        frac = probs / denom
        np.add.at(counts, np.ix_(src, tgt), frac)
        np.add.at(totals, src, frac.sum(axis=1))
    return counts, totals


@_jit
def _ibm1_accumulate_nb(table, src_flat, src_off, tgt_flat, tgt_off):
    counts = np.zeros_like(table)
    totals = np.zeros(table.shape[0], dtype=table.dtype)
    for p in range(len(src_off) - 1):
        for ti in range(tgt_off[p], tgt_off[p + 1]):
            e = tgt_flat[ti]
            denom = 0.0
            for si in range(src_off[p], src_off[p + 1]):
                denom += table[src_flat[si], e]
            for si in range(src_off[p], src_off[p + 1]):
                f = src_flat[si]
                frac = table[f, e] / denom
                counts[f, e] += frac
                totals[f] += frac
    return counts, totals


if NUMBA_ENABLED:
    softmax_rows = _softmax_rows_nb
    softmax_backward_rows = _softmax_backward_rows_nb
    adam_update = _adam_update_nb
    ibm1_accumulate = _ibm1_accumulate_nb

    def layernorm_rows(x, gamma, beta, eps=1e-5):
        return _layernorm_rows_nb(x, gamma, beta, eps)

    layernorm_backward_rows = _layernorm_backward_rows_nb
else:
    softmax_rows = softmax_rows_np
    softmax_backward_rows = softmax_backward_rows_np
    layernorm_rows = layernorm_rows_np
    layernorm_backward_rows = layernorm_backward_rows_np
    adam_update = adam_update_np
    ibm1_accumulate = ibm1_accumulate_np


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
