"""Time the numba-compiled kernels against their pure-numpy twins.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 200]

Shapes mirror real workloads: layer norm and softmax rows as seen in
desk-scale training batches, Adam updates over embedding-sized tensors,
and an IBM-1 E-step over a few hundred sentence pairs.
"""

import argparse
import time

import numpy as np

from sentsimp import kernels

if not kernels.NUMBA_ENABLED:
    raise SystemExit("numba path disabled or unavailable; nothing to compare "
                     "(unset SENTSIMP_NUMBA and install numba)")


def timeit(fn, repeats):
    fn()  # warm up (includes JIT compilation on the numba path)
    started = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - started) / repeats


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    rows = rng.normal(size=(512, 96))
    gamma, beta = rng.normal(size=96), rng.normal(size=96)
    _, mean, rstd = kernels.layernorm_rows_np(rows, gamma, beta)
    dy = rng.normal(size=rows.shape)
    probs = kernels.softmax_rows_np(rows)

    param = rng.normal(size=200_000)
    grad = rng.normal(size=200_000)
    m, v = np.zeros_like(param), np.zeros_like(param)

    table = rng.random((300, 400)) + 0.05
    table /= table.sum(axis=1, keepdims=True)
    src, src_off = [], [0]
    tgt, tgt_off = [], [0]
    for _ in range(300):
        src.extend(rng.integers(0, 300, size=12))
        src_off.append(len(src))
        tgt.extend(rng.integers(0, 400, size=10))
        tgt_off.append(len(tgt))
    src = np.asarray(src, dtype=np.int64)
    tgt = np.asarray(tgt, dtype=np.int64)
    src_off = np.asarray(src_off, dtype=np.int64)
    tgt_off = np.asarray(tgt_off, dtype=np.int64)

    cases = [
        ("softmax_rows",
         lambda: kernels.softmax_rows_np(rows),
         lambda: kernels._softmax_rows_nb(rows)),
        ("softmax_backward_rows",
         lambda: kernels.softmax_backward_rows_np(probs, dy),
         lambda: kernels._softmax_backward_rows_nb(probs, dy)),
        ("layernorm_rows",
         lambda: kernels.layernorm_rows_np(rows, gamma, beta),
         lambda: kernels._layernorm_rows_nb(rows, gamma, beta, 1e-5)),
        ("layernorm_backward_rows",
         lambda: kernels.layernorm_backward_rows_np(dy, rows, gamma, mean, rstd),
         lambda: kernels._layernorm_backward_rows_nb(dy, rows, gamma, mean, rstd)),
        ("adam_update",
         lambda: kernels.adam_update_np(param, grad, m, v, 1e-3, 0.9, 0.998,
                                        1e-9, 0.1, 0.002),
         lambda: kernels._adam_update_nb(param, grad, m, v, 1e-3, 0.9, 0.998,
                                         1e-9, 0.1, 0.002)),
        ("ibm1_accumulate",
         lambda: kernels.ibm1_accumulate_np(table, src, src_off, tgt, tgt_off),
         lambda: kernels._ibm1_accumulate_nb(table, src, src_off, tgt, tgt_off)),
    ]

    print(f"{'kernel':<26} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, np_fn, nb_fn in cases:
        t_np = timeit(np_fn, args.repeats)
        t_nb = timeit(nb_fn, args.repeats)
        print(f"{name:<26} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
              f"{t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
