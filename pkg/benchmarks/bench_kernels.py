"""Compare the numba and numpy kernel backends on the Monte Carlo hot loops.

Run: python benchmarks/bench_kernels.py [--trials N] [--repeat R]
Both backends read the same uniforms, so their error counts must agree.
"""
import argparse
import time

import numpy as np

from cpf import _kernels


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_cn(m, trials, repeat):
    u = np.random.default_rng(0).random((trials, m + 1))
    _kernels.cn_protocol_errors(u[:10], m, 0.1, 0.1, use_numba=True)  # compile
    tn, en = _best(lambda: _kernels.cn_protocol_errors(u, m, 0.1, 0.1, use_numba=True), repeat)
    tp, ep = _best(lambda: _kernels.cn_protocol_errors(u, m, 0.1, 0.1, use_numba=False), repeat)
    return tn, tp, en == ep


def bench_max_count(m, trials, repeat):
    rng = np.random.default_rng(1)
    counts = rng.geometric(1 / 3.0, size=(trials, m)) - 1
    truth = rng.integers(0, m, size=trials)
    u = rng.random(trials)
    _kernels.max_count_errors(counts[:10], truth[:10], u[:10], use_numba=True)
    tn, en = _best(lambda: _kernels.max_count_errors(counts, truth, u, use_numba=True), repeat)
    tp, ep = _best(lambda: _kernels.max_count_errors(counts, truth, u, use_numba=False), repeat)
    return tn, tp, en == ep


def bench_recursion(m_max, repeat):
    _kernels.cn_recursion_table(10, 0.1, 0.1, use_numba=True)
    tn, a = _best(lambda: _kernels.cn_recursion_table(m_max, 0.01, 0.3, use_numba=True), repeat)
    tp, b = _best(lambda: _kernels.cn_recursion_table(m_max, 0.01, 0.3, use_numba=False), repeat)
    return tn, tp, bool(np.array_equal(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rows = [
        ("cn_protocol m=2", bench_cn(2, args.trials, args.repeat)),
        ("cn_protocol m=100", bench_cn(100, args.trials // 4, args.repeat)),
        ("max_count m=5", bench_max_count(5, args.trials, args.repeat)),
        ("max_count m=50", bench_max_count(50, args.trials // 4, args.repeat)),
        ("cn_recursion m=10^5", bench_recursion(100_000, args.repeat)),
    ]
    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}  same")
    for name, (tn, tp, same) in rows:
        print(f"{name:<22}{tn:>12.4f}{tp:>12.4f}{tp / tn:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
