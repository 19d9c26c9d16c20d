"""Compare the compiled CRF kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_crf.py [--lengths 32,128,512] [--repeats 200]
"""

import argparse
import time

import numpy as np

from adetag import crf
from adetag.crf import CrfParams


def bench(kernels, name, e, p, repeats):
    timings = {}
    for label, fn in (
        ("forward_logz", lambda: kernels.forward_logz(e, p.transitions, p.start, p.stop)),
        ("forward_backward", lambda: kernels.forward_backward(e, p.transitions, p.start, p.stop)),
        ("viterbi", lambda: kernels.viterbi(e, p.transitions, p.start, p.stop)),
    ):
        fn()  # warm up
        started = time.perf_counter()
        for _ in range(repeats):
            fn()
        timings[label] = (time.perf_counter() - started) / repeats
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lengths", default="32,128,512")
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    p = CrfParams.init_random(0)
    backends = [("python", crf.python_backend())]
    if crf.BACKEND == "cython":
        backends.append(("cython", crf._kernels))
    else:
        print("note: compiled backend unavailable; benchmarking the fallback only")

    print(f"{'L':>5} {'kernel':<18} " + " ".join(f"{n:>12}" for n, _ in backends) + "   speedup")
    for L in (int(x) for x in args.lengths.split(",")):
        e = rng.normal(size=(L, 3))
        per_backend = {n: bench(k, n, e, p, args.repeats) for n, k in backends}
        for kernel in ("forward_logz", "forward_backward", "viterbi"):
            row = [per_backend[n][kernel] for n, _ in backends]
            speedup = row[0] / row[-1] if len(row) > 1 else float("nan")
            cols = " ".join(f"{t * 1e6:10.1f}us" for t in row)
            print(f"{L:>5} {kernel:<18} {cols}   {speedup:6.1f}x")


if __name__ == "__main__":
    main()
