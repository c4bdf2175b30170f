"""Compare the numba and pure-numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once to warm the JIT, then the best of ``--repeat``
timings is reported together with the max abs difference between backends.
"""

import argparse
import time

import numpy as np

from qmagic.kernels import numba_impl, numpy_impl
from qmagic.majorization import projector_pool, _real_embedding
from qmagic.families import mub_family


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    a = rng.normal(size=(2000, 6, 6))
    sym = a + a.transpose(0, 2, 1)
    pool = _real_embedding(projector_pool(mub_family(3)))
    t = np.sort(rng.uniform(0, 2 * np.pi, 20_000))
    z = np.exp(1j * t)
    vec = rng.normal(size=(200, 3))
    vec /= np.linalg.norm(vec, axis=1, keepdims=True)
    dirs = rng.normal(size=(512, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return {
        "jacobi_eigh_batch (2000 x 6x6)": ("jacobi_eigh_batch", (sym,), lambda r: r[0]),
        "subset_max_eigs (qutrit MUB pool, 2^12 subsets)": ("subset_max_eigs", (pool,), lambda r: r[0]),
        "arc_window_max (m = 20000)": ("arc_window_max", (z,), lambda r: r),
        "topk_projection_max (200 vectors, 512 dirs)": ("topk_projection_max", (vec, dirs), lambda r: r[0]),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':50s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max diff':>9s}")
    for label, (name, inputs, pick) in cases(rng).items():
        f_np, f_nb = getattr(numpy_impl, name), getattr(numba_impl, name)
        t_np = best_time(lambda: f_np(*inputs), args.repeat)
        t_nb = best_time(lambda: f_nb(*inputs), args.repeat)
        diff = np.max(np.abs(np.asarray(pick(f_np(*inputs))) - np.asarray(pick(f_nb(*inputs)))))
        print(f"{label:50s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
