"""Timing comparison of the compiled and pure NumPy kernel backends.

Runs each kernel on realistic sizes under both implementations and prints
a table of per-call times plus the speedup. The two backends are
bit-identical (asserted here too), so this is purely a speed comparison.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from soupkit._kernels import fallback

try:
    from soupkit._kernels import _fast
except ImportError:
    _fast = None


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    p_flat = 200_000

    parts = [rng.normal(size=p_flat) for _ in range(24)]

    def saxpy_case(mod):
        acc = np.zeros(p_flat)

        def run():
            acc[:] = 0.0
            for part in parts:
                mod.saxpy(acc, part, 1.0 / 24.0)
            return acc

        return run

    def mean_case(mod):
        def run():
            m = parts[0].copy()
            for k in range(2, 25):
                mod.mean_update(m, parts[k - 1], float(k))
            return m

        return run

    x = rng.normal(size=(2_000, 64))
    w = rng.normal(size=(128, 64))
    b = rng.normal(size=128)

    def affine_case(mod):
        out = np.empty((x.shape[0], w.shape[0]))

        def run():
            mod.affine(x, w, b, out)
            return out

        return run

    rows = rng.dirichlet(np.ones(17), size=3_000)
    logs = np.log(np.clip(rows, 1e-12, 1.0))
    rows2 = rng.dirichlet(np.ones(17), size=3_000)
    logs2 = np.log(np.clip(rows2, 1e-12, 1.0))

    def pair_case(mod):
        def run():
            return mod.pair_symxent_sum(rows, logs2, rows2, logs)

        return run

    m = rng.normal(size=(60, 60))
    sym = (m + m.T) / 2.0

    def jacobi_case(mod):
        def run():
            return mod.jacobi_eigh(sym, 100, 1e-12)

        return run

    return [
        ("saxpy 24x200k", saxpy_case),
        ("mean_update 24x200k", mean_case),
        ("affine 2000x64x128", affine_case),
        ("pair_symxent 3000x17", pair_case),
        ("jacobi_eigh 60x60", jacobi_case),
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of repeats (default 5)")
    args = ap.parse_args()
    if _fast is None:
        print("compiled extension not built; nothing to compare against")
        return 1
    rng = np.random.default_rng(7)
    print(f"{'kernel':<22} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for name, make in cases(rng):
        py_run = make(fallback)
        c_run = make(_fast)
        ref_py, ref_c = py_run(), c_run()
        if isinstance(ref_py, np.ndarray):
            assert np.array_equal(ref_py, ref_c, equal_nan=False), name
        elif isinstance(ref_py, tuple):
            assert all(np.array_equal(a, b) for a, b in zip(ref_py, ref_c)), name
        else:
            assert ref_py == ref_c, name
        t_py = best_of(py_run, args.repeat)
        t_c = best_of(c_run, args.repeat)
        print(f"{name:<22} {t_py * 1e3:>10.3f}ms {t_c * 1e3:>10.3f}ms {t_py / t_c:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
