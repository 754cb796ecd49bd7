"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 20]

Prints the median wall time of each kernel under both backends, plus one
end-to-end PREPR test per backend (run in a subprocess so the environment
flag takes effect at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from prepr import _kernels

E2E = (
    "import timeit, numpy as np; from prepr import run_test;"
    "r = np.random.default_rng(0); x = r.standard_normal((35, 3000)); y = r.standard_normal((35, 3000));"
    "run_test(x, y);"
    "print(min(timeit.repeat(lambda: run_test(x, y), number=5, repeat={repeat})) / 5)"
)


def _cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((70, 3000))
    vec = [np.abs(rng.standard_normal(3000)) * 2, rng.uniform(1, 3, 3000)]
    vec += [rng.standard_normal(3000) for _ in range(3)] + [rng.uniform(0, 2, 3000)]
    z = rng.standard_normal((35, 3009))
    coef = np.linspace(0.1, 1.0, 10)
    return {
        "column_moments (70x3000)": ("column_moments", (x,)),
        "q_poly (p=3000)": ("q_poly", tuple(vec)),
        "prepivot_tails (p=3000)": ("prepivot_tails", (*vec, 70)),
        "ma_filter (35x3000)": ("ma_filter", (z, coef)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _kernels.numba_kernels is None:
        sys.exit("numba is not importable; nothing to compare")

    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for label, (name, call_args) in _cases().items():
        times = {}
        for backend, table in (("numpy", _kernels.numpy_kernels), ("numba", _kernels.numba_kernels)):
            fn = table[name]
            fn(*call_args)  # warm up / compile
            times[backend] = min(timeit.repeat(lambda: fn(*call_args), number=10, repeat=args.repeat)) / 10
        print(f"{label:<28}{times['numpy'] * 1e3:>12.3f}{times['numba'] * 1e3:>12.3f}"
              f"{times['numpy'] / times['numba']:>9.1f}x")

    e2e = {}
    for backend, flag in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, PREPR_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E.format(repeat=max(3, args.repeat // 4))],
                             env=env, capture_output=True, text=True, check=True)
        e2e[backend] = float(out.stdout.strip())
    print(f"{'run_test n=m=35, p=3000':<28}{e2e['numpy'] * 1e3:>12.3f}{e2e['numba'] * 1e3:>12.3f}"
          f"{e2e['numpy'] / e2e['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
