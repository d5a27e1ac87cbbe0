"""Compare the numba and numpy permanent backends.

The backend is fixed at import time by PDBOSON_DISABLE_NUMBA, so each backend
runs in its own subprocess.

    python benchmarks/bench_permanent.py --sizes 8,12,16,20 --batch 2000
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker(sizes, batch, repeat):
    import numpy as np

    from pdboson import _jit
    from pdboson.permanents import permanent_batch, permanent_fast

    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        permanent_fast(A)  # compile / warm caches
        single = _time(lambda: permanent_fast(A), repeat)
        small = rng.standard_normal((batch, 3, 3)) + 1j * rng.standard_normal((batch, 3, 3))
        permanent_batch(small)
        rows.append({"backend": _jit.backend_name(), "n": n, "single_s": single,
                     "batch3x3_per_matrix_s": _time(lambda: permanent_batch(small), repeat) / batch})
    print(json.dumps(rows))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,12,16,20")
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    if args.worker:
        worker(sizes, args.batch, args.repeat)
        return

    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, PDBOSON_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--worker", "--sizes", args.sizes,
                              "--batch", str(args.batch), "--repeat", str(args.repeat)],
                             env=env, check=True, capture_output=True, text=True).stdout
        for row in json.loads(out):
            results.setdefault(row["n"], {})[row["backend"]] = row

    print(f"{'n':>3} {'numba single':>14} {'numpy single':>14} {'speedup':>8} {'numba 3x3':>11} {'numpy 3x3':>11}")
    for n in sizes:
        a, b = results[n]["numba"], results[n]["numpy"]
        print(f"{n:>3} {a['single_s']:>14.3e} {b['single_s']:>14.3e} {b['single_s'] / a['single_s']:>8.1f}"
              f" {a['batch3x3_per_matrix_s']:>11.2e} {b['batch3x3_per_matrix_s']:>11.2e}")


if __name__ == "__main__":
    main()
