"""Compare the numba and pure-numpy kernel backends.

Each backend runs in its own interpreter, because the backend is chosen once
at import time from ``YTEST_DISABLE_NUMBA``.  The numba child warms up first
so compilation time is excluded.

    python benchmarks/bench_study.py --reps 1000 --n 50 --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from ytest import _kernels, run_graph_study

reps, n, repeat = map(int, sys.argv[1:4])
run_graph_study(reps=10, n_per_rep=n, root_seed=0)

rng = np.random.default_rng(0)
X = rng.standard_normal((20000, n, 2))
y = rng.standard_normal((20000, n))
_kernels.ols_batch(X[:10], y[:10])

def best(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out

t_study, table = best(lambda: run_graph_study(reps=reps, n_per_rep=n, root_seed=0))
t_ols, _ = best(lambda: _kernels.ols_batch(X, y))
t_tail, _ = best(lambda: _kernels.t_two_sided(rng.standard_normal(200000) * 3, n - 3))
print(json.dumps({"backend": _kernels.BACKEND, "study": t_study, "ols_batch": t_ols,
                  "t_tail": t_tail, "table": table.to_dict()}))
"""


def run_backend(disable_numba: bool, reps: int, n: int, repeat: int) -> dict:
    env = dict(os.environ, YTEST_DISABLE_NUMBA="1" if disable_numba else "0")
    proc = subprocess.run([sys.executable, "-c", CHILD, str(reps), str(n), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    results = [run_backend(flag, args.reps, args.n, args.repeat) for flag in (False, True)]
    print(f"study: reps={args.reps} n={args.n}, best of {args.repeat}")
    print(f"{'backend':<8} {'study (s)':>10} {'ols 20k (s)':>12} {'t 200k (s)':>11}")
    for r in results:
        print(f"{r['backend']:<8} {r['study']:>10.3f} {r['ols_batch']:>12.4f} {r['t_tail']:>11.4f}")
    if results[0]["backend"] == results[1]["backend"]:
        print("numba unavailable, both runs used the numpy backend")
    same = results[0]["table"] == results[1]["table"]
    print(f"study tables identical across backends: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
