"""Time the integration kernels with and without numba.

Each configuration runs in its own interpreter because the backend is chosen
at import time.  Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
from fractions import Fraction as F
from blockreg import numverify as nv
from blockreg.blockmap import epsilon_transition
from blockreg.blowup import VectorField, blowup_x
from blockreg.saddle import normalize_saddle

X = VectorField.from_terms({(2, 0): F(-1, 3), (0, 2): -1, (3, 0): F(1, 2)}, {(1, 1): F(2, 3)})
nf = normalize_saddle(blowup_x(X), 5)
sec = nv.SectionSpec(0.05, -0.05)

def ladder():
    nv.sample_ladder(X.P, X.Q, sec, nv.DEFAULT_LADDER)

def transition():
    epsilon_transition(X, nf, K=3)

out = {}
for name, fn in (("verify_ladder", ladder), ("epsilon_transition", transition)):
    t0 = time.perf_counter(); fn(); first = time.perf_counter() - t0
    best = float("inf")
    for _ in range(REPEAT):
        t0 = time.perf_counter(); fn(); best = min(best, time.perf_counter() - t0)
    out[name] = (first, best)
print(json.dumps(out))
"""


def run(no_numba: bool, repeat: int) -> dict:
    env = dict(os.environ, BLOCKREG_NO_NUMBA="1" if no_numba else "0")
    code = WORKLOAD.replace("REPEAT", str(repeat))
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(r.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    jit = run(False, args.repeat)
    py = run(True, args.repeat)
    print(f"{'workload':<20} {'numba first':>12} {'numba best':>11} {'python best':>12} {'speedup':>8}")
    for name in jit:
        (f, b), (_, pb) = jit[name], py[name]
        print(f"{name:<20} {f:12.3f} {b:11.3f} {pb:12.3f} {pb / b:8.1f}x")


if __name__ == "__main__":
    main()
