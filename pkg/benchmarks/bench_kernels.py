"""Time the integration kernels with numba and with the pure-Python fallback.

Each backend runs in its own interpreter because the flag is read at import.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, time
from bnlab.ivp import IvpSpec, StopRule, integrate
from bnlab import _kernels as K

cases = [(3, 1e2), (5, 1e4), (6, 1e3)]
out = {"numba": K.HAS_NUMBA}
integrate(IvpSpec(3, 1.0, 1.0, 10.0, 1e-10, 1e-10), StopRule(2))  # compile / warm up
for N, a in cases:
    best = float("inf")
    for _ in range({repeat}):
        t0 = time.perf_counter()
        tr = integrate(IvpSpec(N, 1.0, a, 30.0, 1e-12, 1e-12), StopRule(2))
        best = min(best, time.perf_counter() - t0)
    out[f"N={N} a={a:g}"] = {"seconds": best, "steps": int(tr.ts.size), "zero2": float(tr.zeros[1])}
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["BNLAB_DISABLE_NUMBA"] = "1" if disable else "0"
    res = subprocess.run([sys.executable, "-c", CHILD.replace("{repeat}", str(repeat))],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'case':<14}{'numba s':>12}{'python s':>12}{'speedup':>10}{'|dz|':>10}")
    for key in fast:
        if key == "numba":
            continue
        f, s = fast[key], slow[key]
        dz = abs(f["zero2"] - s["zero2"])
        print(f"{key:<14}{f['seconds']:>12.4f}{s['seconds']:>12.4f}"
              f"{s['seconds'] / f['seconds']:>10.1f}{dz:>10.1e}")


if __name__ == "__main__":
    main()
