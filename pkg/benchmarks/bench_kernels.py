"""Compare compiled and pure-numpy kernel timings.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``BEMLAB_DISABLE_NUMBA``. Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def worker(repeat):
    import numpy as np

    from bemlab import models, mcf
    from bemlab._accel import NUMBA_ENABLED
    from bemlab.focusing import model_blowup
    from bemlab.geometry import zero_weight
    from bemlab.kernels import graph_hf

    rng = np.random.default_rng(0)
    qs = rng.uniform(-1.0, 1.0, 200)
    x0s = -1.0 - rng.uniform(0.1, 2.0, 200)

    def riccati():
        for q, x0 in zip(qs, x0s):
            model_blowup(q, x0, 20.0, fixed_step=1e-3)

    x = np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False)
    u1 = 1.0 + 0.1 * np.cos(x)
    g = np.linspace(0.0, 2.0 * np.pi, 96, endpoint=False)
    u2 = 1.0 + 0.1 * np.cos(g)[:, None] * np.sin(g)[None, :]
    dx = x[1] - x[0]
    dg = g[1] - g[0]

    def hf1():
        for _ in range(50):
            graph_hf(u1, np.ones_like(u1), np.zeros_like(u1), np.zeros_like(u1), dx)

    def hf2():
        for _ in range(20):
            graph_hf(u2, np.ones_like(u2), np.zeros_like(u2), np.zeros_like(u2), dg)

    M = models.product(2)
    surf = mcf.GraphHypersurface.from_function(M, lambda s: 1.0 + 0.05 * np.cos(s), 128)

    def flow():
        mcf.flow_run(M, zero_weight(), surf, 0.0, 0.05)

    cases = {"riccati_model x200": riccati, "graph_hf 1d n=512 x50": hf1, "graph_hf 2d 96^2 x20": hf2,
             "flow_run 1d n=128": flow}
    out = {"numba": NUMBA_ENABLED, "results": {}}
    for name, fn in cases.items():
        t0 = time.perf_counter()
        fn()
        first = time.perf_counter() - t0
        out["results"][name] = {"first_call": first, "best": _best(fn, repeat)}
    print(json.dumps(out))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.repeat)
        return 0
    runs = {}
    for label, disable in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, BEMLAB_DISABLE_NUMBA=disable)
        proc = subprocess.run([sys.executable, __file__, "--worker", "--repeat", str(args.repeat)], env=env,
                              capture_output=True, text=True, check=True)
        runs[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    if not runs["numba"]["numba"]:
        print("numba unavailable: both columns use the fallback path")
    print(f"{'case':28s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s} {'jit+1st [s]':>12s}")
    for name, r in runs["numba"]["results"].items():
        fb = runs["numpy"]["results"][name]["best"]
        print(f"{name:28s} {r['best']:11.4f} {fb:11.4f} {fb / r['best']:8.1f} {r['first_call']:12.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
