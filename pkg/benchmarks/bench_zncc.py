#!/usr/bin/env python3
"""Benchmark the compiled ZNCC kernel against the pure-numpy fallback.

Workloads mirror the pipeline's real call sites: the coarse full-frame scan,
the stride-1 tracker window scan, and the +-stride refinement. Also checks
that both backends agree on every workload.

    python benchmarks/bench_zncc.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lastseen.kernels import available_backends, zncc_best


def workloads(rng):
    frame_s = rng.uniform(0, 255, size=(120, 160))
    frame_l = rng.uniform(0, 255, size=(240, 320))
    tmpl = rng.uniform(0, 255, size=(18, 24))
    window = rng.uniform(0, 255, size=(52, 46))
    return [
        ("coarse scan 160x120, stride 4", frame_s, tmpl, 4, None),
        ("coarse scan 320x240, stride 4", frame_l, tmpl, 4, None),
        ("tracker window 46x52, stride 1", window, tmpl, 1, None),
        ("refinement 9x9 region, stride 1", frame_s, tmpl, 1, (40, 40, 48, 48)),
    ]


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")
        return 1

    rng = np.random.default_rng(0)
    rows = []
    for name, image, template, stride, region in workloads(rng):
        times = {}
        results = {}
        for backend in ("cython", "python"):
            times[backend], results[backend] = time_call(
                lambda b=backend: zncc_best(image, template, stride=stride, region=region, backend=b),
                args.repeats,
            )
        s_cy, y_cy, x_cy = results["cython"]
        s_py, y_py, x_py = results["python"]
        assert (y_cy, x_cy) == (y_py, x_py), f"{name}: backends disagree on argmax"
        assert abs(s_cy - s_py) < 1e-9, f"{name}: backends disagree on score"
        rows.append((name, times["cython"] * 1e3, times["python"] * 1e3))

    width = max(len(r[0]) for r in rows)
    print(f"\n{'workload':<{width}}  {'cython':>10}  {'python':>10}  {'speedup':>8}")
    for name, t_cy, t_py in rows:
        print(f"{name:<{width}}  {t_cy:>8.3f}ms  {t_py:>8.3f}ms  {t_py / t_cy:>7.1f}x")
    print("\nbackends agree on all workloads")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
