"""Time the compiled and pure-Python kernels on pattern-sized workloads.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import platform
import timeit

import numpy as np

from macroq import interferometry as itf
from macroq import kernels
from macroq.phys_core import CONST, default_state

M9 = 1e9 * CONST.amu


def workloads():
    rng = np.random.default_rng(0)
    orders = np.arange(-64, 65)
    bessel_z = rng.uniform(0.0, 40.0, orders.size)
    coeffs = rng.normal(size=40) / np.arange(1, 41) ** 2
    x = np.linspace(-3e-6, 3e-6, 2**14)
    return {
        "besselj 129 orders": lambda b: b.besselj(orders, bessel_z),
        "besselj 64x64 grid": lambda b: b.besselj(orders[:64, None], np.linspace(0, 30, 64)[None, :]),
        "cosine_series 40 terms x 16384": lambda b: b.cosine_series(coeffs, 2 * np.pi / 5e-7, x),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"python {platform.python_version()}, numpy {np.__version__}, backends: {', '.join(backends)}")
    results = []
    for name, work in workloads().items():
        row = {"workload": name}
        for bname, mod in backends.items():
            number = max(1, int(0.2 / max(timeit.timeit(lambda: work(mod), number=1), 1e-6)))
            best = min(timeit.repeat(lambda: work(mod), number=number, repeat=args.repeat)) / number
            row[bname] = best
        if "compiled" in row:
            row["speedup"] = row["python"] / row["compiled"]
        results.append(row)
        timings = "  ".join(f"{b} {row[b] * 1e6:9.1f} us" for b in backends)
        extra = f"  speedup {row['speedup']:.1f}x" if "speedup" in row else ""
        print(f"{name:34s} {timings}{extra}")

    # end to end: one interference pattern on the Monte Carlo sampling grid
    grating = itf.GratingConfig(200e-9, 1e-3, 4.2)
    timing = itf.TimingConfig(20.0, 80.0)
    state = default_state(M9)
    t = min(timeit.repeat(lambda: itf.pattern(M9, grating, timing, state, window=(-1.5e-6, 1.5e-6, 2**14)),
                          number=3, repeat=args.repeat)) / 3
    print(f"{'pattern (active backend: ' + kernels.BACKEND + ')':34s} {t * 1e3:9.2f} ms")
    results.append({"workload": "pattern 2^14 points", kernels.BACKEND: t})

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
