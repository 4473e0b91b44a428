"""Compare the compiled kernels against the pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import random
import time

from cobotsim._kernels import _pure
from cobotsim.admittance import AdmittanceParams, discretize

try:
    from cobotsim._kernels import _core
except ImportError:
    _core = None


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def row(label, pure_s, fast_s):
    speedup = pure_s / fast_s if fast_s else float("nan")
    print(f"{label:<28} pure {pure_s * 1e3:9.2f} ms   compiled {fast_s * 1e3:9.2f} ms   x{speedup:5.1f}")


def main():
    if _core is None:
        print("compiled backend not built; showing pure timings only")

    coeffs = discretize(AdmittanceParams(), 1e-3)[0]
    n = 1_000_000
    pure = time_call(_pure.admittance_run, coeffs, 0.1, 0.0, 1.0, n)
    fast = time_call(_core.admittance_run, coeffs, 0.1, 0.0, 1.0, n) if _core else float("nan")
    row(f"admittance_run n={n:,}", pure, fast)

    pure = time_call(_pure.admittance_settle, coeffs, 0.5, 0.0, 1e-9, n)
    fast = (
        time_call(_core.admittance_settle, coeffs, 0.5, 0.0, 1e-9, n) if _core else float("nan")
    )
    row("admittance_settle 1e-9", pure, fast)

    rng = random.Random(7)
    blob = bytes(rng.randrange(256) for _ in range(1_000_000))
    pure = time_call(_pure.fnv1a64, blob)
    fast = time_call(_core.fnv1a64, blob) if _core else float("nan")
    row("fnv1a64 1 MB", pure, fast)

    if _core:
        checks = [
            _pure.admittance_run(coeffs, 0.1, 0.0, 1.0, 10_000)
            == _core.admittance_run(coeffs, 0.1, 0.0, 1.0, 10_000),
            _pure.fnv1a64(blob) == _core.fnv1a64(blob),
        ]
        print("bitwise parity:", "ok" if all(checks) else "MISMATCH")


if __name__ == "__main__":
    main()
