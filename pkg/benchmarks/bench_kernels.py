"""Compare the compiled kernels, the numpy fallback, and the FFT path.

    python benchmarks/bench_kernels.py [--degrees 8 32 128 256] [--steps 200]
"""
import argparse
import timeit

import numpy as np

from szego_lab import _fallback, kernels
from szego_lab.dynamics import _rk4_fft, _cubic_fft


def _time(fn, repeat=5):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--degrees", type=int, nargs="+", default=[8, 32, 128, 256])
    parser.add_argument("--steps", type=int, default=200)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing the fallback only")
    rng = np.random.default_rng(0)
    print(f"{'N':>5} {'kernel':>14} {'backend':>9} {'seconds':>12} {'speedup':>8}")
    for n in args.degrees:
        u = (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)) * np.exp(-0.3 * np.arange(n + 1))
        base = _time(lambda: _fallback.cubic_direct(u))
        rows = [("cubic", "python", base)]
        if "compiled" in backends:
            rows.append(("cubic", "compiled", _time(lambda: backends["compiled"].cubic_direct(u))))
        rows.append(("cubic", "fft", _time(lambda: _cubic_fft(u))))
        steps = args.steps
        base_rk = _time(lambda: _fallback.rk4_direct(u, 1e-3, steps), repeat=3)
        rows.append((f"rk4 x{steps}", "python", base_rk))
        if "compiled" in backends:
            rows.append((f"rk4 x{steps}", "compiled",
                         _time(lambda: backends["compiled"].rk4_direct(u, 1e-3, steps), repeat=3)))
        rows.append((f"rk4 x{steps}", "fft", _time(lambda: _rk4_fft(u, 1e-3, steps), repeat=3)))
        for kernel, backend, sec in rows:
            ref = base if kernel == "cubic" else base_rk
            print(f"{n:>5} {kernel:>14} {backend:>9} {sec:12.3e} {ref / sec:8.2f}")


if __name__ == "__main__":
    main()
