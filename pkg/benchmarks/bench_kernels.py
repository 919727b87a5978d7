"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--degrees 8 16 32] [--repeat 5]

Also times one end-to-end ``analyze`` run under each backend, in a fresh
interpreter so that PADICGAP_PURE takes effect at import.
"""
import argparse
import os
import random
import subprocess
import sys
import timeit

from padicgap import _kernels_py as py

try:
    from padicgap import _kernels as cy
except ImportError:
    cy = None

MODULI = {"3^20": 3**20, "2^61-1": 2**61 - 1, "5^60": 5**60}

E2E = """
import time
from padicgap import Config, MultiPoly, ProblemInstance, analyze
from padicgap.dynamics import RationalMap
f = RationalMap.from_coeffs([1, 0, 1])
inst = ProblemInstance((f, f), (2, 5), (MultiPoly.diagonal(),), Config(K=24, D=20, n_max=200))
t = time.perf_counter()
analyze(inst)
print(time.perf_counter() - t)
"""


def best(stmt, number, repeat):
    return min(timeit.repeat(stmt, number=number, repeat=repeat)) / number


def kernel_rows(degrees, repeat):
    rng = random.Random(0)
    for name, mod in MODULI.items():
        for D in degrees:
            a = [rng.randrange(mod) for _ in range(D + 1)]
            b = [rng.randrange(mod) for _ in range(D + 1)]
            g = [0] + b[1:]
            cases = {
                "mul_trunc": lambda k: k.mul_trunc(a, b, D, mod),
                "compose": lambda k: k.compose(a, g, D, mod),
                "horner": lambda k: k.horner(a, b[0], mod),
            }
            for kernel, call in cases.items():
                number = max(1, 2000 // (D * D)) if kernel != "horner" else 200
                t_py = best(lambda: call(py), number, repeat)
                t_cy = best(lambda: call(cy), number, repeat) if cy else float("nan")
                yield kernel, name, D, t_py, t_cy


def end_to_end():
    out = {}
    for label, pure in (("python", "1"), ("cython", "")):
        env = dict(os.environ, PADICGAP_PURE=pure)
        res = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        out[label] = float(res.stdout.strip())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degrees", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    if cy is None:
        print("compiled extension not built; only Python timings are shown")
    print(f"{'kernel':<10} {'modulus':<8} {'D':>3} {'python us':>11} {'cython us':>11} {'speedup':>8}")
    for kernel, name, D, t_py, t_cy in kernel_rows(args.degrees, args.repeat):
        print(f"{kernel:<10} {name:<8} {D:>3} {t_py * 1e6:>11.1f} {t_cy * 1e6:>11.1f} {t_py / t_cy:>7.2f}x")
    if not args.skip_e2e:
        e2e = end_to_end()
        print(f"\nanalyze (shifted diagonal, K=24, D=20): python {e2e['python']:.2f}s, "
              f"cython {e2e['cython']:.2f}s, speedup {e2e['python'] / e2e['cython']:.2f}x")


if __name__ == "__main__":
    main()
