"""Time the workspace sweep with the compiled kernels and with the numpy fallback."""

import argparse
import time

from verne._jit import USE_NUMBA
from verne.params import reference_params
from verne.workspace import ConstraintLimits, full_workspace


def bench(p, lim, use_numba, args):
    t = time.perf_counter()
    g = full_workspace(p, lim, alpha_steps=args.alpha_steps, z_steps=args.z_steps,
                       resolution=args.resolution, use_numba=use_numba)
    first = time.perf_counter() - t
    best = first
    for _ in range(args.repeat):
        t = time.perf_counter()
        full_workspace(p, lim, alpha_steps=args.alpha_steps, z_steps=args.z_steps,
                       resolution=args.resolution, use_numba=use_numba)
        best = min(best, time.perf_counter() - t)
    n = g.sweep.codes.size
    name = "numba" if use_numba else "numpy"
    print(f"{name:6s} samples={n} first={first:.3f}s best={best:.3f}s "
          f"rate={n / best:.3g}/s accepted={int(g.sweep.accepted.sum())}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha-steps", type=int, default=61)
    ap.add_argument("--z-steps", type=int, default=41)
    ap.add_argument("--resolution", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    p = reference_params()
    lim = ConstraintLimits.from_params(p)
    if USE_NUMBA:
        bench(p, lim, True, args)
    bench(p, lim, False, args)


if __name__ == "__main__":
    main()
