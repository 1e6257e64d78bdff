"""Compare the compiled expansion kernel with the pure-Python fallback.

    python3 benchmarks/bench_kernel.py [--rule sigma4] [--depth 7] [--repeat 3]

Both kernels run on identical inputs; the outputs are checked for equality
before any timing is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tilekit import engine
from tilekit._kernel_py import expand_step as step_py
from tilekit.ruleset import builtin_rule

try:
    from tilekit._kernel import expand_step as step_cy
except ImportError:
    step_cy = None


def _one_step_inputs(rule, depth):
    patch = engine.expand(engine.seed_patch(rule, rule.labels[0]), depth - 1)
    tab = engine.tables(rule)
    MB, MS, MZ = tab.i64
    return patch, (patch.labels, patch.refl, patch.A, patch.T, tab.nchild, tab.clabel, tab.crefl, MB, MS, MZ)


def _best(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rule", default="sigma4")
    ap.add_argument("--depth", type=int, default=7, help="depth of the step being timed")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rule = builtin_rule(args.rule)
    patch, inputs = _one_step_inputs(rule, args.depth)
    print(f"{args.rule}: one step from {len(patch)} tiles (depth {args.depth - 1} -> {args.depth})")
    t_py, out_py = _best(step_py, inputs, args.repeat)
    print(f"  python kernel  {t_py * 1e3:10.1f} ms  {len(out_py[0]) / t_py:14,.0f} tiles/s")
    if step_cy is None:
        print("  compiled kernel not built (pip install -e . --no-build-isolation)")
        return 0
    t_cy, out_cy = _best(step_cy, inputs, args.repeat)
    same = all(np.array_equal(a, b) for a, b in zip(out_py, out_cy))
    print(f"  cython kernel  {t_cy * 1e3:10.1f} ms  {len(out_cy[0]) / t_cy:14,.0f} tiles/s")
    print(f"  speed-up {t_py / t_cy:.1f}x, outputs identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
