"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is timed on
identical inputs in both implementations, then one end-to-end determinant is
timed in a fresh interpreter per backend (selected through
``AIRYGAP_PURE_PYTHON``).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from airygap import _kernels_py
from airygap.specialfn import _TABLE_AI, _TABLE_AIP, _TABLE_H, _TABLE_LO, ThetaEvaluator, airy

try:
    from airygap import _kernels_c
except ImportError:
    _kernels_c = None

END_TO_END = (
    "import timeit; from airygap import BACKEND; from airygap.fredholm import log_gap_probability; "
    "ivs = [(-9.0, -5.0), (-4.0, -2.0)]; log_gap_probability(ivs, {order}); "
    "t = min(timeit.repeat(lambda: log_gap_probability(ivs, {order}), number=1, repeat={repeat})); "
    "print(BACKEND, t)"
)


def _cases(n_nodes):
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(-7.9, 9.9, 4000))
    u = np.sort(rng.uniform(-10.0, -2.0, n_nodes))
    ai, aip = airy(u)
    ev = ThetaEvaluator(np.array([[1.02j, -0.51j], [-0.51j, 1.26j]]))
    vecs, w = ev.lattice(ev.radius)
    z_real = np.array([0.13, -0.41])
    z_cplx = np.array([0.13 + 0.05j, -0.41 + 0.02j])
    return {
        "airy_table_eval (4000 pts)": lambda k: k.airy_table_eval(
            x, _TABLE_LO, _TABLE_H, _TABLE_AI, _TABLE_AIP
        ),
        f"airy_kernel_matrix ({n_nodes}x{n_nodes})": lambda k: k.airy_kernel_matrix(u, ai, aip, 1e-6),
        f"theta_sum_real ({len(vecs)} terms)": lambda k: k.theta_sum_real(w.real.copy(), vecs, z_real),
        f"theta_pair_sum ({len(vecs)} terms)": lambda k: k.theta_pair_sum(2.0 * w, vecs, z_cplx, False),
    }


def _best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _end_to_end(pure, order, repeat):
    env = dict(os.environ, AIRYGAP_PURE_PYTHON="1" if pure else "0")
    proc = subprocess.run(
        [sys.executable, "-c", END_TO_END.format(order=order, repeat=repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    name, seconds = proc.stdout.split()
    return name, float(seconds)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=256, help="kernel matrix size")
    parser.add_argument("--order", type=int, default=64, help="nodes per interval end to end")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    if _kernels_c is None:
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':40s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, call in _cases(args.nodes).items():
        t_py = _best(lambda: call(_kernels_py), args.repeat) * 1e3
        if _kernels_c is None:
            print(f"{name:40s} {t_py:12.4f} {'-':>12s} {'-':>8s}")
            continue
        t_c = _best(lambda: call(_kernels_c), args.repeat) * 1e3
        print(f"{name:40s} {t_py:12.4f} {t_c:12.4f} {t_py / t_c:8.2f}")

    print()
    results = [_end_to_end(True, args.order, args.repeat)]
    if _kernels_c is not None:
        results.append(_end_to_end(False, args.order, args.repeat))
    for backend, seconds in results:
        print(f"log_gap_probability, 2 intervals x {args.order} nodes, {backend:7s}: {seconds * 1e3:8.3f} ms")


if __name__ == "__main__":
    main()
