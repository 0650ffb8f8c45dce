"""Time the hot kernels on each available backend.

    python benchmarks/bench_kernels.py [--arm hya_like] [--repeat 5]

Prints microseconds per call and the speedup of the compiled backend over the
NumPy one. Results from both backends are also checked for agreement.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from distrej import _backend
from distrej.dynamics import bundled_arm


def cases(chain, kernels, n, rng):
    q, qd, qdd, tau = (rng.standard_normal(n) for _ in range(4))
    zeros = np.zeros(n)
    ones = np.ones(n)
    x = [rng.standard_normal(n) for _ in range(3)]
    return {
        "rnea": lambda: chain.rnea(q, qd, qdd),
        "mass_matrix": lambda: chain.mass_matrix(q),
        "coriolis_matrix": lambda: chain.coriolis_matrix(q, qd),
        "forward_dynamics": lambda: chain.forward_dynamics(q, qd, tau),
        "plant_step (RK4, 4 substeps)": lambda: chain.plant_step(
            q, qd, tau, ones, ones, 0.01, True, zeros, ones, ones, zeros, 0.0, 1e-3, 4),
        "filter_step": lambda: kernels.filter_step(x[0], x[1], x[2], q, 0.8, 50.0, 50.0, 1e-3),
    }


def bench(arm: str, repeat: int) -> None:
    model = bundled_arm(arm)
    n = model.n_dof
    backends = _backend.available_backends()
    results = {}
    outputs = {}
    for name, kernels in backends.items():
        chain = model.chain_for(kernels)
        fns = cases(chain, kernels, n, np.random.default_rng(0))
        results[name] = {}
        for label, fn in fns.items():
            number = 200 if name == "python" else 5000
            best = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
            results[name][label] = best * 1e6
        ref = cases(chain, kernels, n, np.random.default_rng(1))
        outputs[name] = {k: ref[k]() for k in ("rnea", "mass_matrix", "coriolis_matrix", "forward_dynamics")}

    print(f"arm {arm} (n = {n}); best of {repeat}, microseconds per call")
    names = list(results)
    print(f"{'kernel':<30}" + "".join(f"{b:>12}" for b in names) + ("  speedup" if len(names) > 1 else ""))
    for label in results[names[0]]:
        row = f"{label:<30}" + "".join(f"{results[b][label]:>12.2f}" for b in names)
        if len(names) > 1:
            row += f"  {results['python'][label] / results['cython'][label]:>6.0f}x"
        print(row)
    if len(names) > 1:
        worst = max(float(np.max(np.abs(np.asarray(outputs["python"][k]) - np.asarray(outputs["cython"][k]))))
                    for k in outputs["python"])
        print(f"max abs difference between backends: {worst:.2e}")
    else:
        print("compiled backend not built; only the NumPy path was timed")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--arm", default="hya_like")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench(args.arm, args.repeat)
