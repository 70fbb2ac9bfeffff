"""Compare the compiled field kernel with the numpy fallback.

Times the fused Cash-Karp trial step, the post-step clamp and a complete
solve at several problem sizes, then prints the speedup per size.

    python benchmarks/bench_kernels.py --sizes 20 50 100 --repeat 200
"""

import argparse
import json
import time

import numpy as np

from ctdsat import _backend
from ctdsat.formula import random_ksat


def time_call(fn, repeat):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_size(n, alpha, repeat, seed):
    f = random_ksat(n, alpha, 3, seed)
    rng = np.random.default_rng(seed)
    y = np.concatenate([rng.uniform(-1, 1, n), rng.uniform(0.5, 3.0, f.num_clauses)])
    out = {"N": n, "M": f.num_clauses}
    for name, mod in sorted(_backend.BACKENDS.items()):
        k = mod.FieldKernel(*f.packed, n)
        f0 = k.field(y, mod.EXPONENTIAL)
        out[f"{name}_field_us"] = 1e6 * time_call(lambda: k.field(y, mod.EXPONENTIAL), repeat)
        out[f"{name}_step_us"] = 1e6 * time_call(
            lambda: k.cash_karp(y, f0, 1e-2, mod.EXPONENTIAL, np.inf, 1.0, None, None,
                                1e-6, 1e-6), repeat)
        out[f"{name}_accept_us"] = 1e6 * time_call(lambda: k.accept(y.copy()), repeat)
    return out


def bench_solve(n, seed):
    from ctdsat.solver import SolverConfig, solve
    f = random_ksat(n, 4.25, 3, seed)
    res = {}
    saved = _backend.DEFAULT
    try:
        for name in sorted(_backend.BACKENDS):
            # kernels are looked up per solve, so swapping the default is enough
            _backend.DEFAULT = name
            t0 = time.perf_counter()
            r = solve(f, SolverConfig(seed=seed, t_max=50, max_steps=5000))
            res[name] = {"wall_s": time.perf_counter() - t0, "steps": r.steps,
                         "analog_time": r.analog_time}
    finally:
        _backend.DEFAULT = saved
    return res


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200])
    p.add_argument("--alpha", type=float, default=4.25)
    p.add_argument("--repeat", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--json", action="store_true", help="emit raw numbers as JSON")
    args = p.parse_args(argv)

    rows = [bench_size(n, args.alpha, args.repeat, args.seed) for n in args.sizes]
    solves = {n: bench_solve(n, args.seed) for n in args.sizes}
    if args.json:
        print(json.dumps({"kernels": rows, "solves": solves}, indent=2))
        return
    have_c = "cython" in _backend.BACKENDS
    print(f"{'N':>5} {'M':>5} {'numpy step':>12} {'cython step':>12} {'speedup':>8}"
          f" {'numpy solve':>12} {'cython solve':>13}")
    for r in rows:
        n = r["N"]
        py_step = r["python_step_us"]
        c_step = r.get("cython_step_us", float("nan"))
        py_solve = solves[n]["python"]["wall_s"]
        c_solve = solves[n].get("cython", {}).get("wall_s", float("nan"))
        print(f"{n:>5} {r['M']:>5} {py_step:>10.1f}us {c_step:>10.1f}us"
              f" {py_step / c_step:>7.1f}x {py_solve:>11.3f}s {c_solve:>12.3f}s")
    if not have_c:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
