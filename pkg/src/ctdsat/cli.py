"""Command-line front end: ``ctdsat {solve,gen,bench,reduce}``.

Exit codes: 10 satisfiable, 0 unknown or success, 1 usage/parse error,
2 internal failure. 20 is never used since the solver cannot prove UNSAT.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Sequence

from .bench import ExperimentSpec, run_experiment
from .dynamics import MODE_NAMES, build_mode, mode_name
from .formula import FormulaError, emit_dimacs, parse_dimacs, random_ksat, reduce_to_3sat
from .integrator import IntegratorConfig
from .solver import SolverConfig, SolverFailure, ensemble_solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2
EXIT_SAT = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; this CLI reserves 2 for internal failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctdsat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a DIMACS CNF file")
    s.add_argument("input", help="DIMACS file, or - for stdin")
    s.add_argument("--mode", choices=MODE_NAMES, default="exponential")
    s.add_argument("--tmax", type=_positive(float), default=1e4, help="analog time limit")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--a-max", type=_positive(float), default=None,
                   help="clamp on auxiliary weights (required for saturating)")
    s.add_argument("--q", type=_positive(float), default=1.0, help="saturating charge rate")
    s.add_argument("--delta0", type=float, default=1.0, help="delayed mode look-back")
    s.add_argument("--doubling", action="store_true",
                   help="double the delay whenever the search stalls")
    s.add_argument("--ensemble", type=_positive(int), default=1)
    s.add_argument("--max-steps", type=_positive(int), default=1_000_000)
    s.add_argument("--atol", type=_positive(float), default=1e-6)
    s.add_argument("--rtol", type=_positive(float), default=1e-6)
    s.add_argument("--trajectory", metavar="CSV", help="write accepted samples to CSV")
    s.add_argument("--traj-stride", type=_positive(int), default=1,
                   help="keep every k-th sample in the CSV")
    s.add_argument("--json", action="store_true", help="print a JSON result instead")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="generate a random k-SAT instance")
    g.add_argument("n", type=int)
    g.add_argument("out", nargs="?", default="-", help="output path (default stdout)")
    g.add_argument("--alpha", type=float, default=4.25, help="clause-to-variable ratio")
    g.add_argument("-k", type=int, default=3, help="clause width")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run an analog-time experiment")
    b.add_argument("--spec", help="experiment JSON; inline flags are ignored when given")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--sizes", type=int, nargs="+", default=[10])
    b.add_argument("--modes", nargs="+", choices=MODE_NAMES, default=["exponential"])
    b.add_argument("--instances", type=_positive(int), default=100)
    b.add_argument("--alpha", type=float, default=4.25)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--tmax", type=_positive(float), default=1e4)
    b.add_argument("--a-max", type=_positive(float), default=None)
    b.add_argument("--q", type=_positive(float), default=1.0)
    b.add_argument("--delta0", type=float, default=1.0)
    b.add_argument("--doubling", action="store_true")
    b.add_argument("--no-filter", action="store_true",
                   help="keep unsatisfiable instances instead of oracle filtering")
    b.add_argument("--workers", type=_positive(int), default=1)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("reduce", help="rewrite a k-SAT file as 3-SAT")
    r.add_argument("input")
    r.add_argument("out", nargs="?", default="-")
    r.set_defaults(func=cmd_reduce)
    return p


def _read_formula(path):
    try:
        if path == "-":
            return parse_dimacs(sys.stdin)
        with open(path) as fh:
            return parse_dimacs(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except FormulaError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def write_trajectory_csv(path, traj, n, m, stride=1):
    header = (["t"] + [f"s_{i}" for i in range(n)] + [f"a_{j}" for j in range(m)]
              + ["V", "unsat"])
    samples = list(traj.samples())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for idx, (t, y, V, unsat) in enumerate(samples):
            # the final sample is kept regardless of the stride
            if idx % stride and idx != len(samples) - 1:
                continue
            w.writerow([repr(t)] + [repr(float(x)) for x in y] + [repr(V), unsat])


def cmd_solve(args) -> int:
    f = _read_formula(args.input)
    try:
        mode = build_mode(args.mode, a_max=args.a_max, q=args.q, delta=args.delta0,
                          doubling=args.doubling)
        cfg = SolverConfig(aux_mode=mode, t_max=args.tmax, seed=args.seed,
                           ensemble_size=args.ensemble, max_steps=args.max_steps,
                           integrator=IntegratorConfig(abs_tol=args.atol, rel_tol=args.rtol),
                           record_trajectory=args.trajectory is not None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = ensemble_solve(f, cfg)
    if args.trajectory is not None:
        try:
            write_trajectory_csv(args.trajectory, res.trajectory, f.num_vars, f.num_clauses,
                                 args.traj_stride)
        except OSError as exc:
            raise UsageError(f"cannot write {args.trajectory}: {exc.strerror}") from exc
    if args.json:
        out = {
            "status": res.status.value,
            "analog_time": res.analog_time,
            "unsat_count": res.unsat_count,
            "seed": res.seed,
            "mode": mode_name(mode),
            "steps": res.steps,
            "assignment": res.assignment.to_literals(),
        }
        print(json.dumps(out))
    elif res.satisfied:
        print("s SATISFIABLE")
        print("v " + " ".join(map(str, res.assignment.to_literals())) + " 0")
    else:
        print("s UNKNOWN")
        print(f"c minimum unsatisfied clauses: {res.unsat_count}")
    return EXIT_SAT if res.satisfied else EXIT_OK


def cmd_gen(args) -> int:
    try:
        f = random_ksat(args.n, args.alpha, args.k, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_text(args.out, emit_dimacs(
        f, comments=[f"random {args.k}-SAT n={args.n} alpha={args.alpha} seed={args.seed}"]))
    return EXIT_OK


def _bench_spec(args) -> ExperimentSpec:
    if args.spec is not None:
        try:
            with open(args.spec) as fh:
                return ExperimentSpec.from_dict(json.load(fh))
        except OSError as exc:
            raise UsageError(f"cannot read {args.spec}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.spec}: invalid JSON: {exc}") from exc
    d = {
        "sizes": args.sizes, "alpha": args.alpha, "instances_per_size": args.instances,
        "base_seed": args.seed, "filter_satisfiable": not args.no_filter,
        "modes": [{"label": name, "mode": name, "t_max": args.tmax, "a_max": args.a_max,
                   "q": args.q, "delta": args.delta0, "doubling": args.doubling}
                  for name in args.modes],
    }
    return ExperimentSpec.from_dict(d)


def cmd_bench(args) -> int:
    try:
        spec = _bench_spec(args)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid experiment: {exc}") from exc
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {args.out}: {exc.strerror}") from exc
    report = run_experiment(spec, workers=args.workers)
    _write_text(os.path.join(args.out, "summary.json"), report.summary_json())
    _write_text(os.path.join(args.out, "instances.csv"), report.rows_csv())
    for label in report.modes:
        for n in report.sizes:
            st = report.stats(label, n)
            med = st["analog_time_median"]
            print(f"{label:>12} N={n:<4} solved {st['solve_fraction']:.3f}"
                  f"  median t {med if med is None else f'{med:.4g}'}")
    return EXIT_OK


def cmd_reduce(args) -> int:
    f = _read_formula(args.input)
    g, n0 = reduce_to_3sat(f)
    fresh = g.num_vars - n0
    _write_text(args.out, emit_dimacs(g))
    print(f"c fresh variables: {fresh}", file=sys.stderr if args.out == "-" else sys.stdout)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ctdsat: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"ctdsat: internal failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # anything unexpected counts as an internal failure
        print(f"ctdsat: internal failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
