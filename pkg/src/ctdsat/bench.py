"""Experiment harness: brute-force oracle, satisfiable suites, mode comparisons,
scaling fits and report export."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import mean, median
from typing import Any, Sequence

import numpy as np

from . import _backend
from .dynamics import build_mode
from .formula import Assignment, Formula, random_ksat
from .integrator import IntegratorConfig
from .solver import SolverConfig, ensemble_solve

ORACLE_MAX_VARS = 26
CSV_HEADER = ["mode", "N", "M", "instance_seed", "status", "analog_time", "unsat_count", "steps"]


class OracleBoundError(ValueError):
    pass


def brute_force_oracle(f: Formula, backend: str | None = None) -> tuple[bool, int, Assignment]:
    """Exhaustive MaxSAT: ``(satisfiable, min_unsat, witness)``."""
    n = f.num_vars
    if n > ORACLE_MAX_VARS:
        raise OracleBoundError(
            f"brute-force oracle limited to N <= {ORACLE_MAX_VARS}, got N={n}")
    best, witness = _backend.get(backend).maxsat_enumerate(n, *f.occurrences, f.num_clauses)
    return best == 0, int(best), Assignment.from_int(int(witness), n)


def instance_seed(base_seed: int, n: int, j: int) -> int:
    words = np.random.SeedSequence([base_seed & 0xFFFFFFFFFFFFFFFF, n, j]).generate_state(2)
    return (int(words[0]) << 31) ^ int(words[1])


@dataclass(frozen=True)
class ExperimentSpec:
    sizes: Sequence[int]
    modes: Sequence[tuple[str, SolverConfig]]
    alpha: float = 4.25
    instances_per_size: int = 100
    base_seed: int = 0
    filter_satisfiable: bool = True
    k: int = 3
    max_candidates: int = 100

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if self.instances_per_size < 1:
            raise ValueError("instances_per_size must be at least 1")
        if not self.modes:
            raise ValueError("at least one mode is required")
        labels = [label for label, _ in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels in {labels}")
        if self.filter_satisfiable:
            too_big = [n for n in self.sizes if n > ORACLE_MAX_VARS]
            if too_big:
                raise OracleBoundError(
                    f"satisfiability filtering needs N <= {ORACLE_MAX_VARS}; got sizes {too_big}")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentSpec":
        d = dict(d)
        modes = []
        for entry in d.pop("modes", [{"label": "exponential", "mode": "exponential"}]):
            entry = dict(entry)
            label = entry.pop("label", entry.get("mode", "exponential"))
            modes.append((label, config_from_dict(entry)))
        unknown = set(d) - {"sizes", "alpha", "instances_per_size", "base_seed",
                            "filter_satisfiable", "k", "max_candidates"}
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(modes=modes, **d)


def config_from_dict(d: dict[str, Any]) -> SolverConfig:
    d = dict(d)
    mode = build_mode(d.pop("mode", "exponential"), a_max=d.pop("a_max", None),
                      q=d.pop("q", 1.0), delta=d.pop("delta", 1.0),
                      doubling=d.pop("doubling", False))
    integ = {k: d.pop(k) for k in ("abs_tol", "rel_tol", "h_init", "h_min", "h_max")
             if k in d}
    cfg = SolverConfig(
        aux_mode=mode,
        t_max=float(d.pop("t_max", 1e4)),
        a0=float(d.pop("a0", 1.0)),
        stuck_window=float(d.pop("stuck_window", 10.0)),
        ensemble_size=int(d.pop("ensemble", 1)),
        max_steps=d.pop("max_steps", 1_000_000),
        integrator=IntegratorConfig(**integ),
    )
    if d:
        raise ValueError(f"unknown mode keys: {sorted(d)}")
    return cfg


@dataclass(frozen=True)
class InstanceRow:
    mode: str
    N: int
    M: int
    instance_seed: int
    status: str
    analog_time: float
    unsat_count: int
    steps: int
    wall_time: float = field(default=0.0, compare=False)

    @property
    def solved(self) -> bool:
        return self.status == "satisfied"


@dataclass
class ExperimentReport:
    rows: list[InstanceRow]
    sizes: list[int]
    modes: list[str]

    def select(self, mode: str, n: int) -> list[InstanceRow]:
        return [r for r in self.rows if r.mode == mode and r.N == n]

    def stats(self, mode: str, n: int) -> dict[str, Any]:
        rows = self.select(mode, n)
        solved = [r.analog_time for r in rows if r.solved]
        return {
            "solve_fraction": len(solved) / len(rows) if rows else 0.0,
            "analog_time_median": median(solved) if solved else None,
            "analog_time_mean": mean(solved) if solved else None,
            "n": len(rows),
            "steps_median": median(r.steps for r in rows) if rows else None,
            "wall_time_median": median(r.wall_time for r in rows) if rows else None,
        }

    def solve_fraction(self, mode: str, n: int) -> float:
        return self.stats(mode, n)["solve_fraction"]

    def summary(self) -> dict[str, dict[str, dict[str, Any]]]:
        """Deterministic summary (no wall-clock fields)."""
        keep = ("solve_fraction", "analog_time_median", "analog_time_mean", "n")
        return {mode: {str(n): {k: self.stats(mode, n)[k] for k in keep} for n in self.sizes}
                for mode in self.modes}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=False) + "\n"

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.mode, r.N, r.M, r.instance_seed, r.status, repr(r.analog_time),
                        r.unsat_count, r.steps])
        return buf.getvalue()


def generate_suite(spec: ExperimentSpec, n: int) -> list[tuple[int, Formula]]:
    """Seeded instances for one size, oracle-filtered when requested."""
    out = []
    j = 0
    budget = spec.instances_per_size * spec.max_candidates
    while len(out) < spec.instances_per_size:
        if j >= budget:
            raise RuntimeError(
                f"found only {len(out)} satisfiable instances at N={n} after {j} draws")
        seed = instance_seed(spec.base_seed, n, j)
        j += 1
        f = random_ksat(n, spec.alpha, spec.k, seed)
        if spec.filter_satisfiable and not brute_force_oracle(f)[0]:
            continue
        out.append((seed, f))
    return out


def _run_one(task):
    label, n, seed, f, cfg = task
    res = ensemble_solve(f, replace(cfg, seed=seed))
    return InstanceRow(label, n, f.num_clauses, seed, res.status.value, res.analog_time,
                       res.unsat_count, res.steps, res.wall_time)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Run every mode on the same seeded instances and initial conditions."""
    tasks = []
    for n in spec.sizes:
        suite = generate_suite(spec, n)
        for label, cfg in spec.modes:
            tasks.extend((label, n, seed, f, cfg) for seed, f in suite)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        rows = [_run_one(t) for t in tasks]
    return ExperimentReport(rows, list(spec.sizes), [label for label, _ in spec.modes])


def fit_scaling(report: ExperimentReport, mode_label: str,
                model: str = "power") -> tuple[float, float]:
    """Least-squares fit of median solved analog time against N.

    ``model="power"`` fits ``log t = p log N + c`` and returns ``(p, r^2)``;
    ``model="exponential"`` fits ``log t = b N + c`` and returns ``(b, r^2)``.
    """
    pts = [(n, report.stats(mode_label, n)["analog_time_median"]) for n in report.sizes]
    return fit_points([n for n, t in pts if t], [t for _, t in pts if t], model)


def fit_points(sizes, times, model: str = "power") -> tuple[float, float]:
    if len(sizes) < 3:
        raise ValueError(f"scaling fit needs at least 3 sizes with solved runs, got {len(sizes)}")
    if model == "power":
        x = np.log(np.asarray(sizes, dtype=float))
    elif model == "exponential":
        x = np.asarray(sizes, dtype=float)
    else:
        raise ValueError(f"unknown model {model!r}")
    y = np.log(np.asarray(times, dtype=float))
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2

