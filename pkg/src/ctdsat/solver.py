"""Solve orchestration: initial conditions, digital verification, MaxSAT tracking,
delay doubling and ensembles."""

from __future__ import annotations

import enum
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import AuxMode, CTDSField, Delayed, Exponential
from .formula import Assignment, Formula, evaluate
from .integrator import IntegratorConfig, StepUnderflow, Trajectory, integrate


class SolverFailure(RuntimeError):
    """Integration broke down (e.g. step-size underflow) or verification failed."""


class Status(str, enum.Enum):
    SATISFIED = "satisfied"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class SolverConfig:
    aux_mode: AuxMode = Exponential()
    t_max: float = 1e4
    seed: int = 0
    a0: float = 1.0
    s0: Optional[Sequence[float]] = None
    integrator: IntegratorConfig = IntegratorConfig()
    stuck_window: float = 10.0
    ensemble_size: int = 1
    # accepted-step budget; None means unbounded
    max_steps: Optional[int] = 1_000_000
    record_trajectory: bool = False

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.a0 > 0:
            raise ValueError("a0 must be positive")
        if not self.stuck_window > 0:
            raise ValueError("stuck_window must be positive")
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be at least 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.s0 is not None:
            object.__setattr__(self, "s0", tuple(float(x) for x in self.s0))
        a_max = getattr(self.aux_mode, "a_max", None)
        if a_max is not None and not a_max > self.a0:
            raise ValueError(f"a_max={a_max} must exceed a0={self.a0}")


@dataclass
class SolveResult:
    status: Status
    assignment: Assignment
    unsat_count: int
    analog_time: float
    steps: int
    seed: int
    trajectory: Optional[Trajectory] = None
    peak_abs_s: float = 0.0
    delta: Optional[float] = None
    doublings: int = 0
    budget_exhausted: bool = False
    cancelled: bool = False
    wall_time: float = 0.0

    @property
    def satisfied(self) -> bool:
        return self.status is Status.SATISFIED


def digital_snapshot(s) -> Assignment:
    """Threshold soft spins: bit i is ``s_i > 0`` (0 maps to False)."""
    return Assignment(tuple(np.asarray(s) > 0.0))


def initial_spins(n: int, seed: int) -> np.ndarray:
    """Uniform draw from the open cube (-1, 1)^n."""
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    s = rng.uniform(-1.0, 1.0, n)
    while np.any(np.abs(s) >= 1.0):
        bad = np.abs(s) >= 1.0
        s[bad] = rng.uniform(-1.0, 1.0, int(bad.sum()))
    return s


def solve(f: Formula, cfg: SolverConfig = SolverConfig(), *,
          stop_after: Optional[Callable[[], float]] = None) -> SolveResult:
    """Integrate the CTDS from one initial condition.

    ``stop_after()`` returns an analog time beyond which the run is abandoned
    (used by ensembles once another member has already succeeded).
    """
    wall0 = time.perf_counter()
    n, m = f.num_vars, f.num_clauses
    mode = cfg.aux_mode
    if cfg.s0 is not None:
        s0 = np.array(cfg.s0, dtype=np.float64)
        if s0.shape != (n,) or np.any(np.abs(s0) > 1.0):
            raise ValueError(f"s0 must be {n} values in [-1, 1]")
    else:
        s0 = initial_spins(n, cfg.seed)
    y0 = np.concatenate([s0, np.full(m, cfg.a0)])

    delayed = isinstance(mode, Delayed) and mode.delta is not None
    span = None
    if not cfg.record_trajectory:
        span = 0.0
        if delayed and 0 < mode.delta < math.inf:
            span = mode.delta
    traj = Trajectory(n_lookup=n, max_span=span)
    fld = CTDSField(f, mode, history=traj)
    doubling = delayed and mode.doubling

    stats = [0.0, math.inf, m]  # peak |s| before clamp, V, unsat
    track = {
        "peak": 0.0, "best": m + 1, "best_bits": None, "solved_at": None,
        "steps": -1, "runmin": math.inf, "ref_t": 0.0, "ref_min": math.inf,
        "doublings": 0, "budget": False, "cancelled": False,
    }

    def project(t, y):
        stats[:] = fld.accept(y)

    def on_accept(t, y, tr):
        peak, V, unsat = stats
        tr.annotate(V, unsat)
        track["steps"] += 1
        if track["steps"] > 0:
            track["peak"] = max(track["peak"], peak)
        if unsat < track["best"]:
            track["best"] = unsat
            track["best_bits"] = y[:n] > 0.0
        if unsat == 0:
            track["solved_at"] = t
            return True
        if doubling:
            _check_stuck(t, y, V)
        if cfg.max_steps is not None and track["steps"] >= cfg.max_steps:
            track["budget"] = True
            return True
        if stop_after is not None and t > stop_after():
            track["cancelled"] = True
            return True
        return False

    def _check_stuck(t, y, V):
        track["runmin"] = min(track["runmin"], V)
        if t - track["ref_t"] < cfg.stuck_window:
            return
        stuck = track["runmin"] > 0.99 * track["ref_min"]
        if not stuck and math.isfinite(fld.a_max):
            open_ = ~fld.kernel.satisfied(y[:n])
            stuck = bool(np.all(y[n:][open_] >= fld.a_max * (1 - 1e-12)))
        if stuck:
            fld.double_delay(t, mode.growth)
            track["doublings"] += 1
            if traj.max_span is not None:
                traj.max_span = fld.delta
        track["ref_t"], track["ref_min"] = t, track["runmin"]

    try:
        integrate(fld, y0, cfg.t_max, cfg.integrator, on_accept, project=project,
                  trajectory=traj)
    except StepUnderflow as exc:
        raise SolverFailure(f"integration failed (seed {cfg.seed}): {exc}") from exc

    t_last = traj.t_end
    bits = track["best_bits"]
    assignment = Assignment(tuple(bits))
    unsat = len(evaluate(f, assignment))
    if unsat != track["best"]:
        raise SolverFailure(
            f"digital check disagrees: kernel counted {track['best']}, evaluate found {unsat}")
    solved = track["solved_at"] is not None
    return SolveResult(
        status=Status.SATISFIED if solved else Status.TIMED_OUT,
        assignment=assignment,
        unsat_count=unsat,
        analog_time=track["solved_at"] if solved else t_last,
        steps=track["steps"],
        seed=cfg.seed,
        trajectory=traj if cfg.record_trajectory else None,
        peak_abs_s=track["peak"],
        delta=fld.delta,
        doublings=track["doublings"],
        budget_exhausted=track["budget"],
        cancelled=track["cancelled"],
        wall_time=time.perf_counter() - wall0,
    )


def ensemble_solve(f: Formula, cfg: SolverConfig = SolverConfig(), *,
                   workers: int = 1) -> SolveResult:
    """Run ``cfg.ensemble_size`` trajectories with seeds ``seed, seed+1, ...``.

    Returns the satisfied member with the smallest analog time, otherwise the
    member with the fewest unsatisfied clauses; ties go to the lowest seed.
    A member stops early once its analog time exceeds that of a solution
    already found, so the outcome does not depend on scheduling.
    """
    if cfg.ensemble_size == 1:
        return solve(f, cfg)
    lock = threading.Lock()
    bound = [math.inf]

    def current_bound():
        return bound[0]

    def member(i):
        res = solve(f, replace(cfg, seed=cfg.seed + i, ensemble_size=1),
                    stop_after=current_bound)
        if res.satisfied:
            with lock:
                bound[0] = min(bound[0], res.analog_time)
        return res

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(member, range(cfg.ensemble_size)))
    else:
        results = [member(i) for i in range(cfg.ensemble_size)]
    solved = [r for r in results if r.satisfied]
    if solved:
        return min(solved, key=lambda r: (r.analog_time, r.seed))
    # only solutions trigger cancellation, so no member is cut short here
    return min(results, key=lambda r: (r.unsat_count, r.seed))
