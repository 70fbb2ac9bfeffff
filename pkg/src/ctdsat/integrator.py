"""Adaptive Cash-Karp 5(4) integration with interpolable trajectory history."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._pykernels import A, B5, C, E


class StepUnderflow(RuntimeError):
    """The controller asked for a step below ``h_min``."""


class HistoryError(ValueError):
    """Lookup outside the recorded span of a trajectory."""


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-6
    rel_tol: float = 1e-6
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1e-1
    safety: float = 0.9

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not 0 < self.safety < 1:
            raise ValueError("safety must lie in (0, 1)")


class Trajectory:
    """Accepted integration samples ``(t, y, dy/dt, V, unsat)``.

    ``lookup`` interpolates the first ``n_lookup`` components of ``y`` with
    cubic Hermite polynomials built from the stored derivatives. When
    ``max_span`` is set, samples older than ``t_latest - max_span`` are
    dropped, keeping one bracketing sample.
    """

    def __init__(self, n_lookup: int | None = None, max_span: float | None = None):
        self.n_lookup = n_lookup
        self.max_span = max_span
        self._t: list[float] = []
        self._y: list[np.ndarray] = []
        self._dy: list[np.ndarray] = []
        self._V: list[float] = []
        self._unsat: list[int] = []
        self._head = 0

    def __len__(self):
        return len(self._t) - self._head

    def append(self, t: float, y, dy, V: float = math.nan, unsat: int = -1):
        if self._t and t <= self._t[-1]:
            raise ValueError(f"sample times must increase: {t} after {self._t[-1]}")
        self._t.append(float(t))
        self._y.append(np.array(y, dtype=np.float64))
        self._dy.append(np.array(dy, dtype=np.float64))
        self._V.append(V)
        self._unsat.append(unsat)
        if self.max_span is not None:
            self._prune(t - self.max_span)

    def annotate(self, V: float, unsat: int):
        """Attach potential and unsat count to the latest sample."""
        self._V[-1] = V
        self._unsat[-1] = unsat

    def _prune(self, t_keep: float):
        # the last sample at or before t_keep stays as the bracket
        j = bisect.bisect_right(self._t, t_keep, lo=self._head) - 1
        if j > self._head:
            self._head = j
            if self._head > 1024 and self._head > len(self._t) // 2:
                for buf in (self._t, self._y, self._dy, self._V, self._unsat):
                    del buf[: self._head]
                self._head = 0

    @property
    def t_start(self) -> float:
        return self._t[self._head]

    @property
    def t_end(self) -> float:
        return self._t[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array(self._t[self._head:])

    @property
    def states(self) -> np.ndarray:
        return np.array(self._y[self._head:])

    @property
    def derivatives(self) -> np.ndarray:
        return np.array(self._dy[self._head:])

    @property
    def potentials(self) -> np.ndarray:
        return np.array(self._V[self._head:])

    @property
    def unsat_counts(self) -> np.ndarray:
        return np.array(self._unsat[self._head:], dtype=np.int64)

    def samples(self):
        """Iterate ``(t, y, V, unsat)`` over retained samples."""
        for j in range(self._head, len(self._t)):
            yield self._t[j], self._y[j], self._V[j], self._unsat[j]

    def lookup(self, tau: float) -> np.ndarray:
        if not self._t:
            raise HistoryError("empty trajectory")
        k = self.n_lookup
        t0, t1 = self._t[self._head], self._t[-1]
        slack = 1e-12 * max(1.0, abs(t1))
        if tau < t0 - slack or tau > t1 + slack:
            raise HistoryError(f"time {tau} outside recorded span [{t0}, {t1}]")
        j = bisect.bisect_left(self._t, tau, lo=self._head)
        if j < len(self._t) and self._t[j] == tau:
            return self._y[j][:k].copy()
        if j <= self._head:
            return self._y[self._head][:k].copy()
        if j >= len(self._t):
            return self._y[-1][:k].copy()
        ta, tb = self._t[j - 1], self._t[j]
        dt = tb - ta
        th = (tau - ta) / dt
        th2, th3 = th * th, th * th * th
        h00 = 2 * th3 - 3 * th2 + 1
        h10 = th3 - 2 * th2 + th
        h01 = -2 * th3 + 3 * th2
        h11 = th3 - th2
        return (h00 * self._y[j - 1][:k] + h10 * dt * self._dy[j - 1][:k]
                + h01 * self._y[j][:k] + h11 * dt * self._dy[j][:k])


def lookup(traj: Trajectory, tau: float) -> np.ndarray:
    return traj.lookup(tau)


@dataclass
class StepResult:
    accepted: bool
    t: float
    y: np.ndarray
    error: float
    h_next: float


def cash_karp(field: Callable, t: float, y: np.ndarray, f0: np.ndarray, h: float,
              atol: float, rtol: float) -> tuple[np.ndarray, float]:
    """Generic Cash-Karp trial step for any ``field(t, y)``."""
    ks = [f0]
    for i in range(1, 6):
        yi = y + h * sum(aij * kj for aij, kj in zip(A[i], ks))
        ks.append(np.asarray(field(t + C[i] * h, yi), dtype=np.float64))
    y5 = y + h * sum(b * k for b, k in zip(B5, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(E, ks) if e != 0.0)
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
    return y5, float(np.sqrt(np.mean((err / scale) ** 2)))


def _controller(h: float, err: float, cfg: IntegratorConfig) -> float:
    if err == 0.0:
        return 5.0 * h
    factor = cfg.safety * err ** -0.2
    return h * min(5.0, max(0.1, factor))


def step(field, t: float, y: np.ndarray, h: float, cfg: IntegratorConfig,
         f0: np.ndarray | None = None) -> StepResult:
    """Attempt one step of size ``h``; raise :class:`StepUnderflow` if hopeless."""
    y = np.asarray(y, dtype=np.float64)
    if f0 is None:
        f0 = np.asarray(field(t, y), dtype=np.float64)
    fused = getattr(field, "fused_step", None)
    if fused is not None:
        y5, err = fused(t, y, f0, h, cfg.abs_tol, cfg.rel_tol)
    else:
        y5, err = cash_karp(field, t, y, f0, h, cfg.abs_tol, cfg.rel_tol)
    if not math.isfinite(err):
        err = math.inf
    h_next = _controller(h, err, cfg) if math.isfinite(err) else 0.1 * h
    if err <= 1.0:
        return StepResult(True, t + h, y5, err, h_next)
    if h_next < cfg.h_min:
        raise StepUnderflow(f"step size {h_next:.3e} below h_min={cfg.h_min:.1e} at t={t:.6g}")
    return StepResult(False, t, y, err, h_next)


def integrate(field, y0, t_end: float, cfg: IntegratorConfig = IntegratorConfig(),
              on_accept: Optional[Callable] = None, *, t0: float = 0.0,
              project: Optional[Callable] = None,
              trajectory: Trajectory | None = None) -> Trajectory:
    """Integrate ``dy/dt = field(t, y)`` from ``t0`` to ``t_end``.

    ``project(t, y)`` may modify an accepted state in place before it is
    recorded; ``on_accept(t, y, traj)`` runs after recording (including the
    initial state) and halts integration by returning True.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")
    traj = trajectory if trajectory is not None else Trajectory()
    t = float(t0)
    y = np.array(y0, dtype=np.float64)
    if project is not None:
        project(t, y)
    f = np.asarray(field(t, y), dtype=np.float64)
    traj.append(t, y, f)
    if on_accept is not None and on_accept(t, y, traj):
        return traj
    max_step = getattr(field, "max_step", None)
    breakpoint_ = getattr(field, "next_breakpoint", None)
    version = getattr(field, "version", None)
    h = cfg.h_init
    while t < t_end:
        target = t_end
        if breakpoint_ is not None:
            target = min(target, breakpoint_(t))
        h_try = min(h, target - t)
        if max_step is not None:
            h_try = min(h_try, max_step(t))
        res = step(field, t, y, h_try, cfg, f0=f)
        if not res.accepted:
            h = min(res.h_next, cfg.h_max)
            continue
        t_new = target if h_try == target - t else res.t
        if t_new <= t:
            raise StepUnderflow(f"time no longer advances at t={t:.17g}")
        t, y = t_new, res.y
        if h_try >= h:
            # steps shortened by t_end, breakpoints or delay limits keep h
            h = min(res.h_next, cfg.h_max)
        if project is not None:
            project(t, y)
        f = np.asarray(field(t, y), dtype=np.float64)
        traj.append(t, y, f)
        if on_accept is not None and on_accept(t, y, traj):
            break
        if version is not None and field.version != version:
            version = field.version
            f = np.asarray(field(t, y), dtype=np.float64)
    return traj
