"""CTDS vector field: clause functions, potential, gradients, auxiliary dynamics.

Soft spins ``s`` live in the hypercube ``[-1, 1]^N``; every clause carries a
positive weight ``a_m``. The spins follow gradient descent on

    V(s, a) = sum_m a_m K_m(s)^2,   K_m(s) = 2^-k_m prod_{i in m} (1 - c_mi s_i)

while the weights grow (or decay) according to an :data:`AuxMode`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _backend
from .formula import Formula


@dataclass(frozen=True)
class State:
    s: np.ndarray
    a: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=np.float64))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.float64))

    def pack(self) -> np.ndarray:
        return np.concatenate([self.s, self.a])


def _check_positive(name, value, allow_none=True):
    if value is None and allow_none:
        return
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class Constant:
    """Frozen weights: plain gradient descent on V."""


@dataclass(frozen=True)
class Exponential:
    """``da/dt = a K``, optionally stopped at the rail ``a_max``."""

    a_max: float | None = None

    def __post_init__(self):
        _check_positive("a_max", self.a_max)


@dataclass(frozen=True)
class Saturating:
    """``da/dt = q K (a_max - a)``: RC-style charging toward ``a_max``, gated by K."""

    a_max: float
    q: float = 1.0

    def __post_init__(self):
        _check_positive("a_max", self.a_max, allow_none=False)
        _check_positive("q", self.q, allow_none=False)


@dataclass(frozen=True)
class Delayed:
    """``da/dt = a [K(s(t)) - K(s(t - delta))]`` over a sliding window.

    The effective window is ``min(t, delta)``; ``delta=math.inf`` reproduces
    :class:`Exponential` and ``delta=0`` freezes the weights. With
    ``doubling=True`` the solver multiplies ``delta`` by ``growth`` each time
    the search stalls.
    """

    delta: float = 1.0
    doubling: bool = False
    growth: float = 2.0
    a_max: float | None = None

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if self.doubling and not (0 < self.delta < math.inf):
            raise ValueError("a doubling schedule needs a finite positive initial delta")
        if not self.growth > 1:
            raise ValueError(f"growth must exceed 1, got {self.growth}")
        _check_positive("a_max", self.a_max)


AuxMode = Union[Constant, Exponential, Saturating, Delayed]


MODE_NAMES = ("exponential", "saturating", "delayed", "constant")


def build_mode(name: str, *, a_max: float | None = None, q: float = 1.0,
               delta: float = 1.0, doubling: bool = False) -> AuxMode:
    """AuxMode from its lowercase name plus the parameters that apply to it."""
    if name == "constant":
        return Constant()
    if name == "exponential":
        return Exponential(a_max)
    if name == "saturating":
        if a_max is None:
            raise ValueError("saturating mode requires a_max")
        return Saturating(a_max, q)
    if name == "delayed":
        return Delayed(delta, doubling=doubling, a_max=a_max)
    raise ValueError(f"unknown mode {name!r}; choose from {', '.join(MODE_NAMES)}")


def mode_name(mode: AuxMode) -> str:
    return type(mode).__name__.lower()


def mode_params(mode: AuxMode) -> tuple[int, float, float]:
    """Kernel encoding ``(code, a_max, q)`` of an :data:`AuxMode`."""
    k = _backend.get()
    if isinstance(mode, Constant):
        return k.CONSTANT, math.inf, 1.0
    if isinstance(mode, Exponential):
        return k.EXPONENTIAL, mode.a_max or math.inf, 1.0
    if isinstance(mode, Saturating):
        return k.SATURATING, mode.a_max, mode.q
    if isinstance(mode, Delayed):
        code = k.CONSTANT if mode.delta == 0 else k.DELAYED
        return code, mode.a_max or math.inf, 1.0
    raise TypeError(f"not an AuxMode: {mode!r}")


def mode_clamp(mode: AuxMode) -> float:
    return mode_params(mode)[1]


def clause_value(f: Formula, s, m: int) -> float:
    if not 0 <= m < f.num_clauses:
        raise IndexError(f"clause index {m} out of range")
    clause = f.clauses[m]
    return math.ldexp(math.prod(1.0 - p * s[v] for v, p in clause), -len(clause))


def potential(f: Formula, state: State) -> float:
    return sum(a * clause_value(f, state.s, m) ** 2 for m, a in enumerate(state.a))


def grad_term(f: Formula, s, m: int, i: int) -> float:
    """-d(K_m^2)/ds_i, by leave-one-out products (no division)."""
    if not 0 <= i < f.num_vars:
        raise IndexError(f"variable index {i} out of range")
    K = clause_value(f, s, m)
    clause = f.clauses[m]
    facs = [1.0 - p * s[v] for v, p in clause]
    pre = [1.0] * (len(facs) + 1)
    suf = [1.0] * (len(facs) + 1)
    for j, x in enumerate(facs):
        pre[j + 1] = pre[j] * x
    for j in range(len(facs) - 1, -1, -1):
        suf[j] = suf[j + 1] * facs[j]
    for j, (v, p) in enumerate(clause):
        if v == i:
            return 2.0 * K * p * math.ldexp(pre[j] * suf[j + 1], -len(clause))
    return 0.0


def _kernel(f: Formula, backend=None):
    start, var, sign = f.packed
    return _backend.get(backend).FieldKernel(start, var, sign, f.num_vars)


def rhs_s(f: Formula, state: State, backend: str | None = None) -> np.ndarray:
    y = state.pack()
    return _kernel(f, backend).field(y, _backend.get(backend).CONSTANT)[: f.num_vars]


def _lookup_fn(history) -> Callable[[float], np.ndarray]:
    if history is None:
        raise ValueError("delayed auxiliary dynamics need a trajectory history")
    return history.lookup if hasattr(history, "lookup") else history


def rhs_a(f: Formula, state: State, mode: AuxMode, history=None,
          backend: str | None = None) -> np.ndarray:
    """da/dt for every clause; ``history(tau)`` supplies s(tau) for delayed modes."""
    fld = CTDSField(f, mode, history=history, backend=backend)
    return fld(state.t, state.pack())[f.num_vars:]


class CTDSField:
    """Joint (s, a) vector field bound to one formula and auxiliary mode.

    Besides ``field(t, y)`` it offers a fused Cash-Karp step, delay-aware
    step limits and the post-step clamp used by the solver.
    """

    def __init__(self, formula: Formula, mode: AuxMode, *, history=None,
                 freeze_s: bool = False, backend: str | None = None):
        self.formula = formula
        self.n = formula.num_vars
        self.m = formula.num_clauses
        self.mode = mode
        self.kernel = _kernel(formula, backend)
        self.code, self.a_max, self.q = mode_params(mode)
        self.delta = mode.delta if isinstance(mode, Delayed) else None
        # the window grows at unit rate from `anchor` until it reaches `delta`
        self.anchor = 0.0
        self.history = history
        self.freeze_s = freeze_s
        self.version = 0
        self._stage_c = _backend.get("python").C

    @property
    def lagged(self) -> bool:
        return self.delta is not None and 0 < self.delta < math.inf

    def window(self, t: float) -> float:
        """Effective delay ``min(delta, t - anchor)`` at time ``t``."""
        return min(self.delta, t - self.anchor)

    def lag_weight(self, t: float) -> float:
        """``1 - d(window)/dt`` on the interval starting at ``t``."""
        return 1.0 if self.lagged and t - self.anchor >= self.delta else 0.0

    def _lagged_K(self, tau: float) -> np.ndarray:
        return self.kernel.clause_values(_lookup_fn(self.history)(tau))

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        w = self.lag_weight(t)
        klag = self._lagged_K(t - self.delta) if w else None
        return self.kernel.field(y, self.code, self.a_max, self.q, klag, w, self.freeze_s)

    def fused_step(self, t, y, f0, h, atol, rtol):
        w = self.lag_weight(t)
        klag = wv = None
        if w:
            klag = np.zeros((6, self.m))
            for i in range(1, 6):
                klag[i] = self._lagged_K(t + self._stage_c[i] * h - self.delta)
            wv = np.full(6, w)
        return self.kernel.cash_karp(y, f0, h, self.code, self.a_max, self.q, klag, wv,
                                     atol, rtol, self.freeze_s)

    def max_step(self, t: float) -> float:
        # lagged stage times must stay inside recorded history
        return self.delta if self.lagged else math.inf

    def next_breakpoint(self, t: float) -> float:
        end = self.anchor + self.delta if self.lagged else math.inf
        return end if t < end else math.inf

    def accept(self, y: np.ndarray) -> tuple[float, float, int]:
        return self.kernel.accept(y, self.a_max)

    def double_delay(self, t: float, growth: float = 2.0) -> float:
        """Grow the target delay at time ``t``.

        The lookback point stays where it is and the window widens at unit
        rate toward the new target, so ``a`` stays continuous and no history
        older than the current window is needed.
        """
        if not self.lagged:
            raise ValueError("delay doubling needs a finite positive delay")
        self.anchor = t - self.window(t)
        self.delta *= growth
        self.version += 1
        return self.delta
