"""CNF formulas: representation, DIMACS I/O, random instances, 3-SAT reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, TextIO

import numpy as np

Literal = tuple[int, int]
Clause = tuple[Literal, ...]


class FormulaError(ValueError):
    """Invalid formula or DIMACS input."""


class MalformedHeader(FormulaError):
    pass


class ClauseCountMismatch(FormulaError):
    pass


class VariableOutOfRange(FormulaError):
    pass


class EmptyClause(FormulaError):
    pass


class DuplicateVariableInClause(FormulaError):
    pass


@dataclass(frozen=True)
class Formula:
    """Immutable CNF formula over ``num_vars`` variables.

    Each clause is a tuple of ``(var_index, polarity)`` pairs with a 0-based
    variable index and polarity ``+1`` (positive literal) or ``-1`` (negated).
    """

    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise FormulaError(f"num_vars must be positive, got {self.num_vars}")
        normalized = []
        for m, clause in enumerate(self.clauses):
            clause = tuple((int(v), int(p)) for v, p in clause)
            if not clause:
                raise EmptyClause(f"clause {m} is empty")
            seen = set()
            for v, p in clause:
                if not 0 <= v < self.num_vars:
                    raise VariableOutOfRange(
                        f"clause {m}: variable {v + 1} outside 1..{self.num_vars}")
                if p not in (1, -1):
                    raise FormulaError(f"clause {m}: polarity must be +1 or -1, got {p}")
                if v in seen:
                    raise DuplicateVariableInClause(
                        f"clause {m}: variable {v + 1} appears more than once")
                seen.add(v)
            normalized.append(clause)
        object.__setattr__(self, "clauses", tuple(normalized))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def max_clause_width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def matrix(self) -> np.ndarray:
        """Dense M x N clause matrix with entries in {-1, 0, +1}."""
        c = np.zeros((self.num_clauses, self.num_vars), dtype=np.int8)
        for m, clause in enumerate(self.clauses):
            for v, p in clause:
                c[m, v] = p
        return c

    @cached_property
    def packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR view ``(start, var, sign)``: clause m owns ``start[m]:start[m+1]``."""
        lengths = [len(c) for c in self.clauses]
        start = np.zeros(len(lengths) + 1, dtype=np.int32)
        np.cumsum(lengths, out=start[1:])
        var = np.array([v for c in self.clauses for v, _ in c], dtype=np.int32)
        sign = np.array([p for c in self.clauses for _, p in c], dtype=np.float64)
        for a in (start, var, sign):
            a.setflags(write=False)
        return start, var, sign

    @cached_property
    def occurrences(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Variable-major CSR ``(start, clause, sign)`` of literal occurrences."""
        per_var: list[list[tuple[int, int]]] = [[] for _ in range(self.num_vars)]
        for m, clause in enumerate(self.clauses):
            for v, p in clause:
                per_var[v].append((m, p))
        start = np.zeros(self.num_vars + 1, dtype=np.int32)
        np.cumsum([len(o) for o in per_var], out=start[1:])
        clause = np.array([m for o in per_var for m, _ in o], dtype=np.int32)
        sign = np.array([p for o in per_var for _, p in o], dtype=np.int32)
        return start, clause, sign


@dataclass(frozen=True)
class Assignment:
    """Boolean assignment; ``bits[i]`` is True iff x_i = 1 (s_i = +1)."""

    bits: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    def __len__(self):
        return len(self.bits)

    def to_literals(self) -> list[int]:
        """Signed 1-based DIMACS literals."""
        return [i + 1 if b else -(i + 1) for i, b in enumerate(self.bits)]

    @classmethod
    def from_int(cls, value: int, n: int) -> "Assignment":
        return cls(tuple(bool((value >> i) & 1) for i in range(n)))


def parse_dimacs(text: str | TextIO) -> Formula:
    """Parse DIMACS CNF from a string or text stream.

    Comment lines (``c ...``) may appear anywhere; a ``%`` line ends the
    clause section (SATLIB convention).
    """
    if not isinstance(text, str):
        text = text.read()
    header = None
    clauses: list[list[Literal]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise MalformedHeader(f"line {lineno}: second problem line")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise MalformedHeader(f"line {lineno}: expected 'p cnf N M', got {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedHeader(f"line {lineno}: non-integer N or M in {line!r}") from None
            if n < 1 or m < 0:
                raise MalformedHeader(f"line {lineno}: need N >= 1 and M >= 0, got {line!r}")
            header = (n, m)
            continue
        if header is None:
            raise MalformedHeader(f"line {lineno}: clause data before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise FormulaError(f"line {lineno}: invalid literal {tok!r}") from None
            if lit == 0:
                clauses.append(_close_clause(current, header[0], len(clauses), lineno))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise MalformedHeader("missing 'p cnf N M' header")
    if current:
        clauses.append(_close_clause(current, header[0], len(clauses), None))
    n, m = header
    if len(clauses) != m:
        raise ClauseCountMismatch(f"header declares {m} clauses, found {len(clauses)}")
    return Formula(n, tuple(tuple(c) for c in clauses))


def _close_clause(lits: list[int], n: int, index: int, lineno) -> list[Literal]:
    where = f"line {lineno}" if lineno else "end of input"
    if not lits:
        raise EmptyClause(f"{where}: empty clause (bare 0)")
    seen = set()
    out = []
    for lit in lits:
        v = abs(lit)
        if v > n:
            raise VariableOutOfRange(f"{where}: literal {lit} exceeds N={n}")
        if v in seen:
            raise DuplicateVariableInClause(f"{where}: variable {v} repeated in clause {index + 1}")
        seen.add(v)
        out.append((v - 1, 1 if lit > 0 else -1))
    return out


def emit_dimacs(f: Formula, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.num_vars} {f.num_clauses}")
    for clause in f.clauses:
        lines.append(" ".join(str((v + 1) * p) for v, p in clause) + " 0")
    return "\n".join(lines) + "\n"


def random_ksat(n: int, alpha: float, k: int, seed: int) -> Formula:
    """Uniform random k-SAT with ``floor(alpha * n)`` clauses.

    Variables within a clause are distinct; duplicate clauses may occur.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if k > n:
        raise ValueError(f"clause width k={k} exceeds number of variables n={n}")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    m = math.floor(alpha * n + 1e-9)
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    clauses = []
    for _ in range(m):
        vs = rng.choice(n, size=k, replace=False)
        ps = rng.integers(0, 2, size=k) * 2 - 1
        clauses.append(tuple(zip(vs.tolist(), ps.tolist())))
    return Formula(n, tuple(clauses))


def reduce_to_3sat(f: Formula) -> tuple[Formula, int]:
    """Split every clause wider than 3 into an equisatisfiable chain.

    ``(l1 | ... | lk)`` becomes ``(l1 | l2 | y1) & (~y1 | l3 | y2) & ... &
    (~y_{k-3} | l_{k-1} | lk)``. Fresh variables are numbered after the
    originals, so the first ``original_var_count`` bits of a solution to the
    result solve ``f``.
    """
    out: list[Clause] = []
    nxt = f.num_vars
    for clause in f.clauses:
        k = len(clause)
        if k <= 3:
            out.append(clause)
            continue
        fresh = list(range(nxt, nxt + k - 3))
        nxt += k - 3
        out.append((clause[0], clause[1], (fresh[0], 1)))
        for j in range(1, k - 3):
            out.append(((fresh[j - 1], -1), clause[j + 1], (fresh[j], 1)))
        out.append(((fresh[-1], -1), clause[k - 2], clause[k - 1]))
    return Formula(nxt, tuple(out)), f.num_vars


def project_assignment(x: Assignment, original_var_count: int) -> Assignment:
    return Assignment(x.bits[:original_var_count])


def evaluate(f: Formula, x: Assignment | Sequence[bool]) -> list[int]:
    """Indices of clauses not satisfied by ``x``."""
    bits = x.bits if isinstance(x, Assignment) else tuple(bool(b) for b in x)
    if len(bits) != f.num_vars:
        raise ValueError(f"assignment has {len(bits)} bits, formula has {f.num_vars} variables")
    return [m for m, clause in enumerate(f.clauses)
            if not any(bits[v] == (p > 0) for v, p in clause)]
