import io

import pytest
from hypothesis import given, settings, strategies as st

from ctdsat.formula import (Assignment, ClauseCountMismatch, DuplicateVariableInClause,
                            EmptyClause, Formula, FormulaError, MalformedHeader,
                            VariableOutOfRange, emit_dimacs, evaluate, parse_dimacs,
                            project_assignment, random_ksat, reduce_to_3sat)

import oracles


def test_parse_basic_with_comments_and_multiline_clause():
    text = "c hello\np cnf 3 2\n1 -2\n 3 0\nc mid\n-1 0\n"
    f = parse_dimacs(text)
    assert f.num_vars == 3
    assert f.clauses == (((0, 1), (1, -1), (2, 1)), ((0, -1),))


def test_parse_accepts_stream_and_percent_terminator():
    f = parse_dimacs(io.StringIO("p cnf 2 1\n1 2 0\n%\n0\n"))
    assert f.num_clauses == 1


def test_final_clause_without_terminator():
    assert parse_dimacs("p cnf 2 1\n1 -2").clauses == (((0, 1), (1, -1)),)


@pytest.mark.parametrize("text, exc", [
    ("1 2 0\n", MalformedHeader),
    ("p cnf 2\n1 0\n", MalformedHeader),
    ("p dnf 2 1\n1 0\n", MalformedHeader),
    ("p cnf x 1\n1 0\n", MalformedHeader),
    ("p cnf 2 1\np cnf 2 1\n1 0\n", MalformedHeader),
    ("", MalformedHeader),
    ("p cnf 2 2\n1 0\n", ClauseCountMismatch),
    ("p cnf 2 1\n1 3 0\n", VariableOutOfRange),
    ("p cnf 2 1\n0\n", EmptyClause),
    ("p cnf 2 1\n1 -1 0\n", DuplicateVariableInClause),
    ("p cnf 2 1\n1 a 0\n", FormulaError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_dimacs(text)


def test_formula_validation():
    with pytest.raises(FormulaError):
        Formula(0, ())
    with pytest.raises(VariableOutOfRange):
        Formula(2, (((2, 1),),))
    with pytest.raises(FormulaError):
        Formula(2, (((0, 2),),))
    with pytest.raises(EmptyClause):
        Formula(2, ((),))


def test_packed_and_matrix_views():
    f = parse_dimacs("p cnf 3 2\n1 -3 0\n2 0\n")
    start, var, sign = f.packed
    assert start.tolist() == [0, 2, 3]
    assert var.tolist() == [0, 2, 1]
    assert sign.tolist() == [1.0, -1.0, 1.0]
    assert f.matrix().tolist() == [[1, 0, -1], [0, 1, 0]]
    assert f.max_clause_width == 2


def test_generated_header_matches_benchmark_size():
    f = random_ksat(50, 4.25, 3, seed=1)
    assert emit_dimacs(f).splitlines()[0] == "p cnf 50 212"


def test_random_ksat_deterministic_and_well_formed():
    a, b = random_ksat(20, 4.25, 3, 7), random_ksat(20, 4.25, 3, 7)
    assert a == b
    assert a != random_ksat(20, 4.25, 3, 8)
    assert all(len({v for v, _ in c}) == 3 for c in a.clauses)


@pytest.mark.parametrize("args", [(2, 4.25, 3), (0, 1.0, 1), (5, -1.0, 3), (5, 1.0, 0)])
def test_random_ksat_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        random_ksat(*args, seed=0)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(3, 30), alpha=st.floats(0.5, 6.0), k=st.integers(1, 3),
       seed=st.integers(0, 2**32))
def test_dimacs_round_trip(n, alpha, k, seed):
    f = random_ksat(n, alpha, k, seed)
    text = emit_dimacs(f, comments=["generated"])
    assert parse_dimacs(text) == f
    assert emit_dimacs(parse_dimacs(text), comments=["generated"]) == text


def test_evaluate_and_assignment_literals():
    f = parse_dimacs("p cnf 2 3\n1 2 0\n-1 0\n-2 0\n")
    x = Assignment((False, True))
    assert x.to_literals() == [-1, 2]
    assert evaluate(f, x) == [2]
    assert Assignment.from_int(0b10, 2) == x
    with pytest.raises(ValueError):
        evaluate(f, Assignment((True,)))


def test_reduce_identity_on_3sat():
    f = random_ksat(10, 4.0, 3, 2)
    g, n0 = reduce_to_3sat(f)
    assert g == f and n0 == 10


def test_reduce_chain_arithmetic():
    f = parse_dimacs("p cnf 5 1\n1 -2 3 4 -5 0\n")
    g, n0 = reduce_to_3sat(f)
    assert (g.num_vars - n0, g.num_clauses) == (2, 3)
    assert max(len(c) for c in g.clauses) == 3


@settings(max_examples=40, deadline=None)
@given(n=st.integers(4, 7), k=st.integers(4, 6), m=st.integers(1, 12), seed=st.integers(0, 10**6))
def test_reduce_preserves_min_unsat_and_projection(n, k, m, seed):
    k = min(k, n)
    f = random_ksat(n, m / n, k, seed)
    g, n0 = reduce_to_3sat(f)
    sat_f = oracles.dpll(f.num_vars, f.clauses)
    sat_g = oracles.dpll(g.num_vars, g.clauses)
    assert (sat_f is None) == (sat_g is None)
    if sat_g is not None:
        assert evaluate(f, project_assignment(Assignment(sat_g), n0)) == []
