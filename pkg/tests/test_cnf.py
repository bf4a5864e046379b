"""Tests for CNF parsing, generation and evaluation"""

import itertools
from collections import Counter

import numpy as np
import pytest

from core.cnf import (
    Clause, CnfFormula, Literal, derive_seed, emit_dimacs, evaluate, evaluate_batch,
    parse_dimacs, phase_transition_m, random_kcnf,
)
from core.errors import CnfFormatError

SAMPLE = """c sample formula
c second comment
p cnf 4 3
1 -2 3 0
-1 2
4 0
2 -3 -4 0
"""


def test_parse_reads_header_and_clauses():
    formula = parse_dimacs(SAMPLE)
    assert formula.num_vars == 4
    assert formula.num_clauses == 3
    assert formula.width == 3
    assert formula.clauses[1].to_dimacs() == [-1, 2, 4]


def test_parse_accepts_bytes():
    assert parse_dimacs(SAMPLE.encode()) == parse_dimacs(SAMPLE)


def test_parse_drops_tautologies_and_repeated_literals():
    formula = parse_dimacs("p cnf 3 3\n1 -1 2 0\n2 2 3 0\n-3 0\n")
    assert [c.to_dimacs() for c in formula.clauses] == [[2, 3], [-3]]


@pytest.mark.parametrize("text", [
    "1 2 0\n",
    "p cnf 3 2\n1 2 0\n",
    "p cnf 2 1\n1 3 0\n",
    "p cnf 2 1\n1 x 0\n",
    "p dnf 2 1\n1 2 0\n",
    "p cnf 2 1\n1 -1 0\n",
])
def test_parse_rejects_malformed_input(text):
    with pytest.raises(CnfFormatError):
        parse_dimacs(text)


def test_emit_then_parse_preserves_formula(small_formula):
    text = emit_dimacs(small_formula, ["generated"])
    assert text.startswith("c generated\np cnf 4 5\n")
    assert parse_dimacs(text) == small_formula


def test_clause_rejects_repeated_variable():
    with pytest.raises(CnfFormatError):
        Clause.of(1, -1)


def test_formula_rejects_out_of_range_variable():
    with pytest.raises(CnfFormatError):
        CnfFormula(2, (Clause.of(1, 3),))


def test_literal_value():
    assert Literal(1).value(1)
    assert not Literal(1).value(0)
    assert Literal(1, negated=True).value(0)
    assert Literal.from_dimacs(-5) == Literal(5, True)


def test_random_kcnf_is_reproducible():
    first = random_kcnf(20, 50, 3, seed=11)
    assert first == random_kcnf(20, 50, 3, seed=11)
    assert first != random_kcnf(20, 50, 3, seed=12)


def test_random_kcnf_clause_shape():
    formula = random_kcnf(10, 200, 4, seed=3)
    assert formula.num_clauses == 200
    for clause in formula.clauses:
        assert clause.width == 4
        assert len(set(clause.variables)) == 4
        assert all(1 <= v <= 10 for v in clause.variables)
    negations = sum(lit.negated for c in formula.clauses for lit in c.literals)
    assert 300 < negations < 500


def test_random_kcnf_rejects_wide_clauses():
    with pytest.raises(CnfFormatError):
        random_kcnf(3, 5, 4, seed=0)


def test_derive_seed_separates_coordinates():
    seeds = {derive_seed(7, i, j) for i in range(10) for j in range(10)}
    assert len(seeds) == 100
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)


@pytest.mark.parametrize("n, k, expected", [
    (40, 3, 170),
    (40, 4, 397),
    (80, 3, 341),
    (80, 4, 794),
])
def test_phase_transition_m(n, k, expected):
    assert phase_transition_m(n, k) == expected


def test_phase_transition_needs_known_ratio():
    with pytest.raises(CnfFormatError):
        phase_transition_m(10, 6)
    assert phase_transition_m(10, 6, ratio=2.5) == 25


def test_evaluate_batch_matches_scalar(small_formula):
    rows = list(itertools.product([0, 1], repeat=4))
    batch = evaluate_batch(small_formula, np.array(rows))
    assert list(batch) == [evaluate(small_formula, row) for row in rows]


@pytest.mark.parametrize("n, k", [(10, 3), (12, 5)])
def test_random_kcnf_draws_are_uniform(n, k):
    draws = 10_000
    negations = literals = 0
    usage = Counter()
    for seed in range(draws):
        clause = random_kcnf(n, 1, k, seed).clauses[0]
        assert clause.width == k
        assert len(set(clause.variables)) == k
        assert all(1 <= v <= n for v in clause.variables)
        usage.update(clause.variables)
        negations += sum(lit.negated for lit in clause.literals)
        literals += k
    assert abs(negations / literals - 0.5) < 0.01
    expected = draws * k / n
    assert all(abs(usage[v] - expected) < 0.1 * expected for v in range(1, n + 1))


def _truth_table(formula):
    clauses = [[lit.to_dimacs() for lit in clause.literals] for clause in formula.clauses]
    return [
        all(any(bits[abs(l) - 1] == (l > 0) for l in clause) for clause in clauses)
        for bits in itertools.product([False, True], repeat=formula.num_vars)
    ]


@pytest.mark.parametrize("seed", range(6))
def test_evaluate_matches_truth_table(seed):
    formula = random_kcnf(7, 12 + 3 * seed, 3, seed)
    rows = list(itertools.product([0, 1], repeat=7))
    table = _truth_table(formula)
    assert [evaluate(formula, row) for row in rows] == table
    assert list(evaluate_batch(formula, np.array(rows))) == table


def test_evaluate_checks_assignment_length(small_formula):
    with pytest.raises(CnfFormatError):
        evaluate(small_formula, (0, 1))
