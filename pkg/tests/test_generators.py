import itertools
from collections import Counter

import numpy as np
import pytest

from dmmjump.generators import (GeneratorSpec, Kind, XorEquation, barthel_clause_count, barthel_probs,
                                gen_barthel, gen_xorsat, instance_text, xor_to_cnf)
from dmmjump.sat import Clause, eval_clause, eval_cnf, parse_dimacs


def _xor_oracle_excluded(parity):
    """Assignments of (x1, x2, x3) violating x1 ^ x2 ^ x3 = parity, by enumeration."""
    return [a for a in itertools.product([0, 1], repeat=3) if (sum(a) % 2) != parity]


def _clause_excluding(a, vars_):
    return tuple(v if bit == 0 else -v for v, bit in zip(vars_, a))


@pytest.mark.parametrize("parity", [True, False])
def test_xor_to_cnf_matches_bruteforce(parity):
    clauses = xor_to_cnf(XorEquation((1, 2, 3), parity))
    expected = {_clause_excluding(a, (1, 2, 3)) for a in _xor_oracle_excluded(int(parity))}
    assert set(clauses) == expected and len(clauses) == 4
    for a in itertools.product([False, True], repeat=3):
        sat = all(eval_clause(Clause.from_ints(c), a) for c in clauses)
        assert sat == ((sum(a) % 2) == int(parity))


def test_xor_to_cnf_literal_form():
    assert xor_to_cnf(XorEquation((1, 2, 3), True)) == [(1, 2, 3), (1, -2, -3), (-1, 2, -3), (-1, -2, 3)]
    assert xor_to_cnf(XorEquation((1, 2, 3), False)) == [(-1, 2, 3), (-1, -2, -3), (1, 2, -3), (1, -2, 3)]


def test_xor_equation_needs_distinct_vars():
    with pytest.raises(ValueError):
        XorEquation((1, 1, 2), True)


@pytest.mark.parametrize("n", [20, 50])
def test_xorsat_shape(n):
    cnf, planted = gen_xorsat(n, seed=1)
    assert cnf.num_clauses == 4 * n
    occurrences = Counter(np.abs(cnf.literals).ravel().tolist())
    assert all(occurrences[v] == 12 for v in range(1, n + 1))
    assert eval_cnf(cnf, planted) == (True, 0)


def test_xorsat_groups_of_four():
    cnf, _ = gen_xorsat(30, seed=4)
    lits = cnf.literals
    var_triples = set()
    for g in range(30):
        block = lits[4 * g:4 * g + 4]
        vs = np.abs(block)
        assert np.all(vs == vs[0])
        negs = {tuple((row < 0).astype(int)) for row in block}
        odd = {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)}
        even = {(1, 0, 0), (1, 1, 1), (0, 0, 1), (0, 1, 0)}
        assert negs in (odd, even)
        var_triples.add(tuple(vs[0]))
    # each variable in exactly 3 equations
    inc = Counter(v for t in var_triples for v in t)
    assert set(inc.values()) <= {3, 6}  # repeated triples double-count, still 3-regular by equation


def test_xorsat_regular_by_equation():
    for seed in range(20):
        cnf, _ = gen_xorsat(25, seed)
        eq_vars = np.abs(cnf.literals[::4])
        counts = np.bincount(eq_vars.ravel(), minlength=26)[1:]
        assert np.all(counts == 3)


def test_xorsat_planted_many_seeds():
    for seed in range(1000):
        cnf, planted = gen_xorsat(12, seed)
        assert eval_cnf(cnf, planted) == (True, 0)


def test_xorsat_rejects_small_n():
    with pytest.raises(ValueError):
        gen_xorsat(3, 0)


def test_barthel_probs_closed_form():
    p0, p1, p2, p3 = barthel_probs(0.08)
    # independently: solve normalization and zero-bias constraints with p3 = 0
    A = np.array([[3.0, 3.0], [1.0, -1.0]])
    rhs = np.array([1 - 0.08, -0.08])
    q1, q2 = np.linalg.solve(A, rhs)
    assert p1 == pytest.approx(q1, abs=1e-15) and p2 == pytest.approx(q2, abs=1e-15)
    assert p1 == pytest.approx(0.113333, abs=1e-6)
    assert p2 == pytest.approx(0.193333, abs=1e-6)
    assert p0 + 3 * p1 + 3 * p2 == pytest.approx(1.0, abs=1e-15)
    assert p3 == 0.0


@pytest.mark.parametrize("p0", [-0.01, 0.3])
def test_barthel_rejects_bad_p0(p0):
    with pytest.raises(ValueError):
        GeneratorSpec(Kind.BARTHEL, 100, 4.3, p0, 0)


def test_barthel_clause_count_rounding():
    assert barthel_clause_count(100, 4.3) == 430
    assert barthel_clause_count(1000, 7) == 7000
    assert barthel_clause_count(10, 4.25) == 43  # 42.5 rounds half away from zero


def _types(cnf, planted):
    planted = np.asarray(planted)
    lits = cnf.literals
    true_lit = planted[np.abs(lits) - 1] == (lits > 0)
    return (~true_lit).sum(axis=1)


@pytest.mark.parametrize("ratio", [4.3, 7.0])
def test_barthel_structure(ratio):
    cnf, planted = gen_barthel(200, ratio, 0.08, seed=9)
    assert cnf.num_clauses == round(ratio * 200)
    assert eval_cnf(cnf, planted) == (True, 0)
    assert np.all(_types(cnf, planted) < 3)
    v = np.abs(cnf.literals)
    assert np.all((v[:, 0] < v[:, 1]) & (v[:, 1] < v[:, 2]))


def test_barthel_variables_roughly_uniform():
    cnf, _ = gen_barthel(50, 40.0, 0.08, seed=2)
    counts = np.bincount(np.abs(cnf.literals).ravel(), minlength=51)[1:]
    expected = 3 * cnf.num_clauses / 50
    assert np.all(np.abs(counts - expected) < 6 * np.sqrt(expected))


def test_generators_deterministic():
    a = instance_text(GeneratorSpec(Kind.BARTHEL, 100, 4.3, 0.08, 5))
    b = instance_text(GeneratorSpec(Kind.BARTHEL, 100, 4.3, 0.08, 5))
    c = instance_text(GeneratorSpec(Kind.BARTHEL, 100, 4.3, 0.08, 6))
    assert a == b and a != c
    assert gen_xorsat(40, 3)[0] == gen_xorsat(40, 3)[0]


def test_instance_text_header_and_planted():
    text = instance_text(GeneratorSpec(Kind.XORSAT, 20, seed=1))
    assert text.startswith("c generator kind=xorsat n=20")
    cnf, planted = parse_dimacs(text)
    assert eval_cnf(cnf, planted) == (True, 0)
