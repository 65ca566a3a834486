"""CNF-driven worst-case project generation and the satisfiability link."""

from __future__ import annotations

import itertools
import random

import pytest

from mdclean import MdcError, Value, certain, enumerate_clean, is_stable
from mdclean.satgen import (
    CnfFormula,
    conflict_free_outcome_exists,
    gen3sat,
    random_formula,
    top_in_certain,
)


def all_three_var_clauses():
    """The eight sign patterns over exactly the variables x1, x2, x3."""
    out = []
    for signs in itertools.product((1, -1), repeat=3):
        out.append(tuple(v * s for v, s in zip((1, 2, 3), signs)))
    return out


# ---------------------------------------------------------------------------
# formula handling


def test_dimacs_parsing():
    f = CnfFormula.from_dimacs("c comment\np cnf 3 2\n1 -2 3 0\n-1 2 2 0\n")
    assert f.n_vars == 3
    assert f.clauses == ((1, -2, 3), (-1, 2, 2))


def test_tautological_clause_rejected():
    with pytest.raises(MdcError):
        CnfFormula(2, ((1, -1, 2),))


def test_bad_literals_rejected():
    with pytest.raises(MdcError):
        CnfFormula(1, ((0, 1, 1),))
    with pytest.raises(MdcError):
        CnfFormula(1, ((1, 1, 2),))


def test_bruteforce_satisfiability():
    assert CnfFormula(1, ((1, 1, 1),)).satisfiable()
    assert not CnfFormula(1, ((1, 1, 1), (-1, -1, -1))).satisfiable()
    assert CnfFormula(2, ((1, 2, 2), (-1, -2, -2))).satisfiable()


# ---------------------------------------------------------------------------
# construction shape


def test_four_tuples_per_clause():
    for n in (1, 2, 3):
        f = CnfFormula(2, tuple((1, 2, 2) for _ in range(n)))
        assert gen3sat(f).instance.size() == 4 * n


def test_generated_rows_and_similarity():
    f = CnfFormula(2, ((1, -2, 1),))
    project = gen3sat(f)
    rows = {r.tid: r for r in project.instance.rows("R")}
    assert rows["t1"].values["C"] == Value.flat("c1")
    assert rows["t1"].values["V"] == Value.flat("x1")
    assert rows["t1"].values["L"] == Value.flat("1")
    assert rows["t2"].values["L"] == Value.flat("0")
    assert rows["t4"].values["C"] == Value.flat("d1")
    assert rows["t4"].values["V"] == Value.flat("y")
    dom = project.schema.domains["clause_tag"]
    assert dom.similar(Value.flat("c1"), Value.flat("d1"))
    assert not dom.similar(Value.flat("c1"), Value.flat("c2"))
    assert dom.match(Value.flat("c1"), Value.flat("d1")).is_top


def test_single_clause_satisfiable_no_conflict():
    f = CnfFormula(1, ((1, 1, 1),))
    project = gen3sat(f)
    assert f.satisfiable()
    assert not top_in_certain(project)


def test_complementary_clauses_force_conflict():
    f = CnfFormula(1, ((1, 1, 1), (-1, -1, -1)))
    project = gen3sat(f)
    assert not f.satisfiable()
    assert top_in_certain(project)


# ---------------------------------------------------------------------------
# pruned check agrees with the exact certain answer


def _top_via_certain(project) -> bool:
    q = project.queries["labels"]
    cert = certain(q, project.instance, project.mds, limit=4096)
    return any(
        row.values["L"].is_top for row in cert.rows("result")
    )


def test_pruned_check_matches_certain_on_small_formulas():
    clauses = all_three_var_clauses()
    rng = random.Random(71)
    picks = [(c,) for c in clauses] + [
        tuple(rng.sample(clauses, 2)) for _ in range(6)
    ]
    for clause_set in picks:
        f = CnfFormula(3, clause_set)
        project = gen3sat(f)
        assert top_in_certain(project) == _top_via_certain(project), clause_set


def test_all_outcomes_stable_on_a_generated_project():
    f = CnfFormula(2, ((1, 2, 2), (-1, -2, -2)))
    project = gen3sat(f)
    outcomes = enumerate_clean(project.instance, project.mds, limit=512)
    assert not outcomes.truncated
    for d in outcomes:
        assert is_stable(d, project.mds)
        assert project.instance.leq(d)


def test_satisfiability_equivalence_exhaustive_pairs():
    clauses = all_three_var_clauses()
    for c1, c2 in itertools.combinations(clauses, 2):
        f = CnfFormula(3, (c1, c2))
        project = gen3sat(f)
        assert f.satisfiable() == (not top_in_certain(project)), (c1, c2)


def test_random_formula_generator_well_formed():
    rng = random.Random(97)
    for _ in range(20):
        f = random_formula(rng, n_vars=4, n_clauses=4)
        assert len(f.clauses) == 4
        gen3sat(f)  # must validate
