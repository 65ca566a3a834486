"""Generator of worst-case cleaning projects from 3-CNF formulas.

Certain-answer computation is coNP-hard already for two interacting rules,
via a reduction from 3SAT.  The generated project makes that reduction
concrete and doubles as a stress test: the formula is satisfiable exactly
when some stable outcome avoids the conflict marker ⊤ in the L column,
i.e. when ⊤ is not a certain answer of ``(project (L) (rel R))``.

Construction, per clause i with literals over variables x_j:

* one tuple ``(c_i, x_j, +/-)`` per literal (sign of the literal),
* one extra tuple ``(d_i, y, +)``,
* similarity ``c_i ≈ d_i`` on the clause column, whose merge collapses to
  the shared conflict marker of the flat kind,
* rules ``phi1: C ≈ C → C ⇌ C`` and ``phi2: C,V ≈ C,V → L ⇌ L``.

Choosing which literal tuple merges with the d-tuple encodes choosing the
literal that satisfies the clause; the shared merged C-value then forces
opposite signs of the same variable, chosen in different clauses, to merge
into ⊤ on L.  Tautological clauses (x together with ¬x) are rejected: for
them the choice structure degenerates and the equivalence breaks down.

Polarity encoding: "+" is the label "1", "−" the label "0", conflicts ⊤.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from .chase import enumerate_clean
from .errors import MdcError
from .instances import Instance
from .project import Project, load_project_dict
from .values import Value


@dataclass(frozen=True)
class CnfFormula:
    """A 3-CNF formula: clauses of exactly three signed variable indices."""

    n_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        for clause in self.clauses:
            if len(clause) != 3:
                raise MdcError(f"clause {clause!r} does not have three literals")
            for lit in clause:
                if not isinstance(lit, int) or lit == 0 or abs(lit) > self.n_vars:
                    raise MdcError(f"bad literal {lit!r}")
            if any(-lit in clause for lit in clause):
                raise MdcError(f"tautological clause {clause!r}")

    @staticmethod
    def from_dimacs(text: str) -> "CnfFormula":
        n_vars = 0
        clauses: list[tuple[int, int, int]] = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("c"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) < 4 or parts[1] != "cnf":
                    raise MdcError(f"bad problem line: {line!r}")
                n_vars = int(parts[2])
                continue
            lits = [int(tok) for tok in line.split()]
            if lits and lits[-1] == 0:
                lits = lits[:-1]
            if lits:
                if len(lits) != 3:
                    raise MdcError(f"clause {lits!r} does not have three literals")
                clauses.append((lits[0], lits[1], lits[2]))
        if n_vars == 0 and clauses:
            n_vars = max(abs(l) for c in clauses for l in c)
        return CnfFormula(n_vars, tuple(clauses))

    def satisfiable(self) -> bool:
        """Brute-force over all assignments."""
        for bits in itertools.product((False, True), repeat=self.n_vars):
            if all(
                any((lit > 0) == bits[abs(lit) - 1] for lit in clause)
                for clause in self.clauses
            ):
                return True
        return not self.clauses


def gen3sat(formula: CnfFormula) -> Project:
    """Build the cleaning project for a formula (4 tuples per clause)."""
    pairs = [[f"c{i}", f"d{i}"] for i in range(1, len(formula.clauses) + 1)]
    rows = []
    tid = 0
    for i, clause in enumerate(formula.clauses, start=1):
        for lit in clause:
            tid += 1
            rows.append(
                {
                    "tid": f"t{tid}",
                    "values": {
                        "C": f"c{i}",
                        "V": f"x{abs(lit)}",
                        "L": "1" if lit > 0 else "0",
                    },
                }
            )
        tid += 1
        rows.append({"tid": f"t{tid}", "values": {"C": f"d{i}", "V": "y", "L": "1"}})
    doc = {
        "domains": [
            {
                "name": "clause_tag",
                "kind": "flat",
                "similarity": {"mode": "explicit_pairs", "pairs": pairs},
            },
            {"name": "variable", "kind": "flat", "similarity": {"mode": "equality"}},
            {"name": "polarity", "kind": "flat", "similarity": {"mode": "equality"}},
        ],
        "relations": [
            {
                "name": "R",
                "attributes": [
                    {"name": "C", "domain": "clause_tag"},
                    {"name": "V", "domain": "variable"},
                    {"name": "L", "domain": "polarity"},
                ],
            }
        ],
        "mds": [
            {"id": "phi1", "lhs": [["C", "C"]], "rhs": ["C", "C"]},
            {"id": "phi2", "lhs": [["C", "C"], ["V", "V"]], "rhs": ["L", "L"]},
        ],
        "data": {"R": rows},
        "queries": {"labels": "(project (L) (rel R))"},
    }
    return load_project_dict(doc)


def _contains_top(instance: Instance) -> bool:
    return any(
        row.values["L"].is_top for row in instance.rows("R")
    )


def conflict_free_outcome_exists(project: Project, limit: int = 100000) -> bool:
    """Whether some stable outcome avoids ⊤ in the L column.

    Equivalent to ⊤ ∉ certain answers of ``(project (L) (rel R))``: the
    conflict marker survives the meet of the answer sets exactly when every
    outcome contains it.  Branches that already contain ⊤ are pruned, which
    is sound because values only grow along enforcement.
    """
    result = enumerate_clean(project.instance, project.mds, limit=limit, prune=_contains_top)
    return len(result) > 0


def top_in_certain(project: Project, limit: int = 100000) -> bool:
    return not conflict_free_outcome_exists(project, limit=limit)


def random_formula(rng: random.Random, n_vars: int, n_clauses: int) -> CnfFormula:
    """Random non-tautological 3-CNF (repeated same-sign literals allowed)."""
    clauses = []
    for _ in range(n_clauses):
        while True:
            lits = tuple(
                rng.randrange(1, n_vars + 1) * rng.choice((1, -1)) for _ in range(3)
            )
            if not any(-l in lits for l in lits):
                clauses.append(lits)
                break
    return CnfFormula(n_vars, tuple(clauses))
