"""Polynomial-time bounds on cleaning outcomes.

Exact certain/possible answers need every stable outcome, which is
intractable in general.  Two single-pass chases bracket them:

* the **under-clean** instance enforces only rule applications that are
  *safe* in the original instance — no interacting rule could disturb the
  similarities they rely on — so it is dominated by every stable outcome;
* the **over-clean** instance chases with the extended similarity ≈*
  (declared similarity of any dominated pieces), which merging can never
  break, so it dominates every stable outcome.

Both are unique regardless of enforcement order and computable in
polynomial time.  Evaluating a ⊑-monotone query on them yields a sound
lower bound for certain answers and a complete upper bound for possible
answers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .chase import (
    ChaseTrace,
    MatchDep,
    Step,
    chase,
    chase_step,
    extended_similarity,
    lhs_matches,
)
from .errors import ContractError
from .instances import Instance
from .queries import Query, eval_query, is_monotone_syntax


@dataclass(frozen=True)
class PrecedenceGraph:
    """Which rules feed which: an edge φ → φ' when φ's rhs attribute occurs
    in φ''s lhs.  Interaction is reachability (paths of length ≥ 1)."""

    edges: frozenset[tuple[str, str]]
    reach: frozenset[tuple[str, str]]

    @staticmethod
    def build(mds: Sequence[MatchDep]) -> "PrecedenceGraph":
        ids = [md.md_id for md in mds]
        edges = {
            (a.md_id, b.md_id)
            for a in mds
            for b in mds
            if a.rhs_attrs & b.lhs_attrs
        }
        reach = set(edges)
        changed = True
        while changed:
            changed = False
            for x, y in list(reach):
                for y2, z in edges:
                    if y2 == y and (x, z) not in reach:
                        reach.add((x, z))
                        changed = True
        known = set(ids)
        return PrecedenceGraph(frozenset(edges), frozenset((a, b) for a, b in reach if a in known and b in known))


def interacts(md_id: str, other_id: str, mds: Sequence[MatchDep]) -> bool:
    """Whether enforcing ``md_id`` can (transitively) disturb ``other_id``'s
    matching conditions."""
    known = {md.md_id for md in mds}
    if md_id not in known or other_id not in known:
        raise ContractError(f"unknown rule id {md_id!r} or {other_id!r}")
    return (md_id, other_id) in PrecedenceGraph.build(mds).reach


def freshly_applicable(md: MatchDep, t1: str, t2: str, instance: Instance) -> bool:
    """Rule matches the pair in this instance and its rhs values differ."""
    if not lhs_matches(instance, md, t1, t2):
        return False
    rows1 = {r.tid: r for r in instance.rows(md.rel1)}
    rows2 = {r.tid: r for r in instance.rows(md.rel2)}
    return rows1[t1].values[md.rhs[0]] != rows2[t2].values[md.rhs[1]]


def safely_applicable(
    md: MatchDep, t1: str, t2: str, instance: Instance, mds: Sequence[MatchDep]
) -> bool:
    """Freshly applicable, and no interacting rule is freshly applicable on
    either tuple of the pair (any partner, either orientation): nothing can
    disturb this application's similarities during any enforcement order."""
    if not freshly_applicable(md, t1, t2, instance):
        return False
    graph = PrecedenceGraph.build(mds)
    by_id = {m.md_id: m for m in mds}
    if md.md_id not in by_id:
        raise ContractError(f"unknown rule id {md.md_id!r}")
    interacting = [by_id[a] for (a, b) in graph.reach if b == md.md_id]
    for other in interacting:
        rows1 = instance.rows(other.rel1)
        rows2 = instance.rows(other.rel2)
        for t in (t1, t2):
            for partner in rows2:
                if any(r.tid == t for r in rows1) and freshly_applicable(
                    other, t, partner.tid, instance
                ):
                    return False
            for partner in rows1:
                if any(r.tid == t for r in rows2) and freshly_applicable(
                    other, partner.tid, t, instance
                ):
                    return False
    return True


def safe_steps(instance: Instance, mds: Sequence[MatchDep]) -> list[Step]:
    """All safely applicable (rule, pair) choices in the given instance,
    orientation-deduplicated for symmetric rules."""
    steps = []
    for md in sorted(mds, key=lambda m: m.md_id):
        rows1 = instance.rows(md.rel1)
        rows2 = instance.rows(md.rel2)
        for r1 in rows1:
            for r2 in rows2:
                if md.rel1 == md.rel2 and r1.tid == r2.tid:
                    continue
                if md.symmetric and r1.tid > r2.tid:
                    continue
                if safely_applicable(md, r1.tid, r2.tid, instance, mds):
                    steps.append(Step(md.md_id, r1.tid, r2.tid))
    return steps


def under_clean(
    instance: Instance,
    mds: Sequence[MatchDep],
    rng: random.Random | None = None,
) -> Instance:
    """Enforce exactly the safe applications until all of them have equal
    rhs values.  Safety is judged once, against the input instance; the
    result is independent of enforcement order (``rng`` only shuffles the
    order, for exercising that invariance).  May be non-stable: unsafe
    violations are deliberately left alone."""
    safe = safe_steps(instance, mds)
    by_id = {md.md_id: md for md in mds}
    current = instance
    while True:
        pending = []
        for s in safe:
            md = by_id[s.md_id]
            rows1 = {r.tid: r for r in current.rows(md.rel1)}
            rows2 = {r.tid: r for r in current.rows(md.rel2)}
            if rows1[s.t1].values[md.rhs[0]] != rows2[s.t2].values[md.rhs[1]]:
                pending.append(s)
        if not pending:
            return current
        if rng is not None:
            step = pending[rng.randrange(len(pending))]
        else:
            step = pending[0]
        current = chase_step(current, by_id[step.md_id], step.t1, step.t2)


def over_clean(
    instance: Instance, mds: Sequence[MatchDep], policy: str = "md-asc"
) -> Instance:
    """Chase to stability under the extended similarity ≈*.  Since ≈* is
    preserved by merging, the outcome is unique and dominates every stable
    outcome of the declared-similarity chase."""
    return over_clean_trace(instance, mds, policy).result


def over_clean_trace(
    instance: Instance, mds: Sequence[MatchDep], policy: str = "md-asc"
) -> ChaseTrace:
    return chase(instance, mds, policy=policy, sim=extended_similarity)


@dataclass(frozen=True)
class ApproxAnswer:
    """Polynomial bracket around the exact clean answers.

    For a ⊑-monotone query: lower ⊑ Cert ⊑ Poss ⊑ upper.  When
    ``monotone_syntax`` is False the bracket is not guaranteed (the query
    may still behave monotonically on the given data).
    """

    lower: Instance
    upper: Instance
    under_instance: Instance
    over_instance: Instance
    monotone_syntax: bool


def approx_answers(q: Query, instance: Instance, mds: Sequence[MatchDep]) -> ApproxAnswer:
    under = under_clean(instance, mds)
    over = over_clean(instance, mds)
    return ApproxAnswer(
        lower=eval_query(q, under),
        upper=eval_query(q, over),
        under_instance=under,
        over_instance=over,
        monotone_syntax=is_monotone_syntax(q),
    )
