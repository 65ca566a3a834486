"""Union match-and-merge entity resolution, cross-checked against rule
enforcement.

Records are tid-less tuples of non-empty atom sets.  Two records match when
some attribute's sets contain a similar atom pair; merging is componentwise
union.  This match/merge pair satisfies the classic resolution axioms
(idempotency, commutativity, associativity, representativity), and its
merge-domination order coincides with attribute-wise lattice domination.

The same behavior is expressible as matching rules: for every attribute
pair (i, j), "similar on attribute i forces identification of attribute j".
Chasing those n² rules over the tid-carrying encoding of a record set
produces a unique stable instance whose tuples correspond to the resolved
records: the resolved set is recoverable per record, and every chased tuple
is dominated by a resolved record.  :func:`correspondence_check` verifies
both directions on concrete data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .chase import MatchDep
from .errors import ContractError, NotApplicableError
from .instances import Instance, Row, Schema
from .values import KIND_ATOMS, LatticeDomain, Value


@dataclass(frozen=True)
class SwooshRecord:
    """One record: a non-empty atom-set value per attribute."""

    values: tuple[Value, ...]

    def __post_init__(self):
        for v in self.values:
            if v.is_bottom or v.kind != KIND_ATOMS:
                raise ContractError("record attributes must be non-empty atom sets")

    @staticmethod
    def of(*atom_sets: Iterable[str]) -> "SwooshRecord":
        return SwooshRecord(tuple(Value.atom_set(s) for s in atom_sets))

    def sort_key(self) -> tuple:
        return tuple(v.sort_key() for v in self.values)


def _check_arity(domains: Sequence[LatticeDomain], *records: SwooshRecord) -> None:
    for r in records:
        if len(r.values) != len(domains):
            raise ContractError("record arity does not match the attribute list")


def record_match(domains: Sequence[LatticeDomain], r1: SwooshRecord, r2: SwooshRecord) -> bool:
    """Some attribute's value sets contain a similar atom pair."""
    _check_arity(domains, r1, r2)
    return any(dom.similar(v1, v2) for dom, v1, v2 in zip(domains, r1.values, r2.values))


def record_merge(domains: Sequence[LatticeDomain], r1: SwooshRecord, r2: SwooshRecord) -> SwooshRecord:
    """Componentwise union; defined only for matching records."""
    if not record_match(domains, r1, r2):
        raise NotApplicableError("merge requested for non-matching records")
    return SwooshRecord(
        tuple(dom.match(v1, v2) for dom, v1, v2 in zip(domains, r1.values, r2.values))
    )


def merge_dominates(domains: Sequence[LatticeDomain], r1: SwooshRecord, r2: SwooshRecord) -> bool:
    """r1 ≤ r2: they match and merging adds nothing to r2 (equivalently,
    componentwise set inclusion — inclusion of non-empty sets already
    implies a shared atom, hence a match)."""
    _check_arity(domains, r1, r2)
    return record_match(domains, r1, r2) and record_merge(domains, r1, r2) == r2


def merge_closure(domains: Sequence[LatticeDomain], records: Iterable[SwooshRecord]) -> set[SwooshRecord]:
    """Smallest superset closed under merging of matching pairs.  Finite:
    every attribute value stays within the union of the input atoms."""
    closed: set[SwooshRecord] = set(records)
    for r in closed:
        _check_arity(domains, r)
    frontier = list(closed)
    while frontier:
        fresh: list[SwooshRecord] = []
        for r1 in frontier:
            for r2 in list(closed):
                if record_match(domains, r1, r2):
                    m = record_merge(domains, r1, r2)
                    if m not in closed:
                        closed.add(m)
                        fresh.append(m)
        frontier = fresh
    return closed


def entity_resolve(domains: Sequence[LatticeDomain], records: Iterable[SwooshRecord]) -> set[SwooshRecord]:
    """The resolved record set: dominance-maximal elements of the merge
    closure.  It is the unique subset of the closure that covers the whole
    closure under ≤ and is minimal with that property."""
    closure = merge_closure(domains, records)
    return {
        r
        for r in closure
        if not any(
            other != r and merge_dominates(domains, r, other) for other in closure
        )
    }


# ---------------------------------------------------------------------------
# Rule-set reconstruction and correspondence


def md_reconstruction(schema: Schema, relation: str) -> list[MatchDep]:
    """The n² rules equivalent to union match-and-merge over ``relation``:
    similarity on any single attribute identifies every attribute."""
    rel = schema.relation(relation)
    for attr, dom_name in zip(rel.attributes, rel.domains):
        dom = schema.domains[dom_name]
        if dom.kind != KIND_ATOMS or dom.similarity.mode != "lifted_pairs":
            raise ContractError(
                f"attribute {attr!r} needs an atoms domain with lifted similarity"
            )
    mds = []
    n = len(rel.attributes)
    for i, ai in enumerate(rel.attributes):
        for j, aj in enumerate(rel.attributes):
            mds.append(
                MatchDep(
                    md_id=f"er_{i + 1}_{j + 1}",
                    rel1=relation,
                    rel2=relation,
                    lhs=((ai, ai),),
                    rhs=(aj, aj),
                )
            )
    return mds


def records_to_instance(schema: Schema, relation: str, records: Sequence[SwooshRecord]) -> Instance:
    rel = schema.relation(relation)
    rows = [
        Row(f"r{i}", dict(zip(rel.attributes, rec.values)))
        for i, rec in enumerate(records)
    ]
    return Instance.build(schema, {relation: rows})


def instance_records(instance: Instance, relation: str) -> list[SwooshRecord]:
    rel = instance.schema.relation(relation)
    return [
        SwooshRecord(tuple(row.values[a] for a in rel.attributes))
        for row in instance.rows(relation)
    ]


@dataclass
class CorrespondenceReport:
    """Outcome of comparing the chased instance with direct resolution.

    (a) every resolved record appears verbatim as some chased tuple;
    (b) every chased tuple is dominated by some resolved record.
    Strict dominations in (b) are listed informationally.
    """

    resolved_found: bool
    tuples_covered: bool
    missing_records: list[SwooshRecord] = field(default_factory=list)
    uncovered_tids: list[str] = field(default_factory=list)
    strictly_dominated_tids: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.resolved_found and self.tuples_covered


def correspondence_check(
    schema: Schema,
    relation: str,
    chased: Instance,
    resolved: Iterable[SwooshRecord],
) -> CorrespondenceReport:
    rel = schema.relation(relation)
    domains = [schema.domains[d] for d in rel.domains]
    resolved = list(resolved)
    chased_records = {
        row.tid: SwooshRecord(tuple(row.values[a] for a in rel.attributes))
        for row in chased.rows(relation)
    }
    report = CorrespondenceReport(resolved_found=True, tuples_covered=True)
    chased_set = set(chased_records.values())
    for rec in resolved:
        if rec not in chased_set:
            report.resolved_found = False
            report.missing_records.append(rec)
    for tid, rec in chased_records.items():
        dominating = [r for r in resolved if merge_dominates(domains, rec, r)]
        if not dominating:
            report.tuples_covered = False
            report.uncovered_tids.append(tid)
        elif rec not in dominating:
            report.strictly_dominated_tids.append(tid)
    return report
