"""Relational schema, identified tuples, and the domination order on
instances.

Tuples carry opaque identifiers so that enforcement steps can rewrite
values in place; the order ⊑ between instances ignores identifiers and
compares pure information content (Hoare order over per-tuple domination).
Reduced instances — no tuple dominated by another — form a lattice under ⊑
with join ⋎ (reduced union) and meet ⋏ (reduced cross meets).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import ContractError, DomainError
from .values import LatticeDomain, Value


@dataclass(frozen=True)
class RelationDef:
    name: str
    attributes: tuple[str, ...]
    domains: tuple[str, ...]  # domain name per attribute


@dataclass(frozen=True)
class Schema:
    """Relation layouts plus the shared domain registry.

    Attribute names are unique across the whole schema, so an attribute
    alone identifies its relation and domain; two attributes are comparable
    when they share a domain name.
    """

    domains: Mapping[str, LatticeDomain]
    relations: tuple[RelationDef, ...]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for rel in self.relations:
            if len(rel.attributes) != len(rel.domains):
                raise ContractError(f"relation {rel.name}: attribute/domain mismatch")
            for attr, dom_name in zip(rel.attributes, rel.domains):
                if attr in seen:
                    raise ContractError(
                        f"attribute {attr!r} declared in both {seen[attr]!r} and {rel.name!r}"
                    )
                seen[attr] = rel.name
                if dom_name not in self.domains:
                    raise ContractError(
                        f"attribute {attr!r} uses unknown domain {dom_name!r}"
                    )

    def relation(self, name: str) -> RelationDef:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise ContractError(f"unknown relation {name!r}")

    def relation_of(self, attr: str) -> RelationDef:
        for rel in self.relations:
            if attr in rel.attributes:
                return rel
        raise ContractError(f"unknown attribute {attr!r}")

    def domain_of(self, attr: str) -> LatticeDomain:
        rel = self.relation_of(attr)
        return self.domains[rel.domains[rel.attributes.index(attr)]]

    def comparable(self, attr1: str, attr2: str) -> bool:
        rel1, rel2 = self.relation_of(attr1), self.relation_of(attr2)
        d1 = rel1.domains[rel1.attributes.index(attr1)]
        d2 = rel2.domains[rel2.attributes.index(attr2)]
        return d1 == d2


@dataclass(frozen=True)
class Row:
    """One identified tuple: tid plus a value per attribute."""

    tid: str
    values: dict[str, Value]

    def replaced(self, updates: Mapping[str, Value]) -> "Row":
        merged = dict(self.values)
        merged.update(updates)
        return Row(self.tid, merged)


def tuple_leq(schema: Schema, t1: Row, t2: Row) -> bool:
    """Attribute-wise domination between same-relation tuples."""
    if set(t1.values) != set(t2.values):
        raise ContractError("tuples belong to different relations")
    for attr, v1 in t1.values.items():
        dom = schema.domain_of(attr)
        if not dom.leq(v1, t2.values[attr]):
            return False
    return True


def meet_tuples(schema: Schema, t1: Row, t2: Row) -> Row:
    """Attribute-wise greatest lower bound; fresh deterministic tid."""
    if set(t1.values) != set(t2.values):
        raise ContractError("tuples belong to different relations")
    values = {
        attr: schema.domain_of(attr).glb(v1, t2.values[attr])
        for attr, v1 in t1.values.items()
    }
    return Row(f"{t1.tid}&{t2.tid}", values)


@dataclass(frozen=True)
class Instance:
    """A finite set of identified tuples per relation.

    Rows are kept sorted by tid for deterministic iteration and rendering.
    Instances are immutable snapshots; every operation returns a new one.
    """

    schema: Schema
    relations: dict[str, tuple[Row, ...]]

    @staticmethod
    def build(schema: Schema, rows_by_relation: Mapping[str, Iterable[Row]]) -> "Instance":
        known = {rel.name for rel in schema.relations}
        for name in rows_by_relation:
            if name not in known:
                raise ContractError(f"rows for unknown relation {name!r}")
        relations: dict[str, tuple[Row, ...]] = {}
        seen_tids: set[str] = set()
        for rel in schema.relations:
            rows = sorted(rows_by_relation.get(rel.name, ()), key=lambda r: r.tid)
            for row in rows:
                if row.tid in seen_tids:
                    raise ContractError(f"duplicate tid {row.tid!r}")
                seen_tids.add(row.tid)
                if set(row.values) != set(rel.attributes):
                    raise ContractError(
                        f"tuple {row.tid!r} does not cover attributes of {rel.name!r}"
                    )
                for attr, v in row.values.items():
                    dom = schema.domain_of(attr)
                    try:
                        dom.check_value(v)
                    except DomainError as exc:
                        raise ContractError(f"tuple {row.tid!r}: {exc}") from exc
            relations[rel.name] = tuple(rows)
        return Instance(schema, relations)

    # -- iteration helpers ---------------------------------------------------

    def rows(self, relation: str) -> tuple[Row, ...]:
        return self.relations[relation]

    def all_rows(self) -> Iterator[tuple[str, Row]]:
        for rel in self.schema.relations:
            for row in self.relations[rel.name]:
                yield rel.name, row

    def row_by_tid(self, tid: str) -> tuple[str, Row]:
        for rel_name, row in self.all_rows():
            if row.tid == tid:
                return rel_name, row
        raise ContractError(f"unknown tid {tid!r}")

    def tids(self) -> list[str]:
        return [row.tid for _, row in self.all_rows()]

    def size(self) -> int:
        return sum(len(rows) for rows in self.relations.values())

    def with_rows(self, relation: str, rows: Iterable[Row]) -> "Instance":
        updated = dict(self.relations)
        updated[relation] = tuple(sorted(rows, key=lambda r: r.tid))
        return Instance(self.schema, updated)

    # -- canonical forms -----------------------------------------------------

    def canonical_key(self) -> tuple:
        """Tid-independent canonical form: per relation, the sorted multiset
        of value tuples.  Two instances with the same key carry the same
        information tuple for tuple."""
        key = []
        for rel in self.schema.relations:
            rows = self.relations[rel.name]
            key.append(
                tuple(
                    sorted(
                        tuple(row.values[a].sort_key() for a in rel.attributes)
                        for row in rows
                    )
                )
            )
        return tuple(key)

    def same_data(self, other: "Instance") -> bool:
        """Equality up to tids."""
        return self.canonical_key() == other.canonical_key()

    # -- the domination order --------------------------------------------------

    def _check_same_schema(self, other: "Instance") -> None:
        if self.schema is not other.schema and self.schema != other.schema:
            raise ContractError("instances have different schemas")

    def leq(self, other: "Instance") -> bool:
        """Hoare order ⊑: every tuple here is dominated by some tuple of
        ``other`` in the same relation.  Tids are ignored."""
        self._check_same_schema(other)
        for rel in self.schema.relations:
            mine = self.relations[rel.name]
            theirs = other.relations[rel.name]
            for t1 in mine:
                if not any(tuple_leq(self.schema, t1, t2) for t2 in theirs):
                    return False
        return True

    def reduce(self) -> "Instance":
        """Drop every tuple dominated by another tuple of the same relation;
        among ⪯-equal duplicates the smallest tid survives."""
        relations: dict[str, tuple[Row, ...]] = {}
        for rel in self.schema.relations:
            rows = sorted(self.relations[rel.name], key=lambda r: r.tid)
            kept: list[Row] = []
            for i, t1 in enumerate(rows):
                dominated = False
                for j, t2 in enumerate(rows):
                    if i == j:
                        continue
                    if tuple_leq(self.schema, t1, t2):
                        equal = tuple_leq(self.schema, t2, t1)
                        if not equal or j < i:
                            dominated = True
                            break
                if not dominated:
                    kept.append(t1)
            relations[rel.name] = tuple(kept)
        return Instance(self.schema, relations)

    def join(self, other: "Instance") -> "Instance":
        """⋎: reduced union — the least upper bound under ⊑.

        Output tids are freshly assigned in canonical value order, so the
        operation is symmetric bit for bit.
        """
        self._check_same_schema(other)
        relations: dict[str, tuple[Row, ...]] = {}
        counter = 0
        for rel in self.schema.relations:
            combined: dict[tuple, Row] = {}
            for row in self.relations[rel.name] + other.relations[rel.name]:
                key = tuple(row.values[a].sort_key() for a in rel.attributes)
                combined.setdefault(key, row)
            rows = []
            for key in sorted(combined):
                rows.append(Row(f"u{counter}", dict(combined[key].values)))
                counter += 1
            relations[rel.name] = tuple(rows)
        return Instance(self.schema, relations).reduce()

    def meet(self, other: "Instance") -> "Instance":
        """⋏: reduced cross-pair tuple meets — the greatest lower bound
        under ⊑.  All-⊥ meet tuples carry no information and are dropped."""
        self._check_same_schema(other)
        relations: dict[str, tuple[Row, ...]] = {}
        for rel in self.schema.relations:
            rows: list[Row] = []
            for t1 in self.relations[rel.name]:
                for t2 in other.relations[rel.name]:
                    t = meet_tuples(self.schema, t1, t2)
                    if any(not v.is_bottom for v in t.values.values()):
                        rows.append(t)
            relations[rel.name] = tuple(sorted(rows, key=lambda r: r.tid))
        return Instance(self.schema, relations).reduce()


def instance_leq(d1: Instance, d2: Instance) -> bool:
    return d1.leq(d2)


def join_instances(d1: Instance, d2: Instance) -> Instance:
    return d1.join(d2)


def meet_instances(d1: Instance, d2: Instance) -> Instance:
    return d1.meet(d2)


def fold_join(instances: Iterable[Instance]) -> Instance:
    result: Instance | None = None
    for d in instances:
        result = d.reduce() if result is None else result.join(d)
    if result is None:
        raise ContractError("fold over an empty instance collection")
    return result


def fold_meet(instances: Iterable[Instance]) -> Instance:
    result: Instance | None = None
    for d in instances:
        result = d.reduce() if result is None else result.meet(d)
    if result is None:
        raise ContractError("fold over an empty instance collection")
    return result
