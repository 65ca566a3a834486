"""Positive relational algebra with order-aware selections, and the
certain/possible answer semantics over all stable outcomes.

Two selection operators use the attribute lattice instead of equality:

* ``SelectDom(a, A)``      keeps tuples whose A-value dominates the
  constant a (a ⪯ t[A]);
* ``SelectJoinDom(A1,A2)`` keeps tuples whose two values share a non-⊥
  lower bound (equivalently glb(t[A1], t[A2]) ≠ ⊥).

A query built only from π, ×, ∪ and these two operators is monotone with
respect to the instance domination order ⊑, which is what makes the
polynomial bounds of :mod:`mdclean.approx` meaningful.  :func:`relax`
rewrites the two equality selections into their order-aware counterparts.

Certain (possible) answers are the greatest lower (least upper) bound, under
⊑, of the query's answers across every stable outcome of cleaning — not the
set intersection (union), so partially agreeing answers still contribute
their common information.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .chase import MatchDep, enumerate_clean
from .errors import QueryError, TruncatedEnumerationError
from .instances import Instance, RelationDef, Row, Schema, fold_join, fold_meet
from .values import LatticeDomain, Value


class Query:
    """Base class for query syntax nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Rel(Query):
    name: str


@dataclass(frozen=True)
class Projection(Query):
    attrs: tuple[str, ...]
    child: Query


@dataclass(frozen=True)
class Product(Query):
    left: Query
    right: Query


@dataclass(frozen=True)
class UnionQ(Query):
    left: Query
    right: Query


@dataclass(frozen=True)
class SelectEq(Query):
    attr: str
    const: Value
    child: Query


@dataclass(frozen=True)
class SelectAttrEq(Query):
    attr1: str
    attr2: str
    child: Query


@dataclass(frozen=True)
class SelectDom(Query):
    const: Value
    attr: str
    child: Query


@dataclass(frozen=True)
class SelectJoinDom(Query):
    attr1: str
    attr2: str
    child: Query


# ---------------------------------------------------------------------------
# Evaluation

_RESULT_REL = "result"


@dataclass
class _Table:
    """Intermediate result: attribute names, their domains, value rows.

    Plain set semantics; domination-based reduction happens only on the
    final result, because equality selections are not upward closed.
    """

    attrs: tuple[str, ...]
    domains: tuple[LatticeDomain, ...]
    rows: set[tuple[Value, ...]]

    def col(self, attr: str) -> int:
        try:
            return self.attrs.index(attr)
        except ValueError:
            raise QueryError(f"attribute {attr!r} not in {self.attrs}") from None


def _rename_collisions(left: _Table, right: _Table) -> tuple[tuple[str, ...], tuple[str, ...]]:
    clash = set(left.attrs) & set(right.attrs)
    la = tuple(f"l.{a}" if a in clash else a for a in left.attrs)
    ra = tuple(f"r.{a}" if a in clash else a for a in right.attrs)
    return la, ra


def _eval(q: Query, instance: Instance) -> _Table:
    schema = instance.schema
    if isinstance(q, Rel):
        rel = schema.relation(q.name)
        domains = tuple(schema.domains[d] for d in rel.domains)
        rows = {
            tuple(row.values[a] for a in rel.attributes)
            for row in instance.rows(q.name)
        }
        return _Table(rel.attributes, domains, rows)
    if isinstance(q, Projection):
        t = _eval(q.child, instance)
        idx = [t.col(a) for a in q.attrs]
        return _Table(
            tuple(q.attrs),
            tuple(t.domains[i] for i in idx),
            {tuple(r[i] for i in idx) for r in t.rows},
        )
    if isinstance(q, Product):
        lt = _eval(q.left, instance)
        rt = _eval(q.right, instance)
        la, ra = _rename_collisions(lt, rt)
        return _Table(
            la + ra,
            lt.domains + rt.domains,
            {l + r for l in lt.rows for r in rt.rows},
        )
    if isinstance(q, UnionQ):
        lt = _eval(q.left, instance)
        rt = _eval(q.right, instance)
        if lt.attrs != rt.attrs or lt.domains != rt.domains:
            raise QueryError(
                f"union branches have different output schemas: {lt.attrs} vs {rt.attrs}"
            )
        return _Table(lt.attrs, lt.domains, lt.rows | rt.rows)
    if isinstance(q, SelectEq):
        t = _eval(q.child, instance)
        i = t.col(q.attr)
        t.domains[i].check_value(q.const)
        return _Table(t.attrs, t.domains, {r for r in t.rows if r[i] == q.const})
    if isinstance(q, SelectAttrEq):
        t = _eval(q.child, instance)
        i, j = t.col(q.attr1), t.col(q.attr2)
        if t.domains[i].name != t.domains[j].name:
            raise QueryError(f"{q.attr1!r} and {q.attr2!r} are not comparable")
        return _Table(t.attrs, t.domains, {r for r in t.rows if r[i] == r[j]})
    if isinstance(q, SelectDom):
        t = _eval(q.child, instance)
        i = t.col(q.attr)
        dom = t.domains[i]
        dom.check_value(q.const)
        return _Table(t.attrs, t.domains, {r for r in t.rows if dom.leq(q.const, r[i])})
    if isinstance(q, SelectJoinDom):
        t = _eval(q.child, instance)
        i, j = t.col(q.attr1), t.col(q.attr2)
        dom = t.domains[i]
        if dom.name != t.domains[j].name:
            raise QueryError(f"{q.attr1!r} and {q.attr2!r} are not comparable")
        return _Table(
            t.attrs,
            t.domains,
            {r for r in t.rows if not dom.glb(r[i], r[j]).is_bottom},
        )
    raise QueryError(f"unknown query node {q!r}")


def output_schema(q: Query, schema: Schema) -> tuple[tuple[str, ...], tuple[LatticeDomain, ...]]:
    """Static output attributes/domains of a query, without data."""
    empty = Instance.build(schema, {})
    t = _eval(q, empty)
    return t.attrs, t.domains


def _table_to_instance(t: _Table, base: Schema) -> Instance:
    domain_defs = {d.name: d for d in t.domains}
    # Reuse the project's domain objects; result schema is a single relation.
    out_schema = Schema(
        domains=domain_defs,
        relations=(
            RelationDef(_RESULT_REL, t.attrs, tuple(d.name for d in t.domains)),
        ),
    )
    rows = []
    for n, key in enumerate(sorted(t.rows, key=lambda r: tuple(v.sort_key() for v in r))):
        rows.append(Row(f"q{n}", dict(zip(t.attrs, key))))
    return Instance.build(out_schema, {_RESULT_REL: rows}).reduce()


def eval_query(q: Query, instance: Instance) -> Instance:
    """Evaluate with set semantics and return the reduced answer instance."""
    return _table_to_instance(_eval(q, instance), instance.schema)


# ---------------------------------------------------------------------------
# Relaxation and monotonicity


def relax(q: Query) -> Query:
    """Rewrite equality selections into their domination counterparts.
    Everything else is preserved structurally."""
    if isinstance(q, Rel):
        return q
    if isinstance(q, Projection):
        return Projection(q.attrs, relax(q.child))
    if isinstance(q, Product):
        return Product(relax(q.left), relax(q.right))
    if isinstance(q, UnionQ):
        return UnionQ(relax(q.left), relax(q.right))
    if isinstance(q, SelectEq):
        return SelectDom(q.const, q.attr, relax(q.child))
    if isinstance(q, SelectAttrEq):
        return SelectJoinDom(q.attr1, q.attr2, relax(q.child))
    if isinstance(q, SelectDom):
        return SelectDom(q.const, q.attr, relax(q.child))
    if isinstance(q, SelectJoinDom):
        return SelectJoinDom(q.attr1, q.attr2, relax(q.child))
    raise QueryError(f"unknown query node {q!r}")


def is_monotone_syntax(q: Query) -> bool:
    """Sound syntactic check: no equality selections anywhere.  Such queries
    are ⊑-monotone; queries failing the check may still happen to behave
    monotonically on particular data."""
    if isinstance(q, (SelectEq, SelectAttrEq)):
        return False
    if isinstance(q, Rel):
        return True
    if isinstance(q, Projection):
        return is_monotone_syntax(q.child)
    if isinstance(q, (Product, UnionQ)):
        return is_monotone_syntax(q.left) and is_monotone_syntax(q.right)
    if isinstance(q, (SelectDom, SelectJoinDom)):
        return is_monotone_syntax(q.child)
    raise QueryError(f"unknown query node {q!r}")


# ---------------------------------------------------------------------------
# Clean answers


@dataclass(frozen=True)
class CleanAnswer:
    """Exact bounds: cert ⊑ answer-on-any-outcome ⊑ poss."""

    cert: Instance
    poss: Instance


def certain(q: Query, instance: Instance, mds: Sequence[MatchDep], limit: int = 64) -> Instance:
    """Greatest lower bound of the query's answers over all stable
    outcomes.  Requires exhaustive enumeration: raises on truncation
    rather than returning an unsound bound."""
    return clean_answer(q, instance, mds, limit).cert


def possible(q: Query, instance: Instance, mds: Sequence[MatchDep], limit: int = 64) -> Instance:
    """Least upper bound counterpart of :func:`certain`."""
    return clean_answer(q, instance, mds, limit).poss


def clean_answer(
    q: Query, instance: Instance, mds: Sequence[MatchDep], limit: int = 64
) -> CleanAnswer:
    enumeration = enumerate_clean(instance, mds, limit=limit)
    if enumeration.truncated:
        raise TruncatedEnumerationError(
            f"more than {limit} stable outcomes; exact bounds unavailable "
            "(use the polynomial approximations instead)"
        )
    answers = [eval_query(q, d) for d in enumeration]
    return CleanAnswer(cert=fold_meet(answers), poss=fold_join(answers))
