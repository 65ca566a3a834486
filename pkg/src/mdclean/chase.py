"""Matching dependencies and their chase enforcement.

A matching dependency states that when two tuples are pairwise similar on a
list of comparable attribute pairs, the values of one further attribute
pair must be identified.  Identification merges both values to their least
upper bound, so enforcement only ever grows information: every chase run
terminates (each step strictly grows at least one attribute slot inside a
finite merge closure) and the final instance dominates the input.

Enforcement order matters when rules interact — one rule's merge can break
a similarity another rule needed — so a dirty instance may admit several
distinct stable outcomes.  :func:`chase` follows one deterministic policy;
:func:`enumerate_clean` explores every order and returns the full set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .errors import ChaseBoundError, ContractError, NotApplicableError
from .instances import Instance, Row, Schema
from .values import LatticeDomain, Value, closure_height

#: Pluggable left-hand-side similarity test (domain, v1, v2) -> bool.
SimTest = Callable[[LatticeDomain, Value, Value], bool]


def declared_similarity(dom: LatticeDomain, v1: Value, v2: Value) -> bool:
    return dom.similar(v1, v2)


def extended_similarity(dom: LatticeDomain, v1: Value, v2: Value) -> bool:
    return dom.star_similar(v1, v2)


@dataclass(frozen=True)
class MatchDep:
    """One rule: ``rel1[lhs₁] ≈ rel2[lhs₂]  →  rel1[rhs₁] ⇌ rel2[rhs₂]``."""

    md_id: str
    rel1: str
    rel2: str
    lhs: tuple[tuple[str, str], ...]
    rhs: tuple[str, str]

    def validate(self, schema: Schema) -> None:
        r1, r2 = schema.relation(self.rel1), schema.relation(self.rel2)
        if not self.lhs:
            raise ContractError(f"md {self.md_id}: empty left-hand side")
        for a1, a2 in list(self.lhs) + [self.rhs]:
            if a1 not in r1.attributes:
                raise ContractError(
                    f"md {self.md_id}: attribute {a1!r} not in relation {self.rel1!r}"
                )
            if a2 not in r2.attributes:
                raise ContractError(
                    f"md {self.md_id}: attribute {a2!r} not in relation {self.rel2!r}"
                )
            if not schema.comparable(a1, a2):
                raise ContractError(
                    f"md {self.md_id}: attributes {a1!r} and {a2!r} are not comparable"
                )

    @property
    def lhs_attrs(self) -> frozenset[str]:
        return frozenset(a for pair in self.lhs for a in pair)

    @property
    def rhs_attrs(self) -> frozenset[str]:
        return frozenset(self.rhs)

    @property
    def symmetric(self) -> bool:
        """Both orientations of a tuple pair are interchangeable: same
        relation on both sides, swap-closed lhs pairs, identical rhs."""
        if self.rel1 != self.rel2 or self.rhs[0] != self.rhs[1]:
            return False
        pairs = set(self.lhs)
        return all((b, a) in pairs for a, b in pairs)


def _role_rows(instance: Instance, md: MatchDep, t1: str, t2: str) -> tuple[Row, Row]:
    rows1 = {r.tid: r for r in instance.rows(md.rel1)}
    rows2 = {r.tid: r for r in instance.rows(md.rel2)}
    if t1 not in rows1:
        raise ContractError(f"tid {t1!r} is not a {md.rel1!r} tuple")
    if t2 not in rows2:
        raise ContractError(f"tid {t2!r} is not a {md.rel2!r} tuple")
    return rows1[t1], rows2[t2]


def lhs_matches(
    instance: Instance,
    md: MatchDep,
    t1: str,
    t2: str,
    sim: SimTest = declared_similarity,
) -> bool:
    """Pairwise similarity on every lhs attribute pair.  A tuple paired
    with itself never matches: self-enforcement is vacuous."""
    if md.rel1 == md.rel2 and t1 == t2:
        return False
    row1, row2 = _role_rows(instance, md, t1, t2)
    schema = instance.schema
    for a1, a2 in md.lhs:
        dom = schema.domain_of(a1)
        if not sim(dom, row1.values[a1], row2.values[a2]):
            return False
    return True


@dataclass(frozen=True)
class Step:
    md_id: str
    t1: str
    t2: str


def applicable_steps(
    instance: Instance,
    mds: Sequence[MatchDep],
    sim: SimTest = declared_similarity,
) -> list[Step]:
    """All (rule, tuple pair) choices whose lhs matches and whose rhs
    values still differ, in deterministic (rule, tid, tid) order.
    Symmetric rules contribute one orientation per pair."""
    steps: list[Step] = []
    for md in sorted(mds, key=lambda m: m.md_id):
        rows1 = instance.rows(md.rel1)
        rows2 = instance.rows(md.rel2)
        for row1 in rows1:
            for row2 in rows2:
                if md.rel1 == md.rel2 and row1.tid == row2.tid:
                    continue
                if md.symmetric and row1.tid > row2.tid:
                    continue
                if row1.values[md.rhs[0]] == row2.values[md.rhs[1]]:
                    continue
                if lhs_matches(instance, md, row1.tid, row2.tid, sim):
                    steps.append(Step(md.md_id, row1.tid, row2.tid))
    return steps


def is_stable(
    instance: Instance,
    mds: Sequence[MatchDep],
    sim: SimTest = declared_similarity,
) -> bool:
    """Whether the instance satisfies every rule against itself: each
    lhs-matching pair already has identical rhs values."""
    return not applicable_steps(instance, mds, sim)


def pair_satisfies(
    before: Instance, after: Instance, mds: Sequence[MatchDep]
) -> bool:
    """Dynamic satisfaction: for every pair matching a rule's lhs in
    ``before``, the rhs values are identified in ``after`` (a) and the lhs
    still matches in ``after`` (b).  Both instances must share tids."""
    if sorted(before.tids()) != sorted(after.tids()):
        raise ContractError("instances have different tuple identifiers")
    for md in mds:
        for row1 in before.rows(md.rel1):
            for row2 in before.rows(md.rel2):
                if md.rel1 == md.rel2 and row1.tid == row2.tid:
                    continue
                if not lhs_matches(before, md, row1.tid, row2.tid):
                    continue
                a_row1, a_row2 = _role_rows(after, md, row1.tid, row2.tid)
                if a_row1.values[md.rhs[0]] != a_row2.values[md.rhs[1]]:
                    return False
                if not lhs_matches(after, md, row1.tid, row2.tid):
                    return False
    return True


def chase_step(
    instance: Instance,
    md: MatchDep,
    t1: str,
    t2: str,
    sim: SimTest = declared_similarity,
) -> Instance:
    """Enforce one rule on one tuple pair: both rhs slots become the merge
    of their values; everything else is untouched."""
    if not lhs_matches(instance, md, t1, t2, sim):
        raise NotApplicableError(f"{md.md_id} does not match tuples {t1!r}, {t2!r}")
    row1, row2 = _role_rows(instance, md, t1, t2)
    a1, a2 = md.rhs
    v1, v2 = row1.values[a1], row2.values[a2]
    if v1 == v2:
        raise NotApplicableError(
            f"{md.md_id} on {t1!r}, {t2!r}: rhs values already identified"
        )
    dom = instance.schema.domain_of(a1)
    merged = dom.match(v1, v2)

    updates = {(md.rel1, t1): {a1: merged}, (md.rel2, t2): {a2: merged}}
    result = instance
    for (rel, tid), vals in updates.items():
        rows = [
            row.replaced(vals) if row.tid == tid else row for row in result.rows(rel)
        ]
        result = result.with_rows(rel, rows)
    return result


# ---------------------------------------------------------------------------
# Deterministic chase


def _pick_md_asc(steps: list[Step]) -> Step:
    return min(steps, key=lambda s: (s.md_id, s.t1, s.t2))


def _pick_md_desc(steps: list[Step]) -> Step:
    best = max(steps, key=lambda s: s.md_id)
    return min(
        (s for s in steps if s.md_id == best.md_id), key=lambda s: (s.t1, s.t2)
    )


POLICIES: dict[str, Callable[[list[Step]], Step]] = {
    "md-asc": _pick_md_asc,
    "md-desc": _pick_md_desc,
}


@dataclass(frozen=True)
class ChaseTrace:
    """A chase run: the steps taken, in order, and the final instance.
    Replaying the steps from the start instance reproduces the result."""

    start: Instance
    steps: tuple[Step, ...]
    result: Instance

    def to_log(self) -> str:
        return "\n".join(f"{s.md_id} {s.t1} {s.t2}" for s in self.steps)

    @staticmethod
    def replay(
        start: Instance,
        mds: Sequence[MatchDep],
        log: str,
        sim: SimTest = declared_similarity,
    ) -> Instance:
        by_id = {md.md_id: md for md in mds}
        current = start
        for line in log.splitlines():
            if not line.strip():
                continue
            md_id, t1, t2 = line.split()
            current = chase_step(current, by_id[md_id], t1, t2, sim)
        return current


def step_bound(instance: Instance, mds: Sequence[MatchDep]) -> int:
    """Polynomial guard on chase length: |tids|² · |rules| · closure height."""
    schema = instance.schema
    seeds: dict[str, list[Value]] = {name: [] for name in schema.domains}
    for rel in schema.relations:
        for attr, dom_name in zip(rel.attributes, rel.domains):
            for row in instance.rows(rel.name):
                seeds[dom_name].append(row.values[attr])
    height = max(
        (
            closure_height(schema.domains[name], vals)
            for name, vals in seeds.items()
            if vals
        ),
        default=1,
    )
    n = instance.size()
    return max(1, n * n * len(mds) * height)


def chase(
    instance: Instance,
    mds: Sequence[MatchDep],
    policy: str = "md-asc",
    sim: SimTest = declared_similarity,
) -> ChaseTrace:
    """Run the chase to stability under a named deterministic policy."""
    try:
        pick = POLICIES[policy]
    except KeyError:
        raise ContractError(f"unknown chase policy {policy!r}") from None
    by_id = {md.md_id: md for md in mds}
    bound = step_bound(instance, mds)
    current = instance
    taken: list[Step] = []
    while True:
        steps = applicable_steps(current, mds, sim)
        if not steps:
            return ChaseTrace(instance, tuple(taken), current)
        if len(taken) >= bound:
            raise ChaseBoundError(
                f"chase exceeded its step guard ({bound}); merge axioms violated?"
            )
        step = pick(steps)
        current = chase_step(current, by_id[step.md_id], step.t1, step.t2, sim)
        taken.append(step)


# ---------------------------------------------------------------------------
# Exhaustive enumeration of stable outcomes


@dataclass(frozen=True)
class EnumerationResult:
    instances: tuple[Instance, ...]
    truncated: bool

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __len__(self) -> int:
        return len(self.instances)


class _ChaseSpace:
    """Compiled chase state space over integer value ids.

    States are flat tuples of per-slot value ids in a fixed (relation, tid,
    attribute) layout, which makes memoization and transition generation
    cheap enough for exhaustive exploration.
    """

    def __init__(self, instance: Instance, mds: Sequence[MatchDep], sim: SimTest):
        self.instance = instance
        self.schema = instance.schema
        self.sim = sim
        self.mds = sorted(mds, key=lambda m: m.md_id)

        self.row_keys: list[tuple[str, str]] = []  # (relation, tid)
        self.offsets: list[int] = []
        self.attr_offset: dict[str, dict[str, int]] = {}
        flat: list[int] = []

        self._dom_of_slot: list[LatticeDomain] = []
        self._ids: dict[str, dict[Value, int]] = {d: {} for d in self.schema.domains}
        self._vals: dict[str, list[Value]] = {d: [] for d in self.schema.domains}
        self._dom_name_of_slot: list[str] = []

        for rel in self.schema.relations:
            self.attr_offset[rel.name] = {a: i for i, a in enumerate(rel.attributes)}
            for row in instance.rows(rel.name):
                self.offsets.append(len(flat))
                self.row_keys.append((rel.name, row.tid))
                for attr, dom_name in zip(rel.attributes, rel.domains):
                    flat.append(self._vid(dom_name, row.values[attr]))
                    self._dom_of_slot.append(self.schema.domains[dom_name])
                    self._dom_name_of_slot.append(dom_name)
        self.initial = tuple(flat)

        row_index: dict[str, list[int]] = {rel.name: [] for rel in self.schema.relations}
        for i, (rel_name, _tid) in enumerate(self.row_keys):
            row_index[rel_name].append(i)

        # Compiled rules: slot offsets relative to each row's base offset.
        self.compiled = []
        for md in self.mds:
            off1 = self.attr_offset[md.rel1]
            off2 = self.attr_offset[md.rel2]
            lhs = tuple(
                (off1[a1], off2[a2], self.schema.domain_of(a1), self.schema.domain_of(a1).name)
                for a1, a2 in md.lhs
            )
            rhs = (
                off1[md.rhs[0]],
                off2[md.rhs[1]],
                self.schema.domain_of(md.rhs[0]),
                self.schema.domain_of(md.rhs[0]).name,
            )
            pairs = []
            for i in row_index[md.rel1]:
                for j in row_index[md.rel2]:
                    if i == j:
                        continue
                    if md.symmetric and i > j:
                        continue
                    pairs.append((i, j))
            self.compiled.append((md, lhs, rhs, tuple(pairs)))

        self._sim_cache: dict[tuple[str, int, int], bool] = {}
        self._match_cache: dict[tuple[str, int, int], int] = {}

    def _vid(self, dom_name: str, v: Value) -> int:
        ids = self._ids[dom_name]
        i = ids.get(v)
        if i is None:
            i = len(self._vals[dom_name])
            ids[v] = i
            self._vals[dom_name].append(v)
        return i

    def _sim(self, dom: LatticeDomain, dom_name: str, i: int, j: int) -> bool:
        key = (dom_name, i, j) if i <= j else (dom_name, j, i)
        r = self._sim_cache.get(key)
        if r is None:
            vals = self._vals[dom_name]
            r = self.sim(dom, vals[key[1]], vals[key[2]])
            self._sim_cache[key] = r
        return r

    def _match(self, dom: LatticeDomain, dom_name: str, i: int, j: int) -> int:
        key = (dom_name, i, j) if i <= j else (dom_name, j, i)
        r = self._match_cache.get(key)
        if r is None:
            vals = self._vals[dom_name]
            r = self._vid(dom_name, dom.match(vals[key[1]], vals[key[2]]))
            self._match_cache[key] = r
        return r

    def transitions(self, state: tuple) -> list[tuple[int, int, int]]:
        """Applicable (rule index, row i, row j) triples, in policy order."""
        found = []
        offsets = self.offsets
        for mi, (_md, lhs, rhs, pairs) in enumerate(self.compiled):
            r1, r2, _rdom, _rname = rhs
            for i, j in pairs:
                base1, base2 = offsets[i], offsets[j]
                if state[base1 + r1] == state[base2 + r2]:
                    continue
                ok = True
                for o1, o2, dom, dname in lhs:
                    if not self._sim(dom, dname, state[base1 + o1], state[base2 + o2]):
                        ok = False
                        break
                if ok:
                    found.append((mi, i, j))
        return found

    def apply(self, state: tuple, step: tuple[int, int, int]) -> tuple:
        mi, i, j = step
        _md, _lhs, (r1, r2, rdom, rname), _pairs = self.compiled[mi]
        s1, s2 = self.offsets[i] + r1, self.offsets[j] + r2
        merged = self._match(rdom, rname, state[s1], state[s2])
        out = list(state)
        out[s1] = merged
        out[s2] = merged
        return tuple(out)

    def to_instance(self, state: tuple) -> Instance:
        rows_by_rel: dict[str, list[Row]] = {r.name: [] for r in self.schema.relations}
        for idx, (rel_name, tid) in enumerate(self.row_keys):
            rel = self.schema.relation(rel_name)
            base = self.offsets[idx]
            values = {
                attr: self._vals[dom_name][state[base + k]]
                for k, (attr, dom_name) in enumerate(zip(rel.attributes, rel.domains))
            }
            rows_by_rel[rel_name].append(Row(tid, values))
        return Instance.build(self.schema, rows_by_rel)

    def step_of(self, t: tuple[int, int, int]) -> Step:
        mi, i, j = t
        return Step(self.compiled[mi][0].md_id, self.row_keys[i][1], self.row_keys[j][1])


def enumerate_clean(
    instance: Instance,
    mds: Sequence[MatchDep],
    limit: int = 64,
    sim: SimTest = declared_similarity,
    prune: Callable[[Instance], bool] | None = None,
) -> EnumerationResult:
    """Every stable instance reachable by enforcement, up to ``limit``.

    Depth-first over all applicable choices with exact memoization of
    visited states (merging only grows values, so the state graph is
    acyclic).  ``prune`` may cut provably uninteresting branches: a state
    for which it returns True is discarded together with its descendants —
    sound only for predicates that are upward-closed along enforcement,
    such as "a conflict marker has appeared".
    """
    if limit < 1:
        raise ContractError("enumeration limit must be at least 1")
    space = _ChaseSpace(instance, mds, sim)
    results: dict[tuple, Instance] = {}
    truncated = False
    seen: set[tuple] = set()
    stack = [space.initial]
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        if prune is not None and prune(space.to_instance(state)):
            continue
        steps = space.transitions(state)
        if not steps:
            if state not in results:
                if len(results) >= limit:
                    truncated = True
                    break
                results[state] = space.to_instance(state)
            continue
        for step in steps:
            child = space.apply(state, step)
            if child not in seen:
                stack.append(child)
    ordered = sorted(results.values(), key=lambda d: d.canonical_key())
    return EnumerationResult(tuple(ordered), truncated)


# ---------------------------------------------------------------------------
# Uniqueness preconditions


def is_interaction_free(mds: Sequence[MatchDep]) -> bool:
    """No rule's rhs attribute occurs in any rule's lhs (self included)."""
    rhs = set().union(*(md.rhs_attrs for md in mds)) if mds else set()
    lhs = set().union(*(md.lhs_attrs for md in mds)) if mds else set()
    return not (rhs & lhs)


@dataclass(frozen=True)
class PreconditionReport:
    """Which single-outcome guarantees hold for a rule set."""

    interaction_free: bool
    similarity_preserving: bool
    non_preserving_domains: tuple[str, ...]

    @property
    def unique_clean_guaranteed(self) -> bool:
        return self.interaction_free or self.similarity_preserving


def check_unique_clean_preconditions(
    mds: Sequence[MatchDep], schema: Schema
) -> PreconditionReport:
    involved: set[str] = set()
    for md in mds:
        involved |= md.lhs_attrs | md.rhs_attrs
    bad = sorted(
        {
            schema.domain_of(a).name
            for a in involved
            if not schema.domain_of(a).similarity.is_preserving
        }
    )
    return PreconditionReport(
        interaction_free=is_interaction_free(mds),
        similarity_preserving=not bad,
        non_preserving_domains=tuple(bad),
    )
