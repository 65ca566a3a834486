"""Random project, instance and query generators for the property suites."""

from __future__ import annotations

import random
from fractions import Fraction

from mdclean import (
    Instance,
    LatticeDomain,
    MatchDep,
    Product,
    Projection,
    Query,
    Rel,
    RelationDef,
    Row,
    Schema,
    SelectAttrEq,
    SelectEq,
    SimilaritySpec,
    UnionQ,
    Value,
    relax,
)
from mdclean.chase import applicable_steps, chase_step

DOMAIN_STYLES = (
    "atoms-explicit",
    "atoms-lifted",
    "interval-gap",
    "flat-explicit",
    "atoms-equality",
)
PRESERVING_STYLES = ("atoms-lifted", "interval-gap")


def random_domain(rng: random.Random, name: str, style: str, max_atoms: int = 4) -> LatticeDomain:
    n = rng.randint(2, max_atoms)
    if style == "atoms-explicit":
        atoms = [f"{name}x{i}" for i in range(n)]
        pairs = set()
        for _ in range(rng.randint(0, n)):
            a, b = rng.sample(atoms, 2)
            pairs.add((Value.atom_set([a]), Value.atom_set([b])))
        return LatticeDomain(name, "atoms", SimilaritySpec.explicit(pairs))
    if style == "atoms-lifted":
        atoms = [f"{name}x{i}" for i in range(n)]
        pairs = set()
        for _ in range(rng.randint(0, n)):
            a, b = rng.sample(atoms, 2)
            pairs.add((a, b))
        return LatticeDomain(name, "atoms", SimilaritySpec.lifted(pairs))
    if style == "atoms-equality":
        return LatticeDomain(name, "atoms", SimilaritySpec.equality())
    if style == "interval-gap":
        eps = rng.choice([Fraction(0), Fraction(1, 2), Fraction(1)])
        return LatticeDomain(name, "interval", SimilaritySpec.gap(eps))
    if style == "flat-explicit":
        labels = [f"{name}l{i}" for i in range(n)]
        pairs = set()
        for _ in range(rng.randint(0, n - 1)):
            a, b = rng.sample(labels, 2)
            pairs.add((Value.flat(a), Value.flat(b)))
        return LatticeDomain(name, "flat", SimilaritySpec.explicit(pairs))
    raise ValueError(style)


def random_value(rng: random.Random, dom: LatticeDomain, max_atoms: int = 4) -> Value:
    if dom.kind == "atoms":
        atoms = [f"{dom.name}x{i}" for i in range(max_atoms)]
        k = 1 if rng.random() < 0.8 else 2
        return Value.atom_set(rng.sample(atoms, min(k, len(atoms))))
    if dom.kind == "interval":
        lo = Fraction(rng.randint(0, 6))
        if rng.random() < 0.7:
            return Value.interval(lo)
        return Value.interval(lo, lo + rng.randint(0, 3))
    labels = [f"{dom.name}l{i}" for i in range(max_atoms)]
    return Value.flat(rng.choice(labels))


class RandomProject:
    """A generated schema + rule set + dirty instance."""

    def __init__(self, schema: Schema, mds: list[MatchDep], instance: Instance):
        self.schema = schema
        self.mds = mds
        self.instance = instance


def random_project(
    rng: random.Random,
    max_tuples: int = 5,
    max_mds: int = 3,
    max_atoms: int = 4,
    preserving: bool = False,
    interaction_free: bool = False,
    styles: tuple[str, ...] | None = None,
) -> RandomProject:
    n_attrs = rng.randint(2, 4)
    if styles is None:
        styles = PRESERVING_STYLES if preserving else DOMAIN_STYLES
    attrs = [f"a{i}" for i in range(n_attrs)]
    domains: dict[str, LatticeDomain] = {}
    dom_names = []
    for i in range(n_attrs):
        style = rng.choice(styles)
        dom = random_domain(rng, f"d{i}", style, max_atoms)
        domains[dom.name] = dom
        dom_names.append(dom.name)
    schema = Schema(
        domains=domains,
        relations=(RelationDef("r", tuple(attrs), tuple(dom_names)),),
    )

    mds: list[MatchDep] = []
    for k in range(rng.randint(1, max_mds)):
        lhs_attrs = rng.sample(attrs, rng.randint(1, min(2, n_attrs)))
        rhs_attr = rng.choice(attrs)
        mds.append(
            MatchDep(
                md_id=f"md{k}",
                rel1="r",
                rel2="r",
                lhs=tuple((a, a) for a in lhs_attrs),
                rhs=(rhs_attr, rhs_attr),
            )
        )
    if interaction_free:
        kept: list[MatchDep] = []
        for md in mds:
            trial = kept + [md]
            lhs_all = set().union(*(m.lhs_attrs for m in trial))
            rhs_all = set().union(*(m.rhs_attrs for m in trial))
            if not (lhs_all & rhs_all):
                kept.append(md)
        if not kept:
            kept = [MatchDep("md0", "r", "r", ((attrs[0], attrs[0]),), (attrs[1], attrs[1]))]
        mds = kept

    rows = [
        Row(
            f"t{i}",
            {
                a: random_value(rng, domains[dn], max_atoms)
                for a, dn in zip(attrs, dom_names)
            },
        )
        for i in range(rng.randint(1, max_tuples))
    ]
    instance = Instance.build(schema, {"r": rows})
    return RandomProject(schema, mds, instance)


def random_chase_states(rng: random.Random, project: RandomProject, max_steps: int = 12):
    """A ⊑-increasing chain of instances produced by random enforcement."""
    states = [project.instance]
    by_id = {m.md_id: m for m in project.mds}
    current = project.instance
    for _ in range(max_steps):
        steps = applicable_steps(current, project.mds)
        if not steps:
            break
        s = rng.choice(steps)
        current = chase_step(current, by_id[s.md_id], s.t1, s.t2)
        states.append(current)
    return states


def _random_selects(rng: random.Random, project: RandomProject, q: Query) -> Query:
    schema = project.schema
    rel = schema.relations[0]
    attrs = rel.attributes
    comparable = [
        (a, b)
        for i, a in enumerate(attrs)
        for b in attrs[i + 1 :]
        if schema.comparable(a, b)
    ]
    for _ in range(rng.randint(0, 2)):
        if comparable and rng.random() < 0.3:
            a, b = rng.choice(comparable)
            q = SelectAttrEq(a, b, q)
        else:
            attr = rng.choice(attrs)
            vals = [
                row.values[attr]
                for row in project.instance.rows(rel.name)
                if not row.values[attr].is_bottom
            ]
            if vals and rng.random() < 0.8:
                const = rng.choice(vals)
            else:
                const = random_value(rng, schema.domain_of(attr))
            q = SelectEq(attr, const, q)
    return q


def random_positive_query(rng: random.Random, project: RandomProject) -> Query:
    """Random π/×/∪/σ= query over the project's single relation."""
    rel = project.schema.relations[0]
    q1 = _random_selects(rng, project, Rel(rel.name))
    attrs = rel.attributes
    shape = rng.random()
    if shape < 0.2:
        q2 = _random_selects(rng, project, Rel(rel.name))
        q: Query = Product(q1, q2)
        attrs = tuple(f"l.{a}" for a in attrs) + tuple(f"r.{a}" for a in attrs)
    elif shape < 0.4:
        q2 = _random_selects(rng, project, Rel(rel.name))
        q = UnionQ(q1, q2)
    else:
        q = q1
    if rng.random() < 0.7:
        keep = tuple(rng.sample(list(attrs), rng.randint(1, min(3, len(attrs)))))
        q = Projection(keep, q)
    return q


def random_relaxed_query(rng: random.Random, project: RandomProject) -> Query:
    return relax(random_positive_query(rng, project))
