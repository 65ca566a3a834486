"""Project files: one JSON document declaring domains, schema, rules, data
and named queries.

Canonical form: fixed key order, sorted atom lists, fractions as "p/q"
strings.  Serializing a loaded project and reloading it yields an equal
project.  Loading validates everything and reports *all* problems at once;
nothing is ever partially loaded.

Value literals are kind-directed:

* atoms     — a string is tokenized on commas/whitespace and casefolded
              ("25 Main St." → {25, main, st.}); a list gives the atoms
              directly (still casefolded).
* interval  — a number or "p/q" string is a point; "lo..hi" or [lo, hi]
              an interval.  Endpoints are exact rationals.
* flat      — the label itself; "TOP" or "⊤" is the conflict marker.
* null      — ⊥ for any kind.

Query text is a small s-expression language::

    (rel people)
    (project (name) (select-eq address "25 Main St." (rel people)))
    (select-dom "25 Main St." address (rel people))
    (select-join-dom addr1 addr2 (product (rel a) (rel b)))
    (union Q1 Q2), (select-attr-eq a1 a2 Q)

Constants are parsed against the attribute's domain.  Products rename
colliding attributes with "l."/"r." prefixes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .chase import MatchDep
from .errors import ContractError, MdcError, ProjectError, QueryError
from .instances import Instance, RelationDef, Row, Schema
from .queries import (
    Product,
    Projection as ProjectNode,
    Query,
    Rel,
    SelectAttrEq,
    SelectDom,
    SelectEq,
    SelectJoinDom,
    UnionQ,
    output_schema,
)
from .values import (
    KIND_ATOMS,
    KIND_FLAT,
    KIND_INTERVAL,
    TOP_LABEL,
    LatticeDomain,
    SimilaritySpec,
    Value,
    active_closure,
    validate_axioms,
)


@dataclass
class Project:
    """A fully validated cleaning project."""

    schema: Schema
    mds: list[MatchDep]
    instance: Instance
    queries: dict[str, Query]

    def domain_values(self, dom_name: str) -> list[Value]:
        """All data values of attributes using the given domain."""
        vals: list[Value] = []
        for rel in self.schema.relations:
            for attr, d in zip(rel.attributes, rel.domains):
                if d == dom_name:
                    vals.extend(row.values[attr] for row in self.instance.rows(rel.name))
        return vals


# ---------------------------------------------------------------------------
# Rationals and value literals


def parse_rational(raw: Any) -> Fraction:
    if isinstance(raw, bool):
        raise MdcError(f"not a number: {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return Fraction(str(raw))
    if isinstance(raw, str):
        return Fraction(raw)
    raise MdcError(f"not a number: {raw!r}")


def render_rational(x: Fraction) -> Any:
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_value(dom: LatticeDomain, raw: Any) -> Value:
    """Kind-directed literal parsing (see module docstring)."""
    if raw is None:
        return Value.bottom()
    if dom.kind == KIND_ATOMS:
        if isinstance(raw, str):
            v = Value.tokens(raw)
            if v.is_bottom:
                raise MdcError(f"atom value {raw!r} has no tokens")
            return v
        if isinstance(raw, (list, tuple)):
            if not raw or not all(isinstance(a, str) for a in raw):
                raise MdcError(f"atom list must be non-empty strings: {raw!r}")
            return Value.atom_set(raw)
        raise MdcError(f"bad atoms literal: {raw!r}")
    if dom.kind == KIND_INTERVAL:
        if isinstance(raw, str) and ".." in raw:
            lo, hi = raw.split("..", 1)
            return Value.interval(parse_rational(lo.strip()), parse_rational(hi.strip()))
        if isinstance(raw, (list, tuple)):
            if len(raw) != 2:
                raise MdcError(f"interval literal needs two endpoints: {raw!r}")
            return Value.interval(parse_rational(raw[0]), parse_rational(raw[1]))
        return Value.interval(parse_rational(raw))
    # flat
    if not isinstance(raw, str) or not raw:
        raise MdcError(f"bad label literal: {raw!r}")
    if raw in ("TOP", TOP_LABEL):
        return Value.flat_top()
    return Value.flat(raw)


def render_value(dom: LatticeDomain, v: Value) -> Any:
    """Canonical JSON form of a value; inverse of :func:`parse_value`."""
    if v.is_bottom:
        return None
    if dom.kind == KIND_ATOMS:
        return list(v.payload)
    if dom.kind == KIND_INTERVAL:
        lo, hi = v.payload
        return [render_rational(lo), render_rational(hi)]
    return "TOP" if v.is_top else v.payload[0]


def render_value_text(dom: LatticeDomain, v: Value) -> str:
    """Canonical query-literal text of a value."""
    if v.is_bottom:
        raise MdcError("⊥ has no literal form")
    if dom.kind == KIND_ATOMS:
        return " ".join(v.payload)
    if dom.kind == KIND_INTERVAL:
        lo, hi = v.payload
        if lo == hi:
            return str(render_rational(lo))
        return f"{render_rational(lo)}..{render_rational(hi)}"
    return "TOP" if v.is_top else v.payload[0]


# ---------------------------------------------------------------------------
# Loading


def _load_domains(raw: Any, errors: list[str]) -> dict[str, LatticeDomain]:
    domains: dict[str, LatticeDomain] = {}
    if not isinstance(raw, list):
        errors.append("'domains' must be a list")
        return domains
    for entry in raw:
        name = entry.get("name")
        kind = entry.get("kind")
        if not name or not isinstance(name, str):
            errors.append(f"domain without a name: {entry!r}")
            continue
        if name in domains:
            errors.append(f"duplicate domain {name!r}")
            continue
        if kind not in (KIND_ATOMS, KIND_INTERVAL, KIND_FLAT):
            errors.append(f"domain {name!r}: unknown kind {kind!r}")
            continue
        sim_raw = entry.get("similarity", {"mode": "equality"})
        mode = sim_raw.get("mode", "equality")
        probe = LatticeDomain(name, kind)  # for literal parsing below
        try:
            if mode == "equality":
                sim = SimilaritySpec.equality()
            elif mode == "explicit_pairs":
                pairs = []
                for p in sim_raw.get("pairs", []):
                    if not isinstance(p, (list, tuple)) or len(p) != 2:
                        raise MdcError(f"bad similarity pair {p!r}")
                    pairs.append((parse_value(probe, p[0]), parse_value(probe, p[1])))
                if any(a.is_bottom or b.is_bottom for a, b in pairs):
                    raise MdcError("⊥ cannot appear in a similarity pair")
                sim = SimilaritySpec.explicit(pairs)
            elif mode == "lifted_pairs":
                pairs = []
                for p in sim_raw.get("pairs", []):
                    if (
                        not isinstance(p, (list, tuple))
                        or len(p) != 2
                        or not all(isinstance(a, str) and a for a in p)
                    ):
                        raise MdcError(f"bad atom pair {p!r}")
                    pairs.append((p[0], p[1]))
                sim = SimilaritySpec.lifted(pairs)
            elif mode == "interval_gap":
                sim = SimilaritySpec.gap(parse_rational(sim_raw.get("epsilon", 0)))
            else:
                raise MdcError(f"unknown similarity mode {mode!r}")
            domains[name] = LatticeDomain(name, kind, sim)
        except MdcError as exc:
            errors.append(f"domain {name!r}: {exc}")
    return domains


def _load_schema(raw: Any, domains: dict[str, LatticeDomain], errors: list[str]) -> Schema | None:
    rels: list[RelationDef] = []
    if not isinstance(raw, list):
        errors.append("'relations' must be a list")
        return None
    for entry in raw:
        name = entry.get("name")
        attrs_raw = entry.get("attributes")
        if not name or not isinstance(attrs_raw, list) or not attrs_raw:
            errors.append(f"bad relation entry: {entry!r}")
            continue
        attrs, doms = [], []
        for a in attrs_raw:
            ok = isinstance(a, dict) and isinstance(a.get("name"), str) and isinstance(a.get("domain"), str)
            if not ok:
                errors.append(f"relation {name!r}: bad attribute entry {a!r}")
                continue
            attrs.append(a["name"])
            doms.append(a["domain"])
        rels.append(RelationDef(name, tuple(attrs), tuple(doms)))
    try:
        return Schema(domains=domains, relations=tuple(rels))
    except ContractError as exc:
        errors.append(str(exc))
        return None


def _load_mds(raw: Any, schema: Schema, errors: list[str]) -> list[MatchDep]:
    mds: list[MatchDep] = []
    if raw is None:
        return mds
    if not isinstance(raw, list):
        errors.append("'mds' must be a list")
        return mds
    seen_ids: set[str] = set()
    for entry in raw:
        md_id = entry.get("id")
        lhs_raw = entry.get("lhs")
        rhs_raw = entry.get("rhs")
        if not md_id or not isinstance(md_id, str):
            errors.append(f"md without an id: {entry!r}")
            continue
        if md_id in seen_ids:
            errors.append(f"duplicate md id {md_id!r}")
            continue
        seen_ids.add(md_id)
        if (
            not isinstance(lhs_raw, list)
            or not lhs_raw
            or not all(isinstance(p, (list, tuple)) and len(p) == 2 for p in lhs_raw)
        ):
            errors.append(f"md {md_id!r}: 'lhs' must be a list of attribute pairs")
            continue
        if not isinstance(rhs_raw, (list, tuple)) or len(rhs_raw) != 2:
            errors.append(f"md {md_id!r}: 'rhs' must be one attribute pair")
            continue
        rels_raw = entry.get("relations")
        try:
            if rels_raw is not None:
                rel1, rel2 = rels_raw
            else:
                rel1 = schema.relation_of(lhs_raw[0][0]).name
                rel2 = schema.relation_of(lhs_raw[0][1]).name
            md = MatchDep(
                md_id=md_id,
                rel1=rel1,
                rel2=rel2,
                lhs=tuple((a, b) for a, b in lhs_raw),
                rhs=(rhs_raw[0], rhs_raw[1]),
            )
            md.validate(schema)
            mds.append(md)
        except (ContractError, ValueError) as exc:
            errors.append(f"md {md_id!r}: {exc}")
    return mds


def _load_data(raw: Any, schema: Schema, errors: list[str]) -> Instance | None:
    rows_by_rel: dict[str, list[Row]] = {}
    raw = raw or {}
    if not isinstance(raw, dict):
        errors.append("'data' must be an object keyed by relation")
        return None
    known = {r.name for r in schema.relations}
    for rel_name, rows_raw in raw.items():
        if rel_name not in known:
            errors.append(f"data for unknown relation {rel_name!r}")
            continue
        rel = schema.relation(rel_name)
        rows: list[Row] = []
        for k, entry in enumerate(rows_raw):
            tid = entry.get("tid", f"t{k + 1}")
            values_raw = entry.get("values", {})
            values: dict[str, Value] = {}
            bad = False
            for attr, dom_name in zip(rel.attributes, rel.domains):
                if attr not in values_raw:
                    errors.append(f"tuple {tid!r}: missing attribute {attr!r}")
                    bad = True
                    continue
                try:
                    values[attr] = parse_value(schema.domains[dom_name], values_raw[attr])
                except MdcError as exc:
                    errors.append(f"tuple {tid!r}, attribute {attr!r}: {exc}")
                    bad = True
            for attr in values_raw:
                if attr not in rel.attributes:
                    errors.append(f"tuple {tid!r}: unknown attribute {attr!r}")
                    bad = True
            if not bad:
                rows.append(Row(str(tid), values))
        rows_by_rel[rel_name] = rows
    try:
        return Instance.build(schema, rows_by_rel)
    except ContractError as exc:
        errors.append(str(exc))
        return None


def load_project(source: str | Path | dict, strict_axioms: bool = False) -> Project:
    """Parse and fully validate a project.

    Raises :class:`ProjectError` carrying every problem found.  With
    ``strict_axioms`` the merge axioms are additionally checked over the
    merge closure of each domain's declared and data values.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProjectError(
                [f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
            ) from exc
    return load_project_dict(doc, strict_axioms=strict_axioms)


def load_project_dict(doc: dict, strict_axioms: bool = False) -> Project:
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ProjectError(["project document must be a JSON object"])
    domains = _load_domains(doc.get("domains", []), errors)
    schema = _load_schema(doc.get("relations", []), domains, errors)
    if schema is None or errors:
        raise ProjectError(errors or ["empty schema"])
    mds = _load_mds(doc.get("mds"), schema, errors)
    instance = _load_data(doc.get("data"), schema, errors)
    queries: dict[str, Query] = {}
    for name, text in (doc.get("queries") or {}).items():
        try:
            queries[name] = parse_query(text, schema)
        except QueryError as exc:
            errors.append(f"query {name!r}: {exc}")
    if errors or instance is None:
        raise ProjectError(errors)
    project = Project(schema=schema, mds=mds, instance=instance, queries=queries)
    if strict_axioms:
        for name, report in axiom_reports(project).items():
            if not report.lattice_ok:
                errors.append(f"domain {name!r} violates the merge axioms: "
                              f"{report.counterexamples}")
        if errors:
            raise ProjectError(errors)
    return project


def axiom_reports(project: Project):
    """Axiom check per domain, over the merge closure of its declared
    similarity values and data values."""
    reports = {}
    for name, dom in project.schema.domains.items():
        seed = list(project.domain_values(name))
        for a, b in dom.similarity.pairs:
            seed.extend((a, b))
        closure = active_closure(dom, seed)
        reports[name] = validate_axioms(dom, sorted(closure, key=Value.sort_key))
    return reports


# ---------------------------------------------------------------------------
# Serialization


def project_to_dict(project: Project) -> dict:
    """Canonical document form; stable across runs."""
    schema = project.schema
    domains_out = []
    for name in sorted(schema.domains):
        dom = schema.domains[name]
        sim = dom.similarity
        sim_out: dict[str, Any] = {"mode": sim.mode}
        if sim.mode == "explicit_pairs":
            pairs = {tuple(sorted((a.sort_key(), b.sort_key()))): (a, b) for a, b in sim.pairs}
            sim_out["pairs"] = [
                sorted((render_value(dom, a), render_value(dom, b)), key=json.dumps)
                for _, (a, b) in sorted(pairs.items())
            ]
        elif sim.mode == "lifted_pairs":
            uniq = {tuple(sorted(p)) for p in sim.atom_pairs}
            sim_out["pairs"] = [list(p) for p in sorted(uniq)]
        elif sim.mode == "interval_gap":
            sim_out["epsilon"] = render_rational(sim.epsilon)
        domains_out.append({"name": name, "kind": dom.kind, "similarity": sim_out})
    relations_out = [
        {
            "name": rel.name,
            "attributes": [
                {"name": a, "domain": d} for a, d in zip(rel.attributes, rel.domains)
            ],
        }
        for rel in schema.relations
    ]
    mds_out = [
        {
            "id": md.md_id,
            "relations": [md.rel1, md.rel2],
            "lhs": [list(p) for p in md.lhs],
            "rhs": list(md.rhs),
        }
        for md in project.mds
    ]
    data_out: dict[str, list] = {}
    for rel in schema.relations:
        rows = project.instance.rows(rel.name)
        if not rows:
            continue
        data_out[rel.name] = [
            {
                "tid": row.tid,
                "values": {
                    a: render_value(schema.domains[d], row.values[a])
                    for a, d in zip(rel.attributes, rel.domains)
                },
            }
            for row in rows
        ]
    queries_out = {
        name: render_query(q, schema) for name, q in sorted(project.queries.items())
    }
    return {
        "domains": domains_out,
        "relations": relations_out,
        "mds": mds_out,
        "data": data_out,
        "queries": queries_out,
    }


def dumps_project(project: Project) -> str:
    return json.dumps(project_to_dict(project), ensure_ascii=False, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Query text


def _tokenize_query(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            buf = []
            while j < len(text) and text[j] != '"':
                if text[j] == "\\" and j + 1 < len(text):
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= len(text):
                raise QueryError("unterminated string literal")
            tokens.append('"' + "".join(buf))
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in '()"':
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _parse_sexp(tokens: list[str], pos: int) -> tuple[Any, int]:
    if pos >= len(tokens):
        raise QueryError("unexpected end of query")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _parse_sexp(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise QueryError("missing closing parenthesis")
        return items, pos + 1
    if tok == ")":
        raise QueryError("unexpected closing parenthesis")
    return tok, pos + 1


def _literal_text(item: Any) -> str:
    if not isinstance(item, str):
        raise QueryError(f"expected a literal, got {item!r}")
    return item[1:] if item.startswith('"') else item


def _symbol(item: Any) -> str:
    if not isinstance(item, str) or item.startswith('"'):
        raise QueryError(f"expected a name, got {item!r}")
    return item


def _attr_domain(child: Query, schema: Schema, attr: str) -> LatticeDomain:
    attrs, domains = output_schema(child, schema)
    try:
        return domains[attrs.index(attr)]
    except ValueError:
        raise QueryError(f"attribute {attr!r} not produced by subquery") from None


def _build_query(sexp: Any, schema: Schema) -> Query:
    if not isinstance(sexp, list) or not sexp:
        raise QueryError(f"expected an operator form, got {sexp!r}")
    op = _symbol(sexp[0])
    args = sexp[1:]
    if op == "rel":
        if len(args) != 1:
            raise QueryError("(rel NAME)")
        name = _symbol(args[0])
        if all(rel.name != name for rel in schema.relations):
            raise QueryError(f"unknown relation {name!r}")
        return Rel(name)
    if op == "project":
        if len(args) != 2 or not isinstance(args[0], list):
            raise QueryError("(project (ATTR ...) SUBQUERY)")
        child = _build_query(args[1], schema)
        attrs = tuple(_symbol(a) for a in args[0])
        out_attrs, _ = output_schema(child, schema)
        for a in attrs:
            if a not in out_attrs:
                raise QueryError(f"attribute {a!r} not produced by subquery")
        return ProjectNode(attrs, child)
    if op == "product":
        if len(args) != 2:
            raise QueryError("(product SUBQUERY SUBQUERY)")
        return Product(_build_query(args[0], schema), _build_query(args[1], schema))
    if op == "union":
        if len(args) != 2:
            raise QueryError("(union SUBQUERY SUBQUERY)")
        q = UnionQ(_build_query(args[0], schema), _build_query(args[1], schema))
        output_schema(q, schema)  # validates branch compatibility
        return q
    if op == "select-eq":
        if len(args) != 3:
            raise QueryError("(select-eq ATTR LITERAL SUBQUERY)")
        attr = _symbol(args[0])
        child = _build_query(args[2], schema)
        dom = _attr_domain(child, schema, attr)
        try:
            const = parse_value(dom, _literal_text(args[1]))
        except MdcError as exc:
            raise QueryError(str(exc)) from exc
        return SelectEq(attr, const, child)
    if op == "select-attr-eq":
        if len(args) != 3:
            raise QueryError("(select-attr-eq ATTR ATTR SUBQUERY)")
        child = _build_query(args[2], schema)
        a1, a2 = _symbol(args[0]), _symbol(args[1])
        d1 = _attr_domain(child, schema, a1)
        d2 = _attr_domain(child, schema, a2)
        if d1.name != d2.name:
            raise QueryError(f"{a1!r} and {a2!r} are not comparable")
        return SelectAttrEq(a1, a2, child)
    if op == "select-dom":
        if len(args) != 3:
            raise QueryError("(select-dom LITERAL ATTR SUBQUERY)")
        attr = _symbol(args[1])
        child = _build_query(args[2], schema)
        dom = _attr_domain(child, schema, attr)
        try:
            const = parse_value(dom, _literal_text(args[0]))
        except MdcError as exc:
            raise QueryError(str(exc)) from exc
        return SelectDom(const, attr, child)
    if op == "select-join-dom":
        if len(args) != 3:
            raise QueryError("(select-join-dom ATTR ATTR SUBQUERY)")
        child = _build_query(args[2], schema)
        a1, a2 = _symbol(args[0]), _symbol(args[1])
        d1 = _attr_domain(child, schema, a1)
        d2 = _attr_domain(child, schema, a2)
        if d1.name != d2.name:
            raise QueryError(f"{a1!r} and {a2!r} are not comparable")
        return SelectJoinDom(a1, a2, child)
    raise QueryError(f"unknown operator {op!r}")


def parse_query(text: str, schema: Schema) -> Query:
    tokens = _tokenize_query(text)
    sexp, pos = _parse_sexp(tokens, 0)
    if pos != len(tokens):
        raise QueryError("trailing tokens after query")
    return _build_query(sexp, schema)


def render_query(q: Query, schema: Schema) -> str:
    """Canonical text form; inverse of :func:`parse_query`."""

    def quote(text: str) -> str:
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

    def rec(node: Query) -> str:
        if isinstance(node, Rel):
            return f"(rel {node.name})"
        if isinstance(node, ProjectNode):
            return f"(project ({' '.join(node.attrs)}) {rec(node.child)})"
        if isinstance(node, Product):
            return f"(product {rec(node.left)} {rec(node.right)})"
        if isinstance(node, UnionQ):
            return f"(union {rec(node.left)} {rec(node.right)})"
        if isinstance(node, SelectEq):
            dom = _attr_domain(node.child, schema, node.attr)
            return f"(select-eq {node.attr} {quote(render_value_text(dom, node.const))} {rec(node.child)})"
        if isinstance(node, SelectAttrEq):
            return f"(select-attr-eq {node.attr1} {node.attr2} {rec(node.child)})"
        if isinstance(node, SelectDom):
            dom = _attr_domain(node.child, schema, node.attr)
            return f"(select-dom {quote(render_value_text(dom, node.const))} {node.attr} {rec(node.child)})"
        if isinstance(node, SelectJoinDom):
            return f"(select-join-dom {node.attr1} {node.attr2} {rec(node.child)})"
        raise QueryError(f"unknown query node {node!r}")

    return rec(q)


# ---------------------------------------------------------------------------
# Bundled demonstration projects


def bundled_project_names() -> list[str]:
    pkg = resources.files("mdclean").joinpath("data")
    return sorted(p.name[: -len(".mdc")] for p in pkg.iterdir() if p.name.endswith(".mdc"))


def load_bundled_project(name: str) -> Project:
    pkg = resources.files("mdclean").joinpath("data").joinpath(f"{name}.mdc")
    with resources.as_file(pkg) as path:
        return load_project(path)
