"""Project file loading, validation errors, canonical round-trips."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from mdclean import (
    ProjectError,
    QueryError,
    Value,
    load_bundled_project,
    load_project,
    parse_query,
    parse_value,
    render_query,
    render_value,
)
from mdclean.project import (
    axiom_reports,
    bundled_project_names,
    dumps_project,
    load_project_dict,
    project_to_dict,
    render_value_text,
)
from mdclean.values import LatticeDomain, SimilaritySpec


def minimal_doc():
    return {
        "domains": [
            {
                "name": "col",
                "kind": "atoms",
                "similarity": {"mode": "explicit_pairs", "pairs": [["a1", "a2"]]},
            }
        ],
        "relations": [
            {"name": "r", "attributes": [{"name": "A", "domain": "col"}]}
        ],
        "mds": [{"id": "m", "lhs": [["A", "A"]], "rhs": ["A", "A"]}],
        "data": {"r": [{"tid": "t1", "values": {"A": "a1"}}]},
        "queries": {"all": "(rel r)"},
    }


# ---------------------------------------------------------------------------
# value literals


def test_parse_atoms_tokenizes_and_casefolds():
    dom = LatticeDomain("d", "atoms", SimilaritySpec.equality())
    assert parse_value(dom, "25 Main St., Ottawa") == Value.atom_set(
        ["25", "main", "st.", "ottawa"]
    )
    assert parse_value(dom, ["B1"]) == Value.atom_set(["b1"])
    assert parse_value(dom, None).is_bottom


def test_parse_interval_forms():
    dom = LatticeDomain("d", "interval", SimilaritySpec.equality())
    assert parse_value(dom, 3) == Value.interval(3)
    assert parse_value(dom, "1/2") == Value.interval(Fraction(1, 2))
    assert parse_value(dom, "1..3") == Value.interval(1, 3)
    assert parse_value(dom, [1, "5/2"]) == Value.interval(1, Fraction(5, 2))


def test_parse_flat_labels():
    dom = LatticeDomain("d", "flat", SimilaritySpec.equality())
    assert parse_value(dom, "x") == Value.flat("x")
    assert parse_value(dom, "TOP").is_top
    assert parse_value(dom, "⊤").is_top


def test_render_value_roundtrip():
    for dom, raw in [
        (LatticeDomain("d", "atoms", SimilaritySpec.equality()), "25 Main St."),
        (LatticeDomain("d", "interval", SimilaritySpec.equality()), "1..5/2"),
        (LatticeDomain("d", "flat", SimilaritySpec.equality()), "x"),
    ]:
        v = parse_value(dom, raw)
        assert parse_value(dom, render_value(dom, v)) == v
        assert parse_value(dom, render_value_text(dom, v)) == v


# ---------------------------------------------------------------------------
# loading and validation


def test_load_minimal_project():
    project = load_project_dict(minimal_doc())
    assert project.instance.size() == 1
    assert [m.md_id for m in project.mds] == ["m"]
    assert "all" in project.queries


def test_bundled_projects_load():
    names = bundled_project_names()
    assert {"chain_rules", "contacts", "dedup_records", "inventory"} <= set(names)
    for name in names:
        project = load_bundled_project(name)
        assert project.instance.size() >= 1


def test_contacts_project_shape():
    project = load_bundled_project("contacts")
    assert len(project.schema.relations) == 1
    assert len(project.mds) == 2
    assert project.instance.size() == 3


def test_empty_data_is_valid_and_stable():
    doc = minimal_doc()
    doc["data"] = {}
    project = load_project_dict(doc)
    from mdclean import is_stable

    assert project.instance.size() == 0
    assert is_stable(project.instance, project.mds)


def test_unknown_attribute_in_md_is_named():
    doc = minimal_doc()
    doc["mds"][0]["lhs"] = [["ghost", "A"]]
    with pytest.raises(ProjectError) as err:
        load_project_dict(doc)
    assert any("ghost" in e for e in err.value.errors)


def test_all_errors_reported_together():
    doc = minimal_doc()
    doc["mds"].append({"id": "m2", "lhs": [["nope", "nope"]], "rhs": ["A", "A"]})
    doc["data"]["r"].append({"tid": "t2", "values": {}})
    with pytest.raises(ProjectError) as err:
        load_project_dict(doc)
    assert len(err.value.errors) >= 2


def test_duplicate_tid_rejected():
    doc = minimal_doc()
    doc["data"]["r"].append({"tid": "t1", "values": {"A": "a2"}})
    with pytest.raises(ProjectError):
        load_project_dict(doc)


def test_malformed_json_file(tmp_path):
    path = tmp_path / "broken.mdc"
    path.write_text("{nope", encoding="utf-8")
    with pytest.raises(ProjectError) as err:
        load_project(path)
    assert "line" in err.value.errors[0]


def test_strict_axiom_mode_passes_builtin():
    load_project_dict(minimal_doc(), strict_axioms=True)


def test_axiom_reports_cover_all_domains():
    project = load_bundled_project("inventory")
    reports = axiom_reports(project)
    assert set(reports) == set(project.schema.domains)
    assert all(r.lattice_ok for r in reports.values())


# ---------------------------------------------------------------------------
# canonical serialization


def test_serialize_roundtrip_bundled():
    for name in bundled_project_names():
        project = load_bundled_project(name)
        doc = project_to_dict(project)
        again = load_project_dict(doc)
        assert again == project
        assert project_to_dict(again) == doc


def test_dumps_is_valid_json():
    project = load_project_dict(minimal_doc())
    doc = json.loads(dumps_project(project))
    assert doc["relations"][0]["name"] == "r"


# ---------------------------------------------------------------------------
# query text


def test_parse_query_shapes():
    project = load_bundled_project("contacts")
    schema = project.schema
    q = parse_query('(project (name) (select-eq address "25 Main St." (rel people)))', schema)
    text = render_query(q, schema)
    assert parse_query(text, schema) == q


def test_parse_query_unknown_relation():
    project = load_bundled_project("contacts")
    with pytest.raises(QueryError):
        parse_query("(rel ghosts)", project.schema)


def test_parse_query_unknown_attribute():
    project = load_bundled_project("contacts")
    with pytest.raises(QueryError):
        parse_query('(select-eq ghost "x" (rel people))', project.schema)


def test_parse_query_syntax_errors():
    project = load_bundled_project("contacts")
    for text in ["(rel people", "(project (name))", '(select-eq name "x")', "people"]:
        with pytest.raises(QueryError):
            parse_query(text, project.schema)


def test_render_all_bundled_queries_roundtrip():
    for name in bundled_project_names():
        project = load_bundled_project(name)
        for qname, q in project.queries.items():
            text = render_query(q, project.schema)
            assert parse_query(text, project.schema) == q, (name, qname)


def test_relaxed_query_renders(tmp_path):
    from mdclean import relax

    project = load_bundled_project("contacts")
    q = relax(project.queries["at_main_st"])
    text = render_query(q, project.schema)
    assert "select-dom" in text
    assert parse_query(text, project.schema) == q
