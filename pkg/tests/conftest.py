"""Shared fixtures: the worked contact/chain examples in programmatic form."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mdclean import (
    Instance,
    LatticeDomain,
    MatchDep,
    RelationDef,
    Row,
    Schema,
    SimilaritySpec,
    Value,
)


def atoms(*names: str) -> Value:
    return Value.atom_set(names)


@pytest.fixture
def chain_project():
    """Three rows (a_i, b_i, c_i); a1≈a2, b2≈b3; two chained rules.

    Known outcomes: merging B first then C gives
      (a1, ⟨b1,b2⟩, ⟨c1,c2⟩), (a2, ⟨b1,b2⟩, ⟨c1,c2⟩), (a3, b3, c3);
    merging C first gives
      (a1, ⟨b1,b2⟩, ⟨c1,c2,c3⟩), (a2, ⟨b1,b2⟩, ⟨c1,c2,c3⟩), (a3, b3, ⟨c2,c3⟩).
    """
    domains = {
        "col_a": LatticeDomain(
            "col_a", "atoms", SimilaritySpec.explicit([(atoms("a1"), atoms("a2"))])
        ),
        "col_b": LatticeDomain(
            "col_b", "atoms", SimilaritySpec.explicit([(atoms("b2"), atoms("b3"))])
        ),
        "col_c": LatticeDomain("col_c", "atoms", SimilaritySpec.explicit([])),
    }
    schema = Schema(
        domains=domains,
        relations=(RelationDef("r", ("A", "B", "C"), ("col_a", "col_b", "col_c")),),
    )
    rows = [
        Row("t1", {"A": atoms("a1"), "B": atoms("b1"), "C": atoms("c1")}),
        Row("t2", {"A": atoms("a2"), "B": atoms("b2"), "C": atoms("c2")}),
        Row("t3", {"A": atoms("a3"), "B": atoms("b3"), "C": atoms("c3")}),
    ]
    instance = Instance.build(schema, {"r": rows})
    mds = [
        MatchDep("phi1", "r", "r", (("A", "A"),), ("B", "B")),
        MatchDep("phi2", "r", "r", (("B", "B"),), ("C", "C")),
    ]
    return schema, mds, instance


@pytest.fixture
def chain_outcomes(chain_project):
    schema, mds, instance = chain_project

    def build(rows):
        return Instance.build(
            schema,
            {
                "r": [
                    Row(f"t{i+1}", {"A": atoms(*a), "B": atoms(*b), "C": atoms(*c)})
                    for i, (a, b, c) in enumerate(rows)
                ]
            },
        )

    b_first = build(
        [
            (("a1",), ("b1", "b2"), ("c1", "c2")),
            (("a2",), ("b1", "b2"), ("c1", "c2")),
            (("a3",), ("b3",), ("c3",)),
        ]
    )
    c_first = build(
        [
            (("a1",), ("b1", "b2"), ("c1", "c2", "c3")),
            (("a2",), ("b1", "b2"), ("c1", "c2", "c3")),
            (("a3",), ("b3",), ("c2", "c3")),
        ]
    )
    return b_first, c_first


@pytest.fixture
def contacts_project():
    """Three contact rows with name/phone/address token sets and two rules:
    similar on all three columns identifies the address; similar on phone
    and address identifies the phone."""
    name_dom = LatticeDomain(
        "person_name",
        "atoms",
        SimilaritySpec.explicit(
            [
                (Value.tokens("John Doe"), Value.tokens("J. Doe")),
                (Value.tokens("Jane Doe"), Value.tokens("J. Doe")),
            ]
        ),
    )
    phone_dom = LatticeDomain(
        "phone_number",
        "atoms",
        SimilaritySpec.explicit(
            [
                (Value.tokens("(613)123 4567"), Value.tokens("123 4567")),
                (Value.tokens("(604)123 4567"), Value.tokens("123 4567")),
            ]
        ),
    )
    addr_dom = LatticeDomain(
        "street_address",
        "atoms",
        SimilaritySpec.explicit(
            [
                (Value.tokens("25 Main St."), Value.tokens("Main St., Ottawa")),
                (Value.tokens("25 Main St."), Value.tokens("25 Main St., Vancouver")),
            ]
        ),
    )
    schema = Schema(
        domains={
            "person_name": name_dom,
            "phone_number": phone_dom,
            "street_address": addr_dom,
        },
        relations=(
            RelationDef(
                "people",
                ("name", "phone", "address"),
                ("person_name", "phone_number", "street_address"),
            ),
        ),
    )
    rows = [
        Row(
            "t1",
            {
                "name": Value.tokens("John Doe"),
                "phone": Value.tokens("(613)123 4567"),
                "address": Value.tokens("Main St., Ottawa"),
            },
        ),
        Row(
            "t2",
            {
                "name": Value.tokens("J. Doe"),
                "phone": Value.tokens("123 4567"),
                "address": Value.tokens("25 Main St."),
            },
        ),
        Row(
            "t3",
            {
                "name": Value.tokens("Jane Doe"),
                "phone": Value.tokens("(604)123 4567"),
                "address": Value.tokens("25 Main St., Vancouver"),
            },
        ),
    ]
    instance = Instance.build(schema, {"people": rows})
    mds = [
        MatchDep(
            "phi1",
            "people",
            "people",
            (("name", "name"), ("phone", "phone"), ("address", "address")),
            ("address", "address"),
        ),
        MatchDep(
            "phi2",
            "people",
            "people",
            (("phone", "phone"), ("address", "address")),
            ("phone", "phone"),
        ),
    ]
    return schema, mds, instance


@pytest.fixture
def interacting_pair_project():
    """Four-column variant: similar A identifies B; similar (B, C) pair
    identifies D.  Enforcing the first rule breaks the second's match."""
    domains = {
        "col_a": LatticeDomain(
            "col_a", "atoms", SimilaritySpec.explicit([(atoms("a1"), atoms("a2"))])
        ),
        "col_b": LatticeDomain(
            "col_b", "atoms", SimilaritySpec.explicit([(atoms("b2"), atoms("b3"))])
        ),
        "col_c": LatticeDomain(
            "col_c", "atoms", SimilaritySpec.explicit([(atoms("c2"), atoms("c3"))])
        ),
        "col_d": LatticeDomain("col_d", "atoms", SimilaritySpec.explicit([])),
    }
    schema = Schema(
        domains=domains,
        relations=(
            RelationDef(
                "r", ("A", "B", "C", "D"), ("col_a", "col_b", "col_c", "col_d")
            ),
        ),
    )
    rows = [
        Row(
            "t1",
            {"A": atoms("a1"), "B": atoms("b1"), "C": atoms("c1"), "D": atoms("d1")},
        ),
        Row(
            "t2",
            {"A": atoms("a2"), "B": atoms("b2"), "C": atoms("c2"), "D": atoms("d2")},
        ),
        Row(
            "t3",
            {"A": atoms("a3"), "B": atoms("b3"), "C": atoms("c3"), "D": atoms("d3")},
        ),
    ]
    instance = Instance.build(schema, {"r": rows})
    mds = [
        MatchDep("phi1", "r", "r", (("A", "A"),), ("B", "B")),
        MatchDep("phi2", "r", "r", (("B", "B"), ("C", "C")), ("D", "D")),
    ]
    return schema, mds, instance
