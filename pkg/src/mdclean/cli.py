"""Command-line interface.

Subcommands: validate, clean, enumerate, answer, approx, relax, swoosh,
gen3sat.  Exit codes are stable and documented: 0 success, 2 usage (from
argparse), 10 project error, 11 query error, 12 truncated enumeration,
13 axiom failure, 14 contract violation, 15 internal guard tripped.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import approx as approx_mod
from . import er, satgen
from .chase import POLICIES, chase, check_unique_clean_preconditions, enumerate_clean
from .errors import (
    ChaseBoundError,
    ContractError,
    MdcError,
    NotApplicableError,
    ProjectError,
    QueryError,
    TruncatedEnumerationError,
)
from .project import (
    Project,
    axiom_reports,
    dumps_project,
    load_project,
    render_query,
)
from .queries import clean_answer, relax
from .render import format_instance, format_table, instance_to_json

EXIT_PROJECT = 10
EXIT_QUERY = 11
EXIT_TRUNCATED = 12
EXIT_AXIOMS = 13
EXIT_CONTRACT = 14
EXIT_INTERNAL = 15


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load(path: str) -> Project:
    return load_project(Path(path))


def _get_query(project: Project, name: str):
    try:
        return project.queries[name]
    except KeyError:
        raise QueryError(
            f"no query named {name!r}; available: {', '.join(sorted(project.queries)) or '(none)'}"
        ) from None


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        print(text)


def cmd_validate(args) -> int:
    project = _load(args.project)
    reports = axiom_reports(project)
    rows = []
    ok = True
    for name in sorted(reports):
        r = reports[name]
        ok = ok and r.lattice_ok
        rows.append(
            [
                name,
                "yes" if r.idempotent else "NO",
                "yes" if r.commutative else "NO",
                "yes" if r.associative else "NO",
                "yes" if r.similarity_preserving else "no",
            ]
        )
    pre = check_unique_clean_preconditions(project.mds, project.schema)
    text = "\n".join(
        [
            f"relations: {len(project.schema.relations)}   "
            f"tuples: {project.instance.size()}   rules: {len(project.mds)}   "
            f"queries: {len(project.queries)}",
            "",
            format_table(
                ["domain", "idempotent", "commutative", "associative", "sim-preserving"],
                rows,
            ),
            "",
            f"interaction-free rules: {'yes' if pre.interaction_free else 'no'}",
            f"all similarities preserving: {'yes' if pre.similarity_preserving else 'no'}",
            f"single outcome guaranteed: {'yes' if pre.unique_clean_guaranteed else 'no'}",
        ]
    )
    payload = {
        "tuples": project.instance.size(),
        "rules": len(project.mds),
        "axioms": {
            name: {
                "idempotent": r.idempotent,
                "commutative": r.commutative,
                "associative": r.associative,
                "similarity_preserving": r.similarity_preserving,
            }
            for name, r in reports.items()
        },
        "interaction_free": pre.interaction_free,
        "similarity_preserving": pre.similarity_preserving,
        "unique_outcome_guaranteed": pre.unique_clean_guaranteed,
    }
    _emit(args, payload, text)
    if args.strict and not ok:
        return _fail(EXIT_AXIOMS, "merge axioms violated; see report")
    return 0


def cmd_clean(args) -> int:
    project = _load(args.project)
    trace = chase(project.instance, project.mds, policy=args.policy)
    steps_text = trace.to_log() or "(no steps: instance already stable)"
    text = "\n".join(
        [
            f"steps ({len(trace.steps)}):",
            steps_text,
            "",
            format_instance(trace.result, "stable instance:"),
        ]
    )
    payload = {
        "steps": [[s.md_id, s.t1, s.t2] for s in trace.steps],
        "result": instance_to_json(trace.result),
    }
    _emit(args, payload, text)
    return 0


def cmd_enumerate(args) -> int:
    project = _load(args.project)
    result = enumerate_clean(project.instance, project.mds, limit=args.limit)
    blocks = [f"stable outcomes: {len(result)}" + (" (truncated)" if result.truncated else "")]
    for i, inst in enumerate(result, start=1):
        blocks.append("")
        blocks.append(format_instance(inst, f"outcome {i}:"))
    payload = {
        "count": len(result),
        "truncated": result.truncated,
        "outcomes": [instance_to_json(d) for d in result],
    }
    _emit(args, payload, "\n".join(blocks))
    if result.truncated:
        return _fail(EXIT_TRUNCATED, f"enumeration truncated at {args.limit}")
    return 0


def cmd_answer(args) -> int:
    project = _load(args.project)
    q = _get_query(project, args.query)
    answer = clean_answer(q, project.instance, project.mds, limit=args.limit)
    text = "\n".join(
        [
            format_instance(answer.cert, "certain answers:"),
            "",
            format_instance(answer.poss, "possible answers:"),
        ]
    )
    payload = {
        "certain": instance_to_json(answer.cert),
        "possible": instance_to_json(answer.poss),
    }
    _emit(args, payload, text)
    return 0


def cmd_approx(args) -> int:
    project = _load(args.project)
    q = _get_query(project, args.query)
    result = approx_mod.approx_answers(q, project.instance, project.mds)
    warning = (
        ""
        if result.monotone_syntax
        else "note: query uses equality selections; bounds are not guaranteed\n\n"
    )
    text = warning + "\n\n".join(
        [
            format_instance(result.under_instance, "under-clean instance:"),
            format_instance(result.over_instance, "over-clean instance:"),
            format_instance(result.lower, "lower bound answers:"),
            format_instance(result.upper, "upper bound answers:"),
        ]
    )
    payload = {
        "monotone_syntax": result.monotone_syntax,
        "under_instance": instance_to_json(result.under_instance),
        "over_instance": instance_to_json(result.over_instance),
        "lower": instance_to_json(result.lower),
        "upper": instance_to_json(result.upper),
    }
    _emit(args, payload, text)
    return 0


def cmd_relax(args) -> int:
    project = _load(args.project)
    q = _get_query(project, args.query)
    text = render_query(relax(q), project.schema)
    _emit(args, {"query": text}, text)
    return 0


def cmd_swoosh(args) -> int:
    project = _load(args.project)
    if len(project.schema.relations) != 1:
        return _fail(EXIT_CONTRACT, "record resolution needs a single-relation project")
    relation = project.schema.relations[0].name
    rel = project.schema.relation(relation)
    domains = [project.schema.domains[d] for d in rel.domains]
    records = er.instance_records(project.instance, relation)
    resolved = er.entity_resolve(domains, records)
    mds = er.md_reconstruction(project.schema, relation)
    chased = chase(project.instance, mds).result
    report = er.correspondence_check(project.schema, relation, chased, resolved)
    resolved_rows = [
        [", ".join(str(v) for v in rec.values)]
        for rec in sorted(resolved, key=lambda r: r.sort_key())
    ]
    text = "\n".join(
        [
            format_instance(chased, "rule-chased instance:"),
            "",
            format_table(["resolved records"], resolved_rows),
            "",
            f"every resolved record appears among chased tuples: "
            f"{'yes' if report.resolved_found else 'NO'}",
            f"every chased tuple dominated by a resolved record: "
            f"{'yes' if report.tuples_covered else 'NO'}",
            f"strictly dominated tuples: "
            f"{', '.join(report.strictly_dominated_tids) or '(none)'}",
        ]
    )
    payload = {
        "chased": instance_to_json(chased),
        "resolved": [[list(v.payload) for v in rec.values] for rec in sorted(resolved, key=lambda r: r.sort_key())],
        "resolved_found": report.resolved_found,
        "tuples_covered": report.tuples_covered,
        "strictly_dominated": report.strictly_dominated_tids,
    }
    _emit(args, payload, text)
    return 0 if report.ok else _fail(EXIT_CONTRACT, "correspondence check failed")


def cmd_gen3sat(args) -> int:
    text = sys.stdin.read() if args.cnf == "-" else Path(args.cnf).read_text(encoding="utf-8")
    formula = satgen.CnfFormula.from_dimacs(text)
    project = satgen.gen3sat(formula)
    out = dumps_project(project)
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
        print(f"wrote {args.output} ({len(formula.clauses)} clauses, "
              f"{project.instance.size()} tuples)")
    else:
        print(out, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdclean",
        description="Rule-based data cleaning with merge lattices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = add("validate", cmd_validate, "validate a project and report axiom checks")
    p.add_argument("project")
    p.add_argument("--strict", action="store_true", help="fail on axiom violations")

    p = add("clean", cmd_clean, "chase to a stable instance under one policy")
    p.add_argument("project")
    p.add_argument("--policy", choices=sorted(POLICIES), default="md-asc")

    p = add("enumerate", cmd_enumerate, "enumerate all stable outcomes")
    p.add_argument("project")
    p.add_argument("--limit", type=int, default=64)

    p = add("answer", cmd_answer, "exact certain/possible answers for a named query")
    p.add_argument("project")
    p.add_argument("--query", required=True)
    p.add_argument("--limit", type=int, default=64)

    p = add("approx", cmd_approx, "polynomial under/over bounds for a named query")
    p.add_argument("project")
    p.add_argument("--query", required=True)

    p = add("relax", cmd_relax, "rewrite a named query's equality selections")
    p.add_argument("project")
    p.add_argument("--query", required=True)

    p = add("swoosh", cmd_swoosh, "union match-and-merge resolution vs rule chase")
    p.add_argument("project")

    p = add("gen3sat", cmd_gen3sat, "generate a project from a DIMACS 3-CNF file")
    p.add_argument("cnf", help="DIMACS file, or - for stdin")
    p.add_argument("-o", "--output", help="write the project here instead of stdout")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProjectError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_PROJECT
    except QueryError as exc:
        return _fail(EXIT_QUERY, str(exc))
    except TruncatedEnumerationError as exc:
        return _fail(EXIT_TRUNCATED, str(exc))
    except (ContractError, NotApplicableError) as exc:
        return _fail(EXIT_CONTRACT, str(exc))
    except ChaseBoundError as exc:
        return _fail(EXIT_INTERNAL, str(exc))
    except MdcError as exc:
        return _fail(EXIT_PROJECT, str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_PROJECT, str(exc))


if __name__ == "__main__":
    sys.exit(main())
