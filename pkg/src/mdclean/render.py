"""Plain-text rendering of instances and reports."""

from __future__ import annotations

from .instances import Instance
from .project import render_value


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(cells: list[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)


def format_instance(instance: Instance, title: str | None = None) -> str:
    blocks = []
    if title:
        blocks.append(title)
    for rel in instance.schema.relations:
        rows = instance.rows(rel.name)
        headers = ["tid", *rel.attributes]
        body = [[row.tid, *(str(row.values[a]) for a in rel.attributes)] for row in rows]
        blocks.append(f"{rel.name} ({len(rows)} tuples)")
        blocks.append(format_table(headers, body) if rows else "  (empty)")
    return "\n".join(blocks)


def instance_to_json(instance: Instance) -> dict:
    out: dict = {}
    for rel in instance.schema.relations:
        out[rel.name] = [
            {
                "tid": row.tid,
                "values": {
                    a: render_value(instance.schema.domains[d], row.values[a])
                    for a, d in zip(rel.attributes, rel.domains)
                },
            }
            for row in instance.rows(rel.name)
        ]
    return out
