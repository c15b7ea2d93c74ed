"""Report assembly and rendering.

The JSON document is the single source of truth: the markdown and text
renderers only reformat values already present in it, so every number a
human sees can be found verbatim in the machine output.
"""

from __future__ import annotations

import json
import time

from .consistency import ConsistencyGroup, declaration_style
from .pom_model import InheritanceGraph
from .resolver import DependencySet, ResolvedDependency

SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "repo", "generated_at", "groups"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "repo": {"type": "string"},
        "generated_at": {"type": "number"},
        "groups": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["lib", "kind", "declaration_style", "members",
                             "subgroups", "severity"],
                "properties": {
                    "lib": {"type": "string"},
                    "kind": {"enum": ["IC", "FC", "TC", "SL"]},
                    "declaration_style": {"enum": ["explicit", "implicit", "mixed"]},
                    "members": {"type": "array", "items": {
                        "type": "object",
                        "required": ["lib", "ver", "pro", "m_lib", "m_ver", "m_pro"],
                    }},
                    "subgroups": {"type": "object"},
                    "severity": {
                        "type": "object",
                        "required": ["affected_poms", "affected_ratio",
                                     "distinct_versions"],
                        "properties": {
                            "affected_poms": {"type": "integer", "minimum": 0},
                            "affected_ratio": {"type": "number",
                                               "minimum": 0, "maximum": 1},
                            "distinct_versions": {"type": "integer", "minimum": 0},
                        },
                    },
                    "quarantined": {"type": "integer"},
                    "efforts": {"type": "object"},
                    "plan": {"type": "object"},
                },
            },
        },
    },
}


def _member_dict(d: ResolvedDependency, graph: InheritanceGraph) -> dict:
    node = graph.nodes.get(d.m_lib)
    return {
        "lib": str(d.lib),
        "ver": d.ver,
        "pro": d.pro,
        "m_lib": str(d.m_lib),
        "m_ver": str(d.m_ver) if d.m_ver else None,
        "m_pro": str(d.m_pro) if d.m_pro else None,
        "scope": d.scope,
        "version_site": d.version_site,
        "location": node.location if node else None,
        "flags": list(d.flags),
    }


def group_dict(group: ConsistencyGroup, graph: InheritanceGraph,
               total_local_poms: int) -> dict:
    affected = len(group.affected_poms)
    return {
        "lib": str(group.lib),
        "kind": group.kind,
        "declaration_style": declaration_style(group),
        "members": [_member_dict(d, graph) for d in group.deps],
        "subgroups": {str(coord): [str(d.m_lib) for d in deps]
                      for coord, deps in sorted(group.subgroups.items(), key=lambda p: str(p[0]))},
        "severity": {
            "affected_poms": affected,
            "affected_ratio": round(affected / total_local_poms, 4) if total_local_poms else 0.0,
            "distinct_versions": len([v for v in group.versions if v is not None]),
        },
        "quarantined": len(group.quarantined),
        "diagnostics": [{"code": d.code, "message": d.message, "subject": d.subject}
                        for d in group.diagnostics],
    }


def build_report(repo: str, graph: InheritanceGraph, dep_set: DependencySet,
                 groups: list[ConsistencyGroup], generated_at: float | None = None) -> dict:
    total = len(graph.local_nodes())
    return {
        "schema_version": SCHEMA_VERSION,
        "repo": str(repo),
        "generated_at": time.time() if generated_at is None else generated_at,
        "groups": [group_dict(g, graph, total) for g in groups],
        "diagnostics": [{"code": d.code, "message": d.message, "subject": d.subject}
                        for d in list(graph.diagnostics) + list(dep_set.diagnostics)],
    }


def validate_report(report: dict):
    import jsonschema

    jsonschema.validate(report, REPORT_SCHEMA)


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def has_findings(report: dict) -> bool:
    return any(g["kind"] in ("IC", "FC") for g in report["groups"])


def render_text(report: dict) -> str:
    lines = [f"repository: {report['repo']}"]
    for g in report["groups"]:
        sev = g["severity"]
        lines.append(
            f"{g['kind']:2}  {g['lib']}  versions={sev['distinct_versions']} "
            f"poms={sev['affected_poms']} ({sev['affected_ratio']:.0%}) "
            f"style={g['declaration_style']}")
        if g["kind"] in ("IC", "FC"):
            for m in g["members"]:
                lines.append(f"      {m['m_lib']}: {m['ver']}"
                             + (f" via ${{{m['pro']}}}" if m["pro"] else ""))
    if not report["groups"]:
        lines.append("no dependencies found")
    return "\n".join(lines) + "\n"


def render_markdown(report: dict) -> str:
    lines = [f"# Dependency consistency report", "",
             f"Repository: `{report['repo']}`", "",
             "| library | kind | versions | affected POMs | ratio | style |",
             "|---|---|---|---|---|---|"]
    for g in report["groups"]:
        sev = g["severity"]
        lines.append(f"| {g['lib']} | {g['kind']} | {sev['distinct_versions']} "
                     f"| {sev['affected_poms']} | {sev['affected_ratio']} "
                     f"| {g['declaration_style']} |")
    for g in report["groups"]:
        if g["kind"] not in ("IC", "FC"):
            continue
        lines += ["", f"## {g['lib']} ({g['kind']})", ""]
        for m in g["members"]:
            pro = f" via `${{{m['pro']}}}`" if m["pro"] else ""
            lines.append(f"- `{m['m_lib']}` → {m['ver']}{pro} "
                         f"(declared in `{m['m_ver']}`)")
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "text": render_text, "md": render_markdown}
