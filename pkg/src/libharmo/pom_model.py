"""POM parsing, local POM collection, and the inheritance graph.

A project's POMs form a DAG: one parent-section edge per POM plus any
number of import-scope edges (dependencyManagement entries with type=pom
and scope=import).  Remote parents are fetched on demand through a
pluggable fetcher and added to the graph as remote nodes.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CycleError, Diagnostic, IoError

PARENT_EDGE = "parent"
IMPORT_EDGE = "import"

# directory names skipped during the recursive scan unless overridden
_BUILD_DIRS = {"target", "build", "out"}


@dataclass(frozen=True, order=True)
class PomCoord:
    group_id: str
    artifact_id: str
    version: str

    def __post_init__(self):
        if not self.group_id or not self.artifact_id:
            raise ValueError("POM coordinates need a non-empty groupId and artifactId")

    def __str__(self):
        return f"{self.group_id}:{self.artifact_id}:{self.version}"


@dataclass(frozen=True)
class DepDecl:
    """One <dependency> element, verbatim (no inheritance applied)."""

    group_id: str
    artifact_id: str
    version: str | None = None
    scope: str | None = None
    type: str = "jar"
    classifier: str | None = None
    optional: bool = False
    exclusions: tuple = ()

    @property
    def is_import(self) -> bool:
        return self.type == "pom" and self.scope == "import"


@dataclass
class ParsedPom:
    """Structured view of one pom.xml; a pure function of its text."""

    group_id: str | None
    artifact_id: str
    version: str | None
    packaging: str
    parent: tuple[PomCoord, str | None] | None  # (coord, relativePath)
    properties: dict[str, str]
    dependencies: list[DepDecl]
    dependency_management: list[DepDecl]


@dataclass
class PomNode:
    coord: PomCoord
    origin: str  # "local" or "remote"
    location: str  # filesystem path or repository url
    raw_text: str
    parsed: ParsedPom

    @property
    def is_local(self) -> bool:
        return self.origin == "local"

    @property
    def path(self) -> Path:
        return Path(self.location)

    def __repr__(self):
        return f"PomNode({self.coord}, {self.origin})"


@dataclass
class InheritanceGraph:
    """DAG of POMs: nodes keyed by coordinate, edges child -> parent."""

    nodes: dict[PomCoord, PomNode] = field(default_factory=dict)
    edges: list[tuple[PomCoord, PomCoord, str]] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def parents_of(self, coord: PomCoord) -> list[tuple[PomCoord, str]]:
        """Parents in resolution order: parent-section edge first, then
        import edges in declaration order."""
        out = [(p, k) for (c, p, k) in self.edges if c == coord]
        out.sort(key=lambda pk: 0 if pk[1] == PARENT_EDGE else 1)
        return out

    def local_nodes(self) -> list[PomNode]:
        nodes = [n for n in self.nodes.values() if n.is_local]
        nodes.sort(key=lambda n: n.location)
        return nodes

    def check_acyclic(self) -> None:
        adj: dict[PomCoord, list[PomCoord]] = {}
        for c, p, _ in self.edges:
            adj.setdefault(c, []).append(p)
        WHITE, GREY, BLACK = 0, 1, 2
        color = {c: WHITE for c in self.nodes}
        stack_path: list[PomCoord] = []

        def visit(n):
            color[n] = GREY
            stack_path.append(n)
            for p in adj.get(n, []):
                if color.get(p, WHITE) == GREY:
                    i = stack_path.index(p)
                    raise CycleError(stack_path[i:] + [p])
                if color.get(p, WHITE) == WHITE and p in color:
                    visit(p)
            stack_path.pop()
            color[n] = BLACK

        for n in list(color):
            if color[n] == WHITE:
                visit(n)


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child_text(elem, name: str) -> str | None:
    for ch in elem:
        if _strip_ns(ch.tag) == name:
            return (ch.text or "").strip() or None
    return None


def _children(elem, name: str):
    return [ch for ch in elem if _strip_ns(ch.tag) == name]


def _parse_dep(elem) -> DepDecl | None:
    gid = _child_text(elem, "groupId")
    aid = _child_text(elem, "artifactId")
    if not gid or not aid:
        return None
    exclusions = []
    for exc_list in _children(elem, "exclusions"):
        for exc in _children(exc_list, "exclusion"):
            exclusions.append((_child_text(exc, "groupId"), _child_text(exc, "artifactId")))
    return DepDecl(
        group_id=gid,
        artifact_id=aid,
        version=_child_text(elem, "version"),
        scope=_child_text(elem, "scope"),
        type=_child_text(elem, "type") or "jar",
        classifier=_child_text(elem, "classifier"),
        optional=(_child_text(elem, "optional") or "false").lower() == "true",
        exclusions=tuple(exclusions),
    )


def parse_pom(raw_text: str, location: str, origin: str = "local") -> PomNode:
    """Parse one pom.xml text into a PomNode.

    Raises ET.ParseError / ValueError for malformed input; callers that
    scan a tree convert those into per-file diagnostics.
    """
    text = raw_text.lstrip("﻿")
    root = ET.fromstring(text)
    if _strip_ns(root.tag) != "project":
        raise ValueError(f"root element is <{_strip_ns(root.tag)}>, expected <project>")

    parent = None
    for p in _children(root, "parent"):
        pgid = _child_text(p, "groupId")
        paid = _child_text(p, "artifactId")
        pver = _child_text(p, "version")
        if not (pgid and paid and pver):
            raise ValueError("parent section missing groupId/artifactId/version")
        parent = (PomCoord(pgid, paid, pver), _child_text(p, "relativePath"))
        break

    properties: dict[str, str] = {}
    for props in _children(root, "properties"):
        for ch in props:
            properties[_strip_ns(ch.tag)] = (ch.text or "").strip()

    dependencies = []
    for deps in _children(root, "dependencies"):
        for d in _children(deps, "dependency"):
            decl = _parse_dep(d)
            if decl:
                dependencies.append(decl)

    management = []
    for dm in _children(root, "dependencyManagement"):
        for deps in _children(dm, "dependencies"):
            for d in _children(deps, "dependency"):
                decl = _parse_dep(d)
                if decl:
                    management.append(decl)

    gid = _child_text(root, "groupId")
    aid = _child_text(root, "artifactId")
    ver = _child_text(root, "version")
    if not aid:
        raise ValueError("pom has no artifactId")
    # groupId/version may be omitted and inherited from the parent section
    eff_gid = gid or (parent[0].group_id if parent else None)
    eff_ver = ver or (parent[0].version if parent else None)
    if not eff_gid or not eff_ver:
        raise ValueError(f"pom {aid} has no groupId/version and no parent to inherit them from")

    parsed = ParsedPom(
        group_id=gid,
        artifact_id=aid,
        version=ver,
        packaging=_child_text(root, "packaging") or "jar",
        parent=parent,
        properties=properties,
        dependencies=dependencies,
        dependency_management=management,
    )
    return PomNode(
        coord=PomCoord(eff_gid, aid, eff_ver),
        origin=origin,
        location=location,
        raw_text=raw_text,
        parsed=parsed,
    )


def collect_local_poms(repo_root, include_build_dirs: bool = False):
    """Recursively collect every pom.xml under repo_root.

    Returns (nodes, diagnostics): malformed files become diagnostics, not
    silent drops.  Build-output directories (target/ etc.) are skipped
    unless include_build_dirs is set.
    """
    root = Path(repo_root)
    if not root.is_dir():
        raise IoError(f"not a readable directory: {repo_root}")
    nodes: list[PomNode] = []
    diagnostics: list[Diagnostic] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(
            d for d in dirnames
            if not d.startswith(".") and (include_build_dirs or d not in _BUILD_DIRS)
        )
        if "pom.xml" in filenames:
            path = Path(dirpath) / "pom.xml"
            try:
                raw = path.read_text(encoding="utf-8-sig")
                nodes.append(parse_pom(raw, str(path)))
            except (ET.ParseError, ValueError, OSError) as e:
                diagnostics.append(Diagnostic("parse-error", str(e), str(path)))
    nodes.sort(key=lambda n: n.location)
    return nodes, diagnostics


def _resolve_relative_parent(node: PomNode, locals_by_path: dict[str, PomNode]):
    """Honor <relativePath> (default ../pom.xml) for local parent lookup."""
    parent_coord, relpath = node.parsed.parent
    base = Path(node.location).parent
    candidate = base / (relpath if relpath else "../pom.xml")
    if candidate.name != "pom.xml" and not candidate.suffix:
        candidate = candidate / "pom.xml"
    try:
        resolved = str(candidate.resolve())
    except OSError:
        return None
    hit = locals_by_path.get(resolved)
    if hit and hit.coord == parent_coord:
        return hit
    return None


def build_inheritance_graph(local_nodes, fetcher=None) -> InheritanceGraph:
    """Build the inheritance DAG from local POMs, fetching remote parents.

    fetcher: callable (PomCoord) -> pom text, or raising/returning None
    when unavailable.  Fetch failures degrade to dangling-parent
    diagnostics so analysis of unrelated libraries proceeds.
    """
    graph = InheritanceGraph()
    by_coord: dict[PomCoord, PomNode] = {}
    by_path: dict[str, PomNode] = {}
    for n in local_nodes:
        if n.coord in by_coord:
            graph.diagnostics.append(
                Diagnostic("duplicate-coord", f"also declared at {by_coord[n.coord].location}", str(n.coord))
            )
            continue
        by_coord[n.coord] = n
        try:
            by_path[str(Path(n.location).resolve())] = n
        except OSError:
            by_path[n.location] = n
    graph.nodes.update(by_coord)

    def fetch_remote(coord: PomCoord) -> PomNode | None:
        if coord in graph.nodes:
            return graph.nodes[coord]
        text = None
        if fetcher is not None:
            try:
                text = fetcher(coord)
            except Exception as e:  # noqa: BLE001 - fetch failure degrades to diagnostic
                graph.diagnostics.append(Diagnostic("remote-fetch-failed", str(e), str(coord)))
                return None
        if text is None:
            graph.diagnostics.append(Diagnostic("dangling-parent", "remote POM unavailable", str(coord)))
            return None
        try:
            node = parse_pom(text, f"remote:{coord}", origin="remote")
        except (ET.ParseError, ValueError) as e:
            graph.diagnostics.append(Diagnostic("remote-parse-error", str(e), str(coord)))
            return None
        graph.nodes[node.coord] = node
        return node

    # breadth-first over nodes so remote parents are fetched transitively
    queue = [n for n in sorted(by_coord.values(), key=lambda n: n.location)]
    seen: set[PomCoord] = set()
    while queue:
        node = queue.pop(0)
        if node.coord in seen:
            continue
        seen.add(node.coord)

        if node.parsed.parent is not None:
            parent_coord = node.parsed.parent[0]
            target = None
            if node.is_local:
                target = _resolve_relative_parent(node, by_path)
            if target is None:
                target = by_coord.get(parent_coord)
            if target is None:
                target = fetch_remote(parent_coord)
            if target is not None:
                graph.edges.append((node.coord, target.coord, PARENT_EDGE))
                queue.append(target)

        for decl in node.parsed.dependency_management:
            if not decl.is_import:
                continue
            version = decl.version
            if version is None or "${" in version:
                # import versions may reference properties; resolve the
                # trivial literal case only and flag the rest
                graph.diagnostics.append(
                    Diagnostic("unresolved-import", f"{decl.group_id}:{decl.artifact_id} version {version!r}",
                               str(node.coord))
                )
                continue
            imp_coord = PomCoord(decl.group_id, decl.artifact_id, version)
            target = by_coord.get(imp_coord) or fetch_remote(imp_coord)
            if target is not None:
                graph.edges.append((node.coord, target.coord, IMPORT_EDGE))
                queue.append(target)

    graph.check_acyclic()
    return graph


def bfs_order(graph: InheritanceGraph, start: PomCoord) -> list[PomCoord]:
    """Visit start and its ancestors breadth-first; nearest definitions
    come first, equal-distance ancestors in first-declared order."""
    order = [start]
    seen = {start}
    i = 0
    while i < len(order):
        for parent, _kind in graph.parents_of(order[i]):
            if parent not in seen and parent in graph.nodes:
                seen.add(parent)
                order.append(parent)
        i += 1
    return order
