"""Format-preserving POM refactoring toward one shared version property.

A plan inserts a version property at the lowest common ancestor of the
selected POMs, rewrites every member's version declaration to reference
it, and deletes old properties nothing references any more.  Edits are
byte-range replacements over the raw file text, so comments and
formatting outside the touched ranges survive untouched.  Apply verifies
content digests recorded at plan time, writes atomically, and re-runs
the classification as a postcondition.
"""

from __future__ import annotations

import difflib
import hashlib
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .consistency import TC, ConsistencyGroup, classify, find_group
from .errors import (
    CollisionUnresolvable,
    Diagnostic,
    NoLocalAncestor,
    PostconditionFailed,
    StaleFile,
)
from .pom_model import (
    PARENT_EDGE,
    InheritanceGraph,
    PomCoord,
    build_inheritance_graph,
    collect_local_poms,
)
from .resolver import DependencySet, resolve_all

INSERT_PROPERTY = "InsertProperty"
REWRITE_VERSION = "RewriteVersionToReference"
DELETE_PROPERTY = "DeleteProperty"
INSERT_MANAGED = "InsertManagedDependency"

DRY_RUN = "DryRun"
WRITE = "Write"

_COMMENT = re.compile(r"<!--.*?-->", re.DOTALL)


@dataclass(frozen=True)
class Edit:
    file: str
    kind: str
    start: int
    end: int
    replacement: str
    description: str


@dataclass
class RefactorPlan:
    group: ConsistencyGroup
    selection: list[PomCoord]
    harmonized_version: str
    anchors: list[tuple[PomCoord, frozenset]]
    edits: list[Edit]
    removed_properties: list[tuple[str, PomCoord]]
    diagnostics: list[Diagnostic] = field(default_factory=list)
    # content snapshots keyed by file path: before and after applying
    pre_digests: dict[str, str] = field(default_factory=dict)
    post_digests: dict[str, str] = field(default_factory=dict)
    pre_content: dict[str, str] = field(default_factory=dict)
    repo_root: str | None = None
    fetcher: object = None


@dataclass
class ApplyReport:
    mode: str
    diffs: dict[str, str]
    changed_files: list[str]
    already_applied: bool = False
    new_kind: str | None = None


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _strip_comments(text: str) -> str:
    """Blank out comments, preserving every offset."""
    return _COMMENT.sub(lambda m: " " * len(m.group(0)), text)


# --- lowest common ancestors -----------------------------------------


def _ancestors(graph: InheritanceGraph, coord: PomCoord) -> set[PomCoord]:
    """coord plus everything reachable over parent-section edges."""
    seen = {coord}
    stack = [coord]
    while stack:
        cur = stack.pop()
        for parent, kind in graph.parents_of(cur):
            if kind == PARENT_EDGE and parent in graph.nodes and parent not in seen:
                seen.add(parent)
                stack.append(parent)
    return seen


def _local(graph: InheritanceGraph, coords) -> set[PomCoord]:
    return {c for c in coords if graph.nodes[c].origin == "local"}


def _pick_minimal(graph: InheritanceGraph, common: set[PomCoord]) -> PomCoord:
    """Minimal elements have no common ancestor strictly below them;
    ties go to POM path order."""
    minimal = [c for c in common
               if not any(d != c and c in _ancestors(graph, d) for d in common)]
    minimal.sort(key=lambda c: graph.nodes[c].location)
    return minimal[0]


def lowest_common_ancestors(graph: InheritanceGraph, targets):
    """Anchor POMs for a set of targets: one anchor when a shared local
    ancestor exists, otherwise a deterministic partition into maximal
    runs that each share one."""
    targets = sorted(set(targets), key=lambda c: graph.nodes[c].location)
    if not targets:
        raise NoLocalAncestor("no targets")
    for t in targets:
        if not _local(graph, _ancestors(graph, t)):
            raise NoLocalAncestor(str(t))

    def common_local(subset):
        sets = [_local(graph, _ancestors(graph, t)) for t in subset]
        return set.intersection(*sets)

    out = []
    remaining = list(targets)
    while remaining:
        subset = [remaining[0]]
        acc = common_local(subset)
        for t in remaining[1:]:
            trial = acc & _local(graph, _ancestors(graph, t))
            if trial:
                subset.append(t)
                acc = trial
        out.append((_pick_minimal(graph, acc), frozenset(subset)))
        remaining = [t for t in remaining if t not in set(subset)]
    return out


# --- locating byte ranges in raw POM text ----------------------------


def _element_span(stripped: str, name: str, start: int = 0, end: int | None = None):
    """(open_end, close_start, full_start, full_end) of the first
    <name>...</name> between start and end, or None."""
    end = len(stripped) if end is None else end
    m = re.compile(rf"<{re.escape(name)}(\s[^>]*)?>").search(stripped, start, end)
    if not m:
        return None
    close = stripped.find(f"</{name}>", m.end(), end)
    if close < 0:
        return None
    return m.end(), close, m.start(), close + len(f"</{name}>")


def _dependency_blocks(stripped: str):
    for m in re.finditer(r"<dependency>", stripped):
        close = stripped.find("</dependency>", m.end())
        if close >= 0:
            yield m.start(), close + len("</dependency>")


def _block_text(stripped: str, name: str, start: int, end: int) -> str | None:
    span = _element_span(stripped, name, start, end)
    if span is None:
        return None
    return stripped[span[0]:span[1]].strip()


def _find_dep_version_span(text: str, group_id: str, artifact_id: str):
    """Byte span of the inner text of the <version> element of the
    matching dependency block, searching managed entries too."""
    stripped = _strip_comments(text)
    for bstart, bend in _dependency_blocks(stripped):
        if _block_text(stripped, "groupId", bstart, bend) != group_id:
            continue
        if _block_text(stripped, "artifactId", bstart, bend) != artifact_id:
            continue
        span = _element_span(stripped, "version", bstart, bend)
        if span is not None:
            return span[0], span[1]
    return None


def _find_property_decl_span(text: str, name: str):
    """Full span of <name>...</name> inside <properties>, including the
    preceding line indentation so deletion removes the whole line."""
    stripped = _strip_comments(text)
    props = _element_span(stripped, "properties")
    if props is None:
        return None
    span = _element_span(stripped, name, props[0], props[1])
    if span is None:
        return None
    _open_end, _close_start, full_start, full_end = span
    line_start = text.rfind("\n", 0, full_start)
    if line_start >= 0 and text[line_start + 1:full_start].strip() == "":
        full_start = line_start
    return full_start, full_end


def _indent_of(text: str, pos: int) -> str:
    line_start = text.rfind("\n", 0, pos) + 1
    body = text[line_start:pos]
    return body if body.strip() == "" else ""


def _property_insertion(text: str, name: str, value: str):
    """(start, end, replacement) inserting the property declaration."""
    stripped = _strip_comments(text)
    props = _element_span(stripped, "properties")
    if props is not None:
        open_end = props[0]
        indent = _indent_of(text, props[2]) or "  "
        return open_end, open_end, f"\n{indent}  <{name}>{value}</{name}>"
    # no properties section: insert one after </parent>, else after the
    # project's own coordinates
    anchor_pos = None
    parent = _element_span(stripped, "parent")
    if parent is not None:
        anchor_pos = parent[3]
        indent = _indent_of(text, parent[2]) or "  "
    else:
        for tag in ("packaging", "version", "artifactId"):
            span = _element_span(stripped, tag)
            if span is not None:
                anchor_pos = span[3]
                indent = _indent_of(text, span[2]) or "  "
                break
    if anchor_pos is None:
        raise CollisionUnresolvable("cannot find an insertion point for <properties>")
    block = (f"\n\n{indent}<properties>\n{indent}  <{name}>{value}</{name}>"
             f"\n{indent}</properties>")
    return anchor_pos, anchor_pos, block


def _managed_dependency_insertion(text: str, group_id: str, artifact_id: str,
                                  version_text: str):
    stripped = _strip_comments(text)
    mgmt = _element_span(stripped, "dependencyManagement")
    if mgmt is not None:
        deps = _element_span(stripped, "dependencies", mgmt[0], mgmt[1])
        if deps is not None:
            indent = _indent_of(text, deps[2]) or "    "
            i2 = indent + "  "
            i3 = i2 + "  "
            block = (f"\n{i2}<dependency>"
                     f"\n{i3}<groupId>{group_id}</groupId>"
                     f"\n{i3}<artifactId>{artifact_id}</artifactId>"
                     f"\n{i3}<version>{version_text}</version>"
                     f"\n{i2}</dependency>")
            return deps[0], deps[0], block
    # no management section yet: create one after properties/parent/coords
    for tag in ("properties", "parent", "packaging", "version", "artifactId"):
        span = _element_span(stripped, tag)
        if span is not None:
            indent = _indent_of(text, span[2]) or "  "
            i2 = indent + "  "
            i3 = i2 + "  "
            i4 = i3 + "  "
            block = (f"\n\n{indent}<dependencyManagement>\n{i2}<dependencies>"
                     f"\n{i3}<dependency>"
                     f"\n{i4}<groupId>{group_id}</groupId>"
                     f"\n{i4}<artifactId>{artifact_id}</artifactId>"
                     f"\n{i4}<version>{version_text}</version>"
                     f"\n{i3}</dependency>"
                     f"\n{i2}</dependencies>\n{indent}</dependencyManagement>")
            return span[3], span[3], block
    raise CollisionUnresolvable("cannot find an insertion point for dependencyManagement")


# --- planning ---------------------------------------------------------


def _descendant_scope(graph: InheritanceGraph, anchor: PomCoord):
    return [c for c in graph.nodes
            if graph.nodes[c].origin == "local" and anchor in _ancestors(graph, c)]


def _pick_property_name(graph: InheritanceGraph, anchor: PomCoord,
                        artifact_id: str) -> str:
    taken = set()
    for coord in _descendant_scope(graph, anchor):
        taken.update(graph.nodes[coord].parsed.properties)
    base = f"{artifact_id}.version"
    if base not in taken:
        return base
    alt = f"{artifact_id}.new.version"
    if alt not in taken:
        return alt
    for i in range(2, 100):
        cand = f"{alt}{i}"
        if cand not in taken:
            return cand
    raise CollisionUnresolvable(f"no free property name for {artifact_id}")


def plan(group: ConsistencyGroup, selection, v_h: str, graph: InheritanceGraph,
         all_deps: DependencySet, repo_root=None, fetcher=None) -> RefactorPlan:
    """Plan the edits turning the selected subgroups into one true
    consistency at v_h (one per anchor when no shared local ancestor)."""
    selection = sorted(set(selection), key=str)
    members = [d for key in selection for d in group.subgroups.get(key, [])]
    diagnostics: list[Diagnostic] = []

    usable = []
    for d in members:
        if d.m_ver is not None and graph.nodes[d.m_ver].origin != "local":
            diagnostics.append(Diagnostic(
                "remote-declaration-site",
                "version declared in a remote POM; member left out", str(d)))
            continue
        usable.append(d)

    result = RefactorPlan(group=group, selection=selection, harmonized_version=v_h,
                          anchors=[], edits=[], removed_properties=[],
                          diagnostics=diagnostics, repo_root=str(repo_root) if repo_root else None,
                          fetcher=fetcher)
    if not usable:
        return result

    # already one true consistency at the target version: nothing to do
    shared = {(d.pro, d.m_pro) for d in usable}
    if (len(shared) == 1 and next(iter(shared))[0] is not None
            and all(d.ver == v_h for d in usable)):
        anchor = next(iter(shared))[1]
        result.anchors = [(anchor, frozenset(d.m_ver for d in usable))]
        return result

    sites = sorted({d.m_ver for d in usable}, key=str)
    anchors = lowest_common_ancestors(graph, sites)
    result.anchors = anchors

    texts: dict[str, str] = {}

    def load(coord: PomCoord) -> tuple[str, str]:
        path = graph.nodes[coord].location
        if path not in texts:
            texts[path] = Path(path).read_text(encoding="utf-8-sig")
        return path, texts[path]

    for anchor, covered in anchors:
        name = _pick_property_name(graph, anchor, group.lib.artifact_id)
        apath, atext = load(anchor)
        start, end, repl = _property_insertion(atext, name, v_h)
        result.edits.append(Edit(apath, INSERT_PROPERTY, start, end, repl,
                                 f"declare {name}={v_h} in {anchor.artifact_id}"))
        rewritten = set()
        for d in usable:
            if d.m_ver not in covered or (d.m_ver, d.lib) in rewritten:
                continue
            rewritten.add((d.m_ver, d.lib))
            spath, stext = load(d.m_ver)
            span = _find_dep_version_span(stext, d.lib.group_id, d.lib.artifact_id)
            if span is None:
                # declaration not locatable in the file as it stands now:
                # manage the dependency at the anchor instead
                ms, me, mrepl = _managed_dependency_insertion(
                    atext, d.lib.group_id, d.lib.artifact_id, f"${{{name}}}")
                result.edits.append(Edit(apath, INSERT_MANAGED, ms, me, mrepl,
                                         f"manage {d.lib} at {anchor.artifact_id}"))
                continue
            ref = f"${{{name}}}"
            if stext[span[0]:span[1]] == ref:
                continue
            result.edits.append(Edit(
                spath, REWRITE_VERSION, span[0], span[1], ref,
                f"point {d.lib} version in {d.m_ver.artifact_id} at {name}"))

    # delete old properties nothing outside the selection references
    selected = set(usable)
    old_pairs = sorted({(d.pro, d.m_pro) for d in usable if d.pro is not None},
                       key=str)
    for pro, m_pro in old_pairs:
        if m_pro is None or graph.nodes.get(m_pro) is None:
            continue
        if graph.nodes[m_pro].origin != "local":
            continue
        still_used = any(d.pro == pro and d.m_pro == m_pro
                         for d in all_deps.all if d not in selected)
        if still_used:
            continue
        ppath, ptext = load(m_pro)
        span = _find_property_decl_span(ptext, pro)
        if span is None:
            diagnostics.append(Diagnostic("property-not-found", pro, str(m_pro)))
            continue
        result.edits.append(Edit(ppath, DELETE_PROPERTY, span[0], span[1], "",
                                 f"delete unreferenced {pro} from {m_pro.artifact_id}"))
        result.removed_properties.append((pro, m_pro))

    _check_non_overlapping(result.edits)
    for path, text in texts.items():
        result.pre_content[path] = text
        result.pre_digests[path] = _sha(text)
        result.post_digests[path] = _sha(_apply_to_text(text, result.edits, path))
    return result


def _check_non_overlapping(edits: list[Edit]):
    by_file: dict[str, list[Edit]] = {}
    for e in edits:
        by_file.setdefault(e.file, []).append(e)
    for path, es in by_file.items():
        es.sort(key=lambda e: (e.start, e.end))
        for a, b in zip(es, es[1:]):
            if b.start < a.end or (b.start == a.start == a.end == b.end):
                raise CollisionUnresolvable(f"overlapping edits in {path}")


def _apply_to_text(text: str, edits: list[Edit], path: str) -> str:
    # descending; for equal starts the wider (deletion) edit goes first so
    # a zero-width insertion at the same offset lands on the shrunk text
    mine = sorted((e for e in edits if e.file == path),
                  key=lambda e: (e.start, e.end), reverse=True)
    for e in mine:
        text = text[:e.start] + e.replacement + text[e.end:]
    return text


# --- applying ---------------------------------------------------------


def apply(plan_: RefactorPlan, mode: str = DRY_RUN) -> ApplyReport:
    """DryRun renders diffs; Write rewrites files atomically and verifies
    the selected group really classifies as one true consistency after."""
    files = sorted(plan_.pre_digests)
    current = {p: Path(p).read_text(encoding="utf-8-sig") for p in files}

    if files and all(_sha(current[p]) == plan_.post_digests[p] for p in files):
        return ApplyReport(mode=mode, diffs={}, changed_files=[], already_applied=True)
    stale = [p for p in files if _sha(current[p]) != plan_.pre_digests[p]]
    if stale:
        raise StaleFile(f"changed since planning: {', '.join(stale)}")

    diffs = {}
    new_content = {}
    for p in files:
        after = _apply_to_text(current[p], plan_.edits, p)
        new_content[p] = after
        if after != current[p]:
            diffs[p] = "".join(difflib.unified_diff(
                current[p].splitlines(keepends=True), after.splitlines(keepends=True),
                fromfile=p, tofile=p))
    changed = sorted(diffs)
    if mode == DRY_RUN:
        return ApplyReport(mode=mode, diffs=diffs, changed_files=changed)

    backups = {p: current[p] for p in changed}
    for p in changed:
        _atomic_write_text(Path(p), new_content[p])
    new_kind = None
    if plan_.repo_root:
        try:
            new_kind = _post_check(plan_)
        except PostconditionFailed:
            for p, text in backups.items():
                _atomic_write_text(Path(p), text)
            raise
    return ApplyReport(mode=mode, diffs=diffs, changed_files=changed, new_kind=new_kind)


def _post_check(plan_: RefactorPlan) -> str:
    nodes, _ = collect_local_poms(plan_.repo_root)
    graph = build_inheritance_graph(nodes, plan_.fetcher)
    groups = classify(resolve_all(graph))
    group = find_group(groups, plan_.group.lib)
    if group is None:
        raise PostconditionFailed(f"{plan_.group.lib} vanished after refactoring")
    selected_sites = {d.m_ver for key in plan_.selection
                      for d in plan_.group.subgroups.get(key, [])}
    covered = [d for d in group.deps
               if d.m_lib in {m.m_lib for key in plan_.selection
                              for m in plan_.group.subgroups.get(key, [])}]
    per_anchor_ok = _members_true_consistent(covered, plan_.harmonized_version,
                                             len(plan_.anchors))
    if not per_anchor_ok:
        raise PostconditionFailed(
            f"selected members of {group.lib} not TC at "
            f"{plan_.harmonized_version} after apply (sites {sorted(map(str, selected_sites))})")
    return TC


def _members_true_consistent(members, v_h: str, n_anchors: int) -> bool:
    if not members:
        return False
    if any(d.ver != v_h for d in members):
        return False
    pairs = {(d.pro, d.m_pro) for d in members}
    if any(pro is None for pro, _ in pairs):
        return False
    # one shared property per anchor
    return len(pairs) <= max(1, n_anchors)


def _atomic_write_text(target: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".pom-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
