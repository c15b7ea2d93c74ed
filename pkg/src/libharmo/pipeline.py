"""End-to-end analysis steps shared by the CLI and the HTTP service."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from . import refactor
from .api_replacement import suggest_replacements
from .classfile import ApiIndex, index_jar
from .consistency import FC, ConsistencyGroup, classify, find_group
from .effort import (
    DEFAULT_CANDIDATE_CAP,
    DEFAULT_RANK_KEY,
    CandidateRanking,
    EffortTuple,
    candidate_versions,
    compute_effort,
    rank_candidates,
)
from .errors import Diagnostic, LibharmoError, NoSuchGroup
from .libdb import LibraryDb
from .pom_model import InheritanceGraph, build_inheritance_graph, collect_local_poms
from .resolver import DependencySet, LibraryId, resolve_all
from .usage import UsageProfile, extract_usage


@dataclass
class Analysis:
    repo_root: str
    graph: InheritanceGraph
    dep_set: DependencySet
    groups: list[ConsistencyGroup]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def group(self, lib: LibraryId) -> ConsistencyGroup:
        found = find_group(self.groups, lib)
        if found is None:
            raise NoSuchGroup(str(lib))
        return found

    def tree_digest(self) -> str:
        h = hashlib.sha256()
        for node in self.graph.local_nodes():
            h.update(node.location.encode())
            h.update(Path(node.location).read_bytes())
        return h.hexdigest()


def analyze(repo_root, db: LibraryDb | None = None,
            include_test_scope: bool = True) -> Analysis:
    nodes, diags = collect_local_poms(repo_root)
    fetcher = db.fetch_pom_text if db is not None else None
    graph = build_inheritance_graph(nodes, fetcher)
    dep_set = resolve_all(graph, include_test_scope=include_test_scope)
    groups = classify(dep_set)
    return Analysis(repo_root=str(repo_root), graph=graph, dep_set=dep_set,
                    groups=groups, diagnostics=diags)


@dataclass
class GroupEfforts:
    ranking: CandidateRanking
    profiles: dict  # m_lib -> UsageProfile
    indexes: dict   # version -> ApiIndex
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _index_for(db: LibraryDb, lib: LibraryId, version: str,
               cache: dict[str, ApiIndex]) -> ApiIndex:
    if version not in cache:
        record = db.fetch_jar(lib, version)
        cache[version] = index_jar(record.jar_path, lib=lib, version=version)
    return cache[version]


def _profile_for(analysis: Analysis, dep, index: ApiIndex) -> UsageProfile:
    module_root = Path(analysis.graph.nodes[dep.m_lib].location).parent
    return extract_usage(dep, module_root, index)


def group_efforts(analysis: Analysis, group: ConsistencyGroup, db: LibraryDb,
                  selection=None, rank_key: str = DEFAULT_RANK_KEY,
                  max_candidates: int = DEFAULT_CANDIDATE_CAP) -> GroupEfforts:
    """Usage extraction + effort computation + ranking for one group."""
    selection = list(selection) if selection else sorted(group.subgroups, key=str)
    index = db.list_versions(group.lib)
    cands, diagnostics = candidate_versions(group, index, cap=max_candidates)
    indexes: dict[str, ApiIndex] = {}
    profiles: dict = {}
    efforts: dict[str, list[EffortTuple]] = {}

    if group.kind == FC:
        # the shared current version is suggested as-is, no bytecode work
        efforts = {cands[0]: []}
        ranking = rank_candidates(group, selection, efforts, rank_key=rank_key)
        return GroupEfforts(ranking=ranking, profiles={}, indexes={},
                            diagnostics=diagnostics)

    for d in group.deps:
        old = _index_for(db, group.lib, d.ver, indexes)
        profiles[d.m_lib] = _profile_for(analysis, d, old)

    for v in cands:
        try:
            new = _index_for(db, group.lib, v, indexes)
        except LibharmoError as e:
            diagnostics.append(Diagnostic("candidate-unavailable", str(e), v))
            continue
        efforts[v] = [
            compute_effort(d, profiles[d.m_lib], indexes[d.ver], new, v)
            for d in group.deps
        ]
    ranking = rank_candidates(group, selection, efforts, rank_key=rank_key)
    return GroupEfforts(ranking=ranking, profiles=profiles, indexes=indexes,
                        diagnostics=diagnostics)


def replacements_for(group: ConsistencyGroup, version: str,
                     efforts: GroupEfforts, db: LibraryDb):
    """Replacement suggestions for every API deleted in the chosen version."""
    suggestions = []
    diagnostics = []
    seen = set()
    for d in group.deps:
        profile = efforts.profiles.get(d.m_lib)
        if profile is None or d.ver == version:
            continue
        try:
            old = efforts.indexes[d.ver]
            new = efforts.indexes[version]
        except KeyError:
            continue
        tup = compute_effort(d, profile, old, new, version)
        deleted = {a for a in tup.deleted_apis if a not in seen}
        seen |= deleted
        s, diags = suggest_replacements(d, version, deleted, db)
        suggestions.extend(s)
        diagnostics.extend(diags)
    return suggestions, diagnostics


def make_plan(analysis: Analysis, group: ConsistencyGroup, selection,
              version: str, fetcher=None) -> refactor.RefactorPlan:
    selection = list(selection) if selection else sorted(group.subgroups, key=str)
    return refactor.plan(group, selection, version, analysis.graph,
                         analysis.dep_set, repo_root=analysis.repo_root,
                         fetcher=fetcher)
