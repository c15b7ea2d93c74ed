"""Classify each library's dependency tuples as IC / FC / TC / SL.

IC: more than one tuple and at least two versions differ.
TC: more than one tuple, all referencing the same property declared in
    the same POM.
FC: more than one tuple, one version everywhere, but not via one shared
    property.
SL: exactly one tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Diagnostic
from .pom_model import PomCoord
from .resolver import DependencySet, LibraryId, ResolvedDependency

IC = "IC"
FC = "FC"
TC = "TC"
SL = "SL"

EXPLICIT = "explicit"
IMPLICIT = "implicit"
MIXED = "mixed"


@dataclass
class ConsistencyGroup:
    lib: LibraryId
    deps: list[ResolvedDependency]
    kind: str
    subgroups: dict[PomCoord, list[ResolvedDependency]] = field(default_factory=dict)
    quarantined: list[ResolvedDependency] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def versions(self) -> list[str]:
        """Distinct resolved versions, in first-seen order."""
        seen = []
        for d in self.deps:
            if d.ver not in seen:
                seen.append(d.ver)
        return seen

    @property
    def affected_poms(self) -> list[PomCoord]:
        seen = []
        for d in self.deps:
            if d.m_lib not in seen:
                seen.append(d.m_lib)
        return seen


def classify_kind(deps: list[ResolvedDependency]) -> str:
    """The four-way predicate over one library's resolved tuples."""
    if len(deps) == 1:
        return SL
    versions = {d.ver.strip() if d.ver else d.ver for d in deps}
    if len(versions) > 1:
        return IC
    if all(d.pro is not None for d in deps) and len({(d.pro, d.m_pro) for d in deps}) == 1:
        return TC
    return FC


def classify(dep_set: DependencySet) -> list[ConsistencyGroup]:
    """One group per distinct library, ordered by (groupId, artifactId).

    Tuples with an unresolved version are quarantined: attached to the
    group but excluded from kind computation.
    """
    by_lib: dict[LibraryId, list[ResolvedDependency]] = {}
    for d in dep_set.all:
        by_lib.setdefault(d.lib, []).append(d)

    groups = []
    for lib in sorted(by_lib):
        deps = by_lib[lib]
        ok = [d for d in deps if d.resolved]
        quarantined = [d for d in deps if not d.resolved]
        diagnostics = []
        if quarantined:
            diagnostics.append(Diagnostic(
                "quarantined", f"{len(quarantined)} tuple(s) with unresolved version excluded", str(lib)))
        if ok:
            kind = classify_kind(ok)
        else:
            # degenerate: nothing classifiable; report as SL with a diagnostic
            kind = SL
            diagnostics.append(Diagnostic("unclassifiable", "no resolvable members", str(lib)))
        subgroups: dict[PomCoord, list[ResolvedDependency]] = {}
        for d in ok:
            subgroups.setdefault(d.m_ver, []).append(d)
        groups.append(ConsistencyGroup(
            lib=lib, deps=ok, kind=kind, subgroups=subgroups,
            quarantined=quarantined, diagnostics=diagnostics,
        ))
    return groups


def declaration_style(group: ConsistencyGroup) -> str:
    """Explicit when every version is hard-coded, implicit when every one
    references a property, mixed otherwise."""
    deps = group.deps or group.quarantined
    if all(d.pro is None for d in deps):
        return EXPLICIT
    if all(d.pro is not None for d in deps):
        return IMPLICIT
    return MIXED


def find_group(groups: list[ConsistencyGroup], lib: LibraryId) -> ConsistencyGroup | None:
    for g in groups:
        if g.lib == lib:
            return g
    return None
