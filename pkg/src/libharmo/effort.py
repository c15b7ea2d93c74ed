"""Harmonization effort: the six-way partition and candidate ranking.

For a dependency and a candidate version, every called API lands in
exactly one of three sets: deleted (no API with the same identity in the
candidate), changed (its body, or any body reachable through the
library's static call graph, differs), unchanged.  Call sites partition
the same way by projection.  Candidates are ranked by a configurable
cost key, ascending; the default counts call sites needing attention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .classfile import ApiIndex, ApiRef, reachable_bodies
from .consistency import FC, ConsistencyGroup
from .errors import Diagnostic, EmptyInput
from .libdb import VersionIndex
from .pom_model import PomCoord
from .resolver import ResolvedDependency
from .usage import SOURCE_HEURISTIC, CallSite, UsageProfile
from .versioning import VersionKey, compare, is_snapshot, max_version

DEFAULT_CANDIDATE_CAP = 50
DEFAULT_RANK_KEY = "CD+CC"


@dataclass
class EffortTuple:
    dep: ResolvedDependency | None
    candidate: str
    deleted_apis: frozenset[ApiRef]      # AD
    changed_apis: frozenset[ApiRef]      # AC
    unchanged_apis: frozenset[ApiRef]    # AU
    deleted_calls: tuple[CallSite, ...]  # CD
    changed_calls: tuple[CallSite, ...]  # CC
    unchanged_calls: tuple[CallSite, ...]  # CU
    approximate: bool = False
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        return {"AD": len(self.deleted_apis), "AC": len(self.changed_apis),
                "AU": len(self.unchanged_apis), "CD": len(self.deleted_calls),
                "CC": len(self.changed_calls), "CU": len(self.unchanged_calls)}

    @property
    def is_zero(self) -> bool:
        return not self.deleted_apis and not self.changed_apis


@dataclass
class CandidateRanking:
    group: ConsistencyGroup
    selection: list[PomCoord]
    candidates: list[tuple[str, dict]]  # (version, aggregate breakdown), best first
    rank_key: str


def candidate_versions(group: ConsistencyGroup, index: VersionIndex,
                       include_snapshots: bool = False,
                       cap: int = DEFAULT_CANDIDATE_CAP):
    """Versions no older than the highest declared one, ascending.

    FC groups bypass the search: the harmonized version is the one
    already shared.  Returns (versions, diagnostics).
    """
    declared = [v for v in group.versions if v is not None]
    if not declared:
        raise EmptyInput("group has no resolved versions")
    if group.kind == FC:
        return [declared[0]], []
    top = max_version(declared)
    available = index.version_strings
    if not any(compare(v, top) == 0 for v in available):
        diag = Diagnostic("empty-candidates",
                          f"declared max {top} not in the version index; "
                          "falling back to declared versions", str(group.lib))
        fallback = sorted(set(declared), key=VersionKey.parse)
        return fallback, [diag]
    out = [v for v in available
           if compare(v, top) >= 0 and (include_snapshots or not is_snapshot(v))]
    return out[:cap], []


def compute_effort(dep: ResolvedDependency | None, profile: UsageProfile,
                   old: ApiIndex, new: ApiIndex, candidate: str = "") -> EffortTuple:
    """Partition the profile's APIs and call sites against a candidate."""
    new_by_identity = new.by_identity()
    diagnostics = []
    approximate = profile.mode == SOURCE_HEURISTIC
    if approximate:
        diagnostics.append(Diagnostic(
            "profile-mode", "usage extracted heuristically from sources; "
            "partition is approximate", candidate))

    deleted, changed, unchanged = set(), set(), set()
    for api in profile.called_apis:
        if api not in old.apis:
            diagnostics.append(Diagnostic(
                "unresolved-api", "called API absent from the current version index",
                str(api)))
            continue
        counterpart = new_by_identity.get(api.identity)
        if counterpart is None:
            deleted.add(api)
            continue
        if _reachable_changed(old, new, new_by_identity, api):
            changed.add(api)
        else:
            unchanged.add(api)

    def bucket(sites, members):
        return tuple(s for s in sites if s.api in members)

    return EffortTuple(
        dep=dep, candidate=candidate,
        deleted_apis=frozenset(deleted), changed_apis=frozenset(changed),
        unchanged_apis=frozenset(unchanged),
        deleted_calls=bucket(profile.call_sites, deleted),
        changed_calls=bucket(profile.call_sites, changed),
        unchanged_calls=bucket(profile.call_sites, unchanged),
        approximate=approximate, diagnostics=diagnostics,
    )


def _reachable_changed(old: ApiIndex, new: ApiIndex, new_by_identity, api: ApiRef) -> bool:
    for body in reachable_bodies(old, api):
        counterpart_ref = new_by_identity.get(body.api.identity)
        if counterpart_ref is None:
            return True  # a callee disappeared
        if new.apis[counterpart_ref].body_hash != body.body_hash:
            return True
    return False


# cost keys over the aggregated six counts
RANK_KEYS = {
    "CD+CC": lambda c: c["CD"] + c["CC"],
    "CD": lambda c: c["CD"],
    "CC": lambda c: c["CC"],
    "AD+AC": lambda c: c["AD"] + c["AC"],
    "AD": lambda c: c["AD"],
}


def aggregate_counts(efforts: list[EffortTuple]) -> dict[str, int]:
    total = {"AD": 0, "AC": 0, "AU": 0, "CD": 0, "CC": 0, "CU": 0}
    for t in efforts:
        for k, v in t.counts.items():
            total[k] += v
    return total


def rank_candidates(group: ConsistencyGroup, selection,
                    efforts: dict[str, list[EffortTuple]],
                    rank_key: str = DEFAULT_RANK_KEY) -> CandidateRanking:
    """Order candidate versions, cheapest first.

    `efforts` maps candidate version to the per-dependency tuples; only
    tuples whose dependency's version-declaring POM is in the selection
    count toward the aggregate.  Ties go to (fewer deleted calls, fewer
    deleted APIs, fewer changed calls, then the newer version).
    """
    selection = list(selection)
    if not selection:
        raise EmptyInput("selection must name at least one subgroup")
    key_fn = RANK_KEYS[rank_key]
    selected = set(selection)

    rows = []
    for version, tuples in efforts.items():
        in_scope = [t for t in tuples
                    if t.dep is None or t.dep.m_ver in selected]
        counts = aggregate_counts(in_scope)
        breakdown = {
            "counts": counts,
            "cost": key_fn(counts),
            "per_dependency": [
                {"owner": str(t.dep.m_lib) if t.dep else None, "counts": t.counts,
                 "approximate": t.approximate}
                for t in in_scope],
        }
        rows.append((version, breakdown))

    rows.sort(key=lambda r: VersionKey.parse(r[0]), reverse=True)  # newest first on ties
    rows.sort(key=lambda r: (r[1]["cost"], r[1]["counts"]["CD"],
                             r[1]["counts"]["AD"], r[1]["counts"]["CC"]))
    return CandidateRanking(group=group, selection=selection,
                            candidates=rows, rank_key=rank_key)
