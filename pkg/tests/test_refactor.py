"""Refactoring plans: anchors, edits, apply semantics."""

import hashlib
import random
from pathlib import Path

import pytest

from conftest import POM_A, POM_B, POM_C, write_fig_repo
from libharmo.consistency import TC, classify, find_group
from libharmo.errors import PostconditionFailed, StaleFile
from libharmo.pom_model import (
    PARENT_EDGE,
    InheritanceGraph,
    PomCoord,
    build_inheritance_graph,
    collect_local_poms,
    parse_pom,
)
from libharmo.refactor import (
    DELETE_PROPERTY,
    DRY_RUN,
    INSERT_MANAGED,
    INSERT_PROPERTY,
    REWRITE_VERSION,
    WRITE,
    _pick_property_name,
    apply,
    lowest_common_ancestors,
    plan,
)
from libharmo.resolver import LibraryId, resolve_all

GUAVA = LibraryId("com.google.guava", "guava")
COMMONS_IO = LibraryId("commons-io", "commons-io")

A = PomCoord("com.example", "project-a", "1.0.0")
B = PomCoord("com.example", "project-b", "1.0.0")
C = PomCoord("com.example", "project-c", "1.0.0")


def _analyze(repo, fetcher):
    nodes, _ = collect_local_poms(repo)
    graph = build_inheritance_graph(nodes, fetcher)
    deps = resolve_all(graph)
    return graph, deps, classify(deps)


def _guava_plan(repo, fetcher, v_h="23.0"):
    graph, deps, groups = _analyze(repo, fetcher)
    group = find_group(groups, GUAVA)
    return plan(group, group.subgroups.keys(), v_h, graph, deps,
                repo_root=repo, fetcher=fetcher), graph


def _tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("pom.xml")):
        h.update(str(p).encode())
        h.update(p.read_bytes())
    return h.hexdigest()


# --- anchors ----------------------------------------------------------


def test_lca_of_b_and_c_is_a(fig_graph):
    anchors = lowest_common_ancestors(fig_graph, {B, C})
    assert anchors == [(A, frozenset({B, C}))]


def test_lca_single_target_is_itself(fig_graph):
    assert lowest_common_ancestors(fig_graph, {C}) == [(C, frozenset({C}))]


def _random_dag(rng, n):
    graph = InheritanceGraph()
    coords = []
    for i in range(n):
        node = parse_pom(
            f"<project><groupId>g</groupId><artifactId>r{i}</artifactId>"
            f"<version>1</version></project>", f"mem:{i:02d}")
        graph.nodes[node.coord] = node
        coords.append(node.coord)
    for i, c in enumerate(coords):
        if i and rng.random() < 0.75:
            graph.edges.append((c, coords[rng.randrange(i)], PARENT_EDGE))
    return graph, coords


def _oracle_ancestors(graph, coord):
    out = {coord}
    frontier = [coord]
    while frontier:
        nxt = []
        for c in frontier:
            for child, parent, kind in graph.edges:
                if child == c and kind == PARENT_EDGE and parent not in out:
                    out.add(parent)
                    nxt.append(parent)
        frontier = nxt
    return out


def test_lca_matches_ancestor_set_oracle():
    rng = random.Random(3)
    for _ in range(120):
        graph, coords = _random_dag(rng, rng.randint(2, 9))
        targets = rng.sample(coords, rng.randint(1, len(coords)))
        anchors = lowest_common_ancestors(graph, targets)
        covered_union = set()
        for anchor, covered in anchors:
            assert not covered & covered_union  # disjoint
            covered_union |= covered
            common = set.intersection(*[_oracle_ancestors(graph, t) for t in covered])
            assert anchor in common
            # minimality: nothing in common sits strictly below the anchor
            below = [c for c in common
                     if c != anchor and anchor in _oracle_ancestors(graph, c)]
            assert below == []
        assert covered_union == set(targets)
        full_common = set.intersection(*[_oracle_ancestors(graph, t) for t in targets])
        if full_common:
            assert len(anchors) == 1


# --- planning ---------------------------------------------------------


def test_guava_plan_shape(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    assert p.anchors == [(A, frozenset({B, C}))]
    kinds = {}
    for e in p.edits:
        kinds.setdefault(e.kind, []).append(e)
    assert len(kinds[INSERT_PROPERTY]) == 1
    insert = kinds[INSERT_PROPERTY][0]
    assert "guava.new.version" in insert.replacement and "23.0" in insert.replacement
    assert Path(insert.file).name == "pom.xml" and Path(insert.file).parent == Path(fig_repo)
    rewrites = {Path(e.file).parent.name for e in kinds[REWRITE_VERSION]}
    assert rewrites == {"b", "c"}
    assert all("${guava.new.version}" == e.replacement for e in kinds[REWRITE_VERSION])
    deletes = kinds[DELETE_PROPERTY]
    assert len(deletes) == 1 and Path(deletes[0].file).parent == Path(fig_repo)
    assert p.removed_properties == [("guava.version", A)]


def test_commons_io_plan_uses_plain_property_name(fig_repo, fetcher):
    graph, deps, groups = _analyze(fig_repo, fetcher)
    group = find_group(groups, COMMONS_IO)
    p = plan(group, group.subgroups.keys(), "2.5", graph, deps)
    inserts = [e for e in p.edits if e.kind == INSERT_PROPERTY]
    assert len(inserts) == 1
    assert "commons-io.version" in inserts[0].replacement
    assert Path(inserts[0].file).parent == Path(fig_repo)  # anchor A
    rewrites = [e for e in p.edits if e.kind == REWRITE_VERSION]
    assert {Path(e.file).parent.name for e in rewrites} == {"b", "c"}
    assert not [e for e in p.edits if e.kind == DELETE_PROPERTY]


def test_property_name_collision_ladder(fig_graph):
    assert _pick_property_name(fig_graph, A, "guava") == "guava.new.version"
    assert _pick_property_name(fig_graph, A, "commons-io") == "commons-io.version"


def test_property_kept_when_referenced_outside_selection(tmp_path, fetcher):
    repo = write_fig_repo(tmp_path / "repo")
    c_pom = repo / "c" / "pom.xml"
    extra = ("<dependency><groupId>org.x</groupId><artifactId>thing</artifactId>"
             "<version>${guava.version}</version></dependency>\n    ")
    # into the plain dependencies section, not the managed one
    text = c_pom.read_text().replace(
        "<dependency>\n      <groupId>commons-io</groupId>",
        extra + "<dependency>\n      <groupId>commons-io</groupId>")
    c_pom.write_text(text)
    p, _ = _guava_plan(repo, fetcher)
    assert not [e for e in p.edits if e.kind == DELETE_PROPERTY]
    assert p.removed_properties == []


# --- applying ---------------------------------------------------------


def test_dry_run_mutates_nothing(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    before = _tree_digest(fig_repo)
    report = apply(p, DRY_RUN)
    assert _tree_digest(fig_repo) == before
    assert set(report.diffs) == set(report.changed_files)
    assert len(report.changed_files) == 3


def test_write_produces_tc_and_expected_texts(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    report = apply(p, WRITE)
    assert report.new_kind == TC

    a_text = (fig_repo / "pom.xml").read_text()
    assert ("<properties>\n"
            "    <guava.new.version>23.0</guava.new.version>\n"
            "  </properties>") in a_text
    assert "guava.version>16.0.1" not in a_text
    assert "<!-- shared version properties -->" in a_text  # comments survive

    # the other files change only where the version text was rewritten
    assert (fig_repo / "b" / "pom.xml").read_text() == \
        POM_B.replace("<version>23.0</version>", "<version>${guava.new.version}</version>")
    assert (fig_repo / "c" / "pom.xml").read_text() == \
        POM_C.replace("${guava.version}", "${guava.new.version}")

    _, _, groups = _analyze(fig_repo, fetcher)
    group = find_group(groups, GUAVA)
    assert group.kind == TC
    assert group.versions == ["23.0"]


def test_apply_is_idempotent(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    apply(p, WRITE)
    before = _tree_digest(fig_repo)
    second = apply(p, WRITE)
    assert second.already_applied and second.changed_files == []
    assert _tree_digest(fig_repo) == before


def test_replan_after_apply_is_empty(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    apply(p, WRITE)
    p2, _ = _guava_plan(fig_repo, fetcher)
    assert p2.edits == []
    assert p2.anchors == [(A, frozenset({B, C}))]


def test_stale_file_blocks_apply(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    pom = fig_repo / "c" / "pom.xml"
    pom.write_text(pom.read_text() + "<!-- drift -->\n")
    before = _tree_digest(fig_repo)
    with pytest.raises(StaleFile):
        apply(p, WRITE)
    assert _tree_digest(fig_repo) == before  # nothing written


def test_postcondition_failure_restores_files(fig_repo, fetcher):
    p, _ = _guava_plan(fig_repo, fetcher)
    p.harmonized_version = "99.9"  # sabotage: files will say 23.0
    before = _tree_digest(fig_repo)
    with pytest.raises(PostconditionFailed):
        apply(p, WRITE)
    assert _tree_digest(fig_repo) == before


def test_non_invasiveness(fig_repo, fetcher):
    graph_before, _, _ = _analyze(fig_repo, fetcher)
    p, _ = _guava_plan(fig_repo, fetcher)
    apply(p, WRITE)
    graph_after, _, _ = _analyze(fig_repo, fetcher)
    assert set(graph_before.nodes) == set(graph_after.nodes)
    assert sorted(map(str, graph_before.edges)) == sorted(map(str, graph_after.edges))


def test_unlocatable_declaration_falls_back_to_managed_entry(fig_repo, fetcher):
    # drop guava's inline version from B on disk after analysis: the plan
    # cannot rewrite it, so the anchor manages the dependency instead
    graph, deps, groups = _analyze(fig_repo, fetcher)
    group = find_group(groups, GUAVA)
    b_pom = fig_repo / "b" / "pom.xml"
    b_pom.write_text(b_pom.read_text().replace("      <version>23.0</version>\n", ""))
    p = plan(group, group.subgroups.keys(), "23.0", graph, deps,
             repo_root=fig_repo, fetcher=fetcher)
    managed = [e for e in p.edits if e.kind == INSERT_MANAGED]
    assert len(managed) == 1 and Path(managed[0].file).parent == Path(fig_repo)
    assert "${guava.new.version}" in managed[0].replacement
    report = apply(p, WRITE)
    assert report.new_kind == TC
    _, _, groups2 = _analyze(fig_repo, fetcher)
    assert find_group(groups2, GUAVA).kind == TC
