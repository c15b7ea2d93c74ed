"""Independent brute-force oracles and random fixture generators.

These deliberately re-derive results along a different path than the
production code: the resolver oracle materializes the full effective
model per POM by explicit substitution, and the classification oracle
evaluates the four type predicates literally with pair quantifiers.
"""

from __future__ import annotations

import random
import re

from libharmo.pom_model import InheritanceGraph, PomCoord, build_inheritance_graph, parse_pom

_REF = re.compile(r"\$\{([^}]+)\}")


def _ancestor_bfs(graph: InheritanceGraph, start: PomCoord):
    order = [start]
    seen = {start}
    i = 0
    while i < len(order):
        for parent, _k in graph.parents_of(order[i]):
            if parent in graph.nodes and parent not in seen:
                seen.add(parent)
                order.append(parent)
        i += 1
    return order


def brute_force_resolve(graph: InheritanceGraph, m: PomCoord):
    """Materialize effective properties/management/dependencies maps by
    overlaying farthest-first, then substitute versions textually.

    Returns {lib: (ver, pro, m_ver, m_pro)} with None markers for
    unresolved entries; intra-project ${project.version} deps excluded.
    """
    order = _ancestor_bfs(graph, m)

    eff_props: dict[str, tuple[str, PomCoord]] = {}
    eff_mgmt: dict[tuple, tuple[str | None, PomCoord]] = {}
    eff_deps: dict[tuple, tuple] = {}
    for coord in reversed(order):
        node = graph.nodes[coord]
        for k, v in node.parsed.properties.items():
            eff_props[k] = (v, coord)
        for entry in node.parsed.dependency_management:
            if not entry.is_import:
                eff_mgmt[(entry.group_id, entry.artifact_id)] = (entry.version, coord)
        for decl in node.parsed.dependencies:
            eff_deps[(decl.group_id, decl.artifact_id)] = (decl.version, coord)

    this = graph.nodes[m]

    def subst(text):
        """Fully substitute ${...} by repeated textual replacement."""
        for _ in range(10):
            match = _REF.search(text)
            if not match:
                return text
            name = match.group(1)
            if name in ("project.version", "pom.version", "version"):
                value = this.coord.version
            elif name in ("project.groupId", "pom.groupId", "groupId"):
                value = this.coord.group_id
            elif name in eff_props:
                value = eff_props[name][0]
            else:
                return None
            text = text[:match.start()] + value + text[match.end():]
        return None

    out = {}
    for (gid, aid), (raw, _declared_in) in eff_deps.items():
        m_ver = _declared_in if raw is not None else None
        if raw is None and (gid, aid) in eff_mgmt:
            raw, m_ver = eff_mgmt[(gid, aid)]
        pro = None
        m_pro = None
        ver = None
        if raw is not None:
            whole = _REF.fullmatch(raw.strip())
            if whole:
                pro = whole.group(1)
                if pro in ("project.version", "pom.version"):
                    continue  # module-on-module dependency
                if pro in eff_props:
                    m_pro = eff_props[pro][1]
            ver = subst(raw)
            if ver is not None:
                ver = ver.strip()
            if ver is None:
                pro_out = pro
                out[(gid, aid)] = (None, pro_out, None, None)
                continue
        if raw is None:
            out[(gid, aid)] = (None, None, None, None)
            continue
        out[(gid, aid)] = (ver, pro, m_ver, m_pro)
    return out


def oracle_kind(deps) -> str:
    """The paper's four predicates, evaluated literally."""
    if len(deps) == 1:
        return "SL"
    if any(d1.ver != d2.ver for d1 in deps for d2 in deps):
        return "IC"
    is_tc = all(
        d1.pro is not None and d1.pro == d2.pro and d1.m_pro == d2.m_pro
        for d1 in deps for d2 in deps
    )
    return "TC" if is_tc else "FC"


LIB_POOL = [("org.libs", "alpha"), ("org.libs", "beta"),
            ("com.third", "gamma"), ("com.third", "delta")]
VERSION_POOL = ["1.0", "1.1", "2.0", "2.0.1"]
PROP_POOL = ["alpha.version", "beta.version", "shared.version", "indirect.version"]


def random_project(rng: random.Random, max_poms: int = 6):
    """A random in-memory POM tree exercising properties, management,
    inline versions, overrides and one-level property nesting."""
    n = rng.randint(1, max_poms)
    texts = []
    for i in range(n):
        parts = ["<project>", "<groupId>proj</groupId>",
                 f"<artifactId>m{i}</artifactId>", "<version>1</version>"]
        if i > 0 and rng.random() < 0.8:
            parent = rng.randrange(i)
            parts.append(f"<parent><groupId>proj</groupId><artifactId>m{parent}</artifactId>"
                         "<version>1</version></parent>")
        props = []
        for name in PROP_POOL:
            if rng.random() < 0.4:
                if name == "indirect.version" and rng.random() < 0.5:
                    value = "${" + rng.choice(PROP_POOL[:3]) + "}"
                else:
                    value = rng.choice(VERSION_POOL)
                props.append(f"<{name}>{value}</{name}>")
        if props:
            parts.append("<properties>" + "".join(props) + "</properties>")

        def version_clause():
            r = rng.random()
            if r < 0.4:
                return f"<version>{rng.choice(VERSION_POOL)}</version>"
            if r < 0.8:
                return f"<version>${{{rng.choice(PROP_POOL)}}}</version>"
            return ""

        mgmt = []
        for gid, aid in LIB_POOL:
            if rng.random() < 0.3:
                mgmt.append(f"<dependency><groupId>{gid}</groupId>"
                            f"<artifactId>{aid}</artifactId>{version_clause()}</dependency>")
        if mgmt:
            parts.append("<dependencyManagement><dependencies>"
                         + "".join(mgmt) + "</dependencies></dependencyManagement>")
        deps = []
        for gid, aid in LIB_POOL:
            if rng.random() < 0.45:
                deps.append(f"<dependency><groupId>{gid}</groupId>"
                            f"<artifactId>{aid}</artifactId>{version_clause()}</dependency>")
        if deps:
            parts.append("<dependencies>" + "".join(deps) + "</dependencies>")
        parts.append("</project>")
        texts.append("".join(parts))
    nodes = [parse_pom(t, f"mem:{i}") for i, t in enumerate(texts)]
    return build_inheritance_graph(nodes)
