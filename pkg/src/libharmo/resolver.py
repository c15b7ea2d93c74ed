"""Resolve each local POM's effective direct dependencies.

Every dependency becomes a 6-tuple: the library, the resolved version,
the property the version references (if any), the POM owning the
dependency, the POM declaring the version, and the POM declaring the
property.  Resolution walks the POM and its ancestors breadth-first with
nearest-definition-wins semantics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import Diagnostic
from .pom_model import InheritanceGraph, PomCoord, PomNode, bfs_order

_PROP_REF = re.compile(r"\$\{([^}]+)\}")
_MAX_INTERPOLATION_DEPTH = 8

VERSION_SITE_INLINE = "inline"
VERSION_SITE_MANAGEMENT = "management"


@dataclass(frozen=True, order=True)
class LibraryId:
    group_id: str
    artifact_id: str

    def __post_init__(self):
        if not self.group_id or not self.artifact_id:
            raise ValueError("library id needs non-empty groupId and artifactId")

    def __str__(self):
        return f"{self.group_id}:{self.artifact_id}"


@dataclass(frozen=True)
class ResolvedDependency:
    lib: LibraryId
    ver: str | None
    pro: str | None
    m_lib: PomCoord
    m_ver: PomCoord | None
    m_pro: PomCoord | None
    scope: str | None = None
    optional: bool = False
    classifier: str | None = None
    version_site: str | None = None  # inline | management
    flags: tuple = ()

    @property
    def resolved(self) -> bool:
        return self.ver is not None

    def __str__(self):
        return (f"<{self.lib}, {self.ver}, {self.pro}, "
                f"{self.m_lib.artifact_id}, "
                f"{self.m_ver.artifact_id if self.m_ver else None}, "
                f"{self.m_pro.artifact_id if self.m_pro else None}>")


@dataclass
class DependencySet:
    by_pom: dict[PomCoord, list[ResolvedDependency]] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def all(self) -> list[ResolvedDependency]:
        out = []
        for coord in sorted(self.by_pom, key=str):
            out.extend(self.by_pom[coord])
        return out


def _effective_properties(graph: InheritanceGraph, order: list[PomCoord]):
    """Nearest property declaration wins along the BFS order."""
    props: dict[str, tuple[str, PomCoord]] = {}
    for coord in order:
        node = graph.nodes[coord]
        for name, value in node.parsed.properties.items():
            if name not in props:
                props[name] = (value, coord)
    return props


def _builtin_property(name: str, m: PomNode) -> str | None:
    if name in ("project.version", "pom.version", "version"):
        return m.coord.version
    if name in ("project.groupId", "pom.groupId", "groupId"):
        return m.coord.group_id
    if name in ("project.artifactId", "pom.artifactId", "artifactId"):
        return m.coord.artifact_id
    return None


def _interpolate(value: str, props, m: PomNode, diagnostics, depth: int = 0) -> str | None:
    """Substitute ${...} references; bounded nesting depth."""
    if depth > _MAX_INTERPOLATION_DEPTH:
        diagnostics.append(Diagnostic("interpolation-depth", f"gave up on {value!r}", str(m.coord)))
        return None
    if "${" not in value:
        return value
    out = []
    pos = 0
    for match in _PROP_REF.finditer(value):
        out.append(value[pos:match.start()])
        name = match.group(1)
        builtin = _builtin_property(name, m)
        if builtin is not None:
            out.append(builtin)
        elif name in props:
            inner = _interpolate(props[name][0], props, m, diagnostics, depth + 1)
            if inner is None:
                return None
            out.append(inner)
        else:
            return None
        pos = match.end()
    out.append(value[pos:])
    return "".join(out)


def resolve_pom(graph: InheritanceGraph, m: PomCoord):
    """Resolve the direct dependencies owned by local POM m.

    Returns (deps, diagnostics).  Dependencies whose version cannot be
    resolved anywhere on the ancestor chain are returned with ver=None and
    an unresolved-version diagnostic rather than failing the whole POM.
    """
    node = graph.nodes[m]
    order = bfs_order(graph, m)
    props = _effective_properties(graph, order)
    diagnostics: list[Diagnostic] = []

    # nearest declaration of each library wins
    declared: dict[LibraryId, tuple] = {}
    for coord in order:
        for decl in graph.nodes[coord].parsed.dependencies:
            lib = LibraryId(decl.group_id, decl.artifact_id)
            if lib not in declared:
                declared[lib] = (decl, coord)

    deps: list[ResolvedDependency] = []
    for lib, (decl, declared_in) in declared.items():
        raw = decl.version
        m_ver = declared_in if raw is not None else None
        site = VERSION_SITE_INLINE if raw is not None else None
        if raw is None:
            # nearest dependencyManagement entry supplies the version
            for coord in order:
                for entry in graph.nodes[coord].parsed.dependency_management:
                    if entry.is_import:
                        continue
                    if (entry.group_id, entry.artifact_id) == (lib.group_id, lib.artifact_id):
                        raw = entry.version
                        m_ver = coord
                        site = VERSION_SITE_MANAGEMENT
                        break
                if m_ver is not None:
                    break

        pro = None
        m_pro = None
        ver = None
        flags = []
        if raw is not None:
            ref = _PROP_REF.fullmatch(raw.strip())
            if ref:
                pro = ref.group(1)
                builtin = _builtin_property(pro, node)
                if builtin is not None:
                    ver = builtin
                    m_pro = m
                elif pro in props:
                    value, m_pro = props[pro]
                    ver = _interpolate(value, props, node, diagnostics)
                else:
                    diagnostics.append(
                        Diagnostic("unresolved-version", f"property {pro} undeclared", f"{lib} in {m}")
                    )
            else:
                ver = _interpolate(raw, props, node, diagnostics)
                if ver is None:
                    diagnostics.append(
                        Diagnostic("unresolved-version", f"cannot interpolate {raw!r}", f"{lib} in {m}")
                    )
                elif "${" in raw:
                    flags.append("interpolated-literal")
        else:
            diagnostics.append(
                Diagnostic("unresolved-version", "no version declared on the ancestor chain", f"{lib} in {m}")
            )

        if pro in ("project.version", "pom.version"):
            # module-on-module dependency, not a third-party library
            continue
        if ver is not None and ver.startswith(("[", "(")):
            flags.append("version-range")

        deps.append(ResolvedDependency(
            lib=lib,
            ver=ver.strip() if ver is not None else None,
            pro=pro,
            m_lib=m,
            m_ver=m_ver if ver is not None or raw is not None else None,
            m_pro=m_pro,
            scope=decl.scope,
            optional=decl.optional,
            classifier=decl.classifier,
            version_site=site,
            flags=tuple(flags),
        ))
    return deps, diagnostics


def resolve_all(graph: InheritanceGraph, include_test_scope: bool = True) -> DependencySet:
    """Resolve every local POM; remote-owned tuples never appear."""
    result = DependencySet()
    for node in graph.local_nodes():
        deps, diags = resolve_pom(graph, node.coord)
        if not include_test_scope:
            deps = [d for d in deps if d.scope not in ("test", "provided")]
        result.by_pom[node.coord] = deps
        result.diagnostics.extend(diags)
    return result
