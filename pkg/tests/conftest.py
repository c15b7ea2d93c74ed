"""Shared fixtures: the multi-module example repo, a directory-backed
"remote" Maven repository, and a synthetic two-version library JAR pair."""

from __future__ import annotations

import hashlib
import zipfile
from pathlib import Path

import pytest

from classbuild import ACC_PUBLIC, ACC_STATIC, ClassBuilder, make_jar

POM_A = """<?xml version="1.0" encoding="UTF-8"?>
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <groupId>com.example</groupId>
  <artifactId>project-a</artifactId>
  <version>1.0.0</version>
  <packaging>pom</packaging>

  <!-- shared version properties -->
  <properties>
    <guava.version>16.0.1</guava.version>
  </properties>
</project>
"""

POM_B = """<?xml version="1.0" encoding="UTF-8"?>
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <parent>
    <groupId>com.example</groupId>
    <artifactId>project-a</artifactId>
    <version>1.0.0</version>
  </parent>
  <artifactId>project-b</artifactId>

  <dependencyManagement>
    <dependencies>
      <dependency>
        <groupId>org.fixture</groupId>
        <artifactId>platform-bom</artifactId>
        <version>1.0</version>
        <type>pom</type>
        <scope>import</scope>
      </dependency>
    </dependencies>
  </dependencyManagement>

  <dependencies>
    <dependency>
      <groupId>commons-io</groupId>
      <artifactId>commons-io</artifactId>
      <version>2.5</version>
    </dependency>
    <dependency>
      <groupId>com.google.guava</groupId>
      <artifactId>guava</artifactId>
      <version>23.0</version>
    </dependency>
  </dependencies>
</project>
"""

POM_C = """<?xml version="1.0" encoding="UTF-8"?>
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <parent>
    <groupId>com.example</groupId>
    <artifactId>project-a</artifactId>
    <version>1.0.0</version>
  </parent>
  <artifactId>project-c</artifactId>
  <packaging>pom</packaging>

  <dependencyManagement>
    <dependencies>
      <dependency>
        <groupId>com.google.guava</groupId>
        <artifactId>guava</artifactId>
        <version>${guava.version}</version>
      </dependency>
    </dependencies>
  </dependencyManagement>

  <dependencies>
    <dependency>
      <groupId>commons-io</groupId>
      <artifactId>commons-io</artifactId>
      <version>2.5</version>
    </dependency>
  </dependencies>
</project>
"""

POM_D = """<?xml version="1.0" encoding="UTF-8"?>
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <parent>
    <groupId>com.example</groupId>
    <artifactId>project-c</artifactId>
    <version>1.0.0</version>
    <relativePath>../c/pom.xml</relativePath>
  </parent>
  <artifactId>project-d</artifactId>
  <packaging>pom</packaging>

  <dependencies>
    <dependency>
      <groupId>com.google.guava</groupId>
      <artifactId>guava</artifactId>
    </dependency>
  </dependencies>
</project>
"""

POM_E = """<?xml version="1.0" encoding="UTF-8"?>
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <parent>
    <groupId>com.example</groupId>
    <artifactId>project-d</artifactId>
    <version>1.0.0</version>
    <relativePath>../d/pom.xml</relativePath>
  </parent>
  <artifactId>project-e</artifactId>
</project>
"""

POM_REMOTE_BOM = """<?xml version="1.0" encoding="UTF-8"?>
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <groupId>org.fixture</groupId>
  <artifactId>platform-bom</artifactId>
  <version>1.0</version>
  <packaging>pom</packaging>

  <dependencyManagement>
    <dependencies>
      <dependency>
        <groupId>org.fixture</groupId>
        <artifactId>unused-lib</artifactId>
        <version>9.9</version>
      </dependency>
    </dependencies>
  </dependencyManagement>
</project>
"""

DEMO_LIB_CLASS = "com/fixture/Lib"
PS = ACC_PUBLIC | ACC_STATIC


def write_fig_repo(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "pom.xml").write_text(POM_A)
    for name, text in [("b", POM_B), ("c", POM_C), ("d", POM_D), ("e", POM_E)]:
        (root / name).mkdir(exist_ok=True)
        (root / name / "pom.xml").write_text(text)
    return root


@pytest.fixture
def fig_repo(tmp_path):
    return write_fig_repo(tmp_path / "repo")


def build_demo_classes(version: str) -> dict[str, bytes]:
    """The two-version library: one method deleted, one edited, one
    transitively changed via a callee edit, one untouched."""
    b = ClassBuilder(DEMO_LIB_CLASS).constructor()
    b.method("kept", "()I", [("iconst_1",), ("ireturn",)], access=PS)
    if version == "1.0":
        b.method("removed", "()I", [("iconst_2",), ("ireturn",)], access=PS)
        b.method("edited", "()I", [("bipush", 10), ("ireturn",)], access=PS)
        b.method("helper", "()I", [("iconst_3",), ("ireturn",)], access=PS)
    else:
        b.method("edited", "()I", [("bipush", 11), ("ireturn",)], access=PS)
        b.method("helper", "()I", [("iconst_4",), ("ireturn",)], access=PS)
    b.method("wrapper", "()I", [
        ("invokestatic", ("methodref", DEMO_LIB_CLASS, "helper", "()I")),
        ("ireturn",),
    ], access=PS)
    return {DEMO_LIB_CLASS + ".class": b.build()}


def build_app_main() -> bytes:
    """App class calling kept x2, removed x1, edited x3, wrapper x1."""
    call = lambda m: [("invokestatic", ("methodref", DEMO_LIB_CLASS, m, "()I")), ("pop",)]
    instrs = []
    instrs += call("kept") + call("kept")
    instrs += call("removed")
    instrs += call("edited") + call("edited") + call("edited")
    instrs += call("wrapper")
    instrs += [("return",)]
    return (ClassBuilder("com/app/Main").constructor()
            .method("run", "()V", instrs, access=PS).build())


DEMO_PARENT = """<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <groupId>com.app</groupId>
  <artifactId>app-parent</artifactId>
  <version>1.0</version>
  <packaging>pom</packaging>
</project>
"""

_DEMO_MODULE = """<project xmlns="http://maven.apache.org/POM/4.0.0">
  <modelVersion>4.0.0</modelVersion>
  <parent>
    <groupId>com.app</groupId>
    <artifactId>app-parent</artifactId>
    <version>1.0</version>
  </parent>
  <artifactId>{artifact}</artifactId>

  <dependencies>
    <dependency>
      <groupId>org.fixture</groupId>
      <artifactId>demo</artifactId>
      <version>{version}</version>
    </dependency>
  </dependencies>
</project>
"""


def write_demo_repo(root: Path) -> Path:
    """Two modules on the demo library at 1.0 and 2.0; only m0 is built."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "pom.xml").write_text(DEMO_PARENT)
    for name, version in [("m0", "1.0"), ("m1", "2.0")]:
        (root / name).mkdir(exist_ok=True)
        (root / name / "pom.xml").write_text(
            _DEMO_MODULE.format(artifact=name, version=version))
    classes = root / "m0" / "target" / "classes" / "com" / "app"
    classes.mkdir(parents=True)
    (classes / "Main.class").write_bytes(build_app_main())
    return root


@pytest.fixture
def demo_repo(tmp_path):
    return write_demo_repo(tmp_path / "demo-repo")


DEPRECATED_MODERN = """<!DOCTYPE html>
<html><head><title>Deprecated List (demo 2.0 API)</title></head>
<body>
<main role="main">
<div class="header"><h1 title="Deprecated API" class="title">Deprecated API</h1></div>
<div class="summary-table two-column-summary">
<div class="table-header col-first">Method</div>
<div class="table-header col-last">Description</div>
<div class="col-summary-item-name even-row-color">
<a href="com/fixture/Lib.html#removed()">com.fixture.Lib.removed()</a></div>
<div class="col-last even-row-color">
<div class="block">Deprecated. use com.fixture.Lib#kept() instead.</div></div>
</div>
</main></body></html>
"""


def build_javadoc_jar(path: Path, deprecated_html: str | None):
    entries = {"index.html": "<html><body>api docs</body></html>"}
    if deprecated_html is not None:
        entries["deprecated-list.html"] = deprecated_html
    with zipfile.ZipFile(path, "w") as zf:
        for name, text in sorted(entries.items()):
            zf.writestr(name, text)
    return path


def _write_artifact(dirpath: Path, data: bytes, filename: str):
    dirpath.mkdir(parents=True, exist_ok=True)
    target = dirpath / filename
    target.write_bytes(data)
    (dirpath / (filename + ".sha1")).write_text(hashlib.sha1(data).hexdigest())
    return target


def _metadata_xml(group: str, artifact: str, versions: list[str]) -> str:
    vs = "\n".join(f"      <version>{v}</version>" for v in versions)
    return (f"<metadata>\n  <groupId>{group}</groupId>\n"
            f"  <artifactId>{artifact}</artifactId>\n  <versioning>\n"
            f"    <versions>\n{vs}\n    </versions>\n"
            f"    <latest>{versions[-1]}</latest>\n  </versioning>\n</metadata>\n")


@pytest.fixture(scope="session")
def remote_repo(tmp_path_factory):
    """Directory laid out like a Maven repository, used as the remote."""
    root = tmp_path_factory.mktemp("remote-repo")

    bom_dir = root / "org/fixture/platform-bom/1.0"
    _write_artifact(bom_dir, POM_REMOTE_BOM.encode(), "platform-bom-1.0.pom")

    demo = root / "org/fixture/demo"
    demo.mkdir(parents=True)
    # shuffled on purpose; list_versions must sort ascending
    (demo / "maven-metadata.xml").write_text(
        _metadata_xml("org.fixture", "demo", ["2.0", "1.0"]))
    import io
    for version in ("1.0", "2.0"):
        vdir = demo / version
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            for name, data in sorted(build_demo_classes(version).items()):
                zf.writestr(name, data)
        _write_artifact(vdir, buf.getvalue(), f"demo-{version}.jar")
        jbuf = Path(str(vdir)) / f"demo-{version}-javadoc.jar"
        build_javadoc_jar(jbuf, DEPRECATED_MODERN if version == "2.0" else None)
        (vdir / (jbuf.name + ".sha1")).write_text(
            hashlib.sha1(jbuf.read_bytes()).hexdigest())
    return root


@pytest.fixture
def libdb_factory(remote_repo, tmp_path):
    from libharmo.libdb import LibraryDb

    def make(offline=False, **kw):
        return LibraryDb(cache_dir=tmp_path / "cache", repo_url=str(remote_repo),
                         offline=offline, **kw)

    return make


@pytest.fixture
def fetcher(libdb_factory):
    return libdb_factory().fetch_pom_text


@pytest.fixture
def fig_graph(fig_repo, fetcher):
    from libharmo.pom_model import build_inheritance_graph, collect_local_poms

    nodes, diags = collect_local_poms(fig_repo)
    assert not diags
    return build_inheritance_graph(nodes, fetcher)
