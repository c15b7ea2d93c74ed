"""Record service responses for the UI snapshot tests.

Runs the real HTTP service against the shared test fixtures and writes
each response body to tests/fixtures/, so the UI tests exercise exactly
the wire payloads the backend produces.  Re-run after any change to the
service contract:

    python3 frontend/scripts/record_fixtures.py
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tests"))

from conftest import (  # noqa: E402
    DEPRECATED_MODERN,
    POM_REMOTE_BOM,
    _metadata_xml,
    _write_artifact,
    build_demo_classes,
    build_javadoc_jar,
    write_demo_repo,
    write_fig_repo,
)
from libharmo.libdb import LibraryDb  # noqa: E402
from libharmo.service import create_app  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

GUAVA = "com.google.guava:guava"
DEMO = "org.fixture:demo"


def build_remote_repo(root: Path) -> Path:
    import hashlib
    import io
    import zipfile

    bom = root / "org/fixture/platform-bom/1.0"
    _write_artifact(bom, POM_REMOTE_BOM.encode(), "platform-bom-1.0.pom")
    demo = root / "org/fixture/demo"
    demo.mkdir(parents=True)
    (demo / "maven-metadata.xml").write_text(
        _metadata_xml("org.fixture", "demo", ["1.0", "2.0"]))
    for version in ("1.0", "2.0"):
        vdir = demo / version
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            for name, data in sorted(build_demo_classes(version).items()):
                zf.writestr(name, data)
        _write_artifact(vdir, buf.getvalue(), f"demo-{version}.jar")
        jpath = vdir / f"demo-{version}-javadoc.jar"
        build_javadoc_jar(jpath, DEPRECATED_MODERN if version == "2.0" else None)
        (vdir / (jpath.name + ".sha1")).write_text(
            hashlib.sha1(jpath.read_bytes()).hexdigest())
    return root


def save(name: str, payload):
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {name}")


def scrub(payload, session_id):
    """Pin volatile fields so the recordings are reproducible."""
    text = json.dumps(payload)
    text = text.replace(session_id, "SESSION")
    for root, label in _TMP_ROOTS:
        text = text.replace(root.rstrip("/"), label)
    payload = json.loads(text)

    def walk(obj):
        if isinstance(obj, dict):
            for key in ("generated_at", "applied_at", "created_at"):
                if key in obj:
                    obj[key] = 0.0
            for value in obj.values():
                walk(value)
        elif isinstance(obj, list):
            for value in obj:
                walk(value)

    walk(payload)
    return payload


_TMP_ROOTS = []


def main():
    tmp = Path(tempfile.mkdtemp(prefix="libharmo-record-"))
    try:
        remote = build_remote_repo(tmp / "remote")
        fig = write_fig_repo(tmp / "fig-repo")
        demo = write_demo_repo(tmp / "demo-repo")
        _TMP_ROOTS[:] = [(str(fig), "/repo"), (str(demo), "/demo-repo")]

        db = LibraryDb(cache_dir=tmp / "cache", repo_url=str(remote))
        client = TestClient(create_app(db=db))

        # fig-repo session: groups, selection, plan, apply, report
        created = client.post("/sessions", json={"repo_root": str(fig)}).json()
        sid = created["session_id"]
        save("session.json", scrub(created, sid))
        save("groups.json", scrub(client.get(f"/sessions/{sid}/groups").json(), sid))
        selection = client.post(
            f"/sessions/{sid}/groups/{GUAVA}/selection",
            json={"subgroup_keys": ["com.example:project-b:1.0.0",
                                    "com.example:project-c:1.0.0"]}).json()
        save("selection.json", scrub(selection, sid))
        plan = client.post(f"/sessions/{sid}/groups/{GUAVA}/plan",
                           json={"version": "23.0"}).json()
        save("plan.json", scrub(plan, sid))
        save("report.json", scrub(client.get(f"/sessions/{sid}/report").json(), sid))
        applied = client.post(f"/sessions/{sid}/groups/{GUAVA}/apply").json()
        save("apply.json", scrub(applied, sid))

        # demo-repo session: a candidate table with real effort numbers,
        # including replacement suggestions on the plan
        created = client.post("/sessions", json={"repo_root": str(demo)}).json()
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/groups/{DEMO}/selection",
                    json={"subgroup_keys": ["com.app:m0:1.0", "com.app:m1:1.0"]})
        candidates = client.get(f"/sessions/{sid}/groups/{DEMO}/candidates").json()
        save("candidates.json", scrub(candidates, sid))
        demo_plan = client.post(f"/sessions/{sid}/groups/{DEMO}/plan",
                                json={"version": "2.0"}).json()
        save("demo_plan.json", scrub(demo_plan, sid))

        # FC variant: the candidate table collapses to the current version
        fc = write_demo_repo(tmp / "fc-repo")
        _TMP_ROOTS.append((str(fc), "/fc-repo"))
        pom = fc / "m1" / "pom.xml"
        pom.write_text(pom.read_text().replace("2.0", "1.0"))
        created = client.post("/sessions", json={"repo_root": str(fc)}).json()
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/groups/{DEMO}/selection",
                    json={"subgroup_keys": ["com.app:m0:1.0", "com.app:m1:1.0"]})
        fc_candidates = client.get(f"/sessions/{sid}/groups/{DEMO}/candidates").json()
        save("candidates_fc.json", scrub(fc_candidates, sid))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


if __name__ == "__main__":
    main()
