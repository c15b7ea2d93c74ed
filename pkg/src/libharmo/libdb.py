"""Demand-driven local cache of library version lists, JARs and Javadocs.

Backed by one remote Maven repository (HTTP or a plain directory path,
which doubles as the offline fixture mode).  The cache mirrors the
repository layout: <cache>/<group as dirs>/<artifact>/<version>/.
Downloads are checksum-verified when the repository publishes a .sha1
and land under their final path via atomic rename only.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
import threading
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ChecksumMismatch, Diagnostic, HttpError, NotFoundError, OfflineMiss
from .pom_model import PomCoord
from .resolver import LibraryId
from .versioning import VersionKey

DEFAULT_REPO_URL = "https://repo.maven.apache.org/maven2"
CACHE_ENV_VAR = "LIBHARMO_CACHE_DIR"
DEFAULT_TTL = 24 * 3600
_RETRIES = 3


@dataclass
class ArtifactRecord:
    lib: LibraryId
    version: str
    jar_path: Path | None = None
    javadoc_path: Path | None = None
    release_date: float | None = None
    fetched_at: float = 0.0
    checksum: str | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass
class VersionIndex:
    lib: LibraryId
    versions: list[tuple[str, float | None]]  # ascending (version, release date)

    @property
    def version_strings(self) -> list[str]:
        return [v for v, _ in self.versions]


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "libharmo"


class LibraryDb:
    def __init__(self, cache_dir=None, repo_url: str = DEFAULT_REPO_URL,
                 offline: bool = False, ttl: int = DEFAULT_TTL):
        self.cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
        self.repo_url = repo_url.rstrip("/")
        self.offline = offline
        self.ttl = ttl
        self.fetch_count = 0  # network/repository reads, for idempotence checks
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # --- transport ----------------------------------------------------

    def _is_http(self) -> bool:
        return self.repo_url.startswith(("http://", "https://"))

    def _remote_get(self, relpath: str):
        """Fetch relpath from the repository; returns (bytes, mtime|None)."""
        if self.offline:
            raise OfflineMiss(relpath)
        self.fetch_count += 1
        if self._is_http():
            import requests

            url = f"{self.repo_url}/{relpath}"
            last = None
            for attempt in range(_RETRIES):
                try:
                    resp = requests.get(url, timeout=30)
                except requests.RequestException as e:
                    last = e
                    time.sleep(0.5 * 2 ** attempt)
                    continue
                if resp.status_code == 404:
                    raise NotFoundError(url)
                if resp.status_code >= 500:
                    last = HttpError(f"{resp.status_code} for {url}",
                                     status=resp.status_code, retries=attempt)
                    time.sleep(0.5 * 2 ** attempt)
                    continue
                if resp.status_code != 200:
                    raise HttpError(f"{resp.status_code} for {url}",
                                    status=resp.status_code, retries=attempt)
                mtime = None
                lm = resp.headers.get("Last-Modified")
                if lm:
                    try:
                        from email.utils import parsedate_to_datetime
                        mtime = parsedate_to_datetime(lm).timestamp()
                    except (TypeError, ValueError):
                        mtime = None
                return resp.content, mtime
            raise HttpError(f"gave up on {url}: {last}", retries=_RETRIES)
        path = Path(self.repo_url) / relpath
        if not path.is_file():
            raise NotFoundError(str(path))
        return path.read_bytes(), path.stat().st_mtime

    def _remote_sha1(self, relpath: str) -> str | None:
        try:
            data, _ = self._remote_get(relpath + ".sha1")
        except (NotFoundError, OfflineMiss):
            return None
        return data.decode("ascii", errors="replace").split()[0].strip().lower()

    # --- cache layout -------------------------------------------------

    def _lib_relpath(self, lib: LibraryId) -> str:
        return f"{lib.group_id.replace('.', '/')}/{lib.artifact_id}"

    def _artifact_relpath(self, lib: LibraryId, version: str, suffix: str) -> str:
        return f"{self._lib_relpath(lib)}/{version}/{lib.artifact_id}-{version}{suffix}"

    def _cache_path(self, relpath: str) -> Path:
        return self.cache_dir / relpath

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def _atomic_write(self, target: Path, data: bytes):
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".part-")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # --- operations ---------------------------------------------------

    def list_versions(self, lib: LibraryId, refresh: bool = False) -> VersionIndex:
        """All released versions of lib, ascending; cached with a TTL."""
        meta_cache = self._cache_path(self._lib_relpath(lib)) / "maven-metadata.json"
        if meta_cache.is_file() and not refresh:
            cached = json.loads(meta_cache.read_text())
            fresh = time.time() - cached.get("fetched_at", 0) <= self.ttl
            if fresh or self.offline:
                return VersionIndex(lib=lib, versions=[tuple(v) for v in cached["versions"]])
        try:
            data, _ = self._remote_get(f"{self._lib_relpath(lib)}/maven-metadata.xml")
        except (OfflineMiss, NotFoundError):
            if meta_cache.is_file():
                cached = json.loads(meta_cache.read_text())
                return VersionIndex(lib=lib, versions=[tuple(v) for v in cached["versions"]])
            if self.offline:
                raise OfflineMiss(f"version index for {lib} not cached")
            raise
        root = ET.fromstring(data)
        versions = []
        for elem in root.iter():
            if elem.tag.rsplit("}", 1)[-1] == "version" and elem.text:
                versions.append(elem.text.strip())
        seen = set()
        versions = [v for v in versions if not (v in seen or seen.add(v))]
        versions.sort(key=VersionKey.parse)
        entries = [(v, self._release_date(lib, v)) for v in versions]
        self._atomic_write(meta_cache, json.dumps(
            {"fetched_at": time.time(), "versions": entries}).encode())
        return VersionIndex(lib=lib, versions=entries)

    def _release_date(self, lib: LibraryId, version: str) -> float | None:
        """Artifact timestamp when cheaply available (directory repos)."""
        if self._is_http():
            return None  # determined lazily when the jar is fetched
        path = Path(self.repo_url) / self._artifact_relpath(lib, version, ".jar")
        if path.is_file():
            return path.stat().st_mtime
        return None

    def _fetch_artifact(self, lib: LibraryId, version: str, suffix: str):
        relpath = self._artifact_relpath(lib, version, suffix)
        target = self._cache_path(relpath)
        meta_path = target.with_name(target.name + ".meta")
        with self._lock_for(relpath):
            if target.is_file() and meta_path.is_file():
                meta = json.loads(meta_path.read_text())
                digest = hashlib.sha1(target.read_bytes()).hexdigest()
                if digest == meta.get("checksum"):
                    return target, meta
                # corrupted cache entry: discard and refetch
                target.unlink()
                meta_path.unlink()
                if self.offline:
                    raise ChecksumMismatch(f"cached {relpath} corrupted while offline")
            if self.offline:
                raise OfflineMiss(relpath)
            data, mtime = self._remote_get(relpath)
            digest = hashlib.sha1(data).hexdigest()
            published = self._remote_sha1(relpath)
            if published is not None and published != digest:
                raise ChecksumMismatch(f"{relpath}: expected {published}, got {digest}")
            self._atomic_write(target, data)
            meta = {"checksum": digest, "fetched_at": time.time(), "release_date": mtime}
            self._atomic_write(meta_path, json.dumps(meta).encode())
            return target, meta

    def fetch_jar(self, lib: LibraryId, version: str) -> ArtifactRecord:
        path, meta = self._fetch_artifact(lib, version, ".jar")
        return ArtifactRecord(lib=lib, version=version, jar_path=path,
                              release_date=meta.get("release_date"),
                              fetched_at=meta.get("fetched_at", 0),
                              checksum=meta.get("checksum"))

    def fetch_javadoc(self, lib: LibraryId, version: str) -> ArtifactRecord:
        try:
            path, meta = self._fetch_artifact(lib, version, "-javadoc.jar")
        except NotFoundError:
            rec = ArtifactRecord(lib=lib, version=version, fetched_at=time.time())
            rec.diagnostics.append(
                Diagnostic("no-javadoc", "no published javadoc artifact", f"{lib}:{version}"))
            return rec
        return ArtifactRecord(lib=lib, version=version, javadoc_path=path,
                              release_date=meta.get("release_date"),
                              fetched_at=meta.get("fetched_at", 0),
                              checksum=meta.get("checksum"))

    def fetch_pom_text(self, coord: PomCoord) -> str | None:
        """Remote-parent provider for graph construction."""
        lib = LibraryId(coord.group_id, coord.artifact_id)
        try:
            path, _meta = self._fetch_artifact(lib, coord.version, ".pom")
        except (NotFoundError, OfflineMiss):
            return None
        return path.read_text(encoding="utf-8-sig")

    def refresh(self, lib: LibraryId) -> VersionIndex:
        return self.list_versions(lib, refresh=True)

    def clear_cache(self):
        if self.cache_dir.is_dir():
            shutil.rmtree(self.cache_dir)
