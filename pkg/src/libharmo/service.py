"""Local HTTP service for the interactive harmonization workflow.

Sessions hold an immutable analysis snapshot of one repository.  The UI
walks: create session → list groups → set a subgroup selection → poll
ranked candidates → request a plan → apply.  Only apply touches files;
it is guarded per group so two concurrent applies cannot both win, and a
session whose POMs changed on disk answers 409 until re-created.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import pipeline, report as report_mod
from .effort import DEFAULT_RANK_KEY, RANK_KEYS
from .errors import LibharmoError, NoSuchGroup, PostconditionFailed, StaleFile
from .libdb import LibraryDb, default_cache_dir
from .pom_model import PomCoord
from .refactor import WRITE, RefactorPlan, apply as apply_plan
from .resolver import LibraryId


class SessionRequest(BaseModel):
    repo_root: str


class SelectionRequest(BaseModel):
    subgroup_keys: list[str]


class PlanRequest(BaseModel):
    version: str


@dataclass
class GroupState:
    selection: list[PomCoord] = field(default_factory=list)
    candidates: dict | None = None      # {status, rank_key, result|error}
    candidates_thread: threading.Thread | None = None
    efforts: object = None              # pipeline.GroupEfforts once ready
    plan: RefactorPlan | None = None
    plan_payload: dict | None = None
    applied: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class Session:
    id: str
    analysis: pipeline.Analysis
    digest: str
    created_at: float
    group_state: dict[str, GroupState] = field(default_factory=dict)

    def state(self, lib: str) -> GroupState:
        return self.group_state.setdefault(lib, GroupState())


def _parse_lib(text: str) -> LibraryId:
    if ":" not in text:
        raise HTTPException(status_code=404, detail=f"unknown group {text}")
    g, a = text.split(":", 1)
    return LibraryId(g, a)


def _coord_from_key(key: str) -> PomCoord:
    parts = key.split(":")
    if len(parts) != 3:
        raise HTTPException(status_code=422, detail=f"bad subgroup key {key}")
    return PomCoord(*parts)


def create_app(db: LibraryDb | None = None, include_test_scope: bool = True,
               static_dir=None) -> FastAPI:
    db = db or LibraryDb(cache_dir=default_cache_dir())
    app = FastAPI(title="libharmo", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"], allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    app.state.db = db

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def check_fresh(session: Session):
        if session.analysis.tree_digest() != session.digest:
            raise HTTPException(status_code=409,
                                detail="repository changed since the session began")

    def get_group(session: Session, lib: str):
        try:
            return session.analysis.group(_parse_lib(lib))
        except NoSuchGroup:
            raise HTTPException(status_code=404, detail=f"unknown group {lib}")

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionRequest):
        try:
            analysis = pipeline.analyze(body.repo_root, db=db,
                                        include_test_scope=include_test_scope)
        except LibharmoError as e:
            raise HTTPException(status_code=422, detail=str(e))
        session = Session(id=uuid.uuid4().hex, analysis=analysis,
                          digest=None, created_at=time.time())
        session.digest = analysis.tree_digest()
        sessions[session.id] = session
        kinds: dict[str, int] = {}
        for g in analysis.groups:
            kinds[g.kind] = kinds.get(g.kind, 0) + 1
        return {"session_id": session.id,
                "summary": {"poms": len(analysis.graph.local_nodes()),
                            "groups": len(analysis.groups), "kinds": kinds}}

    @app.get("/sessions/{session_id}/groups")
    def list_groups(session_id: str):
        session = get_session(session_id)
        total = len(session.analysis.graph.local_nodes())
        return {"groups": [report_mod.group_dict(g, session.analysis.graph, total)
                           for g in session.analysis.groups]}

    @app.post("/sessions/{session_id}/groups/{lib}/selection")
    def set_selection(session_id: str, lib: str, body: SelectionRequest):
        session = get_session(session_id)
        group = get_group(session, lib)
        if not body.subgroup_keys:
            raise HTTPException(status_code=422, detail="selection must be non-empty")
        coords = [_coord_from_key(k) for k in body.subgroup_keys]
        unknown = [c for c in coords if c not in group.subgroups]
        if unknown:
            raise HTTPException(status_code=422,
                                detail=f"not subgroups of {lib}: "
                                       f"{', '.join(map(str, unknown))}")
        state = session.state(lib)
        with state.lock:
            state.selection = coords
            state.candidates = None
            state.efforts = None
            state.plan = None
            state.plan_payload = None
        return {"selection": [str(c) for c in coords]}

    def _compute_candidates(session: Session, lib: str, rank_key: str):
        state = session.state(lib)
        group = get_group(session, lib)
        try:
            efforts = pipeline.group_efforts(
                session.analysis, group, db,
                selection=state.selection or None, rank_key=rank_key)
            payload = {
                "status": "ready",
                "rank_key": rank_key,
                "candidates": [
                    {"version": v, **breakdown}
                    for v, breakdown in efforts.ranking.candidates],
                "diagnostics": [{"code": d.code, "message": d.message,
                                 "subject": d.subject}
                                for d in efforts.diagnostics],
            }
            with state.lock:
                state.efforts = efforts
                state.candidates = payload
        except LibharmoError as e:
            with state.lock:
                state.candidates = {"status": "error", "rank_key": rank_key,
                                    "error": str(e)}

    @app.get("/sessions/{session_id}/groups/{lib}/candidates")
    def candidates(session_id: str, lib: str, rank_key: str = DEFAULT_RANK_KEY):
        session = get_session(session_id)
        get_group(session, lib)  # 404 before anything else
        if rank_key not in RANK_KEYS:
            raise HTTPException(status_code=422, detail=f"unknown rank key {rank_key}")
        state = session.state(lib)
        if not state.selection:
            raise HTTPException(status_code=422, detail="no subgroups selected")
        with state.lock:
            current = state.candidates
            running = state.candidates_thread is not None \
                and state.candidates_thread.is_alive()
            if current is not None and current.get("rank_key") == rank_key:
                return current
            if running:
                return {"status": "pending", "rank_key": rank_key}
            thread = threading.Thread(
                target=_compute_candidates, args=(session, lib, rank_key),
                daemon=True)
            state.candidates = None
            state.candidates_thread = thread
            thread.start()
        thread.join(timeout=2.0)  # small fixtures finish inline; else poll
        with state.lock:
            return state.candidates or {"status": "pending", "rank_key": rank_key}

    @app.post("/sessions/{session_id}/groups/{lib}/plan")
    def make_plan(session_id: str, lib: str, body: PlanRequest):
        session = get_session(session_id)
        check_fresh(session)
        group = get_group(session, lib)
        if not body.version.strip():
            raise HTTPException(status_code=422, detail="version must be non-empty")
        state = session.state(lib)
        try:
            plan = pipeline.make_plan(session.analysis, group,
                                      state.selection or None, body.version,
                                      fetcher=db.fetch_pom_text)
        except LibharmoError as e:
            raise HTTPException(status_code=422, detail=str(e))
        from .refactor import DRY_RUN, apply as dry_apply

        preview = dry_apply(plan, DRY_RUN)
        payload = {
            "version": body.version,
            "anchors": [{"anchor": str(a), "covered": sorted(map(str, c))}
                        for a, c in plan.anchors],
            "edits": [{"file": e.file, "kind": e.kind,
                       "description": e.description} for e in plan.edits],
            "removed_properties": [{"property": p, "pom": str(c)}
                                   for p, c in plan.removed_properties],
            "diffs": preview.diffs,
            "replacements": _replacements(session, lib, group, body.version),
            "diagnostics": [{"code": d.code, "message": d.message,
                             "subject": d.subject} for d in plan.diagnostics],
        }
        with state.lock:
            state.plan = plan
            state.plan_payload = payload
        return payload

    def _replacements(session: Session, lib: str, group, version: str):
        state = session.state(lib)
        if state.efforts is None:
            return []
        try:
            suggestions, _ = pipeline.replacements_for(group, version,
                                                       state.efforts, db)
        except LibharmoError:
            return []
        return [{"deleted": str(s.deleted), "replacement": s.replacement_fqn,
                 "source_version": s.source_version, "evidence": s.evidence,
                 "confidence": s.confidence} for s in suggestions]

    @app.post("/sessions/{session_id}/groups/{lib}/apply")
    def apply_group_plan(session_id: str, lib: str):
        session = get_session(session_id)
        get_group(session, lib)
        state = session.state(lib)
        if state.plan is None:
            raise HTTPException(status_code=422, detail="no plan to apply")
        if not state.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="apply already in progress")
        try:
            check_fresh(session)
            try:
                result = apply_plan(state.plan, WRITE)
            except StaleFile as e:
                raise HTTPException(status_code=409, detail=str(e))
            except (PostconditionFailed, LibharmoError) as e:
                raise HTTPException(status_code=422, detail=str(e))
            record = {"applied_at": time.time(),
                      "changed_files": result.changed_files,
                      "already_applied": result.already_applied,
                      "new_kind": result.new_kind}
            state.applied.append(record)
            # the apply legitimately rewrote POMs: fold that into the digest
            session.digest = session.analysis.tree_digest()
            return record
        finally:
            state.lock.release()

    @app.get("/sessions/{session_id}/report")
    def session_report(session_id: str):
        from fastapi.responses import Response

        session = get_session(session_id)
        a = session.analysis
        doc = report_mod.build_report(a.repo_root, a.graph, a.dep_set, a.groups,
                                      generated_at=session.created_at)
        # rendered by the same function as the CLI so the bytes agree
        return Response(content=report_mod.render_json(doc),
                        media_type="application/json")

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
