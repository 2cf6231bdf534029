"""Local HTTP facade over a repository.

JSON-over-HTTP in canonical form; every read endpoint returns exactly the
bytes the matching ``--json`` CLI command prints. Mutating requests must
carry ``X-Curator-Author``; they are serialized through the store's writer
lock. Domain errors map to 409, validation failures to 400, unknown ids
to 404.
"""
from __future__ import annotations

import asyncio
import json
import os
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Header, Request, UploadFile
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from . import consensus, model, workflow
from .canonical import canonical_bytes, now_ts
from .errors import (
    CuratorError,
    PathNotFound,
    PrefOutOfRange,
    SourceUnavailable,
    UnknownBranch,
    UnknownCommit,
    UnknownResearcher,
    UnknownRound,
    UnknownSubject,
    UnresolvedReference,
    VoterNotInGroup,
)
from .store import Repository

NOT_FOUND = (
    UnknownCommit,
    UnknownBranch,
    UnknownRound,
    UnknownSubject,
    UnresolvedReference,
    PathNotFound,
    SourceUnavailable,
)
class AuthorRequired(CuratorError):
    code = "AuthorRequired"


BAD_REQUEST = (PrefOutOfRange, UnknownResearcher, VoterNotInGroup, AuthorRequired)


def _canonical_response(record, status: int = 200) -> Response:
    return Response(
        content=canonical_bytes(record) + b"\n",
        status_code=status,
        media_type="application/json",
    )


def _ui_dir() -> Optional[Path]:
    env = os.environ.get("CURATOR_UI_DIR")
    if env:
        return Path(env)
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.exists() else None


def create_app(repo_path, longpoll_timeout: float = 30.0) -> FastAPI:
    repo = Repository(repo_path)
    app = FastAPI(title="curator", docs_url=None, redoc_url=None)
    app.state.repo = repo
    app.state.longpoll_timeout = longpoll_timeout

    @app.exception_handler(CuratorError)
    async def domain_error(_request: Request, exc: CuratorError):
        if isinstance(exc, NOT_FOUND):
            status = 404
        elif isinstance(exc, BAD_REQUEST):
            status = 400
        else:
            status = 409
        return _canonical_response({"error": exc.code, "message": exc.message}, status)

    def require_author(x_curator_author: Optional[str]) -> str:
        if not x_curator_author:
            raise AuthorRequired("X-Curator-Author header required")
        return x_curator_author

    # -- reads --------------------------------------------------------

    @app.get("/project")
    def project():
        config = repo.config
        phase, branch = repo.head()
        return _canonical_response(
            {
                "project": config["project"],
                "phases": config["phases"],
                "roster": config["roster"],
                "defaults": config["defaults"],
                "state": config["state"],
                "head": {"phase": phase, "branch": branch},
            }
        )

    @app.get("/stats")
    def stats():
        return _canonical_response(workflow.compute_stats(repo))

    @app.get("/log/{phase}/{branch}")
    def log(phase: str, branch: str):
        return _canonical_response(repo.log(branch, phase))

    @app.get("/artefact/{alpha}")
    def artefact(alpha: str):
        record = repo.objects.get(alpha)
        return _canonical_response({"id": alpha, **record})

    @app.get("/releases")
    def releases():
        return _canonical_response(repo.releases())

    @app.get("/rounds")
    def rounds():
        return _canonical_response([repo.get_round(rid) for rid in repo.list_rounds()])

    @app.get("/rounds/{round_id}")
    async def round_detail(round_id: str, since: Optional[int] = None):
        record = repo.get_round(round_id)
        if since is None:
            return _canonical_response(record)
        # Long-poll: return once more ballots than `since` exist, the round
        # closes, or the timeout elapses.
        deadline = time.monotonic() + app.state.longpoll_timeout
        while (
            record["state"] == "OPEN"
            and len(record["ballots"]) <= since
            and time.monotonic() < deadline
        ):
            await asyncio.sleep(0.1)
            record = repo.get_round(round_id)
        return _canonical_response(record)

    # -- mutations ----------------------------------------------------

    @app.post("/artefacts")
    async def post_artefact(
        path: str = Form(...),
        metadata: str = Form("[]"),
        document: UploadFile = File(...),
        x_curator_author: Optional[str] = Header(None),
    ):
        author = require_author(x_curator_author)
        data = await document.read()
        try:
            content = model.DocumentRef.from_text(data.decode("utf-8"))
        except UnicodeDecodeError:
            digest = repo.objects.put_blob(data)
            media = document.content_type or "application/octet-stream"
            content = model.DocumentRef.from_blob(digest, media, len(data))
        now = now_ts()
        artefact = model.create_artefact(
            content, author, repo.current_phase(), repo.config["project"], now,
            configured_phases=repo.phase_ids(),
        )
        entries = [
            model.Metadata(
                key=m["key"], value=m["value"], origin=m.get("origin", "manual"),
                producer=m.get("producer", author), timestamp=now,
            )
            for m in json.loads(metadata)
        ]
        cid = workflow.run_curation_step(
            repo, path, author, artefact=artefact, metadata=entries, now=now
        )
        return _canonical_response({"commit": cid, "path": path}, 201)

    @app.post("/rounds")
    async def post_round(request: Request, x_curator_author: Optional[str] = Header(None)):
        require_author(x_curator_author)
        body = await request.json()
        target = body.get("target")
        if target is not None and "/" in target:
            target = repo.resolve_path(target)
        defaults = repo.defaults()
        config = consensus.GateConfig(
            body.get("strategy", defaults.strategy),
            body.get("prefThreshold", defaults.pref_threshold),
            body.get("disThreshold", defaults.dis_threshold),
            body.get("quorum", defaults.quorum),
        )
        record = repo.open_round(
            body["kind"], target, body.get("group"), config, round_id=body.get("id")
        )
        return _canonical_response(record, 201)

    @app.post("/rounds/{round_id}/votes")
    async def post_vote(
        round_id: str, request: Request, x_curator_author: Optional[str] = Header(None)
    ):
        author = require_author(x_curator_author)
        body = await request.json()
        ballot = consensus.Ballot(author, body["pref"], body.get("credits"), now_ts())
        return _canonical_response(repo.cast_vote(round_id, ballot))

    @app.post("/rounds/{round_id}/close")
    async def post_close(round_id: str, x_curator_author: Optional[str] = Header(None)):
        require_author(x_curator_author)
        return _canonical_response(repo.close_round(round_id))

    @app.post("/cycles/close")
    async def post_cycle_close(
        request: Request, x_curator_author: Optional[str] = Header(None)
    ):
        author = require_author(x_curator_author)
        body = await request.json()
        state = workflow.close_cycle(repo, body["round"], author)
        return _canonical_response(state)

    @app.post("/phases/advance")
    async def post_advance(
        request: Request, x_curator_author: Optional[str] = Header(None)
    ):
        author = require_author(x_curator_author)
        body = await request.json()
        state = workflow.advance_phase(repo, body["round"], author, body.get("release"))
        return _canonical_response({"state": state, "phase": repo.current_phase()})

    @app.post("/branches")
    async def post_branch(
        request: Request, x_curator_author: Optional[str] = Header(None)
    ):
        author = require_author(x_curator_author)
        body = await request.json()
        cid = repo.branch(body["name"], body.get("from"), body.get("filter"), author)
        return _canonical_response({"commit": cid, "branch": body["name"]}, 201)

    @app.post("/merges")
    async def post_merge(
        request: Request, x_curator_author: Optional[str] = Header(None)
    ):
        author = require_author(x_curator_author)
        body = await request.json()
        into = body.get("into") or repo.head()[1]
        cid = repo.merge(
            into, body["from"], body.get("resolve", {}), author, body["round"]
        )
        return _canonical_response({"commit": cid})

    ui = _ui_dir()
    if ui is not None:
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app
