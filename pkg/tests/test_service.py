import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from curator import workflow
from curator.canonical import canonical_bytes
from curator.service import create_app
from curator.store import Repository

from conftest import accept_round, text_artefact, ts


@pytest.fixture
def client(repo):
    app = create_app(repo.root, longpoll_timeout=1.0)
    with TestClient(app) as c:
        yield c


@pytest.fixture
def uc1_client(uc1_repo):
    with TestClient(create_app(uc1_repo.root)) as c:
        yield c


AUTH = {"X-Curator-Author": "R1"}


def open_round(client, kind="CYCLE_CLOSE", **extra):
    resp = client.post("/rounds", json={"kind": kind, **extra}, headers=AUTH)
    assert resp.status_code == 201
    return resp.json()["id"]


def vote(client, rid, pref, voter):
    return client.post(
        f"/rounds/{rid}/votes", json={"pref": pref}, headers={"X-Curator-Author": voter}
    )


# -- reads ------------------------------------------------------------

def test_project_endpoint(client, repo):
    body = client.get("/project").json()
    assert body["project"] == repo.config["project"]
    assert body["head"] == {"phase": "problem_statement", "branch": "main"}


def test_stats_bytes_match_library(uc1_client, uc1_repo):
    resp = uc1_client.get("/stats")
    expected = canonical_bytes(workflow.compute_stats(uc1_repo)) + b"\n"
    assert resp.content == expected


def test_log_bytes_match_library(uc1_client, uc1_repo):
    phase, branch = uc1_repo.head()
    resp = uc1_client.get(f"/log/{phase}/{branch}")
    assert resp.content == canonical_bytes(uc1_repo.log(branch, phase)) + b"\n"


def test_artefact_fetch_and_404(client, repo):
    art = text_artefact(repo, "hello")
    repo.stage_add(art, "doc")
    repo.commit("add doc", "R1", now=ts(1))
    alpha = repo.resolve_path("doc")
    body = client.get(f"/artefact/{alpha}").json()
    assert body["id"] == alpha and body["content"]["text"] == "hello"
    assert client.get(f"/artefact/{'0' * 64}").status_code == 404


def test_unknown_round_is_404(client):
    assert client.get("/rounds/nope").status_code == 404
    assert client.get("/log/problem_statement/nope").status_code == 404


# -- author header contract -------------------------------------------

def test_missing_author_is_400(client):
    resp = client.post("/rounds", json={"kind": "CYCLE_CLOSE"})
    assert resp.status_code == 400
    assert resp.json()["error"] == "AuthorRequired"


def test_unknown_voter_is_400(client):
    rid = open_round(client)
    resp = vote(client, rid, 0.5, "stranger")
    assert resp.status_code == 400


def test_pref_out_of_range_is_400(client):
    rid = open_round(client)
    assert vote(client, rid, 1.5, "R1").status_code == 400


# -- round lifecycle --------------------------------------------------

def test_vote_write_read_cycle(client, repo):
    rid = open_round(client)
    assert vote(client, rid, 0.8, "R1").status_code == 200
    assert vote(client, rid, 0.4, "R0").status_code == 200
    record = client.get(f"/rounds/{rid}").json()
    assert {b["voter"]: b["pref"] for b in record["ballots"]} == {"R1": 0.8, "R0": 0.4}
    closed = client.post(f"/rounds/{rid}/close", headers=AUTH).json()
    assert closed["verdict"] == "ACCEPT"
    assert closed["score"] == pytest.approx(0.6)
    # stored record is recomputable and matches the service payload
    assert client.get(f"/rounds/{rid}").content == canonical_bytes(
        repo.get_round(rid)
    ) + b"\n"


def test_close_is_idempotent(client):
    rid = open_round(client)
    vote(client, rid, 0.8, "R1")
    vote(client, rid, 0.7, "R0")
    first = client.post(f"/rounds/{rid}/close", headers=AUTH)
    second = client.post(f"/rounds/{rid}/close", headers=AUTH)
    assert first.content == second.content


def test_premature_close_is_409(client):
    rid = open_round(client)
    vote(client, rid, 0.9, "R1")
    resp = client.post(f"/rounds/{rid}/close", headers=AUTH)
    assert resp.status_code == 409
    assert resp.json()["error"] == "QuorumNotMet"


def test_rounds_listing(client):
    a, b = open_round(client), open_round(client, "MERGE")
    ids = {r["id"] for r in client.get("/rounds").json()}
    assert {a, b} <= ids


def test_long_poll_returns_on_new_ballot(client):
    rid = open_round(client)
    vote(client, rid, 0.8, "R1")

    def later():
        time.sleep(0.3)
        vote(client, rid, 0.7, "R0")

    thread = threading.Thread(target=later)
    thread.start()
    started = time.monotonic()
    record = client.get(f"/rounds/{rid}", params={"since": 1}).json()
    thread.join()
    assert len(record["ballots"]) == 2
    assert time.monotonic() - started < 1.0


def test_long_poll_times_out_quietly(client):
    rid = open_round(client)
    record = client.get(f"/rounds/{rid}", params={"since": 0}).json()
    assert record["ballots"] == []


# -- mutations --------------------------------------------------------

def test_post_artefact_multipart(client, repo):
    resp = client.post(
        "/artefacts",
        data={"path": "notes/plan", "metadata": json.dumps([{"key": "k", "value": "v"}])},
        files={"document": ("plan.txt", b"the plan", "text/plain")},
        headers=AUTH,
    )
    assert resp.status_code == 201
    alpha = repo.resolve_path("notes/plan")
    record = repo.objects.get(alpha)
    assert record["metaData"][0]["key"] == "k"


def test_post_binary_artefact(client, repo):
    resp = client.post(
        "/artefacts",
        data={"path": "raw/img"},
        files={"document": ("img.png", bytes([0xFF, 0xFE, 0x00]), "image/png")},
        headers=AUTH,
    )
    assert resp.status_code == 201
    record = repo.objects.get(repo.resolve_path("raw/img"))
    assert record["content"]["kind"] == "blob"


def test_cycle_close_endpoint(client, repo):
    record = accept_round(repo)
    resp = client.post("/cycles/close", json={"round": record["id"]}, headers=AUTH)
    assert resp.status_code == 200
    assert resp.json()["currentCycle"] == 2


def test_cycle_close_bad_gate_is_409(client, repo):
    record = accept_round(repo, votes=((0.1, "R1"), (0.2, "R0")))
    resp = client.post("/cycles/close", json={"round": record["id"]}, headers=AUTH)
    assert resp.status_code == 409
    assert resp.json()["error"] == "GateNotPassed"


def test_branch_merge_advance_flow(client, repo):
    assert client.post("/branches", json={"name": "side"}, headers=AUTH).status_code == 201
    repo.checkout("side")
    repo.stage_add(text_artefact(repo, "x"), "x")
    repo.commit("side work", "R1", now=ts(1))
    repo.checkout("main")
    record = accept_round(repo, "MERGE", now=ts(2))
    resp = client.post(
        "/merges", json={"from": "side", "round": record["id"]}, headers=AUTH
    )
    assert resp.status_code == 200
    advance = accept_round(repo, "PHASE_ADVANCE", now=ts(3))
    resp = client.post("/phases/advance", json={"round": advance["id"]}, headers=AUTH)
    assert resp.json()["phase"] == "data_acquisition"


def test_duplicate_branch_is_409(client):
    client.post("/branches", json={"name": "side"}, headers=AUTH)
    resp = client.post("/branches", json={"name": "side"}, headers=AUTH)
    assert resp.status_code == 409
    assert resp.json()["error"] == "DuplicateBranch"


# -- CLI parity -------------------------------------------------------

def test_releases_match_cli_json(uc1_client, uc1_repo):
    resp = uc1_client.get("/releases")
    assert resp.content == canonical_bytes(uc1_repo.releases()) + b"\n"
    tags = [r["tag"] for r in resp.json()]
    assert tags == sorted(["graffiti-dataset", "final-report"], key=tags.index)
