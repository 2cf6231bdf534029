import pytest

from curator import model, uc1, workflow
from curator.errors import (
    GateNotPassed,
    InvalidPhaseConfig,
    LastPhase,
    ScriptError,
    WrongSubjectKind,
)
from curator.store import Repository

from conftest import ROSTER, T0, accept_round, text_artefact, ts


# -- phase config ----------------------------------------------------

def test_default_config_starts_at_first_phase(repo):
    state = repo.config["state"]
    assert (state["currentPhase"], state["currentCycle"]) == (0, 1)
    assert repo.current_phase() == "problem_statement"


def test_merged_phase_config(merged_repo):
    assert len(merged_repo.phase_ids()) == 4
    assert "data_management+analysis" in merged_repo.phase_ids()


@pytest.mark.parametrize(
    "phases",
    [
        [["problem_statement"], ["data_acquisition"], ["data_management"], ["analysis"]],
        [["problem_statement"], ["problem_statement"]],
        [["data_acquisition"], ["problem_statement"], ["data_management"], ["analysis"], ["reporting"]],
        [["problem_statement", "data_management"], ["data_acquisition"], ["analysis"], ["reporting"]],
        [],
    ],
)
def test_invalid_phase_configs(tmp_path, phases):
    with pytest.raises(InvalidPhaseConfig):
        workflow.create_project(tmp_path / "x", "p", ROSTER, phases=phases)


def test_empty_roster_rejected(tmp_path):
    with pytest.raises(InvalidPhaseConfig):
        workflow.create_project(tmp_path / "x", "p", [])


# -- curation step ---------------------------------------------------

def metadata(key="score", value="0.9", now=T0):
    return model.Metadata(key, value, "manual", "R1", now)


def test_curation_step_new_artefact(repo):
    art = text_artefact(repo, "classification result")
    workflow.run_curation_step(
        repo, "results/cls", "R1", artefact=art, metadata=[metadata()], now=ts(1)
    )
    chain = model.version_chain(repo.objects, repo.resolve_path("results/cls"))
    assert len(chain) == 2  # created + metadata version
    assert len(repo.log()) == 2  # root + one commit


def test_curation_step_skips_duplicate_add(repo):
    art = text_artefact(repo, "doc")
    workflow.run_curation_step(repo, "doc", "R1", artefact=art, now=ts(1))
    first = repo.resolve_path("doc")
    # same path again: the existing version is extended, nothing re-added
    workflow.run_curation_step(repo, "doc", "R1", metadata=[metadata()], now=ts(2))
    second = repo.resolve_path("doc")
    chain = model.version_chain(repo.objects, second)
    assert chain[0].predecessor is None
    assert model.artefact_id(chain[0]) == first
    assert len(chain) == 2


def test_curation_step_with_ritl(repo):
    original = text_artefact(repo, "dataset")
    workflow.run_curation_step(repo, "data", "R0", artefact=original, now=ts(1))
    result = text_artefact(repo, "k-means output", now=ts(2))
    result_id = repo.objects.put(result.to_dict())
    action = model.ActionRecord(
        original=repo.resolve_path("data"),
        result=result_id,
        operation=model.OperationDescriptor(
            "k-means", (("k", "5"),), (("silhouette", 0.62),)
        ),
        producer="R0",
        timestamp=ts(2),
    )
    lam = repo.objects.put(action.to_dict())
    eta = model.Narrative(
        model.DocumentRef.from_text("n"), "clusters interpret cleanly", "R0", ts(3)
    )
    workflow.run_curation_step(
        repo, "results/kmeans", "R0", artefact=result,
        metadata=[metadata("silhouette", "0.62")], ritl=(eta, lam), now=ts(3),
    )
    final = model.Artefact.from_dict(repo.objects.get(repo.resolve_path("results/kmeans")))
    assert len(final.tags) == 1 and len(final.actions) == 1


# -- cycles ----------------------------------------------------------

def test_close_cycle_increments_counter(repo):
    record = accept_round(repo)
    state = workflow.close_cycle(repo, record["id"], "R1", ts(1))
    assert state["currentCycle"] == 2
    assert repo.log()[0]["closesCycle"] is True


def test_close_cycle_rejected_round(repo):
    record = accept_round(repo, votes=((0.1, "R1"), (0.2, "R0")))
    with pytest.raises(GateNotPassed):
        workflow.close_cycle(repo, record["id"], "R1")
    assert repo.config["state"]["currentCycle"] == 1


def test_close_cycle_wrong_kind(repo):
    record = accept_round(repo, "MERGE")
    with pytest.raises(WrongSubjectKind):
        workflow.close_cycle(repo, record["id"], "R1")


def test_two_closures_give_cycle_count_two(repo):
    for i in (1, 2):
        record = accept_round(repo, now=ts(i))
        workflow.close_cycle(repo, record["id"], "R1", ts(i))
    stats = workflow.compute_stats(repo)
    assert stats["phases"][0]["cycleCount"] == 2


# -- phase advance ---------------------------------------------------

def test_advance_phase(repo):
    record = accept_round(repo, "PHASE_ADVANCE")
    workflow.advance_phase(repo, record["id"], "R1", now=ts(1))
    assert repo.current_phase() == "data_acquisition"
    assert repo.config["state"]["currentCycle"] == 1
    assert repo.head() == ("data_acquisition", "main")


def test_advance_past_last_phase(merged_repo):
    repo = merged_repo
    for _ in range(3):
        record = accept_round(repo, "PHASE_ADVANCE")
        workflow.advance_phase(repo, record["id"], "R1")
    record = accept_round(repo, "PHASE_ADVANCE")
    with pytest.raises(LastPhase):
        workflow.advance_phase(repo, record["id"], "R1")


def test_advance_with_release(repo):
    repo.stage_add(text_artefact(repo, "dataset"), "data")
    repo.commit("add", "R1", now=ts(1))
    record = accept_round(repo, "RELEASE", now=ts(2))
    workflow.advance_phase(repo, record["id"], "R1", release_tag="phase1-data", now=ts(2))
    assert [r["tag"] for r in repo.releases()] == ["phase1-data"]
    assert repo.current_phase() == "data_acquisition"


def test_release_only_at_last_phase(merged_repo):
    repo = merged_repo
    for _ in range(3):
        record = accept_round(repo, "PHASE_ADVANCE")
        workflow.advance_phase(repo, record["id"], "R1")
    repo.stage_add(text_artefact(repo, "report"), "report")
    repo.commit("add", "R1", now=ts(1))
    record = accept_round(repo, "RELEASE", now=ts(2))
    workflow.advance_phase(repo, record["id"], "R1", release_tag="final", now=ts(2))
    assert repo.current_phase() == "reporting"  # stayed put
    assert [r["tag"] for r in repo.releases()] == ["final"]


# -- stats -----------------------------------------------------------

def test_fresh_project_stats(repo):
    stats = workflow.compute_stats(repo)
    first, rest = stats["phases"][0], stats["phases"][1:]
    assert first["cycleCount"] == 1
    assert first["commitCount"] == 1
    assert all(
        p["cycleCount"] == 0 and p["commitCount"] == 0 and p["artefactCount"] == 0
        for p in rest
    )


def test_stats_after_drop_branch(repo):
    repo.branch("side", author="R1", now=ts(1))
    repo.checkout("side")
    repo.stage_add(text_artefact(repo, "x"), "x")
    repo.commit("work", "R1", now=ts(2))
    repo.checkout("main")
    record = accept_round(repo, "MERGE", now=ts(3))
    repo.merge("main", "side", {}, "R1", record["id"], now=ts(3))
    before = workflow.compute_stats(repo)["phases"][0]
    repo.drop_branch("side")
    after = workflow.compute_stats(repo)["phases"][0]
    assert after["branchCount"] == before["branchCount"] - 1
    assert after["commitCount"] == before["commitCount"]


def test_stats_deterministic_across_clones(uc1_repo, tmp_path):
    clone = Repository.clone(uc1_repo.root, tmp_path / "clone")
    assert workflow.compute_stats(clone) == workflow.compute_stats(uc1_repo)


# -- audit -----------------------------------------------------------

def test_audit_clean_repo(repo):
    record = accept_round(repo)
    workflow.close_cycle(repo, record["id"], "R1", ts(1))
    assert workflow.audit_gates(repo) == []


def test_audit_flags_corrupted_ballot(repo, tmp_path):
    record = accept_round(repo)
    workflow.close_cycle(repo, record["id"], "R1", ts(1))
    round_file = repo.meta / "rounds" / f"{record['id']}.json"
    text = round_file.read_text().replace('"pref":0.8', '"pref":0.1')
    round_file.write_text(text)
    violations = workflow.audit_gates(repo)
    assert violations and "REJECT" in violations[0]


# -- replay ----------------------------------------------------------

def test_replay_empty_script(tmp_path):
    repo = workflow.replay([], tmp_path / "r")
    assert len(repo.log()) == 1


def test_replay_unknown_voter_reports_event_index(tmp_path):
    events = uc1.build_events(str(tmp_path / "r"))
    bad_index = next(i for i, e in enumerate(events) if e["op"] == "vote")
    events[bad_index] = {**events[bad_index], "voter": "stranger"}
    with pytest.raises(ScriptError) as err:
        workflow.replay(events, tmp_path / "r")
    assert f"event {bad_index}" in str(err.value)


def test_replay_gate_completeness(uc1_repo):
    assert workflow.audit_gates(uc1_repo) == []
