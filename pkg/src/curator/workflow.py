"""Phase state machine, curation loop, project statistics and replay.

A project walks an ordered list of phases (each a contiguous group of the
five canonical stage labels). Inside a phase the team iterates in cycles;
closing a cycle, advancing a phase and releasing are all gated by an
accepted consensus round. Statistics are reconstructed purely from the
commit DAG and persisted round files, never from separate counters.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from . import consensus, model
from .canonical import now_ts
from .errors import (
    CuratorError,
    GateNotPassed,
    InvalidPhaseConfig,
    LastPhase,
    ScriptError,
    WrongSubjectKind,
)
from .store import Repository, phase_id

STAGE_LABELS = (
    "problem_statement",
    "data_acquisition",
    "data_management",
    "analysis",
    "reporting",
)

DEFAULT_PHASES = [[label] for label in STAGE_LABELS]


def validate_phases(phases: list) -> list:
    """Check that the phase list partitions the five stage labels in order."""
    if not phases or not all(isinstance(p, (list, tuple)) and p for p in phases):
        raise InvalidPhaseConfig("phases must be a non-empty list of label groups")
    flat = [label for group in phases for label in group]
    if flat != list(STAGE_LABELS):
        raise InvalidPhaseConfig(
            f"phase labels must partition {list(STAGE_LABELS)} in order, got {flat}"
        )
    return [list(p) for p in phases]


def create_project(
    path,
    project: str,
    roster: list,
    phases: Optional[list] = None,
    defaults: Optional[consensus.GateConfig] = None,
    now: Optional[str] = None,
) -> Repository:
    phases = validate_phases(DEFAULT_PHASES if phases is None else phases)
    if not roster:
        raise InvalidPhaseConfig("roster must be non-empty")
    return Repository.init(path, project, phases, roster, defaults, now)


def new_artefact(repo: Repository, content: str, producer: str, now: str) -> model.Artefact:
    """Text artefact bound to the repo's project and current phase."""
    return model.create_artefact(
        model.DocumentRef.from_text(content),
        producer,
        repo.current_phase(),
        repo.config["project"],
        now,
        configured_phases=repo.phase_ids(),
    )


def run_curation_step(
    repo: Repository,
    path: str,
    author: str,
    artefact: Optional[model.Artefact] = None,
    metadata: Optional[list] = None,
    ritl: Optional[tuple] = None,  # (Narrative, action record id)
    now: Optional[str] = None,
) -> str:
    """One curation iteration: add-if-absent, annotate, attach RITL, commit.

    If ``path`` is already in the head snapshot the existing version is
    extended instead of adding a duplicate.
    """
    now = now or now_ts()
    head_entries = repo.snapshot_entries(repo.branch_head())
    if path in head_entries:
        alpha = head_entries[path]
    elif artefact is not None:
        alpha = repo.objects.put(artefact.to_dict())
    else:
        raise CuratorError(f"path {path!r} is new and no artefact was given")
    if ritl is not None:
        # Attach provenance first, while alpha is still the id the action refers to.
        eta, lam = ritl
        alpha = model.artefact_id(model.add_ritl(repo.objects, eta, lam, alpha, now))
    for mu in metadata or []:
        alpha = model.artefact_id(model.add_metadata(repo.objects, mu, alpha, now))
    repo.stage_add(alpha, path)
    return repo.commit(f"curate:{path}", author, now=now)


def close_cycle(repo: Repository, round_id: str, author: str, now: Optional[str] = None) -> dict:
    """Close the current cycle behind an accepted CYCLE_CLOSE round."""
    record = repo.get_round(round_id)
    if record["subject"]["kind"] != "CYCLE_CLOSE":
        raise WrongSubjectKind(
            f"round {round_id} has kind {record['subject']['kind']}, expected CYCLE_CLOSE"
        )
    head = repo.branch_head()
    if record["subject"]["target"] != head:
        raise GateNotPassed(f"round {round_id} does not target the current head")
    config = repo.config
    cycle = config["state"]["currentCycle"]
    repo.commit(f"close-cycle:{cycle}", author, round_id=round_id, now=now, closes_cycle=True)
    config["state"]["currentCycle"] = cycle + 1
    repo._write_config(config)
    return config["state"]


def advance_phase(
    repo: Repository,
    round_id: str,
    author: str,
    release_tag: Optional[str] = None,
    now: Optional[str] = None,
) -> dict:
    """Advance to the next phase, optionally releasing the current head first."""
    now = now or now_ts()
    kind = "RELEASE" if release_tag else "PHASE_ADVANCE"
    repo.check_gate(round_id, kinds=(kind,), target=repo.branch_head())
    if release_tag:
        repo.release(release_tag, round_id, now)
    config = repo.config
    state = config["state"]
    if state["currentPhase"] >= len(config["phases"]) - 1:
        if release_tag:
            return state  # releasing at the final phase does not advance
        raise LastPhase("already in the final phase")
    state["currentPhase"] += 1
    state["currentCycle"] = 1
    repo._write_config(config)
    next_phase = phase_id(config["phases"][state["currentPhase"]])
    with repo.lock():
        repo._init_phase(next_phase, now)
        repo._set_head(next_phase, "main")
    return state


def compute_stats(repo: Repository) -> dict:
    """Per-phase counts derived by walking commits, snapshots and rounds."""
    rounds = [repo.get_round(rid) for rid in repo.list_rounds()]
    phases = []
    for pid in repo.phase_ids():
        if pid not in repo.phases_on_disk():
            phases.append(
                {
                    "phase": pid,
                    "cycleCount": 0,
                    "commitCount": 0,
                    "branchCount": 0,
                    "artefactCount": 0,
                    "narrativeCount": 0,
                    "roundCount": 0,
                    "rejectCount": 0,
                }
            )
            continue
        commits = repo.all_commits(pid)
        closures = sum(1 for c in commits.values() if c["closesCycle"])
        main_head = repo.branch_head(pid, "main")
        open_cycle = 0 if repo.commit_record(main_head)["closesCycle"] else 1
        narrative_ids = set()
        artefact_ids = set()
        for c in commits.values():
            artefact_ids.update(repo.snapshot_entries_by_snap(c["snapshot"]).values())
        for alpha in artefact_ids:
            record = repo.objects.get(alpha)
            if record.get("kind") == "artefact":
                narrative_ids.update(record["listOfTags"])
        phase_rounds = [r for r in rounds if r.get("phase") == pid]
        phases.append(
            {
                "phase": pid,
                "cycleCount": closures + open_cycle,
                "commitCount": len(commits),
                "branchCount": sum(1 for b in repo.branches(pid) if b != "main"),
                "artefactCount": len(repo.snapshot_entries(main_head)),
                "narrativeCount": len(narrative_ids),
                "roundCount": len(phase_rounds),
                "rejectCount": sum(1 for r in phase_rounds if r["verdict"] == "REJECT"),
            }
        )
    return {"project": repo.config["project"], "phases": phases}


def audit_gates(repo: Repository) -> list:
    """Recompute every gate behind cycle-closing/merge commits and releases.

    Returns a list of violation descriptions; an empty list means the
    repository is sound. The stored verdict is never trusted: the verdict is
    recomputed from the persisted ballots.
    """
    violations = []
    levels = repo.hierarchy_levels()

    def check(round_id, what):
        if round_id is None:
            violations.append(f"{what}: no consensus round recorded")
            return
        try:
            record = repo.get_round(round_id)
        except CuratorError as exc:
            violations.append(f"{what}: {exc.message}")
            return
        try:
            verdict = consensus.recompute_verdict(record, levels)
        except CuratorError as exc:
            violations.append(f"{what}: round {round_id} unrecomputable: {exc.message}")
            return
        if verdict != "ACCEPT":
            violations.append(f"{what}: round {round_id} recomputes to {verdict}")
        elif record["verdict"] != verdict:
            violations.append(
                f"{what}: round {round_id} stored verdict {record['verdict']} "
                f"differs from recomputed {verdict}"
            )

    for pid in repo.phases_on_disk():
        for cid, commit in repo.all_commits(pid).items():
            if commit["closesCycle"]:
                check(commit["round"], f"cycle-closing commit {cid[:12]}")
            elif len(commit["parents"]) == 2:
                check(commit["round"], f"merge commit {cid[:12]}")
    for rel in repo.releases():
        check(rel.get("round"), f"release {rel['tag']!r}")
    return violations


# -- replay ----------------------------------------------------------


def replay(events: list, dest) -> Repository:
    """Build a repository by running a JSON event list deterministically.

    Timestamps come from the script, so identical scripts produce
    byte-identical object stores. See docs/replay-format.md.
    """
    repo: Optional[Repository] = None
    for index, event in enumerate(events):
        if event.get("op") == "create_project":
            # The destination argument is authoritative over any scripted path.
            event = {**event, "path": str(dest)}
        try:
            repo = _apply_event(repo, event)
        except CuratorError as exc:
            raise ScriptError(
                f"event {index} ({event.get('op', '?')}): {exc.code}: {exc.message}"
            ) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ScriptError(f"event {index} ({event.get('op', '?')}): {exc}") from exc
    if repo is None:
        # An empty script yields a fresh single-member default project.
        repo = create_project(dest, "project", [model.Researcher("R0", "R0", 0)])
    return repo


def replay_file(script_path, dest) -> Repository:
    events = json.loads(Path(script_path).read_text())
    return replay(events, dest)


def _metadata_from(spec_list, time) -> list:
    return [
        model.Metadata(
            key=m["key"],
            value=m["value"],
            origin=m.get("origin", "manual"),
            producer=m.get("producer"),
            timestamp=m.get("time", time),
        )
        for m in spec_list
    ]


def _apply_event(repo, event) -> Repository:
    op = event["op"]
    time = event.get("time", None)
    if op == "create_project":
        roster = [model.Researcher.from_dict(r) for r in event["roster"]]
        defaults = (
            consensus.GateConfig.from_dict(event["defaults"])
            if "defaults" in event
            else None
        )
        return create_project(
            event["path"], event["project"], roster, event.get("phases"), defaults, time
        )
    if repo is None:
        raise ScriptError("first event must be create_project")

    if op == "add":
        art = new_artefact(repo, event["content"], event["producer"], time or now_ts())
        repo.stage_add(art, event["path"])
    elif op == "add_batch":
        for i in range(event["count"]):
            art = new_artefact(
                repo,
                f"{event['content_prefix']}{i:04d}",
                event["producer"],
                time or now_ts(),
            )
            repo.stage_add(art, f"{event['path_prefix']}{i:04d}")
    elif op == "remove":
        repo.stage_remove(event["path"])
    elif op == "remove_batch":
        for i in range(event["start"], event["start"] + event["count"]):
            repo.stage_remove(f"{event['path_prefix']}{i:04d}")
    elif op == "commit":
        repo.commit(event["message"], event["author"], event.get("round"), time)
    elif op == "curate":
        art = None
        if "content" in event:
            art = new_artefact(repo, event["content"], event["producer"], time or now_ts())
        run_curation_step(
            repo,
            event["path"],
            event["producer"],
            artefact=art,
            metadata=_metadata_from(event.get("metadata", []), time or now_ts()),
            now=time,
        )
    elif op == "tag":
        eta = model.Narrative(
            content=model.DocumentRef.from_text(event["narrative"]),
            narrative=event["narrative"],
            producer=event["producer"],
            timestamp=time or now_ts(),
        )
        repo.tag_artefact(event["path"], eta, event["producer"], time)
    elif op == "ritl":
        _apply_ritl(repo, event, time or now_ts())
    elif op == "branch":
        from_commit = event.get("from")
        repo.branch(event["name"], from_commit, event.get("filter"), event["author"], time)
    elif op == "checkout":
        repo.checkout(event["branch"])
    elif op == "merge":
        repo.merge(
            event["into"],
            event["from"],
            event.get("resolve", {}),
            event["author"],
            event["round"],
            time,
        )
    elif op == "drop_branch":
        repo.drop_branch(event["name"])
    elif op == "round_open":
        target = event.get("target")
        if target is not None and "/" in target:
            target = repo.resolve_path(target)
        config = repo.defaults()
        overrides = {
            k: event[k]
            for k in ("strategy", "pref", "dis", "quorum")
            if k in event
        }
        if overrides:
            config = consensus.GateConfig(
                overrides.get("strategy", config.strategy),
                overrides.get("pref", config.pref_threshold),
                overrides.get("dis", config.dis_threshold),
                overrides.get("quorum", config.quorum),
            )
        repo.open_round(
            event["kind"], target, event.get("group"), config, time, event.get("id")
        )
    elif op == "vote":
        ballot = consensus.Ballot(
            event["voter"], event["pref"], event.get("credits"), time or now_ts()
        )
        repo.cast_vote(event["round"], ballot)
    elif op == "round_close":
        repo.close_round(event["round"], time)
    elif op == "cycle_close":
        close_cycle(repo, event["round"], event["author"], time)
    elif op == "release":
        repo.release(event["tag"], event["round"], time)
    elif op == "advance":
        advance_phase(repo, event["round"], event["author"], event.get("release"), time)
    else:
        raise ScriptError(f"unknown op {op!r}")
    return repo


def _apply_ritl(repo: Repository, event: dict, time: str):
    """Apply an operation to an artefact and record narrative + provenance."""
    original = repo.resolve_path(event["path"])
    result = new_artefact(repo, event["result_content"], event["producer"], time)
    result_id = repo.objects.put(result.to_dict())
    action = model.ActionRecord(
        original=original,
        result=result_id,
        operation=model.OperationDescriptor(
            name=event["operation"],
            parameters=tuple(sorted(event.get("parameters", {}).items())),
            assessment_scores=tuple(sorted(event.get("scores", {}).items())),
        ),
        producer=event["producer"],
        timestamp=time,
    )
    action_id = repo.objects.put(action.to_dict())
    eta = model.Narrative(
        content=model.DocumentRef.from_text(event["narrative"]),
        narrative=event["narrative"],
        producer=event["producer"],
        timestamp=time,
    )
    successor = model.add_ritl(repo.objects, eta, action_id, result_id, time)
    repo.stage_add(model.artefact_id(successor), event["result_path"])
    repo.commit(f"ritl:{event['result_path']}", event["producer"], now=time)
