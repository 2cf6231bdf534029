"""Content-addressable object store and per-phase commit DAG.

On-disk layout under the repository root:

    .curator/config.json          project id, phase config, roster, gate defaults, state
    .curator/objects/ab/abcd...   canonical JSON records or raw blobs, filename = sha256
    .curator/refs/phases/<phase>/branches/<name>   head commit id + newline
    .curator/refs/releases/<tag>  release record JSON
    .curator/rounds/<id>.json     vote round + ballots
    .curator/STAGE.json           staging area
    .curator/HEAD                 "<phase>/<branch>" + newline
    .curator/lock                 advisory single-writer lock

History is append-only: no operation ever rewrites an object file, and only
drop_branch/drop_stage remove refs. Unreachable objects are kept.
"""
from __future__ import annotations

import json
import os
import secrets
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

from . import consensus, model
from .canonical import canonical_bytes, now_ts, sha256_hex, ts_at_or_after
from .errors import (
    AlreadyInitialized,
    CorruptObject,
    DuplicateBranch,
    DuplicateTag,
    EmptyGroup,
    GateNotPassed,
    LockHeld,
    NothingToCommit,
    PathConflict,
    PathNotFound,
    PhaseHasReleases,
    ProtectedBranch,
    SourceUnavailable,
    UnknownBranch,
    UnknownCommit,
    UnknownResearcher,
    UnknownRound,
    UnknownSubject,
    UnresolvedConflict,
    UnresolvedReference,
    WrongSubjectKind,
)

META_DIR = ".curator"


def phase_id(labels) -> str:
    """Directory-safe id for a (possibly merged) phase: labels joined by '+'."""
    return "+".join(labels)


class FileObjectStore:
    """Immutable object files addressed by the SHA-256 of their bytes."""

    def __init__(self, root: Path):
        self.root = root

    def _path(self, obj_id: str) -> Path:
        return self.root / obj_id[:2] / obj_id

    def _write(self, data: bytes) -> str:
        obj_id = sha256_hex(data)
        path = self._path(obj_id)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(path.name + f".tmp{os.getpid()}")
            tmp.write_bytes(data)
            tmp.rename(path)
        return obj_id

    def put(self, record: dict) -> str:
        return self._write(canonical_bytes(record))

    def put_blob(self, data: bytes) -> str:
        return self._write(data)

    def has(self, obj_id: str) -> bool:
        return self._path(obj_id).exists()

    def get_bytes(self, obj_id: str) -> bytes:
        path = self._path(obj_id)
        if not path.exists():
            raise UnresolvedReference(f"unknown object {obj_id}")
        return path.read_bytes()

    def get(self, obj_id: str) -> dict:
        return json.loads(self.get_bytes(obj_id))

    def iter_ids(self):
        if not self.root.exists():
            return
        for fan in sorted(self.root.iterdir()):
            if not fan.is_dir():
                continue
            for f in sorted(fan.iterdir()):
                yield f.name

    def verify(self):
        """Re-hash every object file; raise CorruptObject on any mismatch."""
        for obj_id in self.iter_ids():
            data = self._path(obj_id).read_bytes()
            if sha256_hex(data) != obj_id:
                raise CorruptObject(f"object {obj_id} fails hash verification")


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    tmp.rename(path)


def _write_json(path: Path, record) -> None:
    _atomic_write(path, canonical_bytes(record) + b"\n")


class Repository:
    """A curated-artefact repository rooted at a working directory."""

    def __init__(self, root):
        self.root = Path(root)
        self.meta = self.root / META_DIR
        if not (self.meta / "config.json").exists():
            raise SourceUnavailable(f"no repository at {self.root}")
        self.objects = FileObjectStore(self.meta / "objects")

    # -- init / clone -------------------------------------------------

    @classmethod
    def init(
        cls,
        path,
        project: str,
        phases: list,
        roster: list,
        defaults: Optional[consensus.GateConfig] = None,
        now: Optional[str] = None,
    ) -> "Repository":
        root = Path(path)
        meta = root / META_DIR
        if meta.exists():
            raise AlreadyInitialized(f"repository already exists at {root}")
        now = now or now_ts()
        defaults = defaults or consensus.GateConfig()
        meta.mkdir(parents=True)
        (meta / "objects").mkdir()
        (meta / "rounds").mkdir()
        (meta / "refs" / "releases").mkdir(parents=True)
        config = {
            "project": project,
            "phases": phases,
            "roster": [r.to_dict() for r in roster],
            "defaults": defaults.to_dict(),
            "state": {"currentPhase": 0, "currentCycle": 1},
        }
        _write_json(meta / "config.json", config)
        _write_json(meta / "STAGE.json", {"adds": {}, "removes": []})
        repo = cls(root)
        first = phase_id(phases[0])
        repo._init_phase(first, now)
        repo._set_head(first, "main")
        return repo

    def _init_phase(self, phase: str, now: str) -> str:
        """Create a phase's main branch with a root commit over the empty snapshot."""
        snap_id = self.objects.put({"kind": "snapshot", "entries": {}})
        commit_id = self.objects.put(
            {
                "kind": "commit",
                "parents": [],
                "snapshot": snap_id,
                "message": f"init:{phase}",
                "author": None,
                "timestamp": now,
                "phase": phase,
                "cycle": 1,
                "round": None,
                "closesCycle": False,
            }
        )
        branch_dir = self.meta / "refs" / "phases" / phase / "branches"
        branch_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(branch_dir / "main", (commit_id + "\n").encode())
        return commit_id

    @classmethod
    def clone(cls, source, dest) -> "Repository":
        src = str(source)
        if src.startswith("file://"):
            src = src[len("file://"):]
        src_meta = Path(src) / META_DIR
        if not src_meta.is_dir() or not (src_meta / "config.json").exists():
            raise SourceUnavailable(f"no repository at {src}")
        dest = Path(dest)
        if (dest / META_DIR).exists():
            raise AlreadyInitialized(f"repository already exists at {dest}")
        dest.mkdir(parents=True, exist_ok=True)
        shutil.copytree(
            src_meta, dest / META_DIR, ignore=shutil.ignore_patterns("lock", "*.tmp*")
        )
        repo = cls(dest)
        repo.verify()
        return repo

    def verify(self):
        """Verify every object hash and that all refs and rounds resolve."""
        self.objects.verify()
        for phase in self.phases_on_disk():
            for name in self.branches(phase):
                self.commit_record(self.branch_head(phase, name))
        for rel in self.releases():
            self.commit_record(rel["commit"])
        for round_id in self.list_rounds():
            self.get_round(round_id)

    # -- config / head ------------------------------------------------

    @property
    def config(self) -> dict:
        return json.loads((self.meta / "config.json").read_bytes())

    def _write_config(self, config: dict):
        _write_json(self.meta / "config.json", config)

    def phase_ids(self) -> list:
        return [phase_id(p) for p in self.config["phases"]]

    def phases_on_disk(self) -> list:
        base = self.meta / "refs" / "phases"
        if not base.exists():
            return []
        return sorted(p.name for p in base.iterdir() if p.is_dir())

    def roster(self) -> list:
        return [model.Researcher.from_dict(r) for r in self.config["roster"]]

    def hierarchy_levels(self) -> dict:
        return {r.id: r.hierarchy_level for r in self.roster()}

    def defaults(self) -> consensus.GateConfig:
        return consensus.GateConfig.from_dict(self.config["defaults"])

    def head(self) -> tuple:
        phase, branch = (self.meta / "HEAD").read_text().strip().rsplit("/", 1)
        return phase, branch

    def _set_head(self, phase: str, branch: str):
        _atomic_write(self.meta / "HEAD", f"{phase}/{branch}\n".encode())

    def checkout(self, branch: str):
        phase, _ = self.head()
        if not self._branch_path(phase, branch).exists():
            raise UnknownBranch(f"no branch {branch!r} in phase {phase}")
        self._set_head(phase, branch)

    def current_phase(self) -> str:
        return self.phase_ids()[self.config["state"]["currentPhase"]]

    # -- locking ------------------------------------------------------

    @contextmanager
    def lock(self):
        lock_path = self.meta / "lock"
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockHeld(f"repository lock held at {lock_path}") from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield
        finally:
            lock_path.unlink(missing_ok=True)

    # -- branches / commits -------------------------------------------

    def _branch_path(self, phase: str, name: str) -> Path:
        return self.meta / "refs" / "phases" / phase / "branches" / name

    def branches(self, phase: Optional[str] = None) -> list:
        phase = phase or self.head()[0]
        branch_dir = self.meta / "refs" / "phases" / phase / "branches"
        if not branch_dir.exists():
            return []
        return sorted(p.name for p in branch_dir.iterdir())

    def branch_head(self, phase: Optional[str] = None, name: Optional[str] = None) -> str:
        if phase is None or name is None:
            head_phase, head_branch = self.head()
            phase = phase or head_phase
            name = name or head_branch
        path = self._branch_path(phase, name)
        if not path.exists():
            raise UnknownBranch(f"no branch {name!r} in phase {phase}")
        return path.read_text().strip()

    def commit_record(self, commit_id: str) -> dict:
        if not self.objects.has(commit_id):
            raise UnknownCommit(f"unknown commit {commit_id}")
        record = self.objects.get(commit_id)
        if record.get("kind") != "commit":
            raise UnknownCommit(f"object {commit_id} is not a commit")
        return record

    def snapshot_entries(self, commit_id: str) -> dict:
        return self.snapshot_entries_by_snap(self.commit_record(commit_id)["snapshot"])

    def snapshot_entries_by_snap(self, snap_id: str) -> dict:
        return dict(self.objects.get(snap_id)["entries"])

    def contains(self, alpha: str, at: str) -> bool:
        return alpha in self.snapshot_entries(at).values()

    def resolve_path(self, path: str, commit_id: Optional[str] = None) -> str:
        entries = self.snapshot_entries(commit_id or self.branch_head())
        if path not in entries:
            raise PathNotFound(f"no artefact at {path!r}")
        return entries[path]

    def log(self, branch: Optional[str] = None, phase: Optional[str] = None) -> list:
        """Commits head-to-root along first parents, each with an ``id`` field."""
        cursor = self.branch_head(phase, branch)
        out = []
        while cursor:
            record = self.commit_record(cursor)
            out.append({"id": cursor, **record})
            cursor = record["parents"][0] if record["parents"] else None
        return out

    def all_commits(self, phase: str) -> dict:
        """Every commit reachable from the phase's branch refs and releases."""
        heads = [self.branch_head(phase, b) for b in self.branches(phase)]
        heads += [r["commit"] for r in self.releases() if r["phase"] == phase]
        seen = {}
        stack = list(heads)
        while stack:
            cid = stack.pop()
            if cid in seen:
                continue
            record = self.commit_record(cid)
            seen[cid] = record
            stack.extend(record["parents"])
        return seen

    # -- staging ------------------------------------------------------

    def staging(self) -> dict:
        return json.loads((self.meta / "STAGE.json").read_bytes())

    def _write_staging(self, stage: dict):
        _write_json(self.meta / "STAGE.json", stage)

    def stage_add(self, artefact, path: str) -> dict:
        """Stage an artefact (model.Artefact or existing id) for addition."""
        with self.lock():
            if isinstance(artefact, model.Artefact):
                model.canonicalize(artefact, self.objects)  # referenced ids must resolve
                alpha = self.objects.put(artefact.to_dict())
            else:
                if not self.objects.has(artefact):
                    raise UnresolvedReference(f"unknown artefact {artefact}")
                alpha = artefact
            stage = self.staging()
            staged = stage["adds"].get(path)
            if staged is not None and staged != alpha:
                raise PathConflict(f"path {path!r} already staged with a different id")
            stage["adds"][path] = alpha
            if path in stage["removes"]:
                stage["removes"].remove(path)
            self._write_staging(stage)
            return stage

    def stage_remove(self, path: str) -> dict:
        with self.lock():
            stage = self.staging()
            head_entries = self.snapshot_entries(self.branch_head())
            if path in stage["adds"]:
                del stage["adds"][path]
                if path in head_entries and path not in stage["removes"]:
                    stage["removes"].append(path)
            elif path in head_entries:
                if path not in stage["removes"]:
                    stage["removes"].append(path)
            else:
                raise PathNotFound(f"path {path!r} neither committed nor staged")
            self._write_staging(stage)
            return stage

    # -- committing ---------------------------------------------------

    def commit(
        self,
        message: str,
        author: str,
        round_id: Optional[str] = None,
        now: Optional[str] = None,
        closes_cycle: bool = False,
    ) -> str:
        with self.lock():
            return self._commit_locked(message, author, round_id, now, closes_cycle)

    def _commit_locked(self, message, author, round_id, now, closes_cycle) -> str:
        stage = self.staging()
        if not stage["adds"] and not stage["removes"] and round_id is None:
            raise NothingToCommit("staging area empty and no round given")
        if closes_cycle:
            self.check_gate(round_id, kinds=("CYCLE_CLOSE",))
        phase, branch = self.head()
        parent = self.branch_head(phase, branch)
        entries = self.snapshot_entries(parent)
        for path in stage["removes"]:
            entries.pop(path, None)
        entries.update(stage["adds"])
        now = ts_at_or_after(now or now_ts(), self.commit_record(parent)["timestamp"])
        snap_id = self.objects.put(
            {"kind": "snapshot", "entries": dict(sorted(entries.items()))}
        )
        commit_id = self.objects.put(
            {
                "kind": "commit",
                "parents": [parent],
                "snapshot": snap_id,
                "message": message,
                "author": author,
                "timestamp": now,
                "phase": phase,
                "cycle": self.config["state"]["currentCycle"],
                "round": round_id,
                "closesCycle": closes_cycle,
            }
        )
        _atomic_write(self._branch_path(phase, branch), (commit_id + "\n").encode())
        self._write_staging({"adds": {}, "removes": []})
        return commit_id

    def branch(
        self,
        name: str,
        from_commit: Optional[str] = None,
        subset: Optional[str] = None,
        author: Optional[str] = None,
        now: Optional[str] = None,
    ) -> str:
        """Fork a new branch; its head commit carries the (filtered) snapshot."""
        with self.lock():
            phase, _ = self.head()
            if self._branch_path(phase, name).exists():
                raise DuplicateBranch(f"branch {name!r} already exists in {phase}")
            from_commit = from_commit or self.branch_head(phase, "main")
            parent_record = self.commit_record(from_commit)
            if parent_record["phase"] != phase:
                raise UnknownCommit(f"commit {from_commit} is not in phase {phase}")
            entries = self.snapshot_entries(from_commit)
            if subset is not None:
                entries = {p: a for p, a in entries.items() if p.startswith(subset)}
            now = ts_at_or_after(now or now_ts(), parent_record["timestamp"])
            snap_id = self.objects.put(
                {"kind": "snapshot", "entries": dict(sorted(entries.items()))}
            )
            commit_id = self.objects.put(
                {
                    "kind": "commit",
                    "parents": [from_commit],
                    "snapshot": snap_id,
                    "message": f"branch:{name}",
                    "author": author,
                    "timestamp": now,
                    "phase": phase,
                    "cycle": self.config["state"]["currentCycle"],
                    "round": None,
                    "closesCycle": False,
                }
            )
            _atomic_write(self._branch_path(phase, name), (commit_id + "\n").encode())
            return commit_id

    def merge(
        self,
        into: str,
        source: str,
        resolver: dict,
        author: str,
        round_id: str,
        now: Optional[str] = None,
    ) -> str:
        """Two-parent merge commit; conflicting paths must be resolved explicitly."""
        with self.lock():
            phase, _ = self.head()
            self.check_gate(round_id, kinds=("MERGE",))
            into_head = self.branch_head(phase, into)
            source_head = self.branch_head(phase, source)
            ours = self.snapshot_entries(into_head)
            theirs = self.snapshot_entries(source_head)
            conflicts = [
                p for p in sorted(set(ours) & set(theirs))
                if ours[p] != theirs[p] and p not in resolver
            ]
            if conflicts:
                raise UnresolvedConflict(
                    "unresolved paths: " + ", ".join(conflicts)
                )
            entries = dict(theirs)
            entries.update(ours)
            entries.update(resolver)
            parent_ts = max(
                self.commit_record(into_head)["timestamp"],
                self.commit_record(source_head)["timestamp"],
            )
            now = ts_at_or_after(now or now_ts(), parent_ts)
            snap_id = self.objects.put(
                {"kind": "snapshot", "entries": dict(sorted(entries.items()))}
            )
            commit_id = self.objects.put(
                {
                    "kind": "commit",
                    "parents": [into_head, source_head],
                    "snapshot": snap_id,
                    "message": f"merge:{source}->{into}",
                    "author": author,
                    "timestamp": now,
                    "phase": phase,
                    "cycle": self.config["state"]["currentCycle"],
                    "round": round_id,
                    "closesCycle": False,
                }
            )
            _atomic_write(self._branch_path(phase, into), (commit_id + "\n").encode())
            return commit_id

    def drop_branch(self, name: str):
        with self.lock():
            phase, head_branch = self.head()
            if name == "main":
                raise ProtectedBranch("cannot drop main")
            path = self._branch_path(phase, name)
            if not path.exists():
                raise UnknownBranch(f"no branch {name!r} in phase {phase}")
            head = path.read_text().strip()
            for rel in self.releases():
                if rel["phase"] == phase and head in self._ancestors(rel["commit"]):
                    raise ProtectedBranch(
                        f"branch {name!r} is an ancestor of release {rel['tag']!r}"
                    )
            path.unlink()
            if head_branch == name:
                self._set_head(phase, "main")

    def _ancestors(self, commit_id: str) -> set:
        seen = set()
        stack = [commit_id]
        while stack:
            cid = stack.pop()
            if cid in seen:
                continue
            seen.add(cid)
            stack.extend(self.commit_record(cid)["parents"])
        return seen

    def drop_stage(self, phase: str):
        """Discard a phase's history, keeping its head snapshot as staging."""
        with self.lock():
            phase_dir = self.meta / "refs" / "phases" / phase
            if not phase_dir.exists():
                raise UnknownBranch(f"no phase {phase!r} on disk")
            if any(r["phase"] == phase for r in self.releases()):
                raise PhaseHasReleases(f"phase {phase} has releases")
            entries = self.snapshot_entries(self.branch_head(phase, "main"))
            shutil.rmtree(phase_dir)
            stage = self.staging()
            stage["adds"].update(entries)
            self._write_staging(stage)

    def tag_artefact(
        self,
        path: str,
        narrative: model.Narrative,
        author: str,
        now: Optional[str] = None,
        action_id: Optional[str] = None,
    ) -> str:
        """Attach a narrative to the artefact at ``path`` and commit the new version."""
        with self.lock():
            head = self.branch_head()
            entries = self.snapshot_entries(head)
            if path not in entries:
                raise PathNotFound(f"no artefact at {path!r}")
            alpha = entries[path]
            now = now or now_ts()
            if action_id is not None:
                successor = model.add_ritl(self.objects, narrative, action_id, alpha, now)
            else:
                successor = model.add_tag(self.objects, narrative, alpha, now)
            stage = self.staging()
            stage["adds"][path] = model.artefact_id(successor)
            self._write_staging(stage)
            return self._commit_locked(f"tag:{path}", author, None, now, False)

    # -- releases -----------------------------------------------------

    def releases(self) -> list:
        rel_dir = self.meta / "refs" / "releases"
        if not rel_dir.exists():
            return []
        return [json.loads(p.read_bytes()) for p in sorted(rel_dir.iterdir())]

    def release(self, tag: str, round_id: str, now: Optional[str] = None) -> dict:
        with self.lock():
            rel_path = self.meta / "refs" / "releases" / tag
            if rel_path.exists():
                raise DuplicateTag(f"release tag {tag!r} already used")
            head = self.branch_head()
            self.check_gate(round_id, kinds=("RELEASE",), target=head)
            phase, _ = self.head()
            record = {
                "tag": tag,
                "commit": head,
                "phase": phase,
                "round": round_id,
                "timestamp": now or now_ts(),
            }
            _write_json(rel_path, record)
            return record

    # -- vote rounds --------------------------------------------------

    def _round_path(self, round_id: str) -> Path:
        return self.meta / "rounds" / f"{round_id}.json"

    def list_rounds(self) -> list:
        return sorted(p.stem for p in (self.meta / "rounds").glob("*.json"))

    def get_round(self, round_id: str) -> dict:
        path = self._round_path(round_id)
        if not path.exists():
            raise UnknownRound(f"unknown round {round_id}")
        return json.loads(path.read_bytes())

    def open_round(
        self,
        kind: str,
        target: Optional[str] = None,
        group: Optional[list] = None,
        config: Optional[consensus.GateConfig] = None,
        now: Optional[str] = None,
        round_id: Optional[str] = None,
    ) -> dict:
        if kind not in consensus.SUBJECT_KINDS:
            raise WrongSubjectKind(f"unknown subject kind {kind!r}")
        with self.lock():
            target = target or self.branch_head()
            if not self.objects.has(target):
                raise UnknownSubject(f"subject target {target} does not resolve")
            if group is None:
                group = [r.id for r in self.roster()]
            if not group:
                raise EmptyGroup("round group is empty")
            roster_ids = {r.id for r in self.roster()}
            strangers = [u for u in group if u not in roster_ids]
            if strangers:
                raise UnknownResearcher(f"not in roster: {', '.join(strangers)}")
            round_id = round_id or "r" + secrets.token_hex(6)
            record = {
                "id": round_id,
                "subject": {"kind": kind, "target": target},
                "group": sorted(group),
                "config": (config or self.defaults()).to_dict(),
                "ballots": [],
                "state": "OPEN",
                "verdict": None,
                "score": None,
                "disagreement": None,
                "openedAt": now or now_ts(),
                "closedAt": None,
                "phase": self.current_phase(),
            }
            _write_json(self._round_path(round_id), record)
            return record

    def cast_vote(self, round_id: str, ballot: consensus.Ballot) -> dict:
        with self.lock():
            record = consensus.cast(self.get_round(round_id), ballot)
            _write_json(self._round_path(round_id), record)
            return record

    def close_round(self, round_id: str, now: Optional[str] = None) -> dict:
        """Close a round, fixing its verdict. Idempotent on CLOSED rounds."""
        with self.lock():
            record = self.get_round(round_id)
            if record["state"] == "CLOSED":
                return record
            config = consensus.GateConfig.from_dict(record["config"])
            ballots = [consensus.Ballot.from_dict(b) for b in record["ballots"]]
            score, disagreement, verdict = consensus.evaluate(
                config, ballots, record["group"], self.hierarchy_levels()
            )
            record.update(
                state="CLOSED",
                verdict=verdict,
                score=score,
                disagreement=disagreement,
                closedAt=now or now_ts(),
            )
            _write_json(self._round_path(round_id), record)
            return record

    def check_gate(
        self,
        round_id: Optional[str],
        kinds: Optional[tuple] = None,
        target: Optional[str] = None,
    ) -> dict:
        """Require a CLOSED, ACCEPT round (of the right kind/target) or fail."""
        if round_id is None:
            raise GateNotPassed("a consensus round is required here")
        record = self.get_round(round_id)
        if kinds is not None and record["subject"]["kind"] not in kinds:
            raise WrongSubjectKind(
                f"round {round_id} has kind {record['subject']['kind']}, "
                f"expected one of {kinds}"
            )
        if target is not None and record["subject"]["target"] != target:
            raise GateNotPassed(
                f"round {round_id} targets {record['subject']['target']}, not {target}"
            )
        if record["state"] != "CLOSED" or record["verdict"] != "ACCEPT":
            raise GateNotPassed(f"round {round_id} is not an accepted round")
        return record
