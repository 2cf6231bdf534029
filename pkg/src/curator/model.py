"""Immutable artefact object model.

An artefact wraps a research document together with its producer, creation
time, workflow phase, metadata, narrative tags and action provenance. All
types are frozen values; "mutating" operations (add_metadata, add_ritl, ...)
return a new artefact version linked to its predecessor, and the old version
stays byte-identical in the store.

Operations take any object implementing the small ``ObjectStore`` protocol
(``get``/``put``/``has``) so they work against the filesystem store and
against in-memory test doubles alike.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

from .canonical import canonical_bytes, record_id, ts_after
from .errors import ActionMismatch, KeyNotFound, UnresolvedReference


class ObjectStore(Protocol):
    def get(self, obj_id: str) -> dict: ...

    def put(self, record: dict) -> str: ...

    def has(self, obj_id: str) -> bool: ...


@dataclass(frozen=True)
class Researcher:
    """A team member; hierarchy_level 0 is the most senior."""

    id: str
    display_name: str = ""
    hierarchy_level: int = 0

    def __post_init__(self):
        if self.hierarchy_level < 0:
            raise ValueError("hierarchy_level must be >= 0")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "displayName": self.display_name,
            "hierarchyLevel": self.hierarchy_level,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Researcher":
        return cls(d["id"], d.get("displayName", ""), d.get("hierarchyLevel", 0))


@dataclass(frozen=True)
class DocumentRef:
    """Inline text document, or a pointer to a stored binary blob."""

    kind: str  # "text" | "blob"
    text: Optional[str] = None
    digest: Optional[str] = None
    media_type: Optional[str] = None
    size: Optional[int] = None

    @classmethod
    def from_text(cls, text: str) -> "DocumentRef":
        return cls(kind="text", text=text)

    @classmethod
    def from_blob(cls, digest: str, media_type: str, size: int) -> "DocumentRef":
        return cls(kind="blob", digest=digest, media_type=media_type, size=size)

    def to_dict(self) -> dict:
        if self.kind == "text":
            return {"kind": "text", "text": self.text}
        return {
            "kind": "blob",
            "digest": self.digest,
            "mediaType": self.media_type,
            "size": self.size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentRef":
        if d["kind"] == "text":
            return cls.from_text(d["text"])
        return cls.from_blob(d["digest"], d["mediaType"], d["size"])


@dataclass(frozen=True)
class Metadata:
    key: str
    value: str
    origin: str = "manual"  # "manual" | "automatic"
    producer: Optional[str] = None  # ResearcherId; absent when automatic
    timestamp: str = ""

    def __post_init__(self):
        if not self.key:
            raise ValueError("metadata key must be non-empty")
        if self.origin not in ("manual", "automatic"):
            raise ValueError("origin must be 'manual' or 'automatic'")

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "value": self.value,
            "origin": self.origin,
            "producer": self.producer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Metadata":
        return cls(d["key"], d["value"], d["origin"], d.get("producer"), d["timestamp"])


@dataclass(frozen=True)
class Narrative:
    """Researcher commentary on an artefact; stored as its own hashed object."""

    content: DocumentRef
    narrative: str
    producer: str
    timestamp: str

    def __post_init__(self):
        if not self.narrative:
            raise ValueError("narrative text must be non-empty")

    def to_dict(self) -> dict:
        return {
            "kind": "narrative",
            "content": self.content.to_dict(),
            "narrative": self.narrative,
            "producer": self.producer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Narrative":
        return cls(
            DocumentRef.from_dict(d["content"]),
            d["narrative"],
            d["producer"],
            d["timestamp"],
        )


@dataclass(frozen=True)
class OperationDescriptor:
    name: str
    parameters: tuple = ()  # tuple of (key, value) string pairs
    assessment_scores: tuple = ()  # tuple of (key, float) pairs

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": {k: v for k, v in self.parameters},
            "assessmentScores": {k: v for k, v in self.assessment_scores},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OperationDescriptor":
        return cls(
            d["name"],
            tuple(sorted(d.get("parameters", {}).items())),
            tuple(sorted(d.get("assessmentScores", {}).items())),
        )


@dataclass(frozen=True)
class ActionRecord:
    """Provenance of an operation linking an original artefact to its result."""

    original: str  # ArtefactId
    result: str  # ArtefactId
    operation: OperationDescriptor
    producer: str
    timestamp: str

    def __post_init__(self):
        if self.original == self.result:
            raise ValueError("action original and result must differ")

    def to_dict(self) -> dict:
        return {
            "kind": "action",
            "original": self.original,
            "result": self.result,
            "operation": self.operation.to_dict(),
            "producer": self.producer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActionRecord":
        return cls(
            d["original"],
            d["result"],
            OperationDescriptor.from_dict(d["operation"]),
            d["producer"],
            d["timestamp"],
        )


@dataclass(frozen=True)
class Artefact:
    content: DocumentRef
    producer: str
    timestamp: str
    phase: str
    project: str
    metadata: tuple = ()  # tuple of Metadata
    tags: tuple = ()  # tuple of NarrativeId
    actions: tuple = ()  # tuple of ActionRecordId
    predecessor: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "kind": "artefact",
            "content": self.content.to_dict(),
            "producer": self.producer,
            "timestamp": self.timestamp,
            "projectWfPh": {"phase": self.phase, "project": self.project},
            "metaData": [m.to_dict() for m in self.metadata],
            "listOfTags": list(self.tags),
            "listOfActions": list(self.actions),
            "predecessor": self.predecessor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Artefact":
        return cls(
            content=DocumentRef.from_dict(d["content"]),
            producer=d["producer"],
            timestamp=d["timestamp"],
            phase=d["projectWfPh"]["phase"],
            project=d["projectWfPh"]["project"],
            metadata=tuple(Metadata.from_dict(m) for m in d["metaData"]),
            tags=tuple(d["listOfTags"]),
            actions=tuple(d["listOfActions"]),
            predecessor=d.get("predecessor"),
        )


def canonicalize(artefact: Artefact, store: Optional[ObjectStore] = None) -> bytes:
    """Canonical byte form of an artefact; hashing it yields the ArtefactId.

    When a store is given, every listed narrative/action id must resolve.
    """
    if store is not None:
        for obj_id in tuple(artefact.tags) + tuple(artefact.actions):
            if not store.has(obj_id):
                raise UnresolvedReference(f"unknown object {obj_id}")
    return canonical_bytes(artefact.to_dict())


def artefact_id(artefact: Artefact) -> str:
    return record_id(artefact.to_dict())


def create_artefact(
    content: DocumentRef,
    producer: str,
    phase: str,
    project: str,
    now: str,
    configured_phases: Optional[list] = None,
) -> Artefact:
    """Create a fresh artefact version with no predecessor."""
    from .errors import UnknownPhase

    if configured_phases is not None and phase not in configured_phases:
        raise UnknownPhase(f"phase {phase!r} not configured")
    return Artefact(
        content=content, producer=producer, timestamp=now, phase=phase, project=project
    )


def _load_artefact(store: ObjectStore, alpha: str) -> Artefact:
    if not store.has(alpha):
        raise UnresolvedReference(f"unknown artefact {alpha}")
    record = store.get(alpha)
    if record.get("kind") != "artefact":
        raise UnresolvedReference(f"object {alpha} is not an artefact")
    return Artefact.from_dict(record)


def _successor(store: ObjectStore, old: Artefact, alpha: str, now: str, **changes) -> Artefact:
    new = replace(old, predecessor=alpha, timestamp=ts_after(now, old.timestamp), **changes)
    store.put(new.to_dict())
    return new


def add_metadata(store: ObjectStore, mu: Metadata, alpha: str, now: str) -> Artefact:
    """Op: append a metadata entry, producing a new artefact version."""
    old = _load_artefact(store, alpha)
    return _successor(store, old, alpha, now, metadata=old.metadata + (mu,))


def update_metadata(store: ObjectStore, mu: Metadata, alpha: str, now: str) -> Artefact:
    """Op: replace the most recent metadata entry sharing mu.key."""
    old = _load_artefact(store, alpha)
    idx = None
    for i, entry in enumerate(old.metadata):
        if entry.key == mu.key:
            idx = i
    if idx is None:
        raise KeyNotFound(f"no metadata entry with key {mu.key!r}")
    entries = list(old.metadata)
    entries[idx] = mu
    return _successor(store, old, alpha, now, metadata=tuple(entries))


def get_metadata(store: ObjectStore, alpha: str) -> list:
    """Op: read-only metadata listing in stored order."""
    return list(_load_artefact(store, alpha).metadata)


def add_tag(store: ObjectStore, eta: Narrative, alpha: str, now: str) -> Artefact:
    """Append a narrative to an artefact's tag list (no action record)."""
    old = _load_artefact(store, alpha)
    eta_id = store.put(eta.to_dict())
    return _successor(store, old, alpha, now, tags=old.tags + (eta_id,))


def add_ritl(store: ObjectStore, eta: Narrative, lam: str, alpha: str, now: str) -> Artefact:
    """Op: attach a narrative together with the action record that produced it."""
    if not store.has(lam):
        raise UnresolvedReference(f"unknown action record {lam}")
    action = ActionRecord.from_dict(store.get(lam))
    if alpha not in (action.original, action.result):
        raise ActionMismatch(f"action {lam} does not reference artefact {alpha}")
    old = _load_artefact(store, alpha)
    eta_id = store.put(eta.to_dict())
    return _successor(
        store, old, alpha, now, tags=old.tags + (eta_id,), actions=old.actions + (lam,)
    )


def get_ritl(store: ObjectStore, alpha: str) -> list:
    """Op: (narrative, action) pairs in attachment order.

    Pairs are recovered by walking the predecessor chain: a version where the
    tag list and the action list both grew by one is an add_ritl step.
    """
    chain = version_chain(store, alpha)
    pairs = []
    for prev, cur in zip(chain, chain[1:]):
        if len(cur.tags) == len(prev.tags) + 1 and len(cur.actions) == len(prev.actions) + 1:
            eta = Narrative.from_dict(store.get(cur.tags[-1]))
            lam = ActionRecord.from_dict(store.get(cur.actions[-1]))
            pairs.append((eta, lam))
    return pairs


def version_chain(store: ObjectStore, alpha: str) -> list:
    """All versions from the creation version to ``alpha``, oldest first."""
    chain = []
    cursor: Optional[str] = alpha
    while cursor is not None:
        art = _load_artefact(store, cursor)
        chain.append(art)
        cursor = art.predecessor
    chain.reverse()
    return chain
