"""Consensus-gated version control for research artefacts."""

from .canonical import canonical_bytes, canonical_dumps, now_ts, record_id
from .consensus import Ballot, GateConfig, dis, gpref
from .errors import CuratorError
from .model import (
    ActionRecord,
    Artefact,
    DocumentRef,
    Metadata,
    Narrative,
    OperationDescriptor,
    Researcher,
)
from .store import Repository
from .workflow import (
    advance_phase,
    audit_gates,
    close_cycle,
    compute_stats,
    create_project,
    replay,
    replay_file,
    run_curation_step,
)

__version__ = "0.1.0"
