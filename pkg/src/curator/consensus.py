"""Group preference aggregation and the vote-round gate.

The two core functions are the group preference (mean of member
preferences) and the pairwise disagreement (normalized mean absolute
difference over unordered member pairs, 0 = unanimity). On top of them sit
five aggregation strategies and a two-threshold accept rule: a round is
accepted when the strategy score reaches the preference threshold and, when
enabled, disagreement stays at or below the disagreement threshold.

Everything here is pure: a round's verdict is a function of its ballots,
group and config, and can always be recomputed from the persisted round file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    EmptyGroup,
    GroupTooSmall,
    MissingBallot,
    PrefOutOfRange,
    QuorumNotMet,
    RoundClosed,
    VoterNotInGroup,
)

STRATEGIES = ("AVERAGE", "PLURALITY", "LEAST_MISERY", "QUADRATIC", "EXPERT_WEIGHTED")

SUBJECT_KINDS = ("ARTEFACT_VALIDATION", "CYCLE_CLOSE", "PHASE_ADVANCE", "RELEASE", "MERGE")


@dataclass(frozen=True)
class GateConfig:
    strategy: str = "AVERAGE"
    pref_threshold: float = 0.6
    dis_threshold: Optional[float] = 0.4  # None disables the disagreement gate
    quorum: float = 1.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.pref_threshold <= 1.0:
            raise ValueError("pref_threshold out of range")
        if self.dis_threshold is not None and not 0.0 <= self.dis_threshold <= 1.0:
            raise ValueError("dis_threshold out of range")
        if not 0.0 < self.quorum <= 1.0:
            raise ValueError("quorum must be in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "prefThreshold": self.pref_threshold,
            "disThreshold": self.dis_threshold,
            "quorum": self.quorum,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GateConfig":
        return cls(
            d.get("strategy", "AVERAGE"),
            d.get("prefThreshold", 0.6),
            d.get("disThreshold", 0.4),
            d.get("quorum", 1.0),
        )


@dataclass(frozen=True)
class Ballot:
    voter: str
    pref: float
    credits: Optional[int] = None  # quadratic strategy only
    timestamp: str = ""

    def __post_init__(self):
        if not 0.0 <= self.pref <= 1.0:
            raise PrefOutOfRange(f"pref {self.pref} outside [0, 1]")
        if self.credits is not None and self.credits < 0:
            raise PrefOutOfRange("credits must be non-negative")

    def to_dict(self) -> dict:
        return {
            "voter": self.voter,
            "pref": self.pref,
            "credits": self.credits,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ballot":
        return cls(d["voter"], d["pref"], d.get("credits"), d.get("timestamp", ""))


def _check_coverage(ballots: list, group: list) -> dict:
    by_voter = {b.voter: b for b in ballots}
    missing = [u for u in group if u not in by_voter]
    if missing:
        raise MissingBallot(f"missing ballots from {', '.join(sorted(missing))}")
    return by_voter


def gpref(ballots: list, group: list) -> float:
    """Mean preference of the group; every member must have voted."""
    if not group:
        raise EmptyGroup("group is empty")
    by_voter = _check_coverage(ballots, group)
    return sum(by_voter[u].pref for u in group) / len(group)


def dis(ballots: list, group: list) -> float:
    """Normalized mean absolute pairwise preference difference."""
    if len(group) < 2:
        raise GroupTooSmall("disagreement needs at least two members")
    by_voter = _check_coverage(ballots, group)
    prefs = [by_voter[u].pref for u in group]
    n = len(prefs)
    total = sum(
        abs(prefs[i] - prefs[j]) for i in range(n) for j in range(i + 1, n)
    )
    return 2.0 * total / (n * (n - 1))


def aggregate_score(
    strategy: str,
    ballots: list,
    group: list,
    hierarchy_levels: Optional[dict] = None,
) -> float:
    """Strategy-specific group score over the voting members, in [0, 1]."""
    by_voter = _check_coverage(ballots, group)
    prefs = [by_voter[u].pref for u in group]
    if strategy == "AVERAGE":
        return gpref(ballots, group)
    if strategy == "PLURALITY":
        return sum(1 for p in prefs if p >= 0.5) / len(prefs)
    if strategy == "LEAST_MISERY":
        return min(prefs)
    if strategy == "QUADRATIC":
        weights = [
            math.sqrt(by_voter[u].credits if by_voter[u].credits is not None else 1)
            for u in group
        ]
        total = sum(weights)
        if total == 0:
            return 0.0
        return sum(w * by_voter[u].pref for w, u in zip(weights, group)) / total
    if strategy == "EXPERT_WEIGHTED":
        levels = hierarchy_levels or {}
        weights = [1.0 / (1.0 + levels.get(u, 0)) for u in group]
        total = sum(weights)
        return sum(w * by_voter[u].pref for w, u in zip(weights, group)) / total
    raise ValueError(f"unknown strategy {strategy!r}")


def quorum_met(config: GateConfig, n_ballots: int, group_size: int) -> bool:
    return n_ballots >= config.quorum * group_size - 1e-9


def evaluate(
    config: GateConfig,
    ballots: list,
    group: list,
    hierarchy_levels: Optional[dict] = None,
) -> tuple:
    """Return (score, disagreement-or-None, verdict) for a round's ballots.

    Scoring runs over the members who actually voted; the quorum controls
    how many of them there must be. Threshold comparisons are inclusive.
    """
    if not group:
        raise EmptyGroup("group is empty")
    if not quorum_met(config, len(ballots), len(group)):
        raise QuorumNotMet(
            f"{len(ballots)} of {len(group)} ballots cast, quorum {config.quorum}"
        )
    voters = [u for u in group if any(b.voter == u for b in ballots)]
    score = aggregate_score(config.strategy, ballots, voters, hierarchy_levels)
    disagreement = dis(ballots, voters) if len(voters) >= 2 else None
    accept = score >= config.pref_threshold and (
        config.dis_threshold is None
        or disagreement is None
        or disagreement <= config.dis_threshold
    )
    return score, disagreement, "ACCEPT" if accept else "REJECT"


def recompute_verdict(round_record: dict, hierarchy_levels: Optional[dict] = None) -> str:
    """Recompute a persisted round's verdict from its stored ballots.

    Recomputation, not the stored verdict, is authoritative in audits.
    """
    config = GateConfig.from_dict(round_record["config"])
    ballots = [Ballot.from_dict(b) for b in round_record["ballots"]]
    _, _, verdict = evaluate(config, ballots, round_record["group"], hierarchy_levels)
    return verdict


def cast(round_record: dict, ballot: Ballot) -> dict:
    """Add or replace one voter's ballot on an OPEN round record."""
    if round_record["state"] != "OPEN":
        raise RoundClosed(f"round {round_record['id']} is closed")
    if ballot.voter not in round_record["group"]:
        raise VoterNotInGroup(f"{ballot.voter} is not in the round's group")
    ballots = [b for b in round_record["ballots"] if b["voter"] != ballot.voter]
    ballots.append(ballot.to_dict())
    updated = dict(round_record)
    updated["ballots"] = ballots
    return updated
