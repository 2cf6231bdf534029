"""Builder for the bundled graffiti-study replay script (fixtures/uc1.json).

Recreates the two-member graffiti classification project: a four-phase
workflow (data management and analysis merged), two cycles of research
question drafting with fifteen comments, three data-acquisition cycles
ending in a 546-photo dataset release out of 1050 collected, a two-branch
classification phase merged into fifteen artefacts, and a final report
release of three validated artefacts.

All timestamps are scripted so a replay is byte-for-byte reproducible.
"""
from datetime import datetime, timedelta, timezone

from .canonical import format_ts

SENIOR = "R1"
JUNIOR = "R0"

PHASES = [
    ["problem_statement"],
    ["data_acquisition"],
    ["data_management", "analysis"],
    ["reporting"],
]


class _Clock:
    def __init__(self):
        self.now = datetime(2023, 5, 1, 9, 0, 0, tzinfo=timezone.utc)

    def tick(self) -> str:
        self.now += timedelta(minutes=1)
        return format_ts(self.now)

    def same(self) -> str:
        return format_ts(self.now)


def _gated(events, clock, round_id, kind, votes=((JUNIOR, 0.7), (SENIOR, 0.8))):
    """Open a round on the current head, collect votes and close it."""
    events.append({"op": "round_open", "id": round_id, "kind": kind, "time": clock.tick()})
    for voter, pref in votes:
        events.append(
            {"op": "vote", "round": round_id, "voter": voter, "pref": pref, "time": clock.tick()}
        )
    events.append({"op": "round_close", "round": round_id, "time": clock.tick()})


def _close_cycle(events, clock, round_id, author=SENIOR):
    _gated(events, clock, round_id, "CYCLE_CLOSE")
    events.append({"op": "cycle_close", "round": round_id, "author": author, "time": clock.tick()})


def build_events(path: str = ".") -> list:
    clock = _Clock()
    events = [
        {
            "op": "create_project",
            "path": path,
            "project": "graffiti-political-content",
            "phases": PHASES,
            "roster": [
                {"id": JUNIOR, "displayName": "Junior scientist", "hierarchyLevel": 1},
                {"id": SENIOR, "displayName": "Senior scientist", "hierarchyLevel": 0},
            ],
            "defaults": {
                "strategy": "AVERAGE",
                "prefThreshold": 0.6,
                "disThreshold": 0.4,
                "quorum": 1.0,
            },
            "time": clock.tick(),
        }
    ]

    # Phase 1: problem statement, two cycles.
    rq_text = (
        "Is it possible to trace and classify political messages "
        "disseminated in graffiti in a city?"
    )
    t = clock.tick()
    # Same content, producer and time at both paths: one artefact, two entries.
    events.append({"op": "add", "path": "rq/statement", "content": rq_text,
                   "producer": SENIOR, "time": t})
    events.append({"op": "add", "path": "rq/discussion", "content": rq_text,
                   "producer": SENIOR, "time": t})
    events.append({"op": "commit", "message": "draft research question",
                   "author": SENIOR, "time": clock.tick()})
    for i in range(15):
        events.append(
            {
                "op": "tag",
                "path": "rq/discussion",
                "narrative": f"comment {i + 1:02d} on the research question",
                "producer": JUNIOR if i % 2 == 0 else SENIOR,
                "time": clock.tick(),
            }
        )
    events.append(
        {
            "op": "curate",
            "path": "rq/statement",
            "metadata": [{"key": "framework", "value": "political graffiti theory"}],
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    events.append(
        {
            "op": "curate",
            "path": "rq/statement",
            "metadata": [{"key": "inclusion_rules", "value": "graffiti with textual political content"}],
            "producer": JUNIOR,
            "time": clock.tick(),
        }
    )
    _close_cycle(events, clock, "g1c1")
    events.append(
        {
            "op": "curate",
            "path": "rq/statement",
            "metadata": [{"key": "exclusion_rules", "value": "commercial murals and advertising"}],
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    _close_cycle(events, clock, "g1c2")
    _gated(events, clock, "g1adv", "PHASE_ADVANCE")
    events.append({"op": "advance", "round": "g1adv", "author": SENIOR, "time": clock.tick()})

    # Phase 2: data acquisition, three cycles, 1050 photos narrowed to 546.
    events.append(
        {
            "op": "add",
            "path": "areas/proposal",
            "content": "candidate areas: old town, docks, commercial area, administrative downtown",
            "producer": JUNIOR,
            "time": clock.tick(),
        }
    )
    events.append({"op": "commit", "message": "propose collection areas",
                   "author": JUNIOR, "time": clock.tick()})
    _close_cycle(events, clock, "g2c1")
    events.append(
        {
            "op": "curate",
            "path": "areas/criteria",
            "content": "criteria for selecting the final collection area",
            "metadata": [{"key": "area", "value": "old town"}],
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    events.append(
        {
            "op": "tag",
            "path": "areas/criteria",
            "narrative": "samples from the docks show too few political motifs",
            "producer": JUNIOR,
            "time": clock.tick(),
        }
    )
    _close_cycle(events, clock, "g2c2")
    events.append(
        {
            "op": "add_batch",
            "path_prefix": "graffiti/raw/",
            "count": 1050,
            "content_prefix": "graffiti photograph ",
            "producer": JUNIOR,
            "time": clock.tick(),
        }
    )
    events.append({"op": "commit", "message": "collect 1050 graffiti photographs",
                   "author": JUNIOR, "time": clock.tick()})
    events.append(
        {
            "op": "remove_batch",
            "path_prefix": "graffiti/raw/",
            "start": 546,
            "count": 504,
            "time": clock.tick(),
        }
    )
    events.append({"op": "remove", "path": "areas/proposal", "time": clock.tick()})
    events.append({"op": "remove", "path": "areas/criteria", "time": clock.tick()})
    events.append({"op": "commit", "message": "validate 546 photos as the dataset",
                   "author": SENIOR, "time": clock.tick()})
    _close_cycle(events, clock, "g2c3")
    _gated(events, clock, "g2rel", "RELEASE")
    events.append({"op": "release", "tag": "graffiti-dataset", "round": "g2rel",
                   "time": clock.tick()})
    _gated(events, clock, "g2adv", "PHASE_ADVANCE")
    events.append({"op": "advance", "round": "g2adv", "author": SENIOR, "time": clock.tick()})

    # Phase 3+4: classification in two branches, merged; fifteen artefacts.
    events.append({"op": "branch", "name": "manual-classification", "author": SENIOR,
                   "time": clock.tick()})
    events.append({"op": "branch", "name": "ml-classification", "author": JUNIOR,
                   "time": clock.tick()})
    events.append({"op": "checkout", "branch": "manual-classification"})
    events.append(
        {
            "op": "add_batch",
            "path_prefix": "classification/manual/cat",
            "count": 7,
            "content_prefix": "manual category specification ",
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    events.append({"op": "commit", "message": "manual classification categories",
                   "author": SENIOR, "time": clock.tick()})
    events.append({"op": "checkout", "branch": "ml-classification"})
    events.append(
        {
            "op": "add_batch",
            "path_prefix": "classification/ml/run",
            "count": 6,
            "content_prefix": "classification model run ",
            "producer": JUNIOR,
            "time": clock.tick(),
        }
    )
    events.append({"op": "commit", "message": "classification model runs",
                   "author": JUNIOR, "time": clock.tick()})
    events.append(
        {
            "op": "ritl",
            "path": "classification/ml/run0000",
            "result_path": "classification/ml/result",
            "result_content": "k-means clustering of the graffiti dataset",
            "operation": "k-means",
            "parameters": {"k": "5", "tool": "orange"},
            "scores": {"silhouette": 0.62},
            "narrative": "clusters separate slogans from murals; k=5 converged",
            "producer": JUNIOR,
            "time": clock.tick(),
        }
    )
    events.append({"op": "checkout", "branch": "main"})
    _close_cycle(events, clock, "g34c1")
    _gated(events, clock, "g34m1", "MERGE")
    events.append({"op": "merge", "into": "main", "from": "manual-classification",
                   "author": SENIOR, "round": "g34m1", "time": clock.tick()})
    _gated(events, clock, "g34m2", "MERGE")
    events.append({"op": "merge", "into": "main", "from": "ml-classification",
                   "author": SENIOR, "round": "g34m2", "time": clock.tick()})
    events.append(
        {
            "op": "curate",
            "path": "classification/interpretation",
            "content": "joint interpretation of manual and ml classification",
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    for i in range(3):
        events.append(
            {
                "op": "tag",
                "path": "classification/interpretation",
                "narrative": f"interpretation revision request {i + 1}",
                "producer": JUNIOR if i % 2 == 0 else SENIOR,
                "time": clock.tick(),
            }
        )
    _close_cycle(events, clock, "g34c2")
    events.append(
        {
            "op": "curate",
            "path": "classification/interpretation",
            "metadata": [{"key": "validated", "value": "true"}],
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    _close_cycle(events, clock, "g34c3")
    _gated(events, clock, "g34adv", "PHASE_ADVANCE")
    events.append({"op": "advance", "round": "g34adv", "author": SENIOR, "time": clock.tick()})

    # Phase 5: reporting, two cycles, final release of three artefacts.
    events.append({"op": "add", "path": "report/final",
                   "content": "final report with analytics and conclusions, v1",
                   "producer": SENIOR, "time": clock.tick()})
    events.append({"op": "commit", "message": "draft final report",
                   "author": SENIOR, "time": clock.tick()})
    _close_cycle(events, clock, "g5c1")
    events.append(
        {
            "op": "curate",
            "path": "report/final",
            "metadata": [{"key": "revision", "value": "2"}],
            "producer": SENIOR,
            "time": clock.tick(),
        }
    )
    events.append({"op": "add", "path": "results/quantitative",
                   "content": "quantitative results from the classification algorithms",
                   "producer": JUNIOR, "time": clock.tick()})
    events.append({"op": "add", "path": "dataset/graffiti",
                   "content": "graffiti dataset of 546 validated photographs",
                   "producer": JUNIOR, "time": clock.tick()})
    events.append({"op": "commit", "message": "assemble release artefacts",
                   "author": JUNIOR, "time": clock.tick()})
    _close_cycle(events, clock, "g5c2")
    _gated(events, clock, "g5rel", "RELEASE")
    events.append({"op": "release", "tag": "final-report", "round": "g5rel",
                   "time": clock.tick()})
    return events
