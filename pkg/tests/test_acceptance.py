"""End-to-end acceptance checks.

Each test covers one release criterion, enforces its runtime budget, and
prints a single machine-greppable pass/fail line (run with ``-s`` to see
them as they happen).
"""
import os
import random
import time
from contextlib import contextmanager

import pytest

from curator import consensus, model, workflow
from curator.canonical import canonical_dumps
from curator.consensus import Ballot
from curator.store import Repository

FIXTURE = os.path.join(os.path.dirname(__file__), "..", "fixtures", "uc1.json")

PHASES = ["problem_statement", "data_acquisition", "data_management+analysis", "reporting"]


@contextmanager
def criterion(label, budget=None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {label}")
        raise
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        print(f"[FAIL] {label}: runtime {elapsed:.2f}s over the {budget}s budget")
        raise AssertionError(f"{label}: runtime {elapsed:.2f}s >= {budget}s")
    print(f"[PASS] {label} ({elapsed:.3f}s)")


def ballots(prefs):
    return [Ballot(f"u{i}", p) for i, p in enumerate(prefs)]


def group(n):
    return [f"u{i}" for i in range(n)]


@pytest.fixture(scope="module")
def replayed(tmp_path_factory):
    dest = tmp_path_factory.mktemp("uc1")
    return workflow.replay_file(FIXTURE, dest / "repo")


def test_consensus_exactness():
    with criterion("consensus math exactness", budget=1.0):
        assert consensus.dis(ballots([1.0, 0.5, 0.0]), group(3)) == pytest.approx(
            2 / 3, abs=1e-12
        )
        assert consensus.dis(ballots([0.8, 0.4]), group(2)) == pytest.approx(0.4, abs=1e-12)
        assert consensus.gpref(ballots([0.8, 0.4]), group(2)) == pytest.approx(0.6, abs=1e-12)


def test_brute_force_oracle_equivalence():
    rng = random.Random(20230501)
    with criterion("brute-force oracle equivalence (1000 samples)", budget=5.0):
        for _ in range(1000):
            prefs = [rng.random() for _ in range(rng.randint(2, 6))]
            g = group(len(prefs))
            b = ballots(prefs)
            n = len(prefs)
            oracle = sum(
                abs(prefs[i] - prefs[j])
                for i in range(n)
                for j in range(n)
                if i != j
            ) / (n * (n - 1))
            assert consensus.dis(b, g) == pytest.approx(oracle, abs=1e-9)
            least = consensus.aggregate_score("LEAST_MISERY", b, g)
            assert least <= consensus.gpref(b, g) + 1e-12


def test_case_study_replay(tmp_path):
    with criterion("case-study replay counts", budget=30.0):
        repo = workflow.replay_file(FIXTURE, tmp_path / "repo")
        stats = {p["phase"]: p for p in workflow.compute_stats(repo)["phases"]}
        assert list(stats) == PHASES

        # phase 1: two cycles, one artefact carrying 15 narratives, a
        # four-version chain for the research question, no branches
        p1 = stats["problem_statement"]
        assert p1["cycleCount"] == 2
        assert p1["branchCount"] == 0
        head1 = repo.branch_head("problem_statement", "main")
        entries1 = repo.snapshot_entries(head1)
        discussion = model.Artefact.from_dict(
            repo.objects.get(entries1["rq/discussion"])
        )
        assert len(discussion.tags) == 15
        chain = model.version_chain(repo.objects, entries1["rq/statement"])
        assert len(chain) == 4

        # phase 2: three cycles, one commit staging 1050 photos, release of 546
        p2 = stats["data_acquisition"]
        assert p2["cycleCount"] == 3
        sizes = {}
        commits2 = repo.all_commits("data_acquisition")
        for cid, record in commits2.items():
            sizes[cid] = len(repo.snapshot_entries_by_snap(record["snapshot"]))
        staged_1050 = [
            cid
            for cid, record in commits2.items()
            if record["parents"]
            and sizes[cid] - sizes[record["parents"][0]] == 1050
        ]
        assert len(staged_1050) == 1
        release2 = next(r for r in repo.releases() if r["phase"] == "data_acquisition")
        assert len(repo.snapshot_entries(release2["commit"])) == 546

        # merged phase 3+4: three cycles, two branches merged under accepted
        # rounds, fifteen artefacts on main
        p34 = stats["data_management+analysis"]
        assert p34["cycleCount"] == 3
        assert p34["branchCount"] == 2
        commits34 = repo.all_commits("data_management+analysis")
        merges = [r for r in commits34.values() if len(r["parents"]) == 2]
        assert len(merges) == 2
        for record in merges:
            round_record = repo.get_round(record["round"])
            assert consensus.recompute_verdict(round_record) == "ACCEPT"
        head34 = repo.branch_head("data_management+analysis", "main")
        assert len(repo.snapshot_entries(head34)) == 15

        # phase 5: two cycles and a final release of exactly three paths
        p5 = stats["reporting"]
        assert p5["cycleCount"] == 2
        release5 = next(r for r in repo.releases() if r["phase"] == "reporting")
        assert len(repo.snapshot_entries(release5["commit"])) == 3


def test_gate_soundness_audit(replayed, tmp_path):
    with criterion("gate soundness audit", budget=5.0):
        assert workflow.audit_gates(replayed) == []
        corrupt = Repository.clone(replayed.root, tmp_path / "corrupt")
        target = None
        for phase in corrupt.phase_ids():
            for record in corrupt.all_commits(phase).values():
                if record["closesCycle"]:
                    target = record["round"]
                    break
            if target:
                break
        round_file = corrupt.meta / "rounds" / f"{target}.json"
        text = round_file.read_text().replace('"pref":0.8', '"pref":0.1', 1)
        assert text != round_file.read_text()  # exactly one byte changed
        round_file.write_text(text)
        assert workflow.audit_gates(corrupt) != []


def test_clone_fidelity(replayed, tmp_path):
    with criterion("clone fidelity", budget=10.0):
        clone = Repository.clone(replayed.root, tmp_path / "clone")
        clone.verify()  # re-hash every object, resolve every ref
        original = canonical_dumps(workflow.compute_stats(replayed)) + "\n"
        copied = canonical_dumps(workflow.compute_stats(clone)) + "\n"
        assert copied == original


def test_store_determinism(tmp_path):
    with criterion("store determinism across replays"):
        first = workflow.replay_file(FIXTURE, tmp_path / "a")
        second = workflow.replay_file(FIXTURE, tmp_path / "b")
        ids_a = [(r["tag"], r["commit"]) for r in first.releases()]
        ids_b = [(r["tag"], r["commit"]) for r in second.releases()]
        assert ids_a == ids_b and ids_a
