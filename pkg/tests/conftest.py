import pytest

from curator import consensus, model, uc1, workflow

ROSTER = [
    model.Researcher("R0", "Junior scientist", 1),
    model.Researcher("R1", "Senior scientist", 0),
]

T0 = "2023-05-01T09:00:00.000Z"


def ts(minutes: int) -> str:
    return f"2023-05-01T{9 + minutes // 60:02d}:{minutes % 60:02d}:00.000Z"


@pytest.fixture
def repo(tmp_path):
    return workflow.create_project(tmp_path / "repo", "testproj", ROSTER, now=T0)


@pytest.fixture
def merged_repo(tmp_path):
    """Project with the data management and analysis stages merged."""
    phases = [
        ["problem_statement"],
        ["data_acquisition"],
        ["data_management", "analysis"],
        ["reporting"],
    ]
    return workflow.create_project(
        tmp_path / "repo", "testproj", ROSTER, phases=phases, now=T0
    )


@pytest.fixture(scope="session")
def uc1_repo(tmp_path_factory):
    dest = tmp_path_factory.mktemp("uc1") / "repo"
    return workflow.replay(uc1.build_events(str(dest)), dest)


def text_artefact(repo, content, producer="R1", now=T0):
    return workflow.new_artefact(repo, content, producer, now)


def accept_round(repo, kind="CYCLE_CLOSE", target=None, round_id=None,
                 votes=((0.8, "R1"), (0.7, "R0")), now=T0):
    """Open, vote and close a round; returns the closed record."""
    record = repo.open_round(kind, target, None, None, now, round_id)
    for pref, voter in votes:
        repo.cast_vote(record["id"], consensus.Ballot(voter, pref, None, now))
    return repo.close_round(record["id"], now)
