import hashlib

from curator import canonical, model

from conftest import T0

GOLDEN_BYTES = (
    b'{"content":{"kind":"text","text":"golden fixture document"},'
    b'"kind":"artefact","listOfActions":[],"listOfTags":[],'
    b'"metaData":[{"key":"area","origin":"manual","producer":"R1",'
    b'"timestamp":"2023-05-01T09:01:00.000Z","value":"old town"}],'
    b'"predecessor":null,"producer":"R1",'
    b'"projectWfPh":{"phase":"problem_statement","project":"golden-project"},'
    b'"timestamp":"2023-05-01T09:00:00.000Z"}'
)
# sha256sum over GOLDEN_BYTES, frozen as a regression value.
GOLDEN_DIGEST = "b1f7331ede883e3d0f6aea771a5c7bba613a682e7a7f0bc890cdd4fe9d2600b4"


def golden_artefact():
    return model.Artefact(
        content=model.DocumentRef.from_text("golden fixture document"),
        producer="R1",
        timestamp=T0,
        phase="problem_statement",
        project="golden-project",
        metadata=(
            model.Metadata("area", "old town", "manual", "R1", "2023-05-01T09:01:00.000Z"),
        ),
    )


def test_canonicalize_deterministic():
    art = golden_artefact()
    assert model.canonicalize(art) == model.canonicalize(art)


def test_canonicalize_differs_on_extra_metadata():
    art = golden_artefact()
    other = model.Artefact(
        **{**art.__dict__, "metadata": art.metadata + (
            model.Metadata("k", "v", "manual", "R1", T0),
        )}
    )
    assert model.canonicalize(art) != model.canonicalize(other)


def test_golden_bytes_and_digest():
    art = golden_artefact()
    assert model.canonicalize(art) == GOLDEN_BYTES
    assert hashlib.sha256(GOLDEN_BYTES).hexdigest() == GOLDEN_DIGEST
    assert model.artefact_id(art) == GOLDEN_DIGEST


def test_timestamp_roundtrip():
    assert canonical.format_ts(canonical.parse_ts(T0)) == T0
    assert canonical.parse_ts("2023-05-01T09:00:00Z") == canonical.parse_ts(T0)


def test_ts_after_bumps_non_increasing_values():
    assert canonical.ts_after("2023-05-01T08:00:00.000Z", T0) == "2023-05-01T09:00:00.001Z"
    assert canonical.ts_after(T0, T0) == "2023-05-01T09:00:00.001Z"
    later = "2023-05-01T10:00:00.000Z"
    assert canonical.ts_after(later, T0) == later
