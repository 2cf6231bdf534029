"""Git-like command line surface.

Exit codes: 0 success, 1 domain error (single ``error: <Code>: <message>``
line on stderr), 2 usage error. Machine output goes behind ``--json`` in
canonical form; human output to stdout.

Repo discovery: ``CURATOR_DIR`` if set, else walk up from the working
directory looking for ``.curator/``. ``CURATOR_AUTHOR`` names the acting
researcher and is required for mutating commands.
"""
from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click

from . import consensus, model, workflow
from .canonical import canonical_dumps, now_ts
from .errors import CuratorError
from .store import META_DIR, Repository


def _discover_root() -> Path:
    env = os.environ.get("CURATOR_DIR")
    if env:
        return Path(env)
    cursor = Path.cwd()
    for candidate in [cursor, *cursor.parents]:
        if (candidate / META_DIR).exists():
            return candidate
    raise CuratorError(f"no {META_DIR} repository found from {cursor}")


def _repo() -> Repository:
    return Repository(_discover_root())


def _author() -> str:
    author = os.environ.get("CURATOR_AUTHOR")
    if not author:
        raise click.UsageError("CURATOR_AUTHOR must be set for mutating commands")
    return author


def _emit(record, as_json: bool, human=None):
    if as_json:
        click.echo(canonical_dumps(record))
    else:
        click.echo(human if human is not None else json.dumps(record, indent=2, sort_keys=True))


def domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CuratorError as exc:
            click.echo(f"error: {exc.code}: {exc.message}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Consensus-gated version control for research artefacts."""


@main.command()
@click.option("--project", default="project", help="Project id.")
@click.option(
    "--phases",
    default=None,
    help="Semicolon-separated phases; merge labels with '+', e.g. "
    "'problem_statement;data_acquisition;data_management+analysis;reporting'.",
)
@click.option(
    "--member",
    "members",
    multiple=True,
    help="Roster entry 'id:display name:level'; repeatable.",
)
@click.argument("path", default=".")
@domain_errors
def init(project, phases, members, path):
    """Initialize a repository (first phase, main branch, root commit)."""
    phase_config = None
    if phases:
        phase_config = [p.split("+") for p in phases.split(";")]
    roster = []
    for entry in members:
        parts = entry.split(":")
        roster.append(
            model.Researcher(
                parts[0],
                parts[1] if len(parts) > 1 else parts[0],
                int(parts[2]) if len(parts) > 2 else 0,
            )
        )
    if not roster:
        me = os.environ.get("CURATOR_AUTHOR", "R0")
        roster = [model.Researcher(me, me, 0)]
    repo = workflow.create_project(path, project, roster, phase_config)
    click.echo(str(repo.root.resolve()))


@main.command()
@click.argument("source")
@click.argument("dest")
@domain_errors
def clone(source, dest):
    """Copy a repository and re-verify every object hash."""
    repo = Repository.clone(source, dest)
    click.echo(str(repo.root.resolve()))


@main.command()
@click.argument("path")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@domain_errors
def add(path, file):
    """Stage a document file as an artefact at PATH."""
    repo = _repo()
    author = _author()
    data = Path(file).read_bytes()
    try:
        content = model.DocumentRef.from_text(data.decode("utf-8"))
    except UnicodeDecodeError:
        import mimetypes

        digest = repo.objects.put_blob(data)
        media = mimetypes.guess_type(file)[0] or "application/octet-stream"
        content = model.DocumentRef.from_blob(digest, media, len(data))
    artefact = model.create_artefact(
        content, author, repo.current_phase(), repo.config["project"], now_ts(),
        configured_phases=repo.phase_ids(),
    )
    repo.stage_add(artefact, path)
    click.echo(f"staged {path}")


@main.command()
@click.argument("path")
@domain_errors
def rm(path):
    """Stage a path for removal in the next commit."""
    _repo().stage_remove(path)
    click.echo(f"removed {path}")


@main.command()
@click.option("-m", "--message", required=True)
@click.option("--round", "round_id", default=None)
@domain_errors
def commit(message, round_id):
    """Commit the staging area to the current branch."""
    cid = _repo().commit(message, _author(), round_id)
    click.echo(cid)


@main.command()
@click.argument("name")
@click.option("--from", "from_commit", default=None)
@click.option("--filter", "subset", default=None, help="Keep only paths with this prefix.")
@domain_errors
def branch(name, from_commit, subset):
    """Fork a branch in the current phase."""
    cid = _repo().branch(name, from_commit, subset, _author())
    click.echo(cid)


@main.command()
@click.argument("name")
@domain_errors
def checkout(name):
    """Point HEAD at another branch of the current phase."""
    _repo().checkout(name)
    click.echo(name)


@main.command()
@click.argument("source")
@click.option("--resolve", "resolutions", multiple=True, help="path=artefact-id, repeatable.")
@click.option("--round", "round_id", required=True)
@domain_errors
def merge(source, resolutions, round_id):
    """Merge SOURCE into the current branch under an accepted round."""
    resolver = {}
    for item in resolutions:
        path, _, alpha = item.partition("=")
        resolver[path] = alpha
    repo = _repo()
    _, into = repo.head()
    cid = repo.merge(into, source, resolver, _author(), round_id)
    click.echo(cid)


@main.command("drop-branch")
@click.argument("name")
@domain_errors
def drop_branch(name):
    """Delete a branch ref (main and released branches are protected)."""
    _repo().drop_branch(name)
    click.echo(f"dropped {name}")


@main.command("drop-stage")
@click.argument("phase")
@domain_errors
def drop_stage(phase):
    """Discard a phase's history, keeping its head snapshot as staging."""
    _repo().drop_stage(phase)
    click.echo(f"dropped stage {phase}")


@main.command()
@click.argument("path")
@click.option("--narrative", "narrative_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--action", "action_id", default=None, help="Action record id for RITL.")
@domain_errors
def tag(path, narrative_file, action_id):
    """Attach a narrative to the artefact at PATH and commit the new version."""
    author = _author()
    text = Path(narrative_file).read_text()
    eta = model.Narrative(
        content=model.DocumentRef.from_text(text),
        narrative=text,
        producer=author,
        timestamp=now_ts(),
    )
    cid = _repo().tag_artefact(path, eta, author, action_id=action_id)
    click.echo(cid)


@main.group("round")
def round_group():
    """Consensus vote rounds."""


@round_group.command("open")
@click.argument("kind", type=click.Choice(consensus.SUBJECT_KINDS))
@click.option("--target", default=None, help="Commit id or artefact path; default head.")
@click.option("--group", "group_ids", default=None, help="Comma-separated researcher ids.")
@click.option("--strategy", type=click.Choice(consensus.STRATEGIES), default=None)
@click.option("--pref", type=float, default=None)
@click.option("--dis", type=float, default=None)
@click.option("--quorum", type=float, default=None)
@click.option("--id", "round_id", default=None)
@domain_errors
def round_open(kind, target, group_ids, strategy, pref, dis, quorum, round_id):
    """Open a vote round on a decision subject."""
    repo = _repo()
    if target is not None and "/" in target:
        target = repo.resolve_path(target)
    defaults = repo.defaults()
    config = consensus.GateConfig(
        strategy or defaults.strategy,
        pref if pref is not None else defaults.pref_threshold,
        dis if dis is not None else defaults.dis_threshold,
        quorum if quorum is not None else defaults.quorum,
    )
    group = group_ids.split(",") if group_ids else None
    record = repo.open_round(kind, target, group, config, round_id=round_id)
    click.echo(record["id"])


@round_group.command("vote")
@click.argument("round_id")
@click.option("--pref", type=float, required=True)
@click.option("--credits", type=int, default=None)
@domain_errors
def round_vote(round_id, pref, credits):
    """Cast (or replace) the acting researcher's ballot."""
    ballot = consensus.Ballot(_author(), pref, credits, now_ts())
    record = _repo().cast_vote(round_id, ballot)
    click.echo(f"{len(record['ballots'])} ballot(s)")


@round_group.command("close")
@click.argument("round_id")
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def round_close(round_id, as_json):
    """Close a round and fix its verdict (idempotent once closed)."""
    record = _repo().close_round(round_id)
    _emit(record, as_json, record["verdict"])


@round_group.command("show")
@click.argument("round_id")
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def round_show(round_id, as_json):
    """Print a round with its ballots."""
    record = _repo().get_round(round_id)
    _emit(record, as_json)


@main.group("cycle")
def cycle_group():
    """Spiral cycles inside the current phase."""


@cycle_group.command("close")
@click.option("--round", "round_id", required=True)
@domain_errors
def cycle_close(round_id):
    """Close the current cycle behind an accepted CYCLE_CLOSE round."""
    state = workflow.close_cycle(_repo(), round_id, _author())
    click.echo(f"cycle {state['currentCycle']}")


@main.group("phase")
def phase_group():
    """Workflow phase transitions."""


@phase_group.command("advance")
@click.option("--round", "round_id", required=True)
@click.option("--release", "release_tag", default=None)
@domain_errors
def phase_advance(round_id, release_tag):
    """Advance to the next phase, optionally releasing the head first."""
    repo = _repo()
    workflow.advance_phase(repo, round_id, _author(), release_tag)
    click.echo(repo.current_phase())


@main.command()
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def log(as_json):
    """Commits of the current branch, head first."""
    entries = _repo().log()
    if as_json:
        click.echo(canonical_dumps(entries))
        return
    for entry in entries:
        marker = "*" if entry["closesCycle"] else " "
        click.echo(f"{entry['id'][:12]} {marker} c{entry['cycle']} {entry['message']}")


@main.command()
@click.argument("path")
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def show(path, as_json):
    """Print the artefact at PATH in the head snapshot."""
    repo = _repo()
    alpha = repo.resolve_path(path)
    record = {"id": alpha, **repo.objects.get(alpha)}
    _emit(record, as_json)


@main.command()
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def stats(as_json):
    """Per-phase statistics reconstructed from the DAG and round files."""
    report = workflow.compute_stats(_repo())
    if as_json:
        click.echo(canonical_dumps(report))
        return
    header = f"{'phase':<28}{'cyc':>4}{'cmt':>5}{'brn':>5}{'art':>6}{'nar':>5}{'rnd':>5}{'rej':>5}"
    click.echo(header)
    for p in report["phases"]:
        click.echo(
            f"{p['phase']:<28}{p['cycleCount']:>4}{p['commitCount']:>5}"
            f"{p['branchCount']:>5}{p['artefactCount']:>6}{p['narrativeCount']:>5}"
            f"{p['roundCount']:>5}{p['rejectCount']:>5}"
        )


@main.command()
@domain_errors
def audit():
    """Recompute every consensus gate; exit 1 if any violation is found."""
    violations = workflow.audit_gates(_repo())
    for v in violations:
        click.echo(v, err=True)
    if violations:
        click.echo(f"error: GateNotPassed: {len(violations)} violation(s)", err=True)
        sys.exit(1)
    click.echo("all gates sound")


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
@click.option("--dest", default=".", help="Directory for the replayed repository.")
@domain_errors
def replay(script, dest):
    """Replay a JSON event script into a deterministic repository."""
    repo = workflow.replay_file(script, dest)
    click.echo(str(repo.root.resolve()))


@main.command()
@click.option("--port", type=int, default=8400)
@click.option("--host", default="127.0.0.1")
@domain_errors
def serve(port, host):
    """Serve the HTTP API (and the dashboard under /ui) for this repository."""
    import uvicorn

    from .service import create_app

    app = create_app(_discover_root())
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
