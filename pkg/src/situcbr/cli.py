"""Command-line interface.

Exit status: 0 on success or when a recommendation is made, 2 when a query
yields no recommendation, 1 on usage or validation errors.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import click
from filelock import FileLock, Timeout

from situcbr.project import ProjectLayout, commit, init_project, load_taxonomies, open_engine
from situcbr.recommender import RECOMMENDED, replay_scenario
from situcbr.situation import SensorSnapshot, parse_timestamp
from situcbr.taxonomy import DIMENSIONS

PROJECT_ENV = "SITUCBR_PROJECT"
NO_RECOMMENDATION = 2


class _Group(click.Group):
    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as exc:
            exc.show()
            sys.exit(1)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


@contextmanager
def _reported():
    try:
        yield
    except click.ClickException:
        raise
    except Timeout as exc:
        raise click.ClickException(f"project is locked by another process ({exc.lock_file})") from exc
    except (ValueError, KeyError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


@contextmanager
def _locked(layout: ProjectLayout):
    with FileLock(str(layout.lock), timeout=10):
        yield


def _layout(ctx: click.Context) -> ProjectLayout:
    return ProjectLayout(Path(ctx.obj["project"]))


def _snapshot(lat, lon, time, contact) -> SensorSnapshot:
    return SensorSnapshot(lat, lon, parse_timestamp(time), contact or None)


def _fmt(value: Fraction) -> str:
    return f"{value} ({float(value):.4f})"


situation_options = [
    click.option("--lat", type=float, required=True, help="Latitude in decimal degrees."),
    click.option("--lon", type=float, required=True, help="Longitude in decimal degrees."),
    click.option("--time", "time_", required=True, help="RFC-3339 timestamp with offset."),
    click.option("--contact", default=None, help="Agenda contact of the current meeting."),
]


def _with_situation(fn):
    for opt in reversed(situation_options):
        fn = opt(fn)
    return fn


@click.group(cls=_Group)
@click.option("--project", "-p", envvar=PROJECT_ENV, default=".", show_default=True,
              type=click.Path(file_okay=False), help=f"Project root (env {PROJECT_ENV}).")
@click.pass_context
def cli(ctx, project):
    """Situation-aware recommendations with case-based reasoning."""
    ctx.ensure_object(dict)
    ctx.obj["project"] = project


@cli.command()
@click.argument("path", type=click.Path(file_okay=False))
def init(path):
    """Create the demonstration project in PATH (must be empty or absent)."""
    with _reported():
        layout = init_project(path)
        open_engine(layout)
    click.echo(f"initialized project in {layout.root}")


@cli.command()
@_with_situation
@click.option("--threshold", type=float, default=None, help="Override the configured threshold B.")
@click.option("--json", "as_json", is_flag=True, help="Print the result as JSON.")
@click.pass_context
def recommend(ctx, lat, lon, time_, contact, threshold, as_json):
    """Recommend documents for the situation described by the sensor inputs."""
    layout = _layout(ctx)
    with _reported(), _locked(layout):
        engine = open_engine(layout)
        result = engine.recommend(_snapshot(lat, lon, time_, contact), threshold=threshold)
        commit(engine, layout)
    if as_json:
        click.echo(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    else:
        click.echo(f"decision: {result.decision}")
        click.echo(f"situation: {result.situation}")
        if result.matched_case_id is not None:
            click.echo(f"matched case: {result.matched_case_id} total={_fmt(result.total_similarity)}")
        click.echo("similarity vector:")
        for e in result.similarity_vector:
            parts = "  ".join(f"{d}={getattr(e, d)}" for d in DIMENSIONS)
            click.echo(f"  {e.case_id}  {parts}  total={_fmt(e.total)}")
        click.echo("docs: " + (", ".join(result.docs) if result.docs else "(none)"))
    if result.decision != RECOMMENDED:
        ctx.exit(NO_RECOMMENDATION)


@cli.command()
@_with_situation
@click.option("--doc", "docs", multiple=True, help="Document id; pair each with an --action.")
@click.option("--action", "actions", multiple=True, type=click.Choice(["click", "save"]))
@click.pass_context
def feedback(ctx, lat, lon, time_, contact, docs, actions):
    """Record clicks/saves made in a situation and revise the case base."""
    if len(docs) != len(actions):
        raise click.UsageError("each --doc needs a matching --action")
    layout = _layout(ctx)
    events = [{"doc_id": d, "action": a} for d, a in zip(docs, actions)]
    with _reported(), _locked(layout):
        engine = open_engine(layout)
        revision = engine.record_feedback(_snapshot(lat, lon, time_, contact), events)
        commit(engine, layout)
    click.echo(f"revision: {revision.outcome}" + (f" {revision.case_id}" if revision.case_id else ""))


@cli.command()
@click.argument("scenario")
@click.option("--keep-going", is_flag=True, help="Report malformed lines and continue.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the JSON report to this file.")
@click.pass_context
def replay(ctx, scenario, keep_going, report_path):
    """Replay a JSON-lines SCENARIO against the project."""
    layout = _layout(ctx)
    with _reported(), _locked(layout):
        engine = open_engine(layout)
        path = layout.resolve_scenario(scenario)
        with path.open(encoding="utf-8") as fh:
            report = replay_scenario(engine, fh, keep_going=keep_going)
        commit(engine, layout)
    text = report.to_json()
    if report_path:
        Path(report_path).write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


@cli.command()
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def inspect(ctx, as_json):
    """List stored cases with their situations and document counts."""
    with _reported():
        engine = open_engine(_layout(ctx))
    rows = [
        {
            "case_id": c.case_id,
            "situation": c.situation.to_dict(),
            "docs": len(c.preference),
            "created_at": c.created_at.isoformat(),
            "last_matched_at": None if c.last_matched_at is None else c.last_matched_at.isoformat(),
        }
        for c in engine.casebase
    ]
    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    click.echo(f"{len(rows)} case(s)")
    for r in rows:
        s = r["situation"]
        click.echo(f"{r['case_id']}  ({s['location']}, {s['time']}, {s['social']})  docs={r['docs']}")


@cli.command()
@click.option("--dim", type=click.Choice(DIMENSIONS), required=True)
@click.option("--a", "a", required=True, help="First concept id.")
@click.option("--b", "b", required=True, help="Second concept id.")
@click.pass_context
def sim(ctx, dim, a, b):
    """Show depths, least common subsumer and similarity of two concepts."""
    with _reported():
        tax = load_taxonomies(_layout(ctx)).for_dimension(dim)
        da, db = tax.depth(a), tax.depth(b)
        common = tax.lcs(a, b)
        dl = tax.depth(common)
    num, den = 2 * dl, da + db
    reduced = Fraction(num, den)
    click.echo(f"depth({a}) = {da}")
    click.echo(f"depth({b}) = {db}")
    click.echo(f"depth({common}) = {dl}")
    click.echo(f"lcs={common} {num}/{den} = {reduced} ≈ {float(reduced):.4f}")


def main():
    cli(prog_name="situcbr")


if __name__ == "__main__":
    main()
