"""Command-line interface: compile plans, serve exercises, analyze logs."""
from __future__ import annotations

import json
from pathlib import Path

import click

from . import analysis as analysis_mod
from .errors import DrillstreamError
from .eventlog import read_log
from .fixtures import fixture_spec, write_fixture
from .model import load_background, load_manifest
from .scheduling import VolumePolicy, compile_plan, load_msel, load_plan, save_plan
from .templates import load_templates


@click.group()
def main():
    """Synthetic social-media stimulus engine for functional exercises."""


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--templates", "templates_path", required=True, type=click.Path(exists=True))
@click.option("--msel", "msel_path", required=True, type=click.Path(exists=True))
@click.option("--background", "background_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--span", type=float, default=None, help="Exercise span in scenario seconds (default: derived from the event list).")
@click.option("--fraction-tolerance", type=float, default=0.01, show_default=True, help="Allowed deviation from the manifest background fraction; negative disables the check.")
@click.option("--keep-ungeotagged", is_flag=True, help="Keep background records without coordinates.")
@click.option("--rewrite", "rewrite_path", type=click.Path(exists=True), default=None, help="Apply string rewrite rules to template bodies and background text before scheduling.")
@click.option("--report", "report_path", type=click.Path(), default=None, help="Also write the compile report as JSON.")
def compile(manifest_path, templates_path, msel_path, background_path, seed, out_path,
            span, fraction_tolerance, keep_ungeotagged, rewrite_path, report_path):
    """Compile manifest + templates + MSEL + background into a timed plan."""
    import dataclasses

    from .errors import EmptyText, Overlength, ParseError
    from .templates import apply_rewrite_rules, load_rewrite_rules, parse_template

    manifest = load_manifest(manifest_path)
    templates = load_templates(templates_path)
    msel = load_msel(msel_path)
    ingest = load_background(background_path, manifest.bbox, keep_ungeotagged=keep_ungeotagged)
    for reject in ingest.rejected:
        click.echo(f"rejected background line {reject.line}: {reject.reason}", err=True)
    background = ingest.messages
    if rewrite_path:
        rules = load_rewrite_rules(rewrite_path)
        try:
            templates = [
                parse_template(
                    apply_rewrite_rules(t.source, rules),
                    category=t.category, visibility=t.visibility, id=t.id,
                    msel_event=t.msel_event, geo_region=t.geo_region,
                    max_variants=t.max_variants,
                )
                for t in templates
            ]
        except ParseError as exc:
            raise click.ClickException(f"rewrite broke a template body: {exc}")
        rewritten = []
        for msg in background:
            new_text = apply_rewrite_rules(msg.text, rules)
            try:
                rewritten.append(dataclasses.replace(msg, text=new_text))
            except (EmptyText, Overlength) as exc:
                click.echo(f"rewrite dropped background message {msg.id}: {exc}", err=True)
        background = rewritten
    tolerance = None if fraction_tolerance is not None and fraction_tolerance < 0 else fraction_tolerance
    try:
        plan, report = compile_plan(
            manifest, templates, msel, background, VolumePolicy(), seed,
            span=span, fraction_tolerance=tolerance,
        )
    except DrillstreamError as exc:
        raise click.ClickException(str(exc))
    save_plan(plan, out_path)
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    click.echo(
        f"plan: {report.total} messages ({report.background_count} background, "
        f"{report.constructed_count} constructed), span {report.span:.0f}s, "
        f"background fraction {report.background_fraction:.4f} -> {out_path}"
    )


@main.command()
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True))
@click.option("--roster", "roster_path", required=True, type=click.Path(exists=True))
@click.option("--compression", type=float, default=1.0, show_default=True, help="Scenario seconds per wall second.")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed for live ghost retweets and injections.")
@click.option("--log", "log_path", type=click.Path(), default="events.jsonl", show_default=True)
def serve(plan_path, roster_path, compression, port, host, seed, log_path):
    """Replay a plan over HTTP/WebSocket and accept live operator posts."""
    import uvicorn

    from .server import ExerciseRuntime, create_app, load_roster

    plan = load_plan(plan_path)
    roster = load_roster(roster_path)
    runtime = ExerciseRuntime(
        plan, roster, compression=compression, seed=seed, log_path=log_path
    )
    app = create_app(runtime)
    click.echo(
        f"serving {len(plan.messages)} scheduled messages at {compression}x "
        f"on {host}:{port}; event log -> {log_path}"
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.group()
def analyze():
    """After-action analysis over an event log."""


def _echo_json(payload):
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


@analyze.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--humans-only", is_flag=True, help="Exclude ghost retweets from the network.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table", show_default=True)
@click.option("--edge-list", "edge_list_path", type=click.Path(), default=None, help="Also write a from/to/weight TSV edge list.")
def network(log_path, humans_only, fmt, edge_list_path):
    """Retweet network: who relayed whom, with weights."""
    entries = read_log(log_path)
    report = analysis_mod.build_retweet_network(entries, humans_only=humans_only)
    if edge_list_path:
        Path(edge_list_path).write_text(
            "\n".join(analysis_mod.edge_list_lines(report)) + "\n", encoding="utf-8"
        )
    if fmt == "json":
        _echo_json(report.to_dict())
        return
    click.echo(f"{'from':<20} {'to':<20} {'weight':>6}")
    for e in report.edges:
        click.echo(f"{e.source:<20} {e.target:<20} {e.weight:>6}")
    if report.self_retweets:
        click.echo(f"self-retweets excluded: {report.self_retweets}")
    if report.dangling:
        click.echo(f"dangling retweet parents skipped: {report.dangling}")


@analyze.command()
@click.option("--log", "log_path", type=click.Path(exists=True), default=None)
@click.option("--plan", "plan_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table", show_default=True)
def composition(log_path, plan_path, fmt):
    """Corpus composition: source classes, categories, visibility split."""
    if (log_path is None) == (plan_path is None):
        raise click.UsageError("give exactly one of --log or --plan")
    if log_path:
        messages = analysis_mod.log_messages(read_log(log_path))
    else:
        messages = analysis_mod.plan_messages(load_plan(plan_path))
    report = analysis_mod.composition_report(messages)
    if fmt == "json":
        _echo_json(report.to_dict())
        return
    click.echo(f"total messages: {report.total}")
    click.echo(f"background fraction: {report.background_fraction:.4f}")
    for src, count in sorted(report.by_source.items()):
        click.echo(f"  {src:<24} {count:>8} ({report.source_fractions[src]:.4f})")
    click.echo(f"{'category':<40} {'high':>6} {'medium':>6} {'low':>6}")
    for name, row in sorted(report.by_category.items()):
        click.echo(f"{name:<40} {row['high']:>6} {row['medium']:>6} {row['low']:>6}")


@analyze.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table", show_default=True)
def engagement(log_path, fmt):
    """Per-account message counts, posting intervals, retweets received."""
    entries = read_log(log_path)
    report = analysis_mod.engagement_report(entries)
    rows = sorted(report.values(), key=lambda s: (-s.message_count, s.handle))
    if fmt == "json":
        _echo_json([s.to_dict() for s in rows])
        return
    click.echo(f"{'handle':<24} {'messages':>8} {'mean interval':>14} {'rts received':>12}")
    for s in rows:
        interval = f"{s.mean_interval_s / 60:.1f} min" if s.mean_interval_s is not None else "-"
        click.echo(f"{s.handle:<24} {s.message_count:>8} {interval:>14} {s.retweets_received:>12}")


@main.command()
@click.option("--scale", type=click.Choice(["desk", "paper_scale"]), default="desk", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=7, show_default=True)
def fixture(scale, out_dir, seed):
    """Generate a ready-to-compile exercise fixture."""
    paths = write_fixture(Path(out_dir), fixture_spec(scale), seed)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


if __name__ == "__main__":
    main()
