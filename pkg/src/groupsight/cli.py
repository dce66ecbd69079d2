"""Command-line surface: ingest, generate, index, search, chat, eval, doctor, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .errors import GroupsightError
from .jsonio import canonical_json
from .model import ARTIFACT_KINDS
from .workspace import Workspace, open_workspace


def _workspace(ctx: click.Context) -> Workspace:
    return open_workspace(ctx.obj["store"], ctx.obj["config"])


def _parse_kinds(raw: str | None) -> tuple[str, ...]:
    if not raw:
        return ARTIFACT_KINDS
    kinds = tuple(k.strip() for k in raw.split(",") if k.strip())
    unknown = set(kinds) - set(ARTIFACT_KINDS)
    if unknown:
        raise click.BadParameter(f"unknown artifact kinds: {sorted(unknown)}")
    return kinds


@click.group()
@click.option("--store", type=click.Path(path_type=Path), default=Path("groupsight-store"), show_default=True, help="Store root directory.")
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None, help="Config JSON (defaults to <store>/config.json).")
@click.pass_context
def main(ctx: click.Context, store: Path, config_path: Path | None):
    """Discussion analytics: artifacts, retrieval, agent, evaluation."""
    ctx.ensure_object(dict)
    ctx.obj["store"] = store
    ctx.obj["config"] = config_path


@main.command()
@click.argument("transcript_file", type=click.Path(exists=True, path_type=Path))
@click.option("--session", "session_id", required=True)
@click.option("--discussion", "discussion_id", required=True)
@click.option("--title", default="", help="Session title (used when creating the session).")
@click.option("--group-label", default="")
@click.pass_context
def ingest(ctx, transcript_file: Path, session_id: str, discussion_id: str, title: str, group_label: str):
    """Ingest a transcript JSONL file (one utterance object per line)."""
    ws = _workspace(ctx)
    ws.create_session(session_id, title=title)
    try:
        discussion = ws.ingest_transcript_file(
            transcript_file, session_id=session_id, discussion_id=discussion_id, group_label=group_label
        )
    except GroupsightError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"ingested {discussion.discussion_id} ({len(ws.store.read_transcript(discussion_id).utterances)} utterances)")


@main.command()
@click.argument("discussion_id")
@click.pass_context
def generate(ctx, discussion_id: str):
    """Generate concept map, assessment and metrics for a discussion."""
    ws = _workspace(ctx)
    try:
        cmap, assessment, series = ws.generate_artifacts(discussion_id)
    except GroupsightError as exc:
        raise click.ClickException(str(exc))
    click.echo(
        f"generated artifacts for {discussion_id}: "
        f"{len(cmap.nodes)} nodes, {len(cmap.edges)} edges, "
        f"{len(assessment.dimensions)} dimensions, {len(series.values)} metric rows"
    )


@main.group()
def index():
    """Index maintenance."""


@index.command("rebuild")
@click.pass_context
def index_rebuild(ctx):
    """Re-embed every stored artifact from scratch."""
    ws = _workspace(ctx)
    count = ws.rebuild_index()
    click.echo(f"rebuilt index: {count} documents")


@main.command()
@click.argument("query")
@click.option("--kinds", default=None, help="Comma-separated artifact kinds to search.")
@click.option("-n", "top_n", default=10, show_default=True)
@click.pass_context
def search(ctx, query: str, kinds: str | None, top_n: int):
    """Fused semantic search across the allowed collections."""
    from .index import FusionConfig

    ws = _workspace(ctx)
    cfg = FusionConfig(rrf_k=ws.config.rrf_k, top_n=top_n, allowed_kinds=_parse_kinds(kinds))
    hits = ws.index.search_sessions(query, cfg)
    if not hits:
        click.echo("no results")
        return
    for hit in hits:
        click.echo(f"{hit.discussion_id}  score={hit.score:.5f}  kinds={','.join(hit.kinds)}")


@main.command()
@click.argument("query")
@click.option("--kinds", default=None, help="Comma-separated artifact kinds the agent may consult.")
@click.option("--baseline", is_flag=True, help="Transcript-only baseline mode.")
@click.option("--json", "as_json", is_flag=True, help="Print the full trace as JSON.")
@click.pass_context
def chat(ctx, query: str, kinds: str | None, baseline: bool, as_json: bool):
    """Ask the evidence-gathering agent a question."""
    from .agent import trace_to_dict

    ws = _workspace(ctx)
    try:
        trace = ws.chat(query, allowed_kinds=_parse_kinds(kinds), baseline_mode=baseline)
    except GroupsightError as exc:
        raise click.ClickException(str(exc))
    if as_json:
        click.echo(canonical_json(trace_to_dict(trace)), nl=False)
        return
    click.echo(trace.synthesis)
    if trace.citations:
        click.echo("citations: " + ", ".join(f"{d}/{k}" for d, k in trace.citations))
    click.echo(f"[{len(trace.iterations)} iteration(s), stopped: {trace.stopped_reason}]")


@main.group()
def eval():
    """Evaluation harnesses."""


@eval.command("retrieval")
@click.argument("cases_file", type=click.Path(exists=True, path_type=Path))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="Write the JSON report here.")
@click.pass_context
def eval_retrieval(ctx, cases_file: Path, seed: int, out_path: Path | None):
    """Run Recall@5/@10 and MRR@5 over the four artifact configurations."""
    from .retrieval_eval import load_cases, run_retrieval_eval, standard_configs

    ws = _workspace(ctx)
    cases = load_cases(cases_file)
    report = run_retrieval_eval(cases, standard_configs(ws.config.rrf_k, ws.config.top_n), ws.index, seed=seed)
    click.echo(report.to_text_table(), nl=False)
    if out_path:
        out_path.write_text(report.to_json(), encoding="utf-8")
        click.echo(f"report written to {out_path}")


@eval.command("agreement")
@click.argument("ratings_csv", type=click.Path(exists=True, path_type=Path))
@click.option("--iterations", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def eval_agreement(ratings_csv: Path, iterations: int, seed: int):
    """Interval-level agreement (with bootstrap CI) over a ratings CSV."""
    from .stats import RatingMatrix, bootstrap_alpha_ci, krippendorff_alpha_interval

    matrix = RatingMatrix.from_csv(ratings_csv)
    kept, excluded = matrix.pairable()
    try:
        alpha = krippendorff_alpha_interval(matrix)
        ci = bootstrap_alpha_ci(matrix, iterations=iterations, seed=seed)
    except GroupsightError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"units: {len(kept.units)} (excluded: {len(excluded)})  raters: {len(matrix.raters)}")
    click.echo(f"alpha (interval): {alpha:.4f}")
    click.echo(f"95% bootstrap CI: [{ci.low:.4f}, {ci.high:.4f}]  ({iterations} iterations, seed {seed}, skipped {ci.skipped})")


@main.command()
@click.pass_context
def doctor(ctx):
    """Check store and index consistency."""
    ws = _workspace(ctx)
    problems = ws.doctor()
    if not problems:
        click.echo("store is healthy")
        return
    for problem in problems:
        click.echo(f"PROBLEM: {problem}")
    sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8800, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None, help="Serve the dashboard from this directory at /ui.")
@click.pass_context
def serve(ctx, host: str, port: int, ui_dir: Path | None):
    """Run the HTTP API (optionally serving the dashboard at /ui)."""
    import uvicorn

    from .service import create_app

    app = create_app(_workspace(ctx), ui_dir=str(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
