"""Command line interface: analyze a corpus, aggregate rows, inspect levels.

Exit codes: 0 clean, 1 fatal configuration or input error, 2 partial
(some dreams failed; their rows are skipped and the rest of the run is
kept).
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .analysis import (
    RunConfig,
    aggregate_rows,
    analyze_corpus,
    load_corpus,
    read_metrics_csv,
    write_aggregate_csv,
    write_metrics_csv,
    write_metrics_json,
    write_summary_json,
)
from .core import GraphError
from .multilevel import MultilevelGraph


@click.group()
@click.option("-v", "--verbose", is_flag=True, default=False, help="Log rejected dreams too.")
def main(verbose: bool) -> None:
    """Multilevel graph analysis of narrative corpora."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command()
@click.option(
    "--corpus",
    "corpus_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="JSON Lines corpus, one dream record per line.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Run configuration (JSON); defaults are used when omitted.",
)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Output directory for metrics.csv, metrics.json and summary.json.",
)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
@click.option("--seed", type=int, default=None, help="Override the sampling seed.")
@click.option(
    "--hierarchies",
    is_flag=True,
    default=False,
    help="Also write one hierarchy JSON per admitted dream.",
)
def analyze(
    corpus_path: Path,
    config_path: Path | None,
    out_dir: Path,
    jobs: int,
    seed: int | None,
    hierarchies: bool,
) -> None:
    """Build per-dream hierarchies and emit one metric row per level."""
    try:
        cfg = RunConfig.from_json_file(config_path) if config_path else RunConfig.default()
        if seed is not None:
            cfg = cfg.with_seed(seed)
        records = load_corpus(corpus_path)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    result = analyze_corpus(records, cfg, jobs=jobs, want_hierarchies=hierarchies)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(result.rows, out_dir / "metrics.csv")
    write_metrics_json(result.rows, out_dir / "metrics.json")
    write_summary_json(result, cfg, out_dir / "summary.json")
    if hierarchies:
        hier_dir = out_dir / "hierarchies"
        hier_dir.mkdir(exist_ok=True)
        for (dreamer, dream_id), payload in sorted(result.hierarchies.items()):
            (hier_dir / f"{dreamer}__{dream_id}.json").write_text(
                payload + "\n", encoding="utf-8"
            )

    click.echo(
        f"analyzed {result.admitted} dreams "
        f"({len(result.rejected)} rejected, {len(result.failed)} failed); "
        f"{len(result.rows)} rows -> {out_dir / 'metrics.csv'}"
    )
    for item in result.failed:
        click.echo(f"failed {item['dreamer']}/{item['dream_id']}: {item['error']}", err=True)
    sys.exit(result.exit_code)


@main.command()
@click.option(
    "--rows",
    "rows_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Per-dream metrics CSV produced by analyze.",
)
@click.option(
    "--mode",
    type=click.Choice(["per_dreamer", "pooled"]),
    required=True,
    help="Average per (dreamer, level), or pool dreamers with equal weight.",
)
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Aggregate CSV path; counts JSON and figures land next to it.",
)
@click.option(
    "--figures/--no-figures",
    default=True,
    show_default=True,
    help="Render one metric-vs-level chart per column beside the CSV.",
)
def aggregate(rows_path: Path, mode: str, out_path: Path, figures: bool) -> None:
    """Aggregate per-dream rows into the per-entity table."""
    try:
        rows = read_metrics_csv(rows_path)
        agg, counts = aggregate_rows(rows, mode)
    except (OSError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_aggregate_csv(agg, out_path)
    counts_path = out_path.with_suffix(out_path.suffix + ".counts.json")
    import json

    counts_path.write_text(
        json.dumps(counts, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    message = f"wrote {len(agg)} aggregate rows -> {out_path}"
    if figures:
        from .plots import render_metric_figures

        files = render_metric_figures(agg, out_path.parent)
        message += f" (+{len(files)} figures)"
    click.echo(message)


@main.command()
@click.option(
    "--hierarchy",
    "hierarchy_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Hierarchy JSON written by analyze --hierarchies.",
)
@click.option("--level", type=int, required=True, help="Level to display (0 = base).")
@click.option("--node", "node_id", type=int, default=None, help="Focus one node.")
@click.option(
    "--dot",
    "dot_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Also write the level as GraphViz DOT.",
)
def inspect(
    hierarchy_path: Path, level: int, node_id: int | None, dot_path: Path | None
) -> None:
    """Print a level of a stored hierarchy, or one node with its trace."""
    try:
        hierarchy = MultilevelGraph.from_json(hierarchy_path.read_text(encoding="utf-8"))
        graph = hierarchy.level(level)
    except (OSError, ValueError) as exc:  # GraphError is a ValueError
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    if node_id is None:
        click.echo(f"level {level}: {graph.node_count} nodes, {graph.edge_count} edges")
        for node in sorted(graph.supernodes(), key=lambda n: n.id):
            click.echo(f"  [{node.id}] {node.label} weight={node.weight}")
        for edge in sorted(graph.superedges(), key=lambda e: e.pair):
            click.echo(f"  {edge.source} -> {edge.target} weight={edge.weight}")
    else:
        try:
            node = graph.node(node_id)
            trace = hierarchy.trace(level, node_id)
        except GraphError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        click.echo(f"node [{node.id}] {node.label} weight={node.weight} level={level}")
        if node.is_base():
            click.echo("  base-level node (empty decontraction)")
        else:
            click.echo(f"  decontraction: {node.dec.node_count} nodes, {node.dec.edge_count} edges")
            for child in sorted(node.dec.supernodes(), key=lambda n: n.id):
                click.echo(f"    [{child.id}] {child.label} weight={child.weight}")
            for edge in sorted(node.dec.superedges(), key=lambda e: e.pair):
                click.echo(f"    {edge.source} -> {edge.target} weight={edge.weight}")
        base_graph = hierarchy.level(0)
        labels = sorted(base_graph.node(b).label for b in trace)
        click.echo(f"  trace to base ({len(trace)} nodes): {', '.join(labels)}")

    if dot_path is not None:
        dot_path.write_text(graph.to_dot(), encoding="utf-8")
        click.echo(f"wrote {dot_path}")


if __name__ == "__main__":
    main()
