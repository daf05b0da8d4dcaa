"""The reltax command line: ingest, canon, filter, build, merge, validate,
infer, stats, overlap, coverage, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import analysis, canonical, decisions as dec, hierarchy as hier, inference, ingest
from .types import RelTaxError


def _load_config(path) -> ingest.TypeConfig:
    return ingest.TypeConfig.load(path) if path else ingest.TypeConfig()


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config with type roots, prefixes, threshold.")
@click.pass_context
def main(ctx, config_path):
    """Build, curate and query a taxonomy of PER/ORG/LOC knowledge-base relations."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["config"] = _load_config(config_path)


@main.command("ingest")
@click.option("--source", type=click.Choice(["wikidata", "dbpedia", "infobox"]), required=True)
@click.option("--input", "inputs", type=click.Path(exists=True), multiple=True, required=True)
@click.option("--type-config", type=click.Path(exists=True), default=None,
              help="Overrides the group-level --config for this run.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.pass_context
def ingest_cmd(ctx, source, inputs, type_config, out_dir):
    """Parse dumps (or the curated infobox TSV) into typed triples, support
    counts and a raw relation list."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if source == "infobox":
        records = []
        for path in inputs:
            records.extend(canonical.load_infobox_tsv(path))
        canonical.save_records(records, out / "relations.jsonl")
        click.echo(f"infobox: {len(records)} relation records -> {out / 'relations.jsonl'}")
        return
    config = ingest.TypeConfig.load(type_config) if type_config else ctx.obj["config"]
    result = ingest.ingest_dump(source, list(inputs), config)
    n = ingest.write_typed_triples(result.triples, out / "typed_triples.tsv")
    result.support.save(out / "support.jsonl")
    records = canonical.records_from_support(result.support)
    canonical.save_records(records, out / "relations.jsonl")
    stats = result.stats
    click.echo(
        f"{source}: {stats.lines} lines, {stats.parsed} parsed, "
        f"{stats.parse_errors} parse errors, {stats.typed} typed statements "
        f"({stats.dropped_untyped} untyped dropped), {n} unique triples"
    )
    for lineno, reason in stats.error_lines:
        click.echo(f"  line {lineno}: {reason}", err=True)


@main.command("canon")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--alias", "alias_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report/--no-report", default=False, help="Print before/after counts per cell.")
def canon_cmd(in_path, alias_path, out_path, report):
    """Normalize names to canonical camel case and merge alias groups."""
    records = canonical.load_records(in_path)
    alias_map = canonical.AliasMap.load_tsv(alias_path) if alias_path else canonical.AliasMap()
    canon = canonical.canonicalize_records(records)
    merged = canonical.apply_alias_map(canon, alias_map)
    canonical.save_records(merged, out_path)
    click.echo(f"{len(records)} records -> {len(merged)} canonical records")
    if report:
        for (source, etype), (b, a) in canonical.canonicalization_report(canon, merged).items():
            click.echo(f"  {source.value:8s} {etype.value:3s}  before={b}  after={a}")


@main.command("filter")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--support", "support_path", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=int, default=100, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def filter_cmd(in_path, support_path, threshold, out_path):
    """Drop relations whose support set is below the threshold."""
    records = canonical.load_records(in_path)
    index = ingest.SupportIndex.load(support_path) if support_path else None
    kept = canonical.filter_by_support(records, index, threshold)
    canonical.save_records(kept, out_path)
    click.echo(f"{len(kept)} of {len(records)} records at threshold {threshold}")


@main.command("build")
@click.option("--relations", "relation_paths", type=click.Path(exists=True), multiple=True,
              required=True, help="Filtered relation list(s).")
@click.option("--canonical", "canonical_paths", type=click.Path(exists=True), multiple=True,
              help="Canonical (pre-filter) lists consulted for parent names.")
@click.option("--decisions", "log_path", type=click.Path(exists=True), default=None)
@click.option("--tag", default="H", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def build_cmd(relation_paths, canonical_paths, log_path, tag, out_path):
    """Replay a curation log over the relation lists into a hierarchy file."""
    filtered = [r for p in relation_paths for r in canonical.load_records(p)]
    canon = [r for p in canonical_paths for r in canonical.load_records(p)]
    base = dec.CurationBase.from_records(filtered, canon, tag=tag)
    log = dec.load_log(log_path) if log_path else []
    try:
        h = dec.replay_decisions(base, log)
    except dec.ReplayError as exc:
        raise click.ClickException(str(exc)) from exc
    h.save(out_path)
    placed = len(h.nodes)
    unplaced = sum(
        1 for name, e in base.pool.items() if e.filtered and name not in h.nodes
    )
    click.echo(f"replayed {len(log)} decisions: {placed} placed, {unplaced} still unplaced")


@main.command("merge")
@click.argument("positional", nargs=-1, type=click.Path(exists=True))
@click.option("--in", "named", type=click.Path(exists=True), multiple=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--conflicts", "conflicts_path", type=click.Path(), default=None)
@click.option("--tag", default="H", show_default=True)
def merge_cmd(positional, named, out_path, conflicts_path, tag):
    """Merge hierarchies into one, eliminating duplicates; disagreements on a
    node's parent are written out as conflicts for curation."""
    paths = list(named) + list(positional)
    if len(paths) < 1:
        raise click.UsageError("need at least one input hierarchy")
    hs = [hier.Hierarchy.load(p) for p in paths]
    merged, conflicts = hier.merge_hierarchies(hs, tag=tag)
    merged.save(out_path)
    if conflicts_path:
        hier.save_conflicts(conflicts, conflicts_path)
    click.echo(
        f"merged {sum(len(h.nodes) for h in hs)} nodes from {len(hs)} hierarchies "
        f"into {len(merged.nodes)}; {len(conflicts)} conflicts"
    )
    violations = merged.validate()
    for violation in violations:
        click.echo(f"  warning: {violation}", err=True)


@main.command("validate")
@click.argument("hierarchy_path", type=click.Path(exists=True))
def validate_cmd(hierarchy_path):
    """Check a hierarchy file against every structural invariant."""
    h = hier.Hierarchy.load(hierarchy_path)
    violations = h.validate()
    if not violations:
        click.echo(f"{hierarchy_path}: valid ({len(h.nodes)} relations)")
        return
    for violation in violations:
        click.echo(str(violation))
    sys.exit(1)


def _read_label_triples(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        cols = {name: i for i, name in enumerate(header)}
        for need in ("head", "relation", "tail"):
            if need not in cols:
                raise click.ClickException(f"{path}: missing column {need!r}")
        derived_col = cols.get("derived")
        for line in fh:
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            yield inference.LabeledTriple(
                parts[cols["head"]],
                parts[cols["relation"]],
                parts[cols["tail"]],
                derived=bool(derived_col is not None and parts[derived_col] == "1"),
            )


@main.command("infer")
@click.option("--triples", "triples_path", type=click.Path(exists=True), required=True)
@click.option("--hierarchy", "hierarchy_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def infer_cmd(triples_path, hierarchy_path, out_path):
    """Taxonomic closure: every triple also holds under its relation's
    ancestors. Output adds a derived column."""
    h = hier.Hierarchy.load(hierarchy_path)
    try:
        closed = inference.infer_closure(_read_label_triples(triples_path), h)
    except RelTaxError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = sorted((t.head, t.relation, t.tail, t.derived) for t in closed)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("head\trelation\ttail\tderived\n")
        for head, relation, tail, derived in rows:
            fh.write(f"{head}\t{relation}\t{tail}\t{'1' if derived else '0'}\n")
    click.echo(f"{len(rows)} triples ({sum(1 for r in rows if r[3])} derived) -> {out_path}")


@main.command("stats")
@click.argument("hierarchy_path", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "tsv"]), default="text")
def stats_cmd(hierarchy_path, fmt):
    """Depth histogram of a hierarchy file."""
    h = hier.Hierarchy.load(hierarchy_path)
    hist = analysis.depth_histogram(h)
    click.echo(analysis.render_histogram(hist, h.tag, fmt), nl=False)


@main.command("buckets")
@click.argument("hierarchy_path", type=click.Path(exists=True))
@click.option("--by-source", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["text", "tsv"]), default="text")
def buckets_cmd(hierarchy_path, by_source, fmt):
    """Relation counts per bucket."""
    h = hier.Hierarchy.load(hierarchy_path)
    dist = analysis.bucket_distribution(h, by_source=by_source)
    click.echo(analysis.render_buckets(dist, fmt), nl=False)


@main.command("overlap")
@click.argument("hierarchy_path", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "tsv"]), default="text")
def overlap_cmd(hierarchy_path, fmt):
    """Source-combination regions over the merged hierarchy."""
    h = hier.Hierarchy.load(hierarchy_path)
    regions = analysis.source_overlap(h)
    click.echo(analysis.render_overlap(regions, fmt), nl=False)


@main.command("coverage")
@click.option("--hierarchy", "hierarchy_path", type=click.Path(exists=True), required=True)
@click.option("--dataset", "datasets", multiple=True, required=True,
              metavar="NAME=TSV", help="Dataset relation list, repeatable.")
@click.option("--mapping", "mapping_path", type=click.Path(exists=True), default=None)
@click.option("--alias", "alias_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "tsv"]), default="text")
def coverage_cmd(hierarchy_path, datasets, mapping_path, alias_path, fmt):
    """How many dataset relations the hierarchy subsumes."""
    h = hier.Hierarchy.load(hierarchy_path)
    parsed = []
    for spec_arg in datasets:
        if "=" not in spec_arg:
            raise click.UsageError(f"--dataset takes NAME=TSV, got {spec_arg!r}")
        name, path = spec_arg.split("=", 1)
        parsed.append((name, analysis.load_dataset_tsv(path)))
    mapping = analysis.load_mapping_tsv(mapping_path) if mapping_path else {}
    alias_map = canonical.AliasMap.load_tsv(alias_path) if alias_path else None
    try:
        report = analysis.coverage_report(parsed, h, mapping, alias_map)
    except RelTaxError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(analysis.render_coverage(report, fmt), nl=False)


@main.command("serve")
@click.option("--relations", "relation_paths", type=click.Path(exists=True), multiple=True)
@click.option("--canonical", "canonical_paths", type=click.Path(exists=True), multiple=True)
@click.option("--hierarchy", "hierarchy_path", type=click.Path(exists=True), default=None)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Decision log (JSONL); created if missing. Without it, mutations are not persisted.")
@click.option("--triples", "triples_path", type=click.Path(exists=True), default=None,
              help="Typed-triples TSV for support previews.")
@click.option("--tag", default="H", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8630, show_default=True)
def serve_cmd(relation_paths, canonical_paths, hierarchy_path, log_path, triples_path, tag, host, port):
    """Run the curation HTTP service (boot = replay of the log)."""
    from .service import CurationService, load_support_samples, serve

    filtered = [r for p in relation_paths for r in canonical.load_records(p)]
    canon = [r for p in canonical_paths for r in canonical.load_records(p)]
    base = dec.CurationBase.from_records(filtered, canon, tag=tag)
    initial = hier.Hierarchy.load(hierarchy_path) if hierarchy_path else None
    log = dec.load_log(log_path) if log_path and Path(log_path).exists() else []
    samples = load_support_samples(triples_path, base) if triples_path else {}
    if not log_path:
        click.echo("warning: no --log given; decisions will not survive restart", err=True)
    service = CurationService(
        base, initial=initial, log_path=log_path, decisions=log, support_samples=samples
    )
    click.echo(f"serving on http://{host}:{port} (tag {service.snapshot.hierarchy.tag})")
    serve(service, host=host, port=port)


if __name__ == "__main__":
    main()
